#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "synthetic.hpp"
#include "xaffine/eval.hpp"
#include "xaffine/image_io.hpp"

using namespace xaffine;
namespace fs = std::filesystem;
using testsupport::make_texture;

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt8 = std::sqrt(8.0);

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "xaffine_eval_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig fast_config() {
    PipelineConfig cfg;
    cfg.max_points_coarse = 500;
    cfg.max_points_fine = 300;
    cfg.grid.n = 1;
    return cfg;
}

}  // namespace

TEST_CASE("load_sequence reads images and homographies") {
    const fs::path dir = fresh_dir("basic");
    save_image(make_texture(80, 60, 1), (dir / "img1.pgm").string());
    save_image(make_texture(80, 60, 2), (dir / "img2.png").string());
    std::ofstream(dir / "H1to2p") << "1 0 0\n0 1 0\n0 0 1\n";
    const Sequence seq = load_sequence(dir.string());
    REQUIRE(seq.images.size() == 2);
    CHECK(seq.images[0].width == 80);
    REQUIRE(seq.homographies.size() == 1);
    CHECK(seq.homographies.at(2) == AffineMatrix::identity());
    CHECK(seq.name == "basic");
}

TEST_CASE("load_sequence without H files leaves homographies empty") {
    const fs::path dir = fresh_dir("no_h");
    save_image(make_texture(64, 64, 1), (dir / "img1.pgm").string());
    save_image(make_texture(64, 64, 2), (dir / "img2.pgm").string());
    const Sequence seq = load_sequence(dir.string());
    CHECK(seq.images.size() == 2);
    CHECK(seq.homographies.empty());
}

TEST_CASE("malformed H file raises an error naming the line") {
    const fs::path dir = fresh_dir("bad_h");
    save_image(make_texture(64, 64, 1), (dir / "img1.pgm").string());
    save_image(make_texture(64, 64, 2), (dir / "img2.pgm").string());
    std::ofstream(dir / "H1to2p") << "1 0 0\n0 oops 0\n0 0 1\n";
    try {
        load_sequence(dir.string());
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("H1to2p") != std::string::npos);
        CHECK(msg.find(":2") != std::string::npos);
    }
}

TEST_CASE("load_sequence rejects empty or missing directories") {
    CHECK_THROWS_AS(load_sequence((fs::temp_directory_path() / "nope_xaffine").string()),
                    EvalError);
    const fs::path dir = fresh_dir("empty");
    CHECK_THROWS_AS(load_sequence(dir.string()), EvalError);
}

TEST_CASE("precision oracle cases") {
    std::vector<Correspondence> exact;
    for (int i = 0; i < 10; ++i)
        exact.push_back({10.0 * i, 5.0 * i, 10.0 * i, 5.0 * i, 0.0});
    CHECK(precision(exact, AffineMatrix::identity(), kSqrt3) == 100.0);

    std::vector<Correspondence> mixed;
    for (int i = 0; i < 100; ++i) {
        Correspondence c{double(i), double(i), double(i), double(i), 0.0};
        if (i >= 90) c.x2 += 10.0;  // push 10 matches outside any sane threshold
        mixed.push_back(c);
    }
    CHECK(precision(mixed, AffineMatrix::identity(), kSqrt3) == 90.0);

    std::vector<Correspondence> displaced;
    for (int i = 0; i < 20; ++i)
        displaced.push_back({double(i), 0.0, double(i) + 2.0, 0.0, 0.0});
    CHECK(precision(displaced, AffineMatrix::identity(), kSqrt3) == 0.0);
    CHECK(precision(displaced, AffineMatrix::identity(), kSqrt8) == 100.0);
}

TEST_CASE("precision applies the projective division") {
    AffineMatrix h;
    h(2, 0) = 0.001;
    std::vector<Correspondence> m;
    const auto [px, py] = map_point_projective(h, 100, 50);
    m.push_back({100, 50, px, py, 0.0});
    CHECK(precision(m, h, kSqrt3) == 100.0);
    m[0].x2 = 100;  // the unprojected location
    m[0].y2 = 50;
    CHECK(precision(m, h, kSqrt3) == 0.0);
}

TEST_CASE("precision is permutation-invariant and monotone in th") {
    std::vector<Correspondence> m;
    for (int i = 0; i < 30; ++i)
        m.push_back({double(i), double(i), double(i) + 0.1 * i, double(i), 0.0});
    const double p3 = precision(m, AffineMatrix::identity(), kSqrt3);
    const double p8 = precision(m, AffineMatrix::identity(), kSqrt8);
    CHECK(p8 >= p3);
    std::reverse(m.begin(), m.end());
    CHECK(precision(m, AffineMatrix::identity(), kSqrt3) == p3);
}

TEST_CASE("precision rejects an empty match list") {
    CHECK_THROWS_AS(precision({}, AffineMatrix::identity(), kSqrt3), EvalError);
}

TEST_CASE("inlier_ratio oracle cases") {
    CHECK(inlier_ratio(100, 80) == 80.0);
    CHECK(inlier_ratio(50, 50) == 100.0);
    CHECK(inlier_ratio(3, 0) == 0.0);
    CHECK_THROWS_AS(inlier_ratio(0, 0), EvalError);
    CHECK_THROWS_AS(inlier_ratio(5, 6), EvalError);
}

TEST_CASE("synth_warp_case identity returns the image and identity H") {
    const GrayImage img = make_texture(96, 96, 3);
    const auto [warped, h] = synth_warp_case(img, AffineMatrix::identity());
    CHECK(h == AffineMatrix::identity());
    REQUIRE(warped.width == img.width);
    REQUIRE(warped.height == img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            CHECK(warped.at(x, y) == doctest::Approx(img.at(x, y)).epsilon(1e-5));
}

TEST_CASE("synth_warp_case closure: exact correspondences score 100%") {
    const GrayImage img = make_texture(128, 128, 5);
    AffineParams p;
    p.tilt = 2.0;
    p.phi = 36.0 * M_PI / 180.0;
    const auto [warped, h] = synth_warp_case(img, affine_from_params(p));
    std::vector<Correspondence> exact;
    for (double x = 10; x < 120; x += 13)
        for (double y = 10; y < 120; y += 17) {
            const auto [wx, wy] = map_point_projective(h, x, y);
            exact.push_back({x, y, wx, wy, 0.0});
        }
    CHECK(precision(exact, h, kSqrt3) == 100.0);
    // mapped corners stay inside the produced frame
    const double cx[4] = {0, 127, 0, 127};
    const double cy[4] = {0, 0, 127, 127};
    for (int i = 0; i < 4; ++i) {
        const auto [wx, wy] = map_point_projective(h, cx[i], cy[i]);
        CHECK(wx >= -0.5);
        CHECK(wx <= warped.width - 0.5);
        CHECK(wy >= -0.5);
        CHECK(wy <= warped.height - 0.5);
    }
}

TEST_CASE("synth_warp_case rejects a degenerate map") {
    AffineMatrix bad;
    bad(0, 0) = 1e-9;
    bad(1, 1) = 1e-9;
    CHECK_THROWS_AS(synth_warp_case(make_texture(64, 64), bad), EvalError);
}

TEST_CASE("method names round-trip") {
    for (Method m : {Method::Proposed, Method::BaselineAsift, Method::FineOnly})
        CHECK(method_from_name(method_name(m)) == m);
    CHECK(!method_from_name("nonsense").has_value());
}

TEST_CASE("run_benchmark on an identity pair scores 100% for every method") {
    Sequence seq;
    seq.name = "self";
    seq.images.push_back(make_texture(192, 192, 7));
    seq.images.push_back(seq.images[0]);
    seq.homographies[2] = AffineMatrix::identity();
    const EvalReport report = run_benchmark(
        seq, {Method::Proposed, Method::BaselineAsift, Method::FineOnly}, fast_config());
    REQUIRE(report.rows.size() == 3);
    for (const auto& row : report.rows) {
        INFO(row.method << " " << row.error);
        CHECK(row.error.empty());
        CHECK(row.points > 10);
        CHECK(row.time_ms > 0);
        REQUIRE(row.precision_pct.has_value());
        // simulated-view matches carry extra localization error from the
        // compression warps, so the baseline gets a looser bar
        const bool baseline = row.method == "baseline-asift";
        CHECK(*row.precision_pct >= (baseline ? 85.0 : 95.0));
        if (row.method == "fine-only") CHECK(*row.precision_pct == 100.0);
        REQUIRE(row.inlier_ratio_pct.has_value());
        CHECK(*row.inlier_ratio_pct >= (baseline ? 60.0 : 95.0));
    }
}

TEST_CASE("run_benchmark records per-pair failures as rows") {
    Sequence seq;
    seq.name = "mixed";
    seq.images.push_back(make_texture(160, 160, 9));
    seq.images.push_back(GrayImage(160, 160, 100.f));  // featureless: matching must fail
    const EvalReport report = run_benchmark(seq, {Method::FineOnly}, fast_config());
    REQUIRE(report.rows.size() == 1);
    CHECK(!report.rows[0].error.empty());
    CHECK(!report.rows[0].precision_pct.has_value());
}

TEST_CASE("pairs without ground truth report inlier ratio only") {
    Sequence seq;
    seq.name = "no_gt";
    seq.images.push_back(make_texture(160, 160, 11));
    seq.images.push_back(seq.images[0]);
    const EvalReport report = run_benchmark(seq, {Method::FineOnly}, fast_config());
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].error.empty());
    CHECK(!report.rows[0].precision_pct.has_value());
    CHECK(report.rows[0].inlier_ratio_pct.has_value());
}

TEST_CASE("reports serialize to CSV and JSON") {
    EvalReport report;
    EvalRow row;
    row.sequence = "s";
    row.pair = "1-2";
    row.method = "proposed";
    row.points = 42;
    row.precision_pct = 93.5;
    row.inlier_ratio_pct = 88.25;
    row.time_ms = 1234.5;
    report.rows.push_back(row);
    EvalRow failed;
    failed.sequence = "s";
    failed.pair = "1-3";
    failed.method = "proposed";
    failed.error = "boom";
    report.rows.push_back(failed);

    const std::string csv = report_to_csv(report);
    CHECK(csv.find("sequence,pair,method,points,precision_pct,inlier_ratio_pct,time_ms,error") !=
          std::string::npos);
    CHECK(csv.find("s,1-2,proposed,42,93.50,88.25") != std::string::npos);
    CHECK(csv.find("boom") != std::string::npos);

    const nlohmann::json j = report_to_json(report);
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j["rows"][0]["points"] == 42);
    CHECK(j["rows"][0]["precision_pct"] == doctest::Approx(93.5));
    CHECK(!j["rows"][0].contains("precision_pct_invalid"));
    CHECK(!j["rows"][1].contains("precision_pct"));
    CHECK(j["rows"][1]["error"] == "boom");
}

TEST_CASE("end-to-end synthetic case reaches 90% precision at sqrt3") {
    const GrayImage img = make_texture(256, 256, 13);
    AffineParams p;
    p.tilt = 2.0;
    p.phi = 0.4;
    const auto [warped, h_true] = synth_warp_case(img, invert(affine_from_params(p)));
    PipelineConfig cfg;
    cfg.max_points_coarse = 600;
    cfg.max_points_fine = 500;
    const MatchResult r = match_images(img, warped, cfg);
    const auto final = r.final_matches(true);
    REQUIRE(final.size() >= 20);
    CHECK(precision(final, h_true, kSqrt3) >= 90.0);
}
