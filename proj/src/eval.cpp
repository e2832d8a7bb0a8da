#include "xaffine/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xaffine/image_io.hpp"
#include "xaffine/warp.hpp"

namespace xaffine {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> find_image_file(const std::string& dir, int index) {
    for (const char* ext : {".png", ".pgm", ".ppm", ".pnm"}) {
        const fs::path p = fs::path(dir) / ("img" + std::to_string(index) + ext);
        if (fs::exists(p)) return p.string();
    }
    return std::nullopt;
}

AffineMatrix parse_homography_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open homography file: " + path);
    AffineMatrix h;
    int line_no = 1;
    std::string line;
    int got = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double v;
        while (ls >> v) {
            if (got >= 9)
                throw EvalError(path + ":" + std::to_string(line_no) + ": more than 9 values");
            h.m[got++] = v;
        }
        if (!ls.eof()) {
            std::string junk;
            ls.clear();
            ls >> junk;
            if (!junk.empty())
                throw EvalError(path + ":" + std::to_string(line_no) + ": malformed value '" +
                                junk + "'");
        }
        ++line_no;
    }
    if (got != 9)
        throw EvalError(path + ":" + std::to_string(line_no) + ": expected 9 values, got " +
                        std::to_string(got));
    return h;
}

}  // namespace

Sequence load_sequence(const std::string& dir) {
    if (!fs::is_directory(dir)) throw EvalError("not a directory: " + dir);
    Sequence seq;
    seq.name = fs::path(dir).filename().string();
    if (seq.name.empty()) seq.name = fs::path(dir).parent_path().filename().string();
    for (int i = 1;; ++i) {
        const auto path = find_image_file(dir, i);
        if (!path) break;
        seq.images.push_back(load_image(*path));
    }
    if (seq.images.empty()) throw EvalError("no img1..imgK files in " + dir);
    for (int x = 2; x <= static_cast<int>(seq.images.size()); ++x) {
        const fs::path p = fs::path(dir) / ("H1to" + std::to_string(x) + "p");
        if (fs::exists(p)) {
            AffineMatrix h = parse_homography_file(p.string());
            invert(h);  // ground-truth matrices must be invertible
            seq.homographies[x] = h;
        }
    }
    return seq;
}

double precision(const std::vector<Correspondence>& matches, const AffineMatrix& h_true,
                 double th) {
    if (matches.empty()) throw EvalError("undefined precision: zero matches");
    int correct = 0;
    for (const auto& m : matches) {
        const auto [px, py] = map_point_projective(h_true, m.x1, m.y1);
        if (std::hypot(px - m.x2, py - m.y2) <= th) ++correct;
    }
    return 100.0 * correct / static_cast<double>(matches.size());
}

double inlier_ratio(int pt_num, int in_num) {
    if (pt_num < 1) throw EvalError("inlier ratio undefined for zero matches");
    if (in_num < 0 || in_num > pt_num) throw EvalError("inlier count out of range");
    return 100.0 * in_num / static_cast<double>(pt_num);
}

std::pair<GrayImage, AffineMatrix> synth_warp_case(const GrayImage& img,
                                                   const AffineMatrix& h, uint64_t /*seed*/) {
    // framing in the half-pixel-center convention, as the warp module does
    const AffineMatrix adj =
        AffineMatrix::translation(-0.5, -0.5) * h * AffineMatrix::translation(0.5, 0.5);
    const double cx[4] = {0.0, double(img.width - 1), 0.0, double(img.width - 1)};
    const double cy[4] = {0.0, 0.0, double(img.height - 1), double(img.height - 1)};
    double minx = 1e30, miny = 1e30, maxx = -1e30, maxy = -1e30;
    for (int i = 0; i < 4; ++i) {
        const double w = adj(2, 0) * cx[i] + adj(2, 1) * cy[i] + adj(2, 2);
        if (std::abs(w) < 1e-9) throw EvalError("degenerate homography for synthetic warp");
        const auto [x, y] = map_point_projective(adj, cx[i], cy[i]);
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
    }
    if (maxx - minx > 20000 || maxy - miny > 20000)
        throw EvalError("degenerate homography: unbounded warp target");
    const double tx = -std::floor(minx + 1e-9), ty = -std::floor(miny + 1e-9);
    const int out_w = static_cast<int>(std::ceil(maxx - 1e-9) + tx) + 1;
    const int out_h = static_cast<int>(std::ceil(maxy - 1e-9) + ty) + 1;
    const AffineMatrix composed = AffineMatrix::translation(tx, ty) * adj;
    AffineMatrix back;
    try {
        back = invert(composed);
    } catch (const std::exception&) {
        throw EvalError("degenerate homography: not invertible");
    }
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const auto [sx, sy] = map_point_projective(back, x, y);
            if (sx < 0.0 || sx > img.width - 1.0 || sy < 0.0 || sy > img.height - 1.0)
                continue;
            out.at(x, y) =
                static_cast<float>(std::clamp(sample_lanczos(img, sx, sy, 4), 0.0, 255.0));
        }
    }
    return {std::move(out), composed};
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Proposed: return "proposed";
        case Method::BaselineAsift: return "baseline-asift";
        case Method::FineOnly: return "fine-only";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "proposed") return Method::Proposed;
    if (name == "baseline-asift") return Method::BaselineAsift;
    if (name == "fine-only") return Method::FineOnly;
    return std::nullopt;
}

EvalReport run_benchmark(const Sequence& seq, const std::vector<Method>& methods,
                         const PipelineConfig& cfg, const BenchmarkOptions& opts) {
    EvalReport report;
    for (int x = 2; x <= static_cast<int>(seq.images.size()); ++x) {
        for (Method method : methods) {
            EvalRow row;
            row.sequence = seq.name;
            row.pair = "1-" + std::to_string(x);
            row.method = method_name(method);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                MatchResult r;
                switch (method) {
                    case Method::Proposed:
                        r = match_images(seq.images[0], seq.images[x - 1], cfg);
                        break;
                    case Method::BaselineAsift:
                        r = asift_baseline(seq.images[0], seq.images[x - 1], cfg);
                        break;
                    case Method::FineOnly:
                        r = fine_only_match(seq.images[0], seq.images[x - 1], cfg);
                        break;
                }
                row.time_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
                const auto final_matches = r.final_matches(cfg.final_ransac_filter);
                row.points = static_cast<int>(final_matches.size());
                if (!r.matches.empty())
                    row.inlier_ratio_pct = inlier_ratio(static_cast<int>(r.matches.size()),
                                                        static_cast<int>(r.inliers.size()));
                const auto it = seq.homographies.find(x);
                if (it != seq.homographies.end() && !final_matches.empty())
                    row.precision_pct = precision(final_matches, it->second, opts.th);
            } catch (const std::exception& e) {
                row.time_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
                row.error = e.what();
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "sequence,pair,method,points,precision_pct,inlier_ratio_pct,time_ms,error\n";
    out.setf(std::ios::fixed);
    for (const auto& r : report.rows) {
        out << r.sequence << ',' << r.pair << ',' << r.method << ',' << r.points << ',';
        out.precision(2);
        if (r.precision_pct) out << *r.precision_pct;
        out << ',';
        if (r.inlier_ratio_pct) out << *r.inlier_ratio_pct;
        out << ',';
        out << r.time_ms << ',' << r.error << '\n';
    }
    return out.str();
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json j = {{"sequence", r.sequence}, {"pair", r.pair},
                            {"method", r.method},    {"points", r.points},
                            {"time_ms", r.time_ms},  {"error", r.error}};
        if (r.precision_pct) j["precision_pct"] = *r.precision_pct;
        if (r.inlier_ratio_pct) j["inlier_ratio_pct"] = *r.inlier_ratio_pct;
        rows.push_back(std::move(j));
    }
    return nlohmann::json{{"rows", rows}};
}

}  // namespace xaffine
