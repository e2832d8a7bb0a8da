#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "synthetic.hpp"
#include "xaffine/sift.hpp"
#include "xaffine/warp.hpp"

using namespace xaffine;
using testsupport::make_blob;
using testsupport::make_texture;

namespace {

std::vector<GradientDescriptor> random_gradient_descriptors(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> uval(0.f, 90.f);
    std::vector<GradientDescriptor> out(n);
    for (auto& d : out)
        for (auto& v : d.values) v = uval(rng);
    return out;
}

double euclid(const GradientDescriptor& a, const GradientDescriptor& b) {
    double acc = 0;
    for (int k = 0; k < 128; ++k) {
        const double d = double(a.values[k]) - b.values[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Independent double-loop matcher mirroring the documented rules.
std::vector<MatchPair> oracle_match(const std::vector<GradientDescriptor>& da,
                                    const std::vector<GradientDescriptor>& db, double ratio) {
    std::vector<MatchPair> out;
    for (size_t i = 0; i < da.size(); ++i) {
        double best = 1e30, second = 1e30;
        int best_j = -1;
        for (size_t j = 0; j < db.size(); ++j) {
            const double d = euclid(da[i], db[j]);
            if (d < best) {
                second = best;
                best = d;
                best_j = static_cast<int>(j);
            } else if (d < second) {
                second = d;
            }
        }
        if (second >= 1e30) second = 1024.0;
        if (best_j >= 0 && best < ratio * second)
            out.push_back({static_cast<int>(i), best_j, static_cast<float>(best)});
    }
    return out;
}

}  // namespace

TEST_CASE("constant and too-small images yield no keypoints") {
    CHECK(detect_dog_keypoints(GrayImage(128, 128, 90.f), 1000).empty());
    CHECK(detect_dog_keypoints(make_texture(63, 63), 1000).empty());
}

TEST_CASE("a Gaussian blob is localized at its center with a matching scale") {
    const GrayImage img = make_blob(256, 256, 100, 100, 4.0);
    const auto kps = detect_dog_keypoints(img, 100);
    REQUIRE(!kps.empty());
    bool found = false;
    for (const auto& kp : kps)
        if (std::hypot(kp.x - 100, kp.y - 100) <= 2.0 && kp.octave_scale > 2.0 &&
            kp.octave_scale < 8.0)
            found = true;
    CHECK(found);
}

TEST_CASE("keypoints are capped and response-sorted with (y, x) tie-break") {
    const GrayImage img = make_texture(256, 256, 17);
    const auto all = detect_dog_keypoints(img, 100000);
    REQUIRE(all.size() > 100);
    for (size_t i = 1; i < all.size(); ++i) {
        CHECK(all[i - 1].response >= all[i].response);
        if (all[i - 1].response == all[i].response) {
            const bool ordered = all[i - 1].y < all[i].y ||
                                 (all[i - 1].y == all[i].y && all[i - 1].x <= all[i].x);
            CHECK(ordered);
        }
    }
    const auto capped = detect_dog_keypoints(img, 64);
    REQUIRE(capped.size() == 64);
    for (size_t i = 0; i < capped.size(); ++i) {
        CHECK(capped[i].x == all[i].x);
        CHECK(capped[i].y == all[i].y);
    }
}

TEST_CASE("detection is deterministic") {
    const GrayImage img = make_texture(200, 200, 55);
    const auto k1 = detect_dog_keypoints(img, 500);
    const auto k2 = detect_dog_keypoints(img, 500);
    REQUIRE(k1.size() == k2.size());
    for (size_t i = 0; i < k1.size(); ++i) {
        CHECK(k1[i].x == k2[i].x);
        CHECK(k1[i].y == k2[i].y);
        CHECK(k1[i].octave_scale == k2[i].octave_scale);
        CHECK(k1[i].orientation == k2[i].orientation);
    }
}

TEST_CASE("keypoints repeat under 2x upsampling") {
    const GrayImage small = make_texture(128, 128, 23);
    const GrayImage big = resize_bilinear(small, 256, 256);
    // measure repeatability over the strongest responses; upsampling smooths
    // away the faintest fine-scale extrema by construction
    const auto ks = detect_dog_keypoints(small, 100);
    const auto kb = detect_dog_keypoints(big, 1500);
    REQUIRE(ks.size() > 40);
    int found = 0;
    for (const auto& kp : ks) {
        for (const auto& other : kb)
            if (std::hypot(other.x - 2 * kp.x, other.y - 2 * kp.y) <= 5.0 &&
                other.octave_scale > kp.octave_scale &&
                other.octave_scale < 4.0 * kp.octave_scale) {
                ++found;
                break;
            }
    }
    CHECK(found >= static_cast<int>(ks.size()) * 6 / 10);
}

TEST_CASE("descriptors have L2 norm 512 and are deterministic") {
    const GrayImage img = make_texture(160, 160, 29);
    const auto kps = detect_dog_keypoints(img, 300);
    const auto [k1, d1] = describe_gradient(img, kps);
    const auto [k2, d2] = describe_gradient(img, kps);
    REQUIRE(!d1.empty());
    REQUIRE(d1.size() == d2.size());
    for (size_t i = 0; i < d1.size(); ++i) {
        CHECK(d1[i].values == d2[i].values);
        double norm = 0;
        for (float v : d1[i].values) {
            CHECK(v >= 0.f);
            norm += double(v) * v;
        }
        CHECK(std::sqrt(norm) == doctest::Approx(512.0).epsilon(1e-5));
    }
}

TEST_CASE("descriptors are invariant to intensity gain") {
    const GrayImage img = make_texture(160, 160, 31);
    GrayImage dimmed = img;
    for (auto& v : dimmed.data) v *= 0.5f;
    const auto kps = detect_dog_keypoints(img, 150);
    const auto [k1, d1] = describe_gradient(img, kps);
    const auto [k2, d2] = describe_gradient(dimmed, kps);
    REQUIRE(!d1.empty());
    REQUIRE(d1.size() == d2.size());
    for (size_t i = 0; i < d1.size(); ++i)
        for (int k = 0; k < 128; ++k)
            CHECK(d1[i].values[k] == doctest::Approx(d2[i].values[k]).epsilon(1e-3));
}

TEST_CASE("descriptors stay distinctive under a 45-degree rotation") {
    const GrayImage img = make_texture(256, 256, 41);
    const double angle = M_PI / 4;
    const WarpResult rot = warp_lanczos(img, AffineMatrix::rotation(angle), 4);
    auto kps = detect_dog_keypoints(img, 150);
    const auto [k1, d1] = describe_gradient(img, kps);
    REQUIRE(d1.size() > 40);

    std::vector<Keypoint> mapped;
    for (const auto& kp : k1) {
        auto [rx, ry] = map_point(rot.forward, kp.x, kp.y);
        Keypoint moved = kp;
        moved.x = static_cast<float>(rx);
        moved.y = static_cast<float>(ry);
        // gradient orientations use a y-up frame, so the image rotation by
        // R(angle) shifts them by -angle
        moved.orientation = static_cast<float>(kp.orientation - angle);
        mapped.push_back(moved);
    }
    const auto [k2, d2] = describe_gradient(rot.image, mapped);
    REQUIRE(d2.size() > 30);
    int good = 0, total = 0;
    size_t cursor = 0;
    for (size_t j = 0; j < k2.size(); ++j) {
        while (cursor < mapped.size() &&
               (mapped[cursor].x != k2[j].x || mapped[cursor].y != k2[j].y))
            ++cursor;
        REQUIRE(cursor < mapped.size());
        double self = 0, nearest_other = 1e30;
        for (size_t i = 0; i < d1.size(); ++i) {
            const double d = euclid(d2[j], d1[i]);
            if (i == cursor)
                self = d;
            else
                nearest_other = std::min(nearest_other, d);
        }
        ++total;
        if (self < 0.25 * nearest_other) ++good;
        ++cursor;
    }
    CHECK(good >= total * 7 / 10);
}

TEST_CASE("self-match of distinct descriptors is the identity pairing") {
    const auto descs = random_gradient_descriptors(50, 7);
    const auto matches = match_ratio(descs, descs, 0.75);
    REQUIRE(matches.size() == descs.size());
    for (size_t i = 0; i < matches.size(); ++i) {
        CHECK(matches[i].idx_a == static_cast<int>(i));
        CHECK(matches[i].idx_b == static_cast<int>(i));
        CHECK(matches[i].distance == 0.f);
    }
}

TEST_CASE("single candidate uses the 1024 degenerate second distance") {
    std::vector<GradientDescriptor> a(1), b(1);
    // distance 700 < 0.75 * 1024 -> kept
    b[0].values[0] = 700.f;
    CHECK(match_ratio(a, b, 0.75).size() == 1);
    // distance 800 >= 0.75 * 1024 = 768 -> rejected
    b[0].values[0] = 800.f;
    CHECK(match_ratio(a, b, 0.75).empty());
}

TEST_CASE("matcher equals the exhaustive oracle on 500x500 random sets") {
    const auto da = random_gradient_descriptors(500, 61);
    const auto db = random_gradient_descriptors(500, 62);
    for (double ratio : {0.75, 0.9, 1.0}) {
        const auto got = match_ratio(da, db, ratio);
        const auto want = oracle_match(da, db, ratio);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].idx_a == want[i].idx_a);
            CHECK(got[i].idx_b == want[i].idx_b);
            CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-4));
        }
    }
}

TEST_CASE("ratio shrinkage yields nested match sets") {
    const auto da = random_gradient_descriptors(200, 71);
    const auto db = random_gradient_descriptors(200, 72);
    std::vector<MatchPair> prev;
    for (double ratio : {1.0, 0.85, 0.7, 0.5}) {
        const auto cur = match_ratio(da, db, ratio);
        if (!prev.empty()) {
            CHECK(cur.size() <= prev.size());
            for (const auto& m : cur) {
                bool present = false;
                for (const auto& p : prev)
                    if (p.idx_a == m.idx_a && p.idx_b == m.idx_b) present = true;
                CHECK(present);
            }
        }
        prev = cur;
    }
}

TEST_CASE("empty inputs yield empty results") {
    CHECK(match_ratio({}, random_gradient_descriptors(3, 1), 0.75).empty());
    CHECK(match_ratio(random_gradient_descriptors(3, 1), {}, 0.75).empty());
}
