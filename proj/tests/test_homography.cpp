#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "xaffine/homography.hpp"

using namespace xaffine;

namespace {

AffineMatrix sample_homography() {
    AffineMatrix h;
    h(0, 0) = 1.2;
    h(0, 1) = 0.1;
    h(0, 2) = 30;
    h(1, 0) = -0.15;
    h(1, 1) = 0.9;
    h(1, 2) = -12;
    h(2, 0) = 4e-4;
    h(2, 1) = -2e-4;
    h(2, 2) = 1;
    return h;
}

PointPair project(const AffineMatrix& h, double x, double y) {
    auto [px, py] = map_point_projective(h, x, y);
    return {x, y, px, py};
}

std::vector<PointPair> exact_correspondences(const AffineMatrix& h, int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(10.0, 500.0);
    std::vector<PointPair> pts;
    for (int i = 0; i < n; ++i) pts.push_back(project(h, u(rng), u(rng)));
    return pts;
}

void check_equal_normalized(const AffineMatrix& a, const AffineMatrix& b, double tol) {
    REQUIRE(a(2, 2) != 0.0);
    REQUIRE(b(2, 2) != 0.0);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(a.m[i] / a.m[8] - b.m[i] / b.m[8]) < tol);
}

}  // namespace

TEST_CASE("DLT recovers a homography from 4 exact points") {
    const AffineMatrix h = sample_homography();
    std::vector<PointPair> pts = {project(h, 10, 10), project(h, 400, 20), project(h, 30, 380),
                                  project(h, 420, 410)};
    check_equal_normalized(fit_homography_dlt(pts), h, 1e-6);
}

TEST_CASE("DLT recovers a homography from many exact points") {
    const AffineMatrix h = sample_homography();
    check_equal_normalized(fit_homography_dlt(exact_correspondences(h, 40, 5)), h, 1e-6);
}

TEST_CASE("DLT rejects fewer than 4 points") {
    CHECK_THROWS_AS(fit_homography_dlt({{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}}),
                    HomographyError);
}

TEST_CASE("RANSAC recovers the exact model from 8 noiseless correspondences") {
    const AffineMatrix h = sample_homography();
    const auto pts = exact_correspondences(h, 8, 11);
    const RansacResult r = estimate_homography_ransac(pts);
    check_equal_normalized(r.homography, h, 1e-6);
    CHECK(r.inliers.size() == 8);
}

TEST_CASE("RANSAC rejects gross outliers and keeps exactly the clean 8") {
    const AffineMatrix h = sample_homography();
    auto pts = exact_correspondences(h, 8, 13);
    pts.push_back({50, 60, 900, 900});
    pts.push_back({100, 200, -400, 777});
    pts.push_back({321, 45, 0, 0});
    pts.push_back({222, 333, 1234, -55});
    const RansacResult r = estimate_homography_ransac(pts);
    check_equal_normalized(r.homography, h, 1e-6);
    REQUIRE(r.inliers.size() == 8);
    for (size_t i = 0; i < 8; ++i) CHECK(r.inliers[i] == static_cast<int>(i));
}

TEST_CASE("RANSAC minimal case: 4 exact correspondences") {
    const AffineMatrix h = sample_homography();
    const auto pts = exact_correspondences(h, 4, 17);
    const RansacResult r = estimate_homography_ransac(pts);
    check_equal_normalized(r.homography, h, 1e-5);
    CHECK(r.inliers.size() == 4);
}

TEST_CASE("RANSAC errors") {
    const AffineMatrix h = sample_homography();
    CHECK_THROWS_AS(estimate_homography_ransac(exact_correspondences(h, 3, 19)),
                    HomographyError);

    // collinear data: every minimal sample is degenerate, so no model exists
    std::vector<PointPair> junk;
    for (int i = 0; i < 12; ++i) junk.push_back({double(i), 2.0 * i, double(7 * i), double(i)});
    CHECK_THROWS(estimate_homography_ransac(junk));
}

TEST_CASE("RANSAC is seed-deterministic") {
    const AffineMatrix h = sample_homography();
    auto pts = exact_correspondences(h, 30, 29);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> noise(-800.0, 800.0);
    for (int i = 0; i < 10; ++i) pts.push_back({noise(rng) + 900, noise(rng) + 900,
                                                noise(rng), noise(rng)});
    RansacConfig cfg;
    cfg.seed = 123;
    const RansacResult r1 = estimate_homography_ransac(pts, cfg);
    const RansacResult r2 = estimate_homography_ransac(pts, cfg);
    CHECK(r1.homography.m == r2.homography.m);
    CHECK(r1.inliers == r2.inliers);
    check_equal_normalized(r1.homography, h, 1e-5);
}

TEST_CASE("RANSAC tolerates moderate noise and finds the main consensus") {
    const AffineMatrix h = sample_homography();
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(10.0, 500.0);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    std::vector<PointPair> pts;
    for (int i = 0; i < 60; ++i) {
        PointPair p = project(h, u(rng), u(rng));
        p.x2 += jitter(rng);
        p.y2 += jitter(rng);
        pts.push_back(p);
    }
    for (int i = 0; i < 20; ++i) pts.push_back({u(rng), u(rng), u(rng) + 600, u(rng) + 600});
    const RansacResult r = estimate_homography_ransac(pts);
    CHECK(r.inliers.size() >= 55);
    for (int idx : r.inliers) CHECK(idx < 60);
}
