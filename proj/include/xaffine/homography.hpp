#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "xaffine/geometry.hpp"

namespace xaffine {

struct HomographyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PointPair {
    double x1, y1;  // first image
    double x2, y2;  // second image
};

struct RansacConfig {
    double threshold = 3.0;  // symmetric-transfer inlier threshold, pixels
    int max_iters = 2000;
    double confidence = 0.995;
    uint64_t seed = 42;
};

/// Normalized-DLT homography from >= 4 correspondences. The result has
/// h22 = 1 when that entry is nonzero.
AffineMatrix fit_homography_dlt(const std::vector<PointPair>& pts);

struct RansacResult {
    AffineMatrix homography;
    std::vector<int> inliers;
};

/// 4-point RANSAC with collinearity-degeneracy check, adaptive iteration count
/// and a final all-inlier DLT refit. Throws on < 4 points or no consensus.
RansacResult estimate_homography_ransac(const std::vector<PointPair>& pts,
                                        const RansacConfig& cfg = {});

}  // namespace xaffine
