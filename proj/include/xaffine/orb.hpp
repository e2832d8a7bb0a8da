#pragma once

#include <utility>
#include <vector>

#include "xaffine/features.hpp"

namespace xaffine {

/// Segment-test corners over an 8-level pyramid (ratio 1.2), ranked by Harris
/// response, with intensity-centroid orientations. Returns at most max_points
/// keypoints in level-0 coordinates, sorted by descending response with (y, x)
/// tie-break. Images smaller than 32x32 yield an empty list.
std::vector<Keypoint> detect_oriented_corners(const GrayImage& img, int max_points);

/// 256 smoothed-intensity comparisons on a 31x31 patch steered by the keypoint
/// orientation. Keypoints closer than 20 px to a border are dropped; the
/// surviving keypoints are returned alongside their descriptors.
std::pair<std::vector<Keypoint>, std::vector<BinaryDescriptor>> describe_binary(
    const GrayImage& img, const std::vector<Keypoint>& kps);

/// Ratio-test brute-force matcher on Hamming distance. A missing second
/// neighbor counts as distance 256; equal distances resolve to the lower B
/// index. Output is sorted by idx_a.
std::vector<MatchPair> match_hamming(const std::vector<BinaryDescriptor>& desc_a,
                                     const std::vector<BinaryDescriptor>& desc_b,
                                     double ratio);

}  // namespace xaffine
