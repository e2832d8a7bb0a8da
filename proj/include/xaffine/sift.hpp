#pragma once

#include <utility>
#include <vector>

#include "xaffine/features.hpp"

namespace xaffine {

/// Difference-of-Gaussians extrema over a scale-space pyramid (3 scales per
/// octave, base sigma 1.6, initial 2x upsample) with sub-pixel refinement,
/// contrast threshold 0.03 and edge-ratio threshold 10. Orientation peaks at
/// >= 80% of the histogram maximum spawn duplicate keypoints. Returns at most
/// max_points keypoints sorted by descending |response| with (y, x) tie-break.
/// Images smaller than 64x64 yield an empty list.
std::vector<Keypoint> detect_dog_keypoints(const GrayImage& img, int max_points);

/// 4x4 x 8-bin gradient histograms over a scale-proportional oriented patch
/// with trilinear interpolation. Keypoints whose patch leaves the image are
/// dropped; survivors are returned alongside their descriptors, each with
/// L2 norm 512.
std::pair<std::vector<Keypoint>, std::vector<GradientDescriptor>> describe_gradient(
    const GrayImage& img, const std::vector<Keypoint>& kps);

/// Ratio-test brute-force matcher on Euclidean distance. A missing second
/// neighbor counts as distance 1024; equal distances resolve to the lower B
/// index. Output is sorted by idx_a.
std::vector<MatchPair> match_ratio(const std::vector<GradientDescriptor>& desc_a,
                                   const std::vector<GradientDescriptor>& desc_b,
                                   double ratio = 0.75);

}  // namespace xaffine
