#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "xaffine/features.hpp"
#include "xaffine/geometry.hpp"
#include "xaffine/homography.hpp"
#include "xaffine/image.hpp"

namespace xaffine {

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    GridConfig grid;
    int max_points_coarse = 1000;
    int max_points_fine = 1000;
    double ratio = 0.75;
    int lanczos_a = 4;
    RansacConfig ransac;
    bool final_ransac_filter = true;
};

/// Which input acts as the simulation reference, with the scaling coefficients
/// behind the call. reference = 1 iff f_forward >= f_backward.
struct ReferenceDecision {
    int reference = 1;
    double f_forward = 0.0;   // f1, Image 1 -> 2
    double f_backward = 0.0;  // f2, Image 2 -> 1
    int segment_count = 0;
};

struct CoarseResult {
    AffineParams best_params;
    int best_count = 0;
    std::vector<std::pair<AffineParams, int>> per_entry_counts;
};

struct Correspondence {
    double x1, y1;  // reference/original Image 1 coordinates
    double x2, y2;  // target coordinates
    double distance;
};

struct StageTimings {
    double reference_ms = 0;
    double coarse_ms = 0;
    double fine_ms = 0;
    double total_ms = 0;
};

struct MatchResult {
    std::vector<Correspondence> matches;
    AffineMatrix homography;  // Image 1 -> Image 2
    std::vector<int> inliers;
    StageTimings timings;
    ReferenceDecision decision;
    CoarseResult coarse;

    /// Matches after the final RANSAC screen (or all of them when the screen
    /// is disabled in the config).
    std::vector<Correspondence> final_matches(bool ransac_filter = true) const;
};

/// Weighted sum of matched-segment length differences. Matches are ranked by
/// ascending descriptor distance and consumed as disjoint pairs (4i, 4i+1);
/// each term carries weight max(0, 1 - (Des(4i)+Des(4i+1))/1000). Throws on
/// fewer than 2 matches. segments_out, when given, receives the term count.
double scaling_coefficient(const std::vector<Keypoint>& kps_a,
                           const std::vector<Keypoint>& kps_b,
                           const std::vector<MatchPair>& matches,
                           int* segments_out = nullptr);

ReferenceDecision select_reference(const GrayImage& img1, const GrayImage& img2,
                                   int cap = 1000);

/// Per grid entry: tilt pre-filter, nearest-neighbor simulation warp, binary
/// features, Hamming ratio matching; the entry with the most matches wins
/// (ties prefer smaller tilt, then scale, then |phi|, then grid order).
CoarseResult coarse_search(const GrayImage& ref, const GrayImage& target,
                           const ParamGrid& grid, int max_points = 1000,
                           double ratio = 0.75);

/// Lanczos simulation warp at p, scale-space matching and RANSAC. Matches and
/// the output homography are expressed in original reference coordinates.
MatchResult fine_match(const GrayImage& ref, const GrayImage& target,
                       const AffineParams& p, const PipelineConfig& cfg);

/// Reference selection, coarse parameter search, fine matching. The output is
/// always expressed Image 1 -> Image 2 regardless of which image was the
/// simulation reference.
MatchResult match_images(const GrayImage& img1, const GrayImage& img2,
                         const PipelineConfig& cfg);

/// Dual-simulation comparison baseline: both images warped over the grid with
/// s = 1 throughout, every simulated pair matched, merged with 2 px duplicate
/// suppression, then one global RANSAC.
MatchResult asift_baseline(const GrayImage& img1, const GrayImage& img2,
                           const PipelineConfig& cfg);

/// Plain scale-space detection/matching/RANSAC without any simulation.
MatchResult fine_only_match(const GrayImage& img1, const GrayImage& img2,
                            const PipelineConfig& cfg);

nlohmann::json match_result_to_json(const MatchResult& result);

}  // namespace xaffine
