#include "xaffine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "xaffine/orb.hpp"
#include "xaffine/parallel.hpp"
#include "xaffine/sift.hpp"
#include "xaffine/warp.hpp"

namespace xaffine {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Keeps only keypoints whose back-mapped position lies at least `margin`
/// pixels inside the source content, discarding detections caused by the
/// empty band around a warped image.
std::vector<Keypoint> filter_to_content(const std::vector<Keypoint>& kps,
                                        const AffineMatrix& back, int src_w, int src_h,
                                        double margin) {
    std::vector<Keypoint> out;
    out.reserve(kps.size());
    for (const auto& kp : kps) {
        const auto [sx, sy] = map_point(back, kp.x, kp.y);
        if (sx >= margin && sx <= src_w - 1 - margin && sy >= margin &&
            sy <= src_h - 1 - margin)
            out.push_back(kp);
    }
    return out;
}

struct FineFeatures {
    std::vector<Keypoint> kps;
    std::vector<GradientDescriptor> descs;
};

FineFeatures fine_features(const GrayImage& img, int cap) {
    auto kps = detect_dog_keypoints(img, cap);
    auto [kept, descs] = describe_gradient(img, kps);
    return {std::move(kept), std::move(descs)};
}

std::vector<Correspondence> flip_sides(const std::vector<Correspondence>& matches) {
    std::vector<Correspondence> out;
    out.reserve(matches.size());
    for (const auto& m : matches) out.push_back({m.x2, m.y2, m.x1, m.y1, m.distance});
    return out;
}

}  // namespace

std::vector<Correspondence> MatchResult::final_matches(bool ransac_filter) const {
    if (!ransac_filter) return matches;
    std::vector<Correspondence> out;
    out.reserve(inliers.size());
    for (int i : inliers) out.push_back(matches[i]);
    return out;
}

double scaling_coefficient(const std::vector<Keypoint>& kps_a,
                           const std::vector<Keypoint>& kps_b,
                           const std::vector<MatchPair>& matches, int* segments_out) {
    const int n = static_cast<int>(matches.size());
    if (n < 2) throw PipelineError("insufficient matches for scaling estimation");
    for (const auto& m : matches)
        if (m.idx_a < 0 || m.idx_a >= static_cast<int>(kps_a.size()) || m.idx_b < 0 ||
            m.idx_b >= static_cast<int>(kps_b.size()))
            throw PipelineError("match indices out of range");
    std::vector<MatchPair> ranked = matches;
    std::sort(ranked.begin(), ranked.end(), [](const MatchPair& a, const MatchPair& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.idx_a < b.idx_a;
    });
    double f = 0;
    int segments = 0;
    for (int i = 0; 4 * i + 1 < n; ++i) {
        const MatchPair& m0 = ranked[4 * i];
        const MatchPair& m1 = ranked[4 * i + 1];
        const Keypoint& a0 = kps_a[m0.idx_a];
        const Keypoint& a1 = kps_a[m1.idx_a];
        const Keypoint& b0 = kps_b[m0.idx_b];
        const Keypoint& b1 = kps_b[m1.idx_b];
        const double dis_a = std::hypot(a0.x - a1.x, a0.y - a1.y);
        const double dis_b = std::hypot(b0.x - b1.x, b0.y - b1.y);
        const double w = std::max(0.0, 1.0 - (m0.distance + m1.distance) / 1000.0);
        f += (dis_a - dis_b) * w;
        ++segments;
    }
    if (segments_out) *segments_out = segments;
    return f;
}

ReferenceDecision select_reference(const GrayImage& img1, const GrayImage& img2, int cap) {
    ReferenceDecision d;
    const FineFeatures f1 = fine_features(img1, cap);
    const FineFeatures f2 = fine_features(img2, cap);
    const auto m12 = match_ratio(f1.descs, f2.descs, 0.75);
    const auto m21 = match_ratio(f2.descs, f1.descs, 0.75);
    if (m12.size() < 2 || m21.size() < 2) {
        // scaling estimation failed entirely; fall back to the larger image
        const long area1 = static_cast<long>(img1.width) * img1.height;
        const long area2 = static_cast<long>(img2.width) * img2.height;
        d.reference = (area2 > area1) ? 2 : 1;
        return d;
    }
    d.f_forward = scaling_coefficient(f1.kps, f2.kps, m12, &d.segment_count);
    d.f_backward = scaling_coefficient(f2.kps, f1.kps, m21);
    d.reference = (d.f_forward >= d.f_backward) ? 1 : 2;
    return d;
}

CoarseResult coarse_search(const GrayImage& ref, const GrayImage& target,
                           const ParamGrid& grid, int max_points, double ratio) {
    if (grid.entries.empty()) throw PipelineError("coarse: empty parameter grid");
    const auto target_kps = detect_oriented_corners(target, max_points);
    const auto [tkps, target_descs] = describe_binary(target, target_kps);

    const int n = static_cast<int>(grid.entries.size());
    std::vector<int> counts(n, 0);
    parallel_for(n, [&](int i) {
        const AffineParams& p = grid.entries[i];
        const GrayImage filtered = antialias_tilt(ref, p.tilt, p.phi);
        const WarpResult w = warp_nearest(filtered, simulation_from_params(p));
        auto kps = detect_oriented_corners(w.image, max_points);
        kps = filter_to_content(kps, invert(w.forward), ref.width, ref.height, 5.0);
        const auto [wkps, wdescs] = describe_binary(w.image, kps);
        counts[i] = static_cast<int>(match_hamming(wdescs, target_descs, ratio).size());
    });

    CoarseResult result;
    result.best_count = -1;
    for (int i = 0; i < n; ++i) {
        result.per_entry_counts.emplace_back(grid.entries[i], counts[i]);
        // grid order runs smallest tilt/scale/|phi| first, so a strict
        // comparison implements the tie-break
        if (counts[i] > result.best_count) {
            result.best_count = counts[i];
            result.best_params = grid.entries[i];
        }
    }
    return result;
}

MatchResult fine_match(const GrayImage& ref, const GrayImage& target,
                       const AffineParams& p, const PipelineConfig& cfg) {
    const GrayImage filtered = antialias_tilt(ref, p.tilt, p.phi);
    const WarpResult w = warp_lanczos(filtered, simulation_from_params(p), cfg.lanczos_a);
    const AffineMatrix back = invert(w.forward);

    auto warped_kps = detect_dog_keypoints(w.image, cfg.max_points_fine);
    warped_kps = filter_to_content(warped_kps, back, ref.width, ref.height,
                                   static_cast<double>(cfg.lanczos_a));
    const auto [wkps, wdescs] = describe_gradient(w.image, warped_kps);
    const FineFeatures tgt = fine_features(target, cfg.max_points_fine);

    const auto matches = match_ratio(wdescs, tgt.descs, cfg.ratio);
    if (matches.size() < 4) throw PipelineError("fine: insufficient matches");

    std::vector<PointPair> pairs;
    pairs.reserve(matches.size());
    for (const auto& m : matches)
        pairs.push_back({wkps[m.idx_a].x, wkps[m.idx_a].y, tgt.kps[m.idx_b].x,
                         tgt.kps[m.idx_b].y});
    RansacResult ransac;
    try {
        ransac = estimate_homography_ransac(pairs, cfg.ransac);
    } catch (const HomographyError& e) {
        throw PipelineError(std::string("fine: ") + e.what());
    }

    MatchResult result;
    result.matches.reserve(matches.size());
    for (size_t i = 0; i < matches.size(); ++i) {
        const auto [rx, ry] = map_point(back, pairs[i].x1, pairs[i].y1);
        result.matches.push_back({rx, ry, pairs[i].x2, pairs[i].y2, matches[i].distance});
    }
    result.homography = ransac.homography * w.forward;
    result.inliers = std::move(ransac.inliers);
    return result;
}

MatchResult match_images(const GrayImage& img1, const GrayImage& img2,
                         const PipelineConfig& cfg) {
    const auto t_total = Clock::now();
    StageTimings timings;

    auto t0 = Clock::now();
    ReferenceDecision decision;
    try {
        decision = select_reference(img1, img2, cfg.max_points_fine);
    } catch (const std::exception& e) {
        throw PipelineError(std::string("reference: ") + e.what());
    }
    timings.reference_ms = ms_since(t0);

    const GrayImage& ref = (decision.reference == 1) ? img1 : img2;
    const GrayImage& target = (decision.reference == 1) ? img2 : img1;

    t0 = Clock::now();
    CoarseResult coarse;
    try {
        const ParamGrid grid = build_param_grid(cfg.grid);
        coarse = coarse_search(ref, target, grid, cfg.max_points_coarse, cfg.ratio);
    } catch (const std::exception& e) {
        throw PipelineError(std::string("coarse: ") + e.what());
    }
    timings.coarse_ms = ms_since(t0);

    t0 = Clock::now();
    MatchResult result = fine_match(ref, target, coarse.best_params, cfg);
    timings.fine_ms = ms_since(t0);

    if (decision.reference == 2) {
        result.matches = flip_sides(result.matches);
        result.homography = invert(result.homography);
    }
    timings.total_ms = ms_since(t_total);
    result.timings = timings;
    result.decision = decision;
    result.coarse = std::move(coarse);
    return result;
}

namespace {

struct SimulatedView {
    std::vector<Keypoint> kps;
    std::vector<GradientDescriptor> descs;
    AffineMatrix back;  // warped -> original coordinates
};

std::vector<SimulatedView> simulate_views(const GrayImage& img, const ParamGrid& grid,
                                          const PipelineConfig& cfg) {
    std::vector<SimulatedView> views;
    views.reserve(grid.entries.size());
    for (auto p : grid.entries) {
        p.scale = 1.0;  // the dual-simulation baseline has no scale series
        const bool is_identity = p.tilt == 1.0 && p.phi == 0.0 && p.scale == 1.0;
        const GrayImage filtered = antialias_tilt(img, p.tilt, p.phi);
        const WarpResult w = warp_lanczos(filtered, simulation_from_params(p), cfg.lanczos_a);
        SimulatedView view;
        view.back = invert(w.forward);
        auto kps = detect_dog_keypoints(w.image, cfg.max_points_fine);
        // an identity view has no empty band to filter away
        if (!is_identity)
            kps = filter_to_content(kps, view.back, img.width, img.height,
                                    static_cast<double>(cfg.lanczos_a));
        auto [kept, descs] = describe_gradient(w.image, kps);
        view.kps = std::move(kept);
        view.descs = std::move(descs);
        views.push_back(std::move(view));
    }
    return views;
}

/// 2 px duplicate suppression over 4-D match coordinates via a hashed grid on
/// the first endpoint.
class DuplicateFilter {
public:
    bool is_duplicate(const Correspondence& c) const {
        const int cx = cell(c.x1), cy = cell(c.y1);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const auto it = cells_.find(key(cx + dx, cy + dy));
                if (it == cells_.end()) continue;
                for (const auto& e : it->second)
                    if (std::hypot(e.x1 - c.x1, e.y1 - c.y1) <= 2.0 &&
                        std::hypot(e.x2 - c.x2, e.y2 - c.y2) <= 2.0)
                        return true;
            }
        }
        return false;
    }

    void insert(const Correspondence& c) {
        cells_[key(cell(c.x1), cell(c.y1))].push_back(c);
    }

private:
    static int cell(double v) { return static_cast<int>(std::floor(v / 2.0)); }
    static long long key(int x, int y) { return (static_cast<long long>(x) << 32) ^ (y & 0xffffffffll); }
    std::unordered_map<long long, std::vector<Correspondence>> cells_;
};

}  // namespace

MatchResult asift_baseline(const GrayImage& img1, const GrayImage& img2,
                           const PipelineConfig& cfg) {
    const auto t_total = Clock::now();
    const ParamGrid grid = build_param_grid(cfg.grid);
    const auto views1 = simulate_views(img1, grid, cfg);
    const auto views2 = simulate_views(img2, grid, cfg);

    std::vector<Correspondence> merged;
    DuplicateFilter dedup;
    for (const auto& va : views1) {
        for (const auto& vb : views2) {
            const auto matches = match_ratio(va.descs, vb.descs, cfg.ratio);
            // suppress repeats of matches already found through an earlier
            // view pair; matches within a single pair are all kept, so a
            // one-entry grid degenerates to plain fine matching
            std::vector<Correspondence> fresh;
            for (const auto& m : matches) {
                const auto [x1, y1] = map_point(va.back, va.kps[m.idx_a].x, va.kps[m.idx_a].y);
                const auto [x2, y2] = map_point(vb.back, vb.kps[m.idx_b].x, vb.kps[m.idx_b].y);
                const Correspondence c{x1, y1, x2, y2, m.distance};
                if (dedup.is_duplicate(c)) continue;
                fresh.push_back(c);
            }
            for (const auto& c : fresh) dedup.insert(c);
            merged.insert(merged.end(), fresh.begin(), fresh.end());
        }
    }
    if (merged.size() < 4) throw PipelineError("baseline: insufficient matches");

    std::vector<PointPair> pairs;
    pairs.reserve(merged.size());
    for (const auto& c : merged) pairs.push_back({c.x1, c.y1, c.x2, c.y2});
    RansacResult ransac;
    try {
        ransac = estimate_homography_ransac(pairs, cfg.ransac);
    } catch (const HomographyError& e) {
        throw PipelineError(std::string("baseline: ") + e.what());
    }

    MatchResult result;
    result.matches = std::move(merged);
    result.homography = ransac.homography;
    result.inliers = std::move(ransac.inliers);
    result.timings.total_ms = ms_since(t_total);
    result.timings.fine_ms = result.timings.total_ms;
    return result;
}

MatchResult fine_only_match(const GrayImage& img1, const GrayImage& img2,
                            const PipelineConfig& cfg) {
    const auto t_total = Clock::now();
    const FineFeatures f1 = fine_features(img1, cfg.max_points_fine);
    const FineFeatures f2 = fine_features(img2, cfg.max_points_fine);
    const auto matches = match_ratio(f1.descs, f2.descs, cfg.ratio);
    if (matches.size() < 4) throw PipelineError("fine-only: insufficient matches");
    std::vector<PointPair> pairs;
    pairs.reserve(matches.size());
    for (const auto& m : matches)
        pairs.push_back({f1.kps[m.idx_a].x, f1.kps[m.idx_a].y, f2.kps[m.idx_b].x,
                         f2.kps[m.idx_b].y});
    RansacResult ransac;
    try {
        ransac = estimate_homography_ransac(pairs, cfg.ransac);
    } catch (const HomographyError& e) {
        throw PipelineError(std::string("fine-only: ") + e.what());
    }
    MatchResult result;
    result.matches.reserve(matches.size());
    for (size_t i = 0; i < matches.size(); ++i)
        result.matches.push_back({pairs[i].x1, pairs[i].y1, pairs[i].x2, pairs[i].y2,
                                  matches[i].distance});
    result.homography = ransac.homography;
    result.inliers = std::move(ransac.inliers);
    result.timings.total_ms = ms_since(t_total);
    result.timings.fine_ms = result.timings.total_ms;
    return result;
}

nlohmann::json match_result_to_json(const MatchResult& r) {
    nlohmann::json j;
    auto& matches = j["matches"] = nlohmann::json::array();
    for (const auto& m : r.matches)
        matches.push_back({m.x1, m.y1, m.x2, m.y2, m.distance});
    j["homography"] = r.homography.m;
    j["inliers"] = r.inliers;
    j["timings"] = {{"reference_ms", r.timings.reference_ms},
                    {"coarse_ms", r.timings.coarse_ms},
                    {"fine_ms", r.timings.fine_ms},
                    {"total_ms", r.timings.total_ms}};
    j["decision"] = {{"reference", r.decision.reference},
                     {"f_forward", r.decision.f_forward},
                     {"f_backward", r.decision.f_backward},
                     {"segment_count", r.decision.segment_count}};
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [p, count] : r.coarse.per_entry_counts)
        entries.push_back({{"tilt", p.tilt}, {"phi", p.phi}, {"scale", p.scale},
                           {"count", count}});
    j["coarse"] = {{"best", {{"tilt", r.coarse.best_params.tilt},
                             {"phi", r.coarse.best_params.phi},
                             {"scale", r.coarse.best_params.scale}}},
                   {"best_count", r.coarse.best_count},
                   {"per_entry_counts", entries}};
    return j;
}

}  // namespace xaffine
