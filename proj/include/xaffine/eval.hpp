#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xaffine/geometry.hpp"
#include "xaffine/image.hpp"
#include "xaffine/pipeline.hpp"

namespace xaffine {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Homography-benchmark sequence: img1..imgK plus optional ground-truth
/// H1toXp matrices (img1 -> imgX).
struct Sequence {
    std::string name;
    std::vector<GrayImage> images;
    std::map<int, AffineMatrix> homographies;  // keyed by X (2..K)
};

struct EvalRow {
    std::string sequence;
    std::string pair;  // "1-X"
    std::string method;
    int points = 0;
    std::optional<double> precision_pct;
    std::optional<double> inlier_ratio_pct;
    double time_ms = 0;
    std::string error;  // non-empty when the pair failed
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

/// Loads img1..imgK (.pgm/.ppm/.png) and H1toXp files (9 whitespace-separated
/// reals, row-major) from a dataset directory.
Sequence load_sequence(const std::string& dir);

/// Fraction (percent) of matches whose first point, projected by the
/// ground-truth homography, lands within `th` pixels of the matched point.
double precision(const std::vector<Correspondence>& matches, const AffineMatrix& h_true,
                 double th = 1.7320508075688772);

double inlier_ratio(int pt_num, int in_num);

/// Renders img under h with Lanczos sampling and returns the warped image
/// together with the exact composed homography (framing offset included).
std::pair<GrayImage, AffineMatrix> synth_warp_case(const GrayImage& img,
                                                   const AffineMatrix& h, uint64_t seed = 0);

enum class Method { Proposed, BaselineAsift, FineOnly };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct BenchmarkOptions {
    double th = 1.7320508075688772;  // sqrt(3)
};

/// Runs each method on every (1, X) pair, timing the full pipeline (file I/O
/// excluded) and computing precision where ground truth exists. Per-pair
/// failures become rows with an error note.
EvalReport run_benchmark(const Sequence& seq, const std::vector<Method>& methods,
                         const PipelineConfig& cfg, const BenchmarkOptions& opts = {});

std::string report_to_csv(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace xaffine
