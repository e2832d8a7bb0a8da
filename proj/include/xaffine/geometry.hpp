#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace xaffine {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 3x3 real matrix with last row (0,0,1) for affine maps; also used for
/// general homographies where noted.
struct AffineMatrix {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[r * 3 + c]; }
    double& operator()(int r, int c) { return m[r * 3 + c]; }

    static AffineMatrix identity() { return {}; }
    static AffineMatrix translation(double tx, double ty);
    static AffineMatrix rotation(double angle);
    static AffineMatrix scaling(double s);

    AffineMatrix operator*(const AffineMatrix& o) const;
    bool operator==(const AffineMatrix& o) const { return m == o.m; }
};

/// One sampling point of the cone viewpoint space: camera spin, tilt degree,
/// longitude, scale and translation.
struct AffineParams {
    double psi = 0.0;    // camera spin, radians
    double tilt = 1.0;   // t >= 1
    double phi = 0.0;    // longitude, radians, [0, pi)
    double scale = 1.0;  // s > 0
    double tx = 0.0;
    double ty = 0.0;
};

/// Sampling-rule configuration for the viewpoint grid.
struct GridConfig {
    double a = std::sqrt(2.0);  // tilt ratio, > 1
    int n = 5;                  // max tilt exponent, >= 0
    double b_deg = 72.0;        // longitude base step, degrees
    double delta_s = 0.5;       // scale increment per tilt index
};

struct ParamGrid {
    std::vector<AffineParams> entries;  // sorted by (tilt index, longitude index)
    GridConfig config;
};

/// Composes T(tx,ty) * R1(psi) * S(s) * Ttau(t) * R2(phi), where Ttau stretches
/// the x axis by t. Rejects tilt < 1 or scale <= 0.
AffineMatrix affine_from_params(const AffineParams& p);

/// theta = arccos(1/t); rejects t < 1.
double latitude_from_tilt(double t);

AffineMatrix invert(const AffineMatrix& m);

std::pair<double, double> map_point(const AffineMatrix& m, double x, double y);

/// Applies m as a full homography (with projective division).
std::pair<double, double> map_point_projective(const AffineMatrix& m, double x, double y);

/// Viewpoint sampling grid: tilt t_k = a^k with s_k = 1 + k*delta_s, and for
/// k >= 1 longitudes phi_j = j*b/t_k while j*b/t_k < 180 degrees. k = 0 yields
/// the single frontal entry.
ParamGrid build_param_grid(const GridConfig& cfg);

/// Resampling map that simulates the camera view for p: the tilt direction is
/// compressed by t (subsampling), the scale stretches uniformly by s. This is
/// the matrix the simulation warps apply; its tilt factor is the inverse of
/// the one in affine_from_params.
AffineMatrix simulation_from_params(const AffineParams& p);

}  // namespace xaffine
