#include "xaffine/geometry.hpp"

#include <cmath>

namespace xaffine {

AffineMatrix AffineMatrix::translation(double tx, double ty) {
    AffineMatrix r;
    r(0, 2) = tx;
    r(1, 2) = ty;
    return r;
}

AffineMatrix AffineMatrix::rotation(double angle) {
    AffineMatrix r;
    const double c = std::cos(angle), s = std::sin(angle);
    r(0, 0) = c;
    r(0, 1) = -s;
    r(1, 0) = s;
    r(1, 1) = c;
    return r;
}

AffineMatrix AffineMatrix::scaling(double s) {
    AffineMatrix r;
    r(0, 0) = s;
    r(1, 1) = s;
    return r;
}

AffineMatrix AffineMatrix::operator*(const AffineMatrix& o) const {
    AffineMatrix r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (int k = 0; k < 3; ++k) acc += (*this)(i, k) * o(k, j);
            r(i, j) = acc;
        }
    return r;
}

AffineMatrix affine_from_params(const AffineParams& p) {
    if (p.tilt < 1.0) throw GeometryError("affine_from_params: tilt must be >= 1");
    if (p.scale <= 0.0) throw GeometryError("affine_from_params: scale must be > 0");
    AffineMatrix tau;
    tau(0, 0) = p.tilt;
    return AffineMatrix::translation(p.tx, p.ty) * AffineMatrix::rotation(p.psi) *
           AffineMatrix::scaling(p.scale) * tau * AffineMatrix::rotation(p.phi);
}

AffineMatrix simulation_from_params(const AffineParams& p) {
    if (p.tilt < 1.0) throw GeometryError("simulation_from_params: tilt must be >= 1");
    if (p.scale <= 0.0) throw GeometryError("simulation_from_params: scale must be > 0");
    AffineMatrix tau;
    tau(0, 0) = 1.0 / p.tilt;
    return AffineMatrix::translation(p.tx, p.ty) * AffineMatrix::rotation(p.psi) *
           AffineMatrix::scaling(p.scale) * tau * AffineMatrix::rotation(p.phi);
}

double latitude_from_tilt(double t) {
    if (t < 1.0) throw GeometryError("latitude_from_tilt: tilt must be >= 1");
    return std::acos(1.0 / t);
}

AffineMatrix invert(const AffineMatrix& a) {
    const auto& m = a.m;
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                       m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    if (std::abs(det) < 1e-14) throw GeometryError("invert: singular matrix");
    AffineMatrix r;
    r.m = {(m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det,
           (m[1] * m[5] - m[2] * m[4]) / det, (m[5] * m[6] - m[3] * m[8]) / det,
           (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
           (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det,
           (m[0] * m[4] - m[1] * m[3]) / det};
    return r;
}

std::pair<double, double> map_point(const AffineMatrix& m, double x, double y) {
    return {m(0, 0) * x + m(0, 1) * y + m(0, 2), m(1, 0) * x + m(1, 1) * y + m(1, 2)};
}

std::pair<double, double> map_point_projective(const AffineMatrix& m, double x, double y) {
    const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
    return {(m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w,
            (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w};
}

ParamGrid build_param_grid(const GridConfig& cfg) {
    if (cfg.a <= 1.0) throw GeometryError("build_param_grid: a must be > 1");
    if (cfg.n < 0) throw GeometryError("build_param_grid: n must be >= 0");
    ParamGrid grid;
    grid.config = cfg;
    for (int k = 0; k <= cfg.n; ++k) {
        AffineParams p;
        p.tilt = std::pow(cfg.a, k);
        p.scale = 1.0 + k * cfg.delta_s;
        if (k == 0) {
            p.phi = 0.0;
            grid.entries.push_back(p);
            continue;
        }
        const double step_deg = cfg.b_deg / p.tilt;
        // strict inequality j*b/t < 180, guarded against rounding in a^k
        for (int j = 0; j * step_deg < 180.0 - 1e-9; ++j) {
            p.phi = j * step_deg * M_PI / 180.0;
            grid.entries.push_back(p);
        }
    }
    return grid;
}

}  // namespace xaffine
