#pragma once

#include "xaffine/geometry.hpp"
#include "xaffine/image.hpp"

namespace xaffine {

/// Warped image plus the bookkeeping needed to relate its pixel grid to the
/// source: `forward` maps source pixel coordinates to warped coordinates and
/// already includes the framing translation (tx, ty).
struct WarpResult {
    GrayImage image;
    double tx = 0.0;
    double ty = 0.0;
    AffineMatrix forward;
};

/// Lanczos kernel sinc(x) * sinc(x/a) on (-a, a), zero outside.
double lanczos_kernel(double x, int a);

/// Windowed-sinc interpolation over the (2a)^2 neighborhood of (x, y), with
/// clamp-to-edge lookups and weight-sum normalization.
double sample_lanczos(const GrayImage& img, double x, double y, int a);

WarpResult warp_nearest(const GrayImage& img, const AffineMatrix& m);

WarpResult warp_lanczos(const GrayImage& img, const AffineMatrix& m, int a = 4);

/// Directional Gaussian pre-filter for tilt subsampling: sigma = 0.8*sqrt(t^2-1)
/// along the direction the tilt compresses (longitude phi). Identity for t = 1.
GrayImage antialias_tilt(const GrayImage& img, double t, double phi);

}  // namespace xaffine
