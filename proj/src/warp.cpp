#include "xaffine/warp.hpp"

#include <algorithm>
#include <cmath>

namespace xaffine {

namespace {

// Pixel i covers [i, i+1) of the continuous plane with its center at i + 0.5;
// keypoints and WarpResult.forward use integer-center coordinates. The two
// conventions differ by the half-pixel shift folded in here.
AffineMatrix center_adjusted(const AffineMatrix& m) {
    return AffineMatrix::translation(-0.5, -0.5) * m * AffineMatrix::translation(0.5, 0.5);
}

struct Frame {
    int width = 0;
    int height = 0;
    double tx = 0.0;
    double ty = 0.0;
};

Frame framing(const AffineMatrix& fwd, int w, int h) {
    const double cx[4] = {0.0, double(w - 1), 0.0, double(w - 1)};
    const double cy[4] = {0.0, 0.0, double(h - 1), double(h - 1)};
    double minx = 1e30, miny = 1e30, maxx = -1e30, maxy = -1e30;
    for (int i = 0; i < 4; ++i) {
        auto [x, y] = map_point(fwd, cx[i], cy[i]);
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
    }
    Frame f;
    // snap to avoid growing the frame when corners land on exact integers
    f.tx = -std::floor(minx + 1e-9);
    f.ty = -std::floor(miny + 1e-9);
    f.width = static_cast<int>(std::ceil(maxx - 1e-9) + f.tx) + 1;
    f.height = static_cast<int>(std::ceil(maxy - 1e-9) + f.ty) + 1;
    return f;
}

float bilinear_clamped(const GrayImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const float wx = static_cast<float>(x - x0);
    const float wy = static_cast<float>(y - y0);
    return (1 - wy) * ((1 - wx) * img.at_clamped(x0, y0) + wx * img.at_clamped(x0 + 1, y0)) +
           wy * ((1 - wx) * img.at_clamped(x0, y0 + 1) + wx * img.at_clamped(x0 + 1, y0 + 1));
}

}  // namespace

double lanczos_kernel(double x, int a) {
    if (x <= -a || x >= a) return 0.0;
    if (x == 0.0) return 1.0;
    const double px = M_PI * x;
    return (std::sin(px) / px) * (std::sin(px / a) * a / px);
}

double sample_lanczos(const GrayImage& img, double x, double y, int a) {
    const int fx = static_cast<int>(std::floor(x));
    const int fy = static_cast<int>(std::floor(y));
    const double rx = x - fx, ry = y - fy;
    double wx[16], wy[16];
    const int n = 2 * a;
    for (int i = -a + 1; i <= a; ++i) {
        wx[i + a - 1] = lanczos_kernel(i - rx, a);
        wy[i + a - 1] = lanczos_kernel(i - ry, a);
    }
    double acc = 0, wsum = 0;
    for (int j = 0; j < n; ++j) {
        const int yy = fy + j - a + 1;
        double row = 0, rw = 0;
        for (int i = 0; i < n; ++i) {
            row += wx[i] * img.at_clamped(fx + i - a + 1, yy);
            rw += wx[i];
        }
        acc += wy[j] * row;
        wsum += wy[j] * rw;
    }
    return acc / wsum;
}

WarpResult warp_nearest(const GrayImage& img, const AffineMatrix& m) {
    const AffineMatrix adj = center_adjusted(m);
    const AffineMatrix inv = invert(adj);  // throws on degenerate input
    const Frame f = framing(adj, img.width, img.height);
    WarpResult out;
    out.tx = f.tx;
    out.ty = f.ty;
    out.forward = AffineMatrix::translation(f.tx, f.ty) * adj;
    out.image = GrayImage(f.width, f.height);
    const AffineMatrix back = invert(out.forward);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            auto [sx, sy] = map_point(back, x, y);
            const int ix = static_cast<int>(std::lround(sx));
            const int iy = static_cast<int>(std::lround(sy));
            if (img.inside(ix, iy)) out.image.at(x, y) = img.at(ix, iy);
        }
    }
    return out;
}

WarpResult warp_lanczos(const GrayImage& img, const AffineMatrix& m, int a) {
    const AffineMatrix adj = center_adjusted(m);
    const Frame f = framing(adj, img.width, img.height);
    WarpResult out;
    out.tx = f.tx;
    out.ty = f.ty;
    out.forward = AffineMatrix::translation(f.tx, f.ty) * adj;
    out.image = GrayImage(f.width, f.height);
    const AffineMatrix back = invert(out.forward);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            auto [sx, sy] = map_point(back, x, y);
            if (sx < 0.0 || sx > img.width - 1.0 || sy < 0.0 || sy > img.height - 1.0)
                continue;  // outside the content domain, left at 0
            const double v = sample_lanczos(img, sx, sy, a);
            out.image.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 255.0));
        }
    }
    return out;
}

GrayImage antialias_tilt(const GrayImage& img, double t, double phi) {
    if (t < 1.0) throw GeometryError("antialias_tilt: tilt must be >= 1");
    if (t == 1.0) return img;
    const double sigma = 0.8 * std::sqrt(t * t - 1.0);
    // direction the tilt compression acts along in source coordinates
    const double dx = std::cos(phi), dy = -std::sin(phi);
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    GrayImage out(img.width, img.height);
    const bool axis_aligned = (dy == 0.0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            if (axis_aligned) {
                for (int i = -radius; i <= radius; ++i)
                    acc += k[i + radius] * img.at_clamped(x + i, y);
            } else {
                for (int i = -radius; i <= radius; ++i)
                    acc += k[i + radius] * bilinear_clamped(img, x + i * dx, y + i * dy);
            }
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

}  // namespace xaffine
