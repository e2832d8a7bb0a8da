#include "xaffine/image.hpp"

#include <algorithm>
#include <cmath>

namespace xaffine {

namespace {

std::vector<float> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<float> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * i * i / (sigma * sigma));
        k[i + radius] = static_cast<float>(v);
        sum += v;
    }
    for (auto& v : k) v = static_cast<float>(v / sum);
    return k;
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma <= 0) return img;
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    GrayImage tmp(img.width, img.height);
    // horizontal pass
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            float acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * img.at_clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            float acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp.at_clamped(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, int new_w, int new_h) {
    GrayImage out(new_w, new_h);
    const double sx = static_cast<double>(img.width) / new_w;
    const double sy = static_cast<double>(img.height) / new_h;
    for (int y = 0; y < new_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const float wy = static_cast<float>(fy - y0);
        for (int x = 0; x < new_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const float wx = static_cast<float>(fx - x0);
            const float v00 = img.at_clamped(x0, y0), v10 = img.at_clamped(x0 + 1, y0);
            const float v01 = img.at_clamped(x0, y0 + 1), v11 = img.at_clamped(x0 + 1, y0 + 1);
            out.at(x, y) = (1 - wy) * ((1 - wx) * v00 + wx * v10) +
                           wy * ((1 - wx) * v01 + wx * v11);
        }
    }
    return out;
}

}  // namespace xaffine
