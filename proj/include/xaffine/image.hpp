#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

namespace xaffine {

/// Single-channel intensity raster. Values are real-valued in [0, 255];
/// quantization to 8 bits happens only at file I/O.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // row-major, size = width * height

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.f)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    /// Clamp-to-edge fetch.
    float at_clamped(int x, int y) const {
        if (x < 0) x = 0;
        if (x >= width) x = width - 1;
        if (y < 0) y = 0;
        if (y >= height) y = height - 1;
        return at(x, y);
    }

    bool inside(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    size_t size() const { return data.size(); }
};

/// Interleaved 8-bit RGB raster, used only for visualization output.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;  // row-major, 3 bytes per pixel

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}

    void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
        if (x < 0 || x >= width || y < 0 || y >= height) return;
        size_t i = (static_cast<size_t>(y) * width + x) * 3;
        data[i] = r;
        data[i + 1] = g;
        data[i + 2] = b;
    }
};

/// Separable Gaussian blur with clamp-to-edge borders. sigma <= 0 is a copy.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Bilinear resize to the given dimensions.
GrayImage resize_bilinear(const GrayImage& img, int new_w, int new_h);

}  // namespace xaffine
