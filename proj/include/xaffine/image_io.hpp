#pragma once

#include <stdexcept>
#include <string>

#include "xaffine/image.hpp"

namespace xaffine {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Loads PGM (P2/P5), PPM (P3/P6) or PNG as grayscale. Color inputs are
/// converted with luminance = 0.299 R + 0.587 G + 0.114 B.
GrayImage load_image(const std::string& path);

/// Writes 8-bit grayscale. Format chosen by extension (.pgm or .png).
void save_image(const GrayImage& img, const std::string& path);

/// Writes an 8-bit RGB PNG.
void save_png_rgb(const RgbImage& img, const std::string& path);

}  // namespace xaffine
