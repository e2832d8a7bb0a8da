#include "xaffine/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace xaffine {

namespace {

uint8_t quantize(float v) {
    const int q = static_cast<int>(std::lround(v));
    return static_cast<uint8_t>(std::clamp(q, 0, 255));
}

float luminance(double r, double g, double b) {
    return static_cast<float>(0.299 * r + 0.587 * g + 0.114 * b);
}

bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    std::string tail = s.substr(s.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suf;
}

int next_pnm_int(std::istream& in) {
    // skips whitespace and '#' comment lines
    while (true) {
        const int c = in.peek();
        if (c == EOF) throw IoError("unexpected end of PNM header");
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            break;
        }
    }
    int v;
    if (!(in >> v)) throw IoError("malformed PNM header");
    return v;
}

GrayImage load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path);
    char p, kind;
    in.get(p).get(kind);
    if (p != 'P' || kind < '2' || kind > '6')
        throw IoError("unsupported PNM format in " + path);
    const int w = next_pnm_int(in);
    const int h = next_pnm_int(in);
    const int maxval = next_pnm_int(in);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw IoError("unsupported PNM dimensions in " + path);
    GrayImage img(w, h);
    const size_t n = static_cast<size_t>(w) * h;
    if (kind == '2' || kind == '3') {  // ASCII
        const int ch = (kind == '3') ? 3 : 1;
        for (size_t i = 0; i < n; ++i) {
            int vals[3];
            for (int c = 0; c < ch; ++c)
                if (!(in >> vals[c])) throw IoError("truncated PNM data in " + path);
            img.data[i] = (ch == 3) ? luminance(vals[0], vals[1], vals[2])
                                    : static_cast<float>(vals[0]);
        }
    } else {  // binary, single whitespace after maxval
        in.get();
        const int ch = (kind == '6') ? 3 : 1;
        std::vector<uint8_t> raw(n * ch);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<size_t>(in.gcount()) != raw.size())
            throw IoError("truncated PNM data in " + path);
        for (size_t i = 0; i < n; ++i)
            img.data[i] = (ch == 3) ? luminance(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2])
                                    : static_cast<float>(raw[i]);
    }
    return img;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

GrayImage load_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open image: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * channels);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    GrayImage img(w, h);
    for (size_t i = 0, n = static_cast<size_t>(w) * h; i < n; ++i)
        img.data[i] = (channels >= 3)
                          ? luminance(raw[channels * i], raw[channels * i + 1], raw[channels * i + 2])
                          : static_cast<float>(raw[channels * i]);
    return img;
}

void save_png_gray(const GrayImage& img, const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write image: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<uint8_t> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) row[x] = quantize(img.at(x, y));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> raw(img.size());
    for (size_t i = 0; i < img.size(); ++i) raw[i] = quantize(img.data[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace

GrayImage load_image(const std::string& path) {
    if (has_suffix(path, ".png")) return load_png(path);
    if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm") || has_suffix(path, ".pnm"))
        return load_pnm(path);
    throw IoError("unsupported image format: " + path);
}

void save_image(const GrayImage& img, const std::string& path) {
    if (has_suffix(path, ".png")) {
        save_png_gray(img, path);
    } else if (has_suffix(path, ".pgm")) {
        save_pgm(img, path);
    } else {
        throw IoError("unsupported output format: " + path);
    }
}

void save_png_rgb(const RgbImage& img, const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write image: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.data.data() + static_cast<size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace xaffine
