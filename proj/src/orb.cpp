#include "xaffine/orb.hpp"

#include <algorithm>
#include <cmath>

#include "xaffine/orb_pattern.hpp"

namespace xaffine {

namespace {

constexpr int kLevels = 8;
constexpr double kLevelRatio = 1.2;
constexpr int kFastThreshold = 20;
constexpr int kFastThresholdRelaxed = 7;
constexpr int kHalfOrientPatch = 15;
constexpr int kDetectBorder = 17;  // orientation patch + gradient margin
constexpr int kDescribeBorder = 20;
constexpr int kMinImageSide = 32;

const int kCircleDx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
const int kCircleDy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

/// End column of the circular orientation patch per row, radius 15.
std::array<int, kHalfOrientPatch + 1> make_umax() {
    std::array<int, kHalfOrientPatch + 1> umax{};
    const int r = kHalfOrientPatch;
    int v0 = 0;
    const int vmax = static_cast<int>(std::floor(r * std::sqrt(2.0) / 2 + 1));
    const int vmin = static_cast<int>(std::ceil(r * std::sqrt(2.0) / 2));
    for (int v = 0; v <= vmax; ++v)
        umax[v] = static_cast<int>(std::round(std::sqrt(double(r) * r - v * v)));
    // enforce symmetry the way the circle is mirrored across the diagonal
    for (int v = r, i = 0; v >= vmin; --v) {
        while (umax[v0] == umax[v0 + 1]) ++v0;
        umax[v] = v0;
        (void)i;
        ++v0;
    }
    return umax;
}

bool fast_corner(const GrayImage& img, int x, int y, float threshold) {
    const float p = img.at(x, y);
    const float hi = p + threshold, lo = p - threshold;
    int state[16];  // +1 brighter, -1 darker, 0 neither
    int nbright = 0, ndark = 0;
    for (int i = 0; i < 16; ++i) {
        const float v = img.at(x + kCircleDx[i], y + kCircleDy[i]);
        if (v > hi) {
            state[i] = 1;
            ++nbright;
        } else if (v < lo) {
            state[i] = -1;
            ++ndark;
        } else {
            state[i] = 0;
        }
    }
    if (nbright < 9 && ndark < 9) return false;
    for (int target : {1, -1}) {
        int run = 0;
        for (int i = 0; i < 32; ++i) {  // wrap around for contiguity
            if (state[i & 15] == target) {
                if (++run >= 9) return true;
            } else {
                run = 0;
            }
        }
    }
    return false;
}

float fast_score(const GrayImage& img, int x, int y) {
    const float p = img.at(x, y);
    float s = 0;
    for (int i = 0; i < 16; ++i)
        s += std::abs(img.at(x + kCircleDx[i], y + kCircleDy[i]) - p);
    return s;
}

float harris_response(const GrayImage& img, int x, int y) {
    // 7x7 block of Sobel-derivative products, k = 0.04
    double a = 0, b = 0, c = 0;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            const int px = x + dx, py = y + dy;
            const double ix = (img.at_clamped(px + 1, py - 1) - img.at_clamped(px - 1, py - 1)) +
                              2 * (img.at_clamped(px + 1, py) - img.at_clamped(px - 1, py)) +
                              (img.at_clamped(px + 1, py + 1) - img.at_clamped(px - 1, py + 1));
            const double iy = (img.at_clamped(px - 1, py + 1) - img.at_clamped(px - 1, py - 1)) +
                              2 * (img.at_clamped(px, py + 1) - img.at_clamped(px, py - 1)) +
                              (img.at_clamped(px + 1, py + 1) - img.at_clamped(px + 1, py - 1));
            a += ix * ix;
            b += iy * iy;
            c += ix * iy;
        }
    }
    const double scale = 1.0 / (255.0 * 4 * 7);  // normalization only affects magnitude
    a *= scale * scale;
    b *= scale * scale;
    c *= scale * scale;
    return static_cast<float>(a * b - c * c - 0.04 * (a + b) * (a + b));
}

float centroid_orientation(const GrayImage& img, int x, int y,
                           const std::array<int, kHalfOrientPatch + 1>& umax) {
    double m01 = 0, m10 = 0;
    for (int u = -kHalfOrientPatch; u <= kHalfOrientPatch; ++u)
        m10 += u * img.at(x + u, y);
    for (int v = 1; v <= kHalfOrientPatch; ++v) {
        const int d = umax[v];
        double vsum = 0;
        for (int u = -d; u <= d; ++u) {
            const double up = img.at(x + u, y + v);
            const double down = img.at(x + u, y - v);
            vsum += up - down;
            m10 += u * (up + down);
        }
        m01 += v * vsum;
    }
    return static_cast<float>(std::atan2(m01, m10));
}

struct LevelKeypoint {
    int x, y, level;
    float score;
};

std::vector<GrayImage> build_pyramid(const GrayImage& img) {
    std::vector<GrayImage> pyr;
    pyr.push_back(img);
    for (int i = 1; i < kLevels; ++i) {
        const double s = std::pow(kLevelRatio, i);
        const int w = static_cast<int>(std::round(img.width / s));
        const int h = static_cast<int>(std::round(img.height / s));
        if (w < kMinImageSide || h < kMinImageSide) break;
        pyr.push_back(resize_bilinear(img, w, h));
    }
    return pyr;
}

std::vector<LevelKeypoint> detect_on_pyramid(const std::vector<GrayImage>& pyr,
                                             float threshold) {
    std::vector<LevelKeypoint> out;
    for (int level = 0; level < static_cast<int>(pyr.size()); ++level) {
        const GrayImage& im = pyr[level];
        GrayImage score(im.width, im.height, -1.f);
        for (int y = kDetectBorder; y < im.height - kDetectBorder; ++y)
            for (int x = kDetectBorder; x < im.width - kDetectBorder; ++x)
                if (fast_corner(im, x, y, threshold)) score.at(x, y) = fast_score(im, x, y);
        // 3x3 non-max suppression on the segment-test score
        for (int y = kDetectBorder; y < im.height - kDetectBorder; ++y) {
            for (int x = kDetectBorder; x < im.width - kDetectBorder; ++x) {
                const float s = score.at(x, y);
                if (s < 0) continue;
                bool is_max = true;
                for (int dy = -1; dy <= 1 && is_max; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const float o = score.at_clamped(x + dx, y + dy);
                        if (o > s || (o == s && (dy < 0 || (dy == 0 && dx < 0)))) {
                            is_max = false;
                            break;
                        }
                    }
                if (is_max) out.push_back({x, y, level, s});
            }
        }
    }
    return out;
}

}  // namespace

int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) {
    int d = 0;
    for (int i = 0; i < 4; ++i) d += __builtin_popcountll(a.bits[i] ^ b.bits[i]);
    return d;
}

std::vector<Keypoint> detect_oriented_corners(const GrayImage& img, int max_points) {
    if (img.width < kMinImageSide || img.height < kMinImageSide || max_points <= 0) return {};
    static const auto umax = make_umax();
    const auto pyr = build_pyramid(img);
    auto raw = detect_on_pyramid(pyr, kFastThreshold);
    if (static_cast<int>(raw.size()) < max_points / 4)
        raw = detect_on_pyramid(pyr, kFastThresholdRelaxed);

    std::vector<Keypoint> kps;
    kps.reserve(raw.size());
    for (const auto& c : raw) {
        const GrayImage& im = pyr[c.level];
        Keypoint kp;
        const float level_scale = static_cast<float>(std::pow(kLevelRatio, c.level));
        kp.x = c.x * level_scale;
        kp.y = c.y * level_scale;
        kp.octave_scale = level_scale;
        kp.response = harris_response(im, c.x, c.y);
        kp.orientation = centroid_orientation(im, c.x, c.y, umax);
        kps.push_back(kp);
    }
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(kps.size()) > max_points) kps.resize(max_points);
    return kps;
}

std::pair<std::vector<Keypoint>, std::vector<BinaryDescriptor>> describe_binary(
    const GrayImage& img, const std::vector<Keypoint>& kps) {
    const auto pyr = build_pyramid(img);
    std::vector<GrayImage> blurred(pyr.size());
    std::vector<bool> have(pyr.size(), false);

    std::pair<std::vector<Keypoint>, std::vector<BinaryDescriptor>> out;
    for (const auto& kp : kps) {
        // recover the pyramid level from the stored scale factor
        int level = static_cast<int>(std::round(std::log(kp.octave_scale) / std::log(kLevelRatio)));
        if (level < 0 || level >= static_cast<int>(pyr.size())) continue;
        const GrayImage& im = pyr[level];
        const int lx = static_cast<int>(std::round(kp.x / kp.octave_scale));
        const int ly = static_cast<int>(std::round(kp.y / kp.octave_scale));
        if (lx < kDescribeBorder || ly < kDescribeBorder || lx >= im.width - kDescribeBorder ||
            ly >= im.height - kDescribeBorder)
            continue;
        if (!have[level]) {
            blurred[level] = gaussian_blur(im, 2.0);
            have[level] = true;
        }
        const GrayImage& bim = blurred[level];
        const float c = std::cos(kp.orientation), s = std::sin(kp.orientation);
        BinaryDescriptor desc;
        for (int i = 0; i < 256; ++i) {
            const auto& p = kOrbPattern[i];
            const int x1 = lx + static_cast<int>(std::round(c * p.x1 - s * p.y1));
            const int y1 = ly + static_cast<int>(std::round(s * p.x1 + c * p.y1));
            const int x2 = lx + static_cast<int>(std::round(c * p.x2 - s * p.y2));
            const int y2 = ly + static_cast<int>(std::round(s * p.x2 + c * p.y2));
            if (bim.at(x1, y1) < bim.at(x2, y2)) desc.set_bit(i);
        }
        out.first.push_back(kp);
        out.second.push_back(desc);
    }
    return out;
}

std::vector<MatchPair> match_hamming(const std::vector<BinaryDescriptor>& desc_a,
                                     const std::vector<BinaryDescriptor>& desc_b,
                                     double ratio) {
    std::vector<MatchPair> out;
    if (desc_a.empty() || desc_b.empty()) return out;
    for (int ia = 0; ia < static_cast<int>(desc_a.size()); ++ia) {
        int best = 257, second = 257, best_idx = -1;
        for (int ib = 0; ib < static_cast<int>(desc_b.size()); ++ib) {
            const int d = hamming_distance(desc_a[ia], desc_b[ib]);
            if (d < best) {
                second = best;
                best = d;
                best_idx = ib;
            } else if (d < second) {
                second = d;
            }
        }
        if (second > 256) second = 256;  // missing second neighbor counts as maximal
        if (best < ratio * second)
            out.push_back({ia, best_idx, static_cast<float>(best)});
    }
    return out;
}

}  // namespace xaffine
