#include "xaffine/sift.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace xaffine {

namespace {

constexpr int kScalesPerOctave = 3;
constexpr double kBaseSigma = 1.6;
constexpr double kInitialBlur = 0.5;  // assumed blur of the input image
constexpr double kContrastThreshold = 0.03;
constexpr double kEdgeRatio = 10.0;
constexpr int kOrientationBins = 36;
constexpr float kOrientationPeakRatio = 0.8f;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr float kDescMagnitudeClip = 0.2f;
constexpr float kDescNorm = 512.f;
constexpr int kMinImageSide = 64;
constexpr int kMaxRefineSteps = 5;

struct Pyramid {
    // gauss[o] has kScalesPerOctave + 3 images, dog[o] one fewer
    std::vector<std::vector<GrayImage>> gauss;
    std::vector<std::vector<GrayImage>> dog;
};

GrayImage halve(const GrayImage& img) {
    GrayImage out(img.width / 2, img.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

GrayImage upsample2x(const GrayImage& img) {
    return resize_bilinear(img, img.width * 2, img.height * 2);
}

Pyramid build_pyramid(const GrayImage& img) {
    Pyramid pyr;
    GrayImage base = upsample2x(img);
    // after 2x upsampling the assumed blur doubles
    const double sigma_diff =
        std::sqrt(std::max(kBaseSigma * kBaseSigma - 4.0 * kInitialBlur * kInitialBlur, 0.01));
    base = gaussian_blur(base, sigma_diff);

    const int n_images = kScalesPerOctave + 3;
    const double k = std::pow(2.0, 1.0 / kScalesPerOctave);
    std::vector<double> inc(n_images, 0.0);
    double prev = kBaseSigma;
    for (int i = 1; i < n_images; ++i) {
        const double total = kBaseSigma * std::pow(k, i);
        inc[i] = std::sqrt(total * total - prev * prev);
        prev = total;
    }
    const int n_octaves = std::max(
        1, static_cast<int>(std::floor(std::log2(std::min(base.width, base.height)))) - 4);
    for (int o = 0; o < n_octaves; ++o) {
        std::vector<GrayImage> octave;
        octave.reserve(n_images);
        octave.push_back(o == 0 ? std::move(base)
                                : halve(pyr.gauss[o - 1][kScalesPerOctave]));
        for (int i = 1; i < n_images; ++i)
            octave.push_back(gaussian_blur(octave[i - 1], inc[i]));
        std::vector<GrayImage> dogs;
        dogs.reserve(n_images - 1);
        for (int i = 0; i + 1 < n_images; ++i) {
            GrayImage d(octave[i].width, octave[i].height);
            for (size_t p = 0; p < d.size(); ++p)
                d.data[p] = octave[i + 1].data[p] - octave[i].data[p];
            dogs.push_back(std::move(d));
        }
        pyr.gauss.push_back(std::move(octave));
        pyr.dog.push_back(std::move(dogs));
    }
    return pyr;
}

/// Recovers (octave, gaussian layer) from a keypoint's stored sigma so that
/// detection and description address the same pyramid image.
std::pair<int, int> pyramid_position(float octave_scale, int n_octaves) {
    const double t = kScalesPerOctave * std::log2(octave_scale * 2.0 / kBaseSigma);
    int o = static_cast<int>(std::floor((t - 0.5) / kScalesPerOctave));
    o = std::clamp(o, 0, n_octaves - 1);
    int l = static_cast<int>(std::lround(t - o * kScalesPerOctave));
    l = std::clamp(l, 1, kScalesPerOctave);
    return {o, l};
}

float orientation_histogram_peak(const GrayImage& img, int x, int y, double scl_octv,
                                 float hist_out[kOrientationBins]) {
    const int radius = static_cast<int>(std::round(4.5 * scl_octv));
    const double weight_factor = -1.0 / (2.0 * (1.5 * scl_octv) * (1.5 * scl_octv));
    float raw[kOrientationBins] = {0};
    for (int dy = -radius; dy <= radius; ++dy) {
        const int py = y + dy;
        if (py <= 0 || py >= img.height - 1) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
            const int px = x + dx;
            if (px <= 0 || px >= img.width - 1) continue;
            const double gx = img.at(px + 1, py) - img.at(px - 1, py);
            const double gy = img.at(px, py - 1) - img.at(px, py + 1);
            const double mag = std::sqrt(gx * gx + gy * gy);
            const double ang = std::atan2(gy, gx);
            const double w = std::exp(weight_factor * (dx * dx + dy * dy));
            int bin = static_cast<int>(std::round(kOrientationBins * (ang + M_PI) / (2 * M_PI)));
            if (bin >= kOrientationBins) bin -= kOrientationBins;
            if (bin < 0) bin += kOrientationBins;
            raw[bin] += static_cast<float>(w * mag);
        }
    }
    // circular [1 4 6 4 1]/16 smoothing
    float peak = 0;
    for (int i = 0; i < kOrientationBins; ++i) {
        const int n = kOrientationBins;
        hist_out[i] = (raw[(i - 2 + n) % n] + raw[(i + 2) % n]) * (1.f / 16) +
                      (raw[(i - 1 + n) % n] + raw[(i + 1) % n]) * (4.f / 16) +
                      raw[i] * (6.f / 16);
        peak = std::max(peak, hist_out[i]);
    }
    return peak;
}

struct Candidate {
    float x, y;          // original-image coordinates
    float sigma;         // original-image scale
    float response;      // |refined DoG value|, normalized intensity
    int octave, layer;   // pyramid address
    float col, row;      // refined octave-local position
    float scl_octv;      // octave-local scale
};

bool refine_extremum(const std::vector<GrayImage>& dog, int& layer, int& r, int& c,
                     float& xr, float& xc, float& xs, float& contrast) {
    const float img_scale = 1.f / 255.f;
    for (int step = 0;; ++step) {
        if (step >= kMaxRefineSteps) return false;
        const GrayImage& cur = dog[layer];
        const GrayImage& prv = dog[layer - 1];
        const GrayImage& nxt = dog[layer + 1];
        const float dx = (cur.at(c + 1, r) - cur.at(c - 1, r)) * 0.5f * img_scale;
        const float dy = (cur.at(c, r + 1) - cur.at(c, r - 1)) * 0.5f * img_scale;
        const float ds = (nxt.at(c, r) - prv.at(c, r)) * 0.5f * img_scale;
        const float v2 = cur.at(c, r) * 2 * img_scale;
        const float dxx = (cur.at(c + 1, r) + cur.at(c - 1, r)) * img_scale - v2;
        const float dyy = (cur.at(c, r + 1) + cur.at(c, r - 1)) * img_scale - v2;
        const float dss = (nxt.at(c, r) + prv.at(c, r)) * img_scale - v2;
        const float dxy = (cur.at(c + 1, r + 1) - cur.at(c - 1, r + 1) - cur.at(c + 1, r - 1) +
                           cur.at(c - 1, r - 1)) * 0.25f * img_scale;
        const float dxs = (nxt.at(c + 1, r) - nxt.at(c - 1, r) - prv.at(c + 1, r) +
                           prv.at(c - 1, r)) * 0.25f * img_scale;
        const float dys = (nxt.at(c, r + 1) - nxt.at(c, r - 1) - prv.at(c, r + 1) +
                           prv.at(c, r - 1)) * 0.25f * img_scale;
        // solve H * X = -g for the 3x3 Hessian
        const double H[3][3] = {{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}};
        const double det = H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[2][1]) -
                           H[0][1] * (H[1][0] * H[2][2] - H[1][2] * H[2][0]) +
                           H[0][2] * (H[1][0] * H[2][1] - H[1][1] * H[2][0]);
        if (std::abs(det) < 1e-20) return false;
        auto solve = [&](int i) {
            double M[3][3];
            std::memcpy(M, H, sizeof(M));
            M[0][i] = -dx;
            M[1][i] = -dy;
            M[2][i] = -ds;
            return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                    M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                    M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])) / det;
        };
        xc = static_cast<float>(solve(0));
        xr = static_cast<float>(solve(1));
        xs = static_cast<float>(solve(2));
        if (std::abs(xc) < 0.5f && std::abs(xr) < 0.5f && std::abs(xs) < 0.5f) {
            contrast = cur.at(c, r) * img_scale + 0.5f * (dx * xc + dy * xr + ds * xs);
            // edge response on the 2x2 spatial Hessian
            const float tr = dxx + dyy;
            const float det2 = dxx * dyy - dxy * dxy;
            if (det2 <= 0) return false;
            if (tr * tr * kEdgeRatio >= (kEdgeRatio + 1) * (kEdgeRatio + 1) * det2)
                return false;
            return std::abs(contrast) * kScalesPerOctave >= kContrastThreshold;
        }
        if (std::abs(xc) > 1e6 || std::abs(xr) > 1e6 || std::abs(xs) > 1e6) return false;
        c += static_cast<int>(std::lround(xc));
        r += static_cast<int>(std::lround(xr));
        layer += static_cast<int>(std::lround(xs));
        const int border = 5;
        if (layer < 1 || layer > kScalesPerOctave || c < border || c >= cur.width - border ||
            r < border || r >= cur.height - border)
            return false;
    }
}

void append_descriptor(const GrayImage& img, float col, float row, float angle,
                       double scl_octv, GradientDescriptor& out) {
    const int d = kDescWidth, n = kDescBins;
    // row offsets are y-down while the angle is measured y-up, so the grid
    // rotation uses +angle to align with the gradient convention below
    const float cos_t = std::cos(angle), sin_t = std::sin(angle);
    const float bins_per_rad = n / (2 * static_cast<float>(M_PI));
    const float exp_scale = -1.f / (d * d * 0.5f);
    const float hist_width = 3.f * static_cast<float>(scl_octv);
    int radius = static_cast<int>(std::round(hist_width * std::sqrt(2.f) * (d + 1) * 0.5f));
    radius = std::min(radius, static_cast<int>(std::sqrt(double(img.width) * img.width +
                                                         double(img.height) * img.height)));
    const float ct = cos_t / hist_width, st = sin_t / hist_width;
    // (d+2)^2 * (n+2) accumulation grid with wrap in the orientation axis
    std::vector<float> hist((d + 2) * (d + 2) * (n + 2), 0.f);
    const int icol = static_cast<int>(std::round(col));
    const int irow = static_cast<int>(std::round(row));
    for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
            const float c_rot = j * ct - i * st;
            const float r_rot = j * st + i * ct;
            const float rbin = r_rot + d / 2 - 0.5f;
            const float cbin = c_rot + d / 2 - 0.5f;
            const int py = irow + i, px = icol + j;
            if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d || px <= 0 ||
                px >= img.width - 1 || py <= 0 || py >= img.height - 1)
                continue;
            const float gx = img.at(px + 1, py) - img.at(px - 1, py);
            const float gy = img.at(px, py - 1) - img.at(px, py + 1);
            const float mag = std::sqrt(gx * gx + gy * gy);
            float theta = std::atan2(gy, gx) - angle;
            while (theta < 0) theta += 2 * static_cast<float>(M_PI);
            while (theta >= 2 * static_cast<float>(M_PI)) theta -= 2 * static_cast<float>(M_PI);
            const float obin = theta * bins_per_rad;
            const float w = std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale) * mag;

            int r0 = static_cast<int>(std::floor(rbin));
            int c0 = static_cast<int>(std::floor(cbin));
            int o0 = static_cast<int>(std::floor(obin));
            const float rb = rbin - r0, cb = cbin - c0, ob = obin - o0;
            if (o0 >= n) o0 -= n;
            // trilinear weights into the 8 surrounding cells
            for (int dr = 0; dr <= 1; ++dr) {
                const int rr = r0 + dr + 1;
                if (rr < 0 || rr >= d + 2) continue;
                const float wr = w * (dr ? rb : 1 - rb);
                for (int dc = 0; dc <= 1; ++dc) {
                    const int cc = c0 + dc + 1;
                    if (cc < 0 || cc >= d + 2) continue;
                    const float wc = wr * (dc ? cb : 1 - cb);
                    for (int dorient = 0; dorient <= 1; ++dorient) {
                        const float wo = wc * (dorient ? ob : 1 - ob);
                        hist[(rr * (d + 2) + cc) * (n + 2) + o0 + dorient] += wo;
                    }
                }
            }
        }
    }
    // fold the wrapped orientation bins and collect the d*d*n vector
    float vec[kDescWidth * kDescWidth * kDescBins];
    int idx = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            float* cell = &hist[((i + 1) * (d + 2) + (j + 1)) * (n + 2)];
            cell[0] += cell[n];
            cell[1] += cell[n + 1];
            for (int k = 0; k < n; ++k) vec[idx++] = cell[k];
        }
    }
    double norm = 0;
    for (float v : vec) norm += double(v) * v;
    const float thr = static_cast<float>(std::sqrt(norm)) * kDescMagnitudeClip;
    norm = 0;
    for (float& v : vec) {
        v = std::min(v, thr);
        norm += double(v) * v;
    }
    const float scale = kDescNorm / static_cast<float>(std::max(std::sqrt(norm), 1e-12));
    for (int i = 0; i < kDescWidth * kDescWidth * kDescBins; ++i)
        out.values[i] = vec[i] * scale;
}

void sort_and_cap(std::vector<Keypoint>& kps, int max_points) {
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(kps.size()) > max_points) kps.resize(max_points);
}

}  // namespace

std::vector<Keypoint> detect_dog_keypoints(const GrayImage& img, int max_points) {
    if (img.width < kMinImageSide || img.height < kMinImageSide || max_points <= 0) return {};
    const Pyramid pyr = build_pyramid(img);
    const float prelim = static_cast<float>(0.5 * kContrastThreshold / kScalesPerOctave * 255.0);

    std::vector<Keypoint> kps;
    for (int o = 0; o < static_cast<int>(pyr.dog.size()); ++o) {
        const auto& dogs = pyr.dog[o];
        const int w = dogs[0].width, h = dogs[0].height;
        const int border = 5;
        for (int layer = 1; layer <= kScalesPerOctave; ++layer) {
            const GrayImage& cur = dogs[layer];
            const GrayImage& prv = dogs[layer - 1];
            const GrayImage& nxt = dogs[layer + 1];
            for (int r = border; r < h - border; ++r) {
                for (int c = border; c < w - border; ++c) {
                    const float v = cur.at(c, r);
                    if (std::abs(v) <= prelim) continue;
                    bool is_max = true, is_min = true;
                    for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            for (const GrayImage* im : {&prv, &cur, &nxt}) {
                                if (im == &cur && dx == 0 && dy == 0) continue;
                                const float nv = im->at(c + dx, r + dy);
                                if (nv >= v) is_max = false;
                                if (nv <= v) is_min = false;
                            }
                        }
                    }
                    if (!is_max && !is_min) continue;

                    int ll = layer, rr = r, cc = c;
                    float xr, xc, xs, contrast;
                    if (!refine_extremum(dogs, ll, rr, cc, xr, xc, xs, contrast)) continue;

                    const double scl_octv =
                        kBaseSigma * std::pow(2.0, (ll + xs) / kScalesPerOctave);
                    Keypoint kp;
                    const double oct_factor = std::pow(2.0, o);
                    kp.x = static_cast<float>((cc + xc) * oct_factor * 0.5);
                    kp.y = static_cast<float>((rr + xr) * oct_factor * 0.5);
                    kp.octave_scale = static_cast<float>(scl_octv * oct_factor * 0.5);
                    kp.response = std::abs(contrast);

                    float hist[kOrientationBins];
                    const float peak = orientation_histogram_peak(pyr.gauss[o][ll], cc, rr,
                                                                  scl_octv, hist);
                    if (peak <= 0) continue;
                    const float thr = peak * kOrientationPeakRatio;
                    for (int bin = 0; bin < kOrientationBins; ++bin) {
                        const int l = (bin - 1 + kOrientationBins) % kOrientationBins;
                        const int rbin = (bin + 1) % kOrientationBins;
                        if (hist[bin] < thr || hist[bin] <= hist[l] || hist[bin] <= hist[rbin])
                            continue;
                        float fbin = bin + 0.5f * (hist[l] - hist[rbin]) /
                                               (hist[l] - 2 * hist[bin] + hist[rbin]);
                        if (fbin < 0) fbin += kOrientationBins;
                        if (fbin >= kOrientationBins) fbin -= kOrientationBins;
                        kp.orientation = static_cast<float>(
                            fbin * 2 * M_PI / kOrientationBins - M_PI);
                        kps.push_back(kp);
                    }
                }
            }
        }
    }
    sort_and_cap(kps, max_points);
    return kps;
}

std::pair<std::vector<Keypoint>, std::vector<GradientDescriptor>> describe_gradient(
    const GrayImage& img, const std::vector<Keypoint>& kps) {
    std::pair<std::vector<Keypoint>, std::vector<GradientDescriptor>> out;
    if (img.width < kMinImageSide || img.height < kMinImageSide) return out;
    const Pyramid pyr = build_pyramid(img);
    const int n_octaves = static_cast<int>(pyr.gauss.size());
    for (const auto& kp : kps) {
        if (kp.octave_scale <= 0) continue;
        const auto [o, l] = pyramid_position(kp.octave_scale, n_octaves);
        const GrayImage& im = pyr.gauss[o][l];
        const double oct_factor = std::pow(2.0, o) * 0.5;
        const float col = static_cast<float>(kp.x / oct_factor);
        const float row = static_cast<float>(kp.y / oct_factor);
        const double scl_octv = kp.octave_scale / oct_factor;
        const float hist_width = 3.f * static_cast<float>(scl_octv);
        const int radius =
            static_cast<int>(std::round(hist_width * std::sqrt(2.f) * (kDescWidth + 1) * 0.5f));
        if (col < radius || row < radius || col >= im.width - radius ||
            row >= im.height - radius)
            continue;
        GradientDescriptor desc;
        append_descriptor(im, col, row, kp.orientation, scl_octv, desc);
        out.first.push_back(kp);
        out.second.push_back(desc);
    }
    return out;
}

std::vector<MatchPair> match_ratio(const std::vector<GradientDescriptor>& desc_a,
                                   const std::vector<GradientDescriptor>& desc_b,
                                   double ratio) {
    std::vector<MatchPair> out;
    if (desc_a.empty() || desc_b.empty()) return out;
    for (int ia = 0; ia < static_cast<int>(desc_a.size()); ++ia) {
        const auto& a = desc_a[ia].values;
        double best = 1e30, second = 1e30;
        int best_idx = -1;
        for (int ib = 0; ib < static_cast<int>(desc_b.size()); ++ib) {
            const auto& b = desc_b[ib].values;
            float acc = 0;
            for (int k = 0; k < 128; ++k) {
                const float d = a[k] - b[k];
                acc += d * d;
            }
            if (acc < best) {
                second = best;
                best = acc;
                best_idx = ib;
            } else if (acc < second) {
                second = acc;
            }
        }
        const double d1 = std::sqrt(best);
        const double d2 = (second < 1e30) ? std::sqrt(second) : 1024.0;
        if (d1 < ratio * std::min(d2, 1024.0))
            out.push_back({ia, best_idx, static_cast<float>(d1)});
    }
    return out;
}

}  // namespace xaffine
