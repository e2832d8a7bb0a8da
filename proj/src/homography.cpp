#include "xaffine/homography.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace xaffine {

namespace {

struct Normalization {
    AffineMatrix t1, t2;  // similarity transforms for each point set
};

Normalization normalizing_transforms(const std::vector<PointPair>& pts) {
    double cx1 = 0, cy1 = 0, cx2 = 0, cy2 = 0;
    for (const auto& p : pts) {
        cx1 += p.x1;
        cy1 += p.y1;
        cx2 += p.x2;
        cy2 += p.y2;
    }
    const double n = static_cast<double>(pts.size());
    cx1 /= n;
    cy1 /= n;
    cx2 /= n;
    cy2 /= n;
    double d1 = 0, d2 = 0;
    for (const auto& p : pts) {
        d1 += std::hypot(p.x1 - cx1, p.y1 - cy1);
        d2 += std::hypot(p.x2 - cx2, p.y2 - cy2);
    }
    d1 /= n;
    d2 /= n;
    const double s1 = (d1 > 1e-12) ? std::sqrt(2.0) / d1 : 1.0;
    const double s2 = (d2 > 1e-12) ? std::sqrt(2.0) / d2 : 1.0;
    Normalization norm;
    norm.t1 = AffineMatrix::scaling(s1) * AffineMatrix::translation(-cx1, -cy1);
    norm.t2 = AffineMatrix::scaling(s2) * AffineMatrix::translation(-cx2, -cy2);
    return norm;
}

double symmetric_transfer_error(const AffineMatrix& h, const AffineMatrix& hinv,
                                const PointPair& p) {
    const auto [fx, fy] = map_point_projective(h, p.x1, p.y1);
    const auto [bx, by] = map_point_projective(hinv, p.x2, p.y2);
    return std::max(std::hypot(fx - p.x2, fy - p.y2), std::hypot(bx - p.x1, by - p.y1));
}

bool three_collinear(const PointPair* s[4], bool second_side) {
    for (int a = 0; a < 2; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            for (int c = b + 1; c < 4; ++c) {
                double x1, y1, x2, y2, x3, y3;
                if (!second_side) {
                    x1 = s[a]->x1; y1 = s[a]->y1;
                    x2 = s[b]->x1; y2 = s[b]->y1;
                    x3 = s[c]->x1; y3 = s[c]->y1;
                } else {
                    x1 = s[a]->x2; y1 = s[a]->y2;
                    x2 = s[b]->x2; y2 = s[b]->y2;
                    x3 = s[c]->x2; y3 = s[c]->y2;
                }
                const double cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1);
                const double len = std::hypot(x2 - x1, y2 - y1) * std::hypot(x3 - x1, y3 - y1);
                if (std::abs(cross) < 1e-6 * std::max(len, 1.0)) return true;
            }
        }
    }
    return false;
}

}  // namespace

AffineMatrix fit_homography_dlt(const std::vector<PointPair>& pts) {
    if (pts.size() < 4) throw HomographyError("homography fit needs at least 4 points");
    const Normalization norm = normalizing_transforms(pts);
    Eigen::MatrixXd A(2 * pts.size(), 9);
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto [x1, y1] = map_point(norm.t1, pts[i].x1, pts[i].y1);
        const auto [x2, y2] = map_point(norm.t2, pts[i].x2, pts[i].y2);
        A.row(2 * i) << -x1, -y1, -1, 0, 0, 0, x2 * x1, x2 * y1, x2;
        A.row(2 * i + 1) << 0, 0, 0, -x1, -y1, -1, y2 * x1, y2 * y1, y2;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd hvec = svd.matrixV().col(8);
    AffineMatrix hn;
    for (int i = 0; i < 9; ++i) hn.m[i] = hvec[i];
    AffineMatrix h = invert(norm.t2) * hn * norm.t1;
    if (std::abs(h(2, 2)) > 1e-12) {
        const double w = h(2, 2);
        for (auto& v : h.m) v /= w;
    }
    return h;
}

RansacResult estimate_homography_ransac(const std::vector<PointPair>& pts,
                                        const RansacConfig& cfg) {
    const int n = static_cast<int>(pts.size());
    if (n < 4) throw HomographyError("RANSAC needs at least 4 correspondences");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);

    std::vector<int> best_inliers;
    int iters = cfg.max_iters;
    for (int it = 0; it < iters; ++it) {
        int idx[4];
        idx[0] = pick(rng);
        for (int k = 1; k < 4; ++k) {
            bool dup;
            do {
                idx[k] = pick(rng);
                dup = false;
                for (int j = 0; j < k; ++j) dup |= (idx[j] == idx[k]);
            } while (dup);
        }
        const PointPair* sample[4] = {&pts[idx[0]], &pts[idx[1]], &pts[idx[2]], &pts[idx[3]]};
        if (three_collinear(sample, false) || three_collinear(sample, true)) continue;
        AffineMatrix h;
        try {
            h = fit_homography_dlt({*sample[0], *sample[1], *sample[2], *sample[3]});
        } catch (const GeometryError&) {
            continue;
        }
        AffineMatrix hinv;
        try {
            hinv = invert(h);
        } catch (const GeometryError&) {
            continue;
        }
        std::vector<int> inliers;
        for (int i = 0; i < n; ++i)
            if (symmetric_transfer_error(h, hinv, pts[i]) < cfg.threshold) inliers.push_back(i);
        if (inliers.size() > best_inliers.size()) {
            best_inliers = std::move(inliers);
            // adaptive iteration bound from the current inlier ratio
            const double w = static_cast<double>(best_inliers.size()) / n;
            const double p_outlier = 1.0 - w * w * w * w;
            if (p_outlier < 1e-12) {
                iters = it + 1;
            } else if (p_outlier < 1.0) {
                const double need =
                    std::log(1.0 - cfg.confidence) / std::log(p_outlier);
                iters = std::min(iters, static_cast<int>(std::ceil(need)));
            }
        }
    }
    if (best_inliers.size() < 4) throw HomographyError("no consensus");

    std::vector<PointPair> support;
    support.reserve(best_inliers.size());
    for (int i : best_inliers) support.push_back(pts[i]);
    RansacResult result;
    result.homography = fit_homography_dlt(support);
    // recompute inliers against the refit model
    AffineMatrix hinv = invert(result.homography);
    for (int i = 0; i < n; ++i)
        if (symmetric_transfer_error(result.homography, hinv, pts[i]) < cfg.threshold)
            result.inliers.push_back(i);
    if (result.inliers.size() < 4) result.inliers = best_inliers;
    return result;
}

}  // namespace xaffine
