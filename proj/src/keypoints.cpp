#include "lftag/keypoints.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lftag {
namespace {

constexpr double kDegenerateAngleSum = 1e-9;

// Among `pts`, the n-1 making the widest angle with anchor->toward, then the
// farthest of those from the anchor.
int widest_then_farthest(const Vec2& anchor, const Vec2& toward, std::span<const Vec2> pts, int n) {
    const Vec2 base = toward - anchor;
    std::vector<double> ang(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ang[i] = std::abs(signed_angle(base, pts[i] - anchor));
    std::vector<int> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return ang[static_cast<std::size_t>(a)] > ang[static_cast<std::size_t>(b)];
    });
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(n - 1)));
    int best = order.front();
    double best_d = -1.0;
    for (int i : order) {
        const double d = (pts[static_cast<std::size_t>(i)] - anchor).squaredNorm();
        if (d > best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

double angle_sum(const Vec2& from, const Vec2& to, std::span<const Vec2> others) {
    const Vec2 base = to - from;
    double sum = 0.0;
    for (const Vec2& r : others) sum += signed_angle(base, r - from);
    return sum;
}

BaselineOrder orient_baselines(const Vec2& b_a, const Vec2& b_b, std::span<const Vec2> others) {
    const double s1 = angle_sum(b_a, b_b, others);
    const double s2 = angle_sum(b_b, b_a, others);
    BaselineOrder out;
    out.a_is_k0 = s1 > 0.0;
    const bool second_says_a = !(s2 > 0.0);
    out.consistent = std::abs(s1) > kDegenerateAngleSum && std::abs(s2) > kDegenerateAngleSum &&
                     out.a_is_k0 == second_says_a && b_a != b_b;
    return out;
}

std::optional<std::pair<Vec2, Vec2>> oriented_baselines(const Vec2& b_a, const Vec2& b_b,
                                                        std::span<const Vec2> others) {
    const BaselineOrder o = orient_baselines(b_a, b_b, others);
    if (!o.consistent) return std::nullopt;
    return o.a_is_k0 ? std::pair{b_a, b_b} : std::pair{b_b, b_a};
}

std::optional<std::pair<int, int>> locate_k2_k3(const Vec2& k0, const Vec2& k1, std::span<const Vec2> remaining,
                                                int n) {
    if (n < 2 || remaining.empty()) return std::nullopt;
    const int k2 = widest_then_farthest(k0, k1, remaining, n);
    const int k3 = widest_then_farthest(k1, k0, remaining, n);
    if (k2 == k3) return std::nullopt;
    return std::pair{k2, k3};
}

bool geometry_constraint(std::span<const Vec2> data_points, const Vec2& k0, const Vec2& k1, int n, double band_px) {
    const Vec2 dir = k1 - k0;
    const double len = dir.norm();
    if (!(len > 0.0)) return false;
    int below = 0;
    for (const Vec2& p : data_points) {
        if (cross2(dir, p - k0) / len > band_px) ++below;
    }
    const int off_side = static_cast<int>(data_points.size()) - below;
    return off_side <= n - 2;
}

double perpendicular_regression_residual(std::span<const Vec2> points) {
    if (points.size() < 2) return 0.0;
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Mat2 scatter = Mat2::Zero();
    for (const Vec2& p : points) {
        const Vec2 d = p - mean;
        scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat2> es(scatter, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues()(0));
}

bool collinearity_constraint(std::span<const Vec2> points, double min_residual) {
    return perpendicular_regression_residual(points) >= min_residual;
}

std::optional<KeyPointResult> identify_keypoints(const CandidateMarker& cand, int n) {
    const auto& regs = cand.regions;
    if (regs.size() < 4 || static_cast<int>(regs.size()) != n * n) return std::nullopt;

    std::vector<int> order(regs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const CandidateRegion& ra = regs[static_cast<std::size_t>(a)];
        const CandidateRegion& rb = regs[static_cast<std::size_t>(b)];
        if (ra.zeroth_moment != rb.zeroth_moment) return ra.zeroth_moment > rb.zeroth_moment;
        if (ra.area != rb.area) return ra.area > rb.area;
        return ra.node < rb.node;
    });
    const int ia = order[0];
    const int ib = order[1];

    KeyPointResult res;
    std::vector<Vec2> others;
    for (int i = 0; i < static_cast<int>(regs.size()); ++i) {
        if (i == ia || i == ib) continue;
        res.keys.data.push_back(i);
        others.push_back(regs[static_cast<std::size_t>(i)].centroid);
    }
    const Vec2& a = regs[static_cast<std::size_t>(ia)].centroid;
    const Vec2& b = regs[static_cast<std::size_t>(ib)].centroid;
    const BaselineOrder o = orient_baselines(a, b, others);
    res.orientation_consistent = o.consistent;
    res.keys.k0 = o.a_is_k0 ? ia : ib;
    res.keys.k1 = o.a_is_k0 ? ib : ia;

    const Vec2& k0 = regs[static_cast<std::size_t>(res.keys.k0)].centroid;
    const Vec2& k1 = regs[static_cast<std::size_t>(res.keys.k1)].centroid;
    if (const auto corners = locate_k2_k3(k0, k1, others, n)) {
        res.keys.k2 = res.keys.data[static_cast<std::size_t>(corners->first)];
        res.keys.k3 = res.keys.data[static_cast<std::size_t>(corners->second)];
        res.corners_distinct = true;
    }
    return res;
}

}  // namespace lftag
