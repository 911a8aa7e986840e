#pragma once

#include "lftag/geometry.hpp"
#include "lftag/topology.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lftag {

// Result of the two-run baseline orientation vote.
struct BaselineOrder {
    bool a_is_k0 = true;      // verdict of the run anchored at B_a
    bool consistent = false;  // both runs agree and neither sum is degenerate
};

// Sum over `others` of the signed angle between from->to and from->r.
double angle_sum(const Vec2& from, const Vec2& to, std::span<const Vec2> others);

BaselineOrder orient_baselines(const Vec2& b_a, const Vec2& b_b, std::span<const Vec2> others);

// (K0, K1) or nullopt when the orientation runs disagree.
std::optional<std::pair<Vec2, Vec2>> oriented_baselines(const Vec2& b_a, const Vec2& b_b,
                                                        std::span<const Vec2> others);

// Indices into `remaining` of K2 (bottom-left) and K3 (bottom-right).
// nullopt when both searches land on the same region.
std::optional<std::pair<int, int>> locate_k2_k3(const Vec2& k0, const Vec2& k1, std::span<const Vec2> remaining,
                                                int n);

// All but at most n-2 of `data_points` must lie strictly below the
// directed line K0->K1 (positive cross product in image coordinates), by
// more than `band_px`.
bool geometry_constraint(std::span<const Vec2> data_points, const Vec2& k0, const Vec2& k1, int n,
                         double band_px = 1.5);

// Sum of squared perpendicular distances to the total-least-squares line
// (the smallest eigenvalue of the scatter matrix), px^2.
double perpendicular_regression_residual(std::span<const Vec2> points);

// Accept unless the points are nearly collinear (residual below min_residual).
bool collinearity_constraint(std::span<const Vec2> points, double min_residual);

// Oriented key points of a candidate. Indices refer to CandidateMarker::regions.
struct KeyPointSet {
    int k0 = -1;
    int k1 = -1;
    int k2 = -1;
    int k3 = -1;
    std::vector<int> data;  // the n^2 - 2 non-baseline regions, candidate order

    Vec2 point(const CandidateMarker& c, int idx) const {
        return c.regions[static_cast<std::size_t>(idx)].centroid;
    }
};

// Baseline pick (two largest zeroth moments), orientation vote and corner
// search, without applying any constraint except structural failures.
struct KeyPointResult {
    KeyPointSet keys;
    bool orientation_consistent = false;
    bool corners_distinct = false;
};
std::optional<KeyPointResult> identify_keypoints(const CandidateMarker& cand, int n);

}  // namespace lftag
