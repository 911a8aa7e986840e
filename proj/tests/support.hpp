#pragma once

#include "lftag/imgproc.hpp"
#include "lftag/pose.hpp"
#include "lftag/synthcam.hpp"
#include "lftag/topology.hpp"

#include <vector>

namespace lftag::test {

inline std::vector<CandidateMarker> candidates_of(const GrayImage& img, int n) {
    return find_candidates(connected_components_hierarchy(adaptive_threshold(img, 16, 5)), img, n, 5.0, 1);
}

// Ground-truth pixel position of a marker-coordinate point in a render.
inline Vec2 truth_pixel(const RenderSpec& spec, const Vec2& model) {
    return *project(render_pose(spec), spec.camera(), model);
}

inline RenderSpec spec_for(int n, std::uint64_t id, double distance, double tilt = 0.0, double inplane = 0.0) {
    RenderSpec s;
    s.family = TagFamily::standard(n);
    s.id = TagId{id};
    s.distance_m = distance;
    s.tilt_deg = tilt;
    s.inplane_deg = inplane;
    return s;
}

}  // namespace lftag::test
