#include "lftag/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace lftag {
namespace {

constexpr double kAmbiguousRmsRatio = 1.25;

CellIndex k2_cell(const TagFamily& f) { return {f.n - 1, 0}; }
CellIndex k3_cell(const TagFamily& f) { return {f.n - 1, f.n - 1}; }

}  // namespace

std::array<Vec2, 4> keypoint_model(const TagFamily& family, int k2_position, int k3_position) {
    return {family.cell_center(0, 0), family.cell_center(0, family.n - 1),
            data_position(family, k2_cell(family), k2_position),
            data_position(family, k3_cell(family), k3_position)};
}

std::vector<PoseHypothesis> enumerate_hypotheses(const KeyPointImage& keys, const TagFamily& family,
                                                 const CameraIntrinsics& intr, const GrayImage& img) {
    const std::array<Vec2, 4> image{keys.k0, keys.k1, keys.k2, keys.k3};
    std::vector<PoseHypothesis> out;
    out.reserve(16);
    for (int p2 = 0; p2 < 4; ++p2) {
        for (int p3 = 0; p3 < 4; ++p3) {
            const auto model = keypoint_model(family, p2, p3);
            const auto sols = solve_planar_pnp(model, image, intr);
            if (!sols) continue;

            const auto q0 = pose_quality(img, (*sols)[0].pose, intr, family);
            int pick = 0;
            std::optional<double> quality = q0;
            if ((*sols)[1].reprojection_rms <= kAmbiguousRmsRatio * (*sols)[0].reprojection_rms) {
                const auto q1 = pose_quality(img, (*sols)[1].pose, intr, family);
                if (q1 && (!q0 || *q1 > *q0)) {
                    pick = 1;
                    quality = q1;
                }
            }
            if (!quality) continue;
            const PoseCandidate& c = (*sols)[static_cast<std::size_t>(pick)];
            out.push_back({p2, p3, c.pose, *quality, c.reprojection_rms});
        }
    }
    return out;
}

std::optional<DecodedMarker> decode_with_pose(const PoseHypothesis& h, std::span<const Vec2> observed,
                                              const TagFamily& family, const CameraIntrinsics& intr,
                                              int k2_observed, int k3_observed) {
    const auto cells = data_cells(family);
    if (observed.size() != cells.size()) return std::nullopt;

    struct Pair {
        double d2;
        int cell;
        int pos;
        int obs;
    };
    std::vector<Pair> pairs;
    pairs.reserve(cells.size() * 4 * observed.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (int p = 0; p < 4; ++p) {
            const auto px = project(h.pose, intr, data_position(family, cells[c], p));
            if (!px) return std::nullopt;
            for (std::size_t o = 0; o < observed.size(); ++o) {
                pairs.push_back({(*px - observed[o]).squaredNorm(), static_cast<int>(c), p, static_cast<int>(o)});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.d2, a.cell, a.pos, a.obs) < std::tie(b.d2, b.cell, b.pos, b.obs);
    });

    DecodedMarker dec;
    dec.cell_to_observed.assign(cells.size(), -1);
    dec.cell_position.assign(cells.size(), -1);
    std::vector<bool> used(observed.size(), false);
    std::size_t assigned = 0;
    for (const Pair& pr : pairs) {
        if (dec.cell_to_observed[static_cast<std::size_t>(pr.cell)] >= 0 || used[static_cast<std::size_t>(pr.obs)]) {
            continue;
        }
        dec.cell_to_observed[static_cast<std::size_t>(pr.cell)] = pr.obs;
        dec.cell_position[static_cast<std::size_t>(pr.cell)] = pr.pos;
        used[static_cast<std::size_t>(pr.obs)] = true;
        dec.residual += pr.d2;
        if (++assigned == cells.size()) break;
    }
    if (assigned != cells.size()) return std::nullopt;

    const auto corner_ok = [&](CellIndex cell, int want_pos, int want_obs) {
        const auto it = std::find(cells.begin(), cells.end(), cell);
        const auto k = static_cast<std::size_t>(it - cells.begin());
        if (dec.cell_position[k] != want_pos) return false;
        return want_obs < 0 || dec.cell_to_observed[k] == want_obs;
    };
    if (!corner_ok(k2_cell(family), h.k2_position, k2_observed) ||
        !corner_ok(k3_cell(family), h.k3_position, k3_observed)) {
        return std::nullopt;
    }

    std::uint64_t value = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        value |= static_cast<std::uint64_t>(dec.cell_position[k]) << (2 * k);
    }
    dec.id = TagId{value};
    return dec;
}

std::optional<double> decoding_error_metric(double residual, double white_area, double quality) {
    if (!(quality > 0.0) || !(white_area > 0.0)) return std::nullopt;
    return residual / std::sqrt(white_area) / quality;
}

double default_max_error_metric(int n) { return n <= 3 ? 0.0005 : 0.001; }

FinalPose final_pose(const PoseHypothesis& winner, const DecodedMarker& decoded, const Vec2& k0, const Vec2& k1,
                     std::span<const Vec2> observed, const TagFamily& family, const CameraIntrinsics& intr) {
    const auto cells = data_cells(family);
    std::vector<Vec2> model{family.cell_center(0, 0), family.cell_center(0, family.n - 1)};
    std::vector<Vec2> image{k0, k1};
    for (std::size_t k = 0; k < cells.size(); ++k) {
        model.push_back(data_position(family, cells[k], decoded.cell_position[k]));
        image.push_back(observed[static_cast<std::size_t>(decoded.cell_to_observed[k])]);
    }

    FinalPose out{winner.pose, reprojection_rms(winner.pose, intr, model, image), false};
    const auto sols = solve_planar_pnp(model, image, intr);
    if (sols && std::isfinite((*sols)[0].reprojection_rms)) {
        out.pose = (*sols)[0].pose;
        out.reprojection_rms = (*sols)[0].reprojection_rms;
        out.refined = true;
    }
    return out;
}

}  // namespace lftag
