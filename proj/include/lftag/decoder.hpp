#pragma once

#include "lftag/keypoints.hpp"
#include "lftag/marker.hpp"
#include "lftag/pose.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lftag {

// One assumed placement of the two data-carrying corner regions, with the
// pose it implies.
struct PoseHypothesis {
    int k2_position = 0;  // legal position index of cell (n-1, 0)
    int k3_position = 0;  // legal position index of cell (n-1, n-1)
    Pose pose;
    double quality = 0.0;
    double reprojection_rms = 0.0;
};

// Image points of the four key points, in K0..K3 order.
struct KeyPointImage {
    Vec2 k0, k1, k2, k3;
};

// Marker coordinates of K0..K3 under a corner placement.
std::array<Vec2, 4> keypoint_model(const TagFamily& family, int k2_position, int k3_position);

// Solves 4-point planar PnP for each of the 16 corner placements and scores
// each with pose_quality. When the two pose candidates' reprojection errors
// are within 25% of each other, the one with higher quality is kept.
// Placements whose PnP or quality evaluation fails are dropped.
std::vector<PoseHypothesis> enumerate_hypotheses(const KeyPointImage& keys, const TagFamily& family,
                                                 const CameraIntrinsics& intr, const GrayImage& img);

struct DecodedMarker {
    TagId id;
    double residual = 0.0;            // sum of squared px distances
    std::vector<int> cell_to_observed;  // per data cell (data_cells order), index into `observed`
    std::vector<int> cell_position;     // per data cell, legal position 0..3
};

// Projects every data cell's four legal positions and greedily matches
// (cell, position) pairs to observed centroids in ascending distance, each
// cell and each observed centroid used once. The hypothesis is discarded
// (nullopt) when a cell goes unmatched or when a corner cell's match
// contradicts the hypothesis: it must use the assumed position and the
// observed centroid at the given corner index (-1 skips the identity check).
std::optional<DecodedMarker> decode_with_pose(const PoseHypothesis& h, std::span<const Vec2> observed,
                                              const TagFamily& family, const CameraIntrinsics& intr,
                                              int k2_observed = -1, int k3_observed = -1);

// (residual / sqrt(white_area)) / quality; nullopt when quality or area is not positive.
std::optional<double> decoding_error_metric(double residual, double white_area, double quality);

// Default acceptance threshold on the decoding error metric.
double default_max_error_metric(int n);

struct FinalPose {
    Pose pose;
    double reprojection_rms = 0.0;
    bool refined = false;  // false: fell back to the hypothesis pose
};

// PnP over all n^2 correspondences once every region's marker position is
// known. k0 and k1 are the baseline image points; `observed` and the
// decoded assignment supply the data regions.
FinalPose final_pose(const PoseHypothesis& winner, const DecodedMarker& decoded, const Vec2& k0, const Vec2& k1,
                     std::span<const Vec2> observed, const TagFamily& family, const CameraIntrinsics& intr);

}  // namespace lftag
