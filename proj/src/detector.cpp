#include "lftag/detector.hpp"

#include "lftag/imgproc.hpp"
#include "lftag/keypoints.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace lftag {
namespace {

using Clock = std::chrono::steady_clock;

// Accumulates elapsed time into a stage and restarts the stopwatch.
class StageClock {
public:
    explicit StageClock(StageTimings& t) : timings_(t), last_(Clock::now()) {}
    void lap(Stage s) {
        const auto now = Clock::now();
        timings_[s] += std::chrono::duration<double, std::micro>(now - last_).count();
        last_ = now;
    }

private:
    StageTimings& timings_;
    Clock::time_point last_;
};

}  // namespace

DetectorConfig DetectorConfig::defaults(const TagFamily& family) {
    DetectorConfig c;
    c.family = family;
    c.max_error_metric = default_max_error_metric(family.n);
    return c;
}

CameraIntrinsics DetectorConfig::camera_for(int width, int height) const {
    return camera ? *camera : CameraIntrinsics::centered(width, height);
}

void DetectorConfig::validate() const {
    family.validate();
    if (threshold_window < 2) throw std::invalid_argument("threshold window must be >= 2");
    if (threshold_offset < 0) throw std::invalid_argument("threshold offset must be >= 0");
    if (dilation < 0) throw std::invalid_argument("dilation must be >= 0");
    if (!(max_area_ratio > 0.0 && min_collinearity_residual > 0.0 && max_error_metric > 0.0 && tag_side_m > 0.0)) {
        throw std::invalid_argument("detector thresholds must be positive");
    }
    if (camera) camera->validate();
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::threshold: return "threshold";
        case Stage::topology: return "topology";
        case Stage::keypoints: return "keypoints";
        case Stage::geometry: return "geometry";
        case Stage::initial_pose: return "initial_pose";
        case Stage::decode: return "decode";
        case Stage::final_pose: return "final_pose";
    }
    return "?";
}

StageTimings& StageTimings::operator+=(const StageTimings& o) {
    for (std::size_t i = 0; i < kStageCount; ++i) us[i] += o.us[i];
    total_us += o.total_us;
    return *this;
}

StageCounters& StageCounters::operator+=(const StageCounters& o) {
    topology += o.topology;
    area += o.area;
    geometry += o.geometry;
    angle += o.angle;
    collinearity += o.collinearity;
    residual += o.residual;
    return *this;
}

Detector::Detector(DetectorConfig config) : config_(std::move(config)) { config_.validate(); }

DetectionReport Detector::detect(const GrayImage& img) const {
    const auto start = Clock::now();
    DetectionReport rep;
    StageClock clock(rep.timing);
    const TagFamily& fam = config_.family;
    const int n = fam.n;
    const CameraIntrinsics intr = config_.camera_for(img.width, img.height);

    const BinaryImage bin = adaptive_threshold(img, config_.threshold_window, config_.threshold_offset);
    clock.lap(Stage::threshold);

    const RegionTree tree = connected_components_hierarchy(bin);
    CandidateStats cstats;
    const auto candidates = find_candidates(tree, img, n, config_.max_area_ratio, config_.dilation, &cstats);
    rep.counters.topology = cstats.topology;
    rep.counters.area = cstats.area;
    clock.lap(Stage::topology);

    const auto cells = data_cells(fam);
    std::vector<Detection> found;
    for (const CandidateMarker& cand : candidates) {
        const auto kp = identify_keypoints(cand, n);
        clock.lap(Stage::keypoints);
        if (!kp) continue;

        const KeyPointSet& keys = kp->keys;
        std::vector<Vec2> observed;
        observed.reserve(keys.data.size());
        for (int i : keys.data) observed.push_back(keys.point(cand, i));
        const Vec2 k0 = keys.point(cand, keys.k0);
        const Vec2 k1 = keys.point(cand, keys.k1);

        if (!kp->corners_distinct || !geometry_constraint(observed, k0, k1, n)) {
            clock.lap(Stage::geometry);
            continue;
        }
        ++rep.counters.geometry;
        if (!kp->orientation_consistent) {
            clock.lap(Stage::geometry);
            continue;
        }
        ++rep.counters.angle;
        std::vector<Vec2> all;
        for (const auto& r : cand.regions) all.push_back(r.centroid);
        if (!collinearity_constraint(all, config_.min_collinearity_residual)) {
            clock.lap(Stage::geometry);
            continue;
        }
        ++rep.counters.collinearity;
        clock.lap(Stage::geometry);

        const KeyPointImage kimg{k0, k1, keys.point(cand, keys.k2), keys.point(cand, keys.k3)};
        const auto hyps = enumerate_hypotheses(kimg, fam, intr, img);
        clock.lap(Stage::initial_pose);

        const auto index_in_data = [&](int region) {
            return static_cast<int>(std::find(keys.data.begin(), keys.data.end(), region) - keys.data.begin());
        };
        const int k2_obs = index_in_data(keys.k2);
        const int k3_obs = index_in_data(keys.k3);
        const PoseHypothesis* best_h = nullptr;
        std::optional<DecodedMarker> best_dec;
        double best_metric = std::numeric_limits<double>::infinity();
        for (const PoseHypothesis& h : hyps) {
            auto dec = decode_with_pose(h, observed, fam, intr, k2_obs, k3_obs);
            if (!dec) continue;
            const auto metric = decoding_error_metric(dec->residual, static_cast<double>(cand.white_area), h.quality);
            if (metric && *metric < best_metric) {
                best_metric = *metric;
                best_h = &h;
                best_dec = std::move(dec);
            }
        }
        clock.lap(Stage::decode);
        if (!best_h || best_metric > config_.max_error_metric) continue;
        ++rep.counters.residual;

        const FinalPose fp = final_pose(*best_h, *best_dec, k0, k1, observed, fam, intr);
        clock.lap(Stage::final_pose);

        Detection det;
        det.family = fam;
        det.id = best_dec->id;
        det.pose = fp.pose;
        det.tag_side_m = config_.tag_side_m;
        det.error_metric = best_metric;
        det.white_area = static_cast<double>(cand.white_area);
        det.white_bbox = cand.white_bbox;
        det.keypoints = kimg;
        det.k2_position = best_h->k2_position;
        det.k3_position = best_h->k3_position;
        det.reprojection_rms = fp.reprojection_rms;
        det.pose_refined = fp.refined;
        det.centroids.reserve(static_cast<std::size_t>(n * n));
        std::size_t k = 0;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                if (fam.is_baseline_cell(r, c)) {
                    det.centroids.push_back(c == 0 ? k0 : k1);
                } else {
                    det.centroids.push_back(observed[static_cast<std::size_t>(best_dec->cell_to_observed[k++])]);
                }
            }
        }
        found.push_back(std::move(det));
    }

    // Overlapping interiors: keep the lower error metric.
    std::stable_sort(found.begin(), found.end(),
                     [](const Detection& a, const Detection& b) { return a.error_metric < b.error_metric; });
    for (auto& d : found) {
        const bool clash = std::any_of(rep.detections.begin(), rep.detections.end(), [&](const Detection& kept) {
            return kept.white_bbox.intersects(d.white_bbox);
        });
        if (!clash) rep.detections.push_back(std::move(d));
    }
    std::sort(rep.detections.begin(), rep.detections.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.white_bbox.y0, a.white_bbox.x0) < std::tie(b.white_bbox.y0, b.white_bbox.x0);
    });

    rep.timing.total_us = std::chrono::duration<double, std::micro>(Clock::now() - start).count();
    return rep;
}

}  // namespace lftag
