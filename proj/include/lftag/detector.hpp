#pragma once

#include "lftag/decoder.hpp"
#include "lftag/image.hpp"
#include "lftag/marker.hpp"
#include "lftag/pose.hpp"
#include "lftag/topology.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace lftag {

struct DetectorConfig {
    TagFamily family = TagFamily::standard(3);
    int threshold_window = 16;     // M
    int threshold_offset = 5;      // C
    int dilation = 1;              // delta, L-infinity
    double max_area_ratio = 5.0;   // tau_1
    double min_collinearity_residual = 20.0;  // tau_2, px^2
    double max_error_metric = 0.0005;         // tau_3
    std::optional<CameraIntrinsics> camera;   // unset: f = 320 px, centered principal point
    double tag_side_m = 1.0;

    // Defaults for a family, with tau_3 keyed to n.
    static DetectorConfig defaults(const TagFamily& family);
    CameraIntrinsics camera_for(int width, int height) const;
    void validate() const;

    bool operator==(const DetectorConfig&) const = default;
};

enum class Stage { threshold, topology, keypoints, geometry, initial_pose, decode, final_pose };
inline constexpr std::size_t kStageCount = 7;
std::string_view stage_name(Stage s);

struct StageTimings {
    std::array<double, kStageCount> us{};
    double total_us = 0.0;

    double& operator[](Stage s) { return us[static_cast<std::size_t>(s)]; }
    double operator[](Stage s) const { return us[static_cast<std::size_t>(s)]; }
    StageTimings& operator+=(const StageTimings& o);
};

// Candidates surviving each filter, in pipeline order.
struct StageCounters {
    std::uint64_t topology = 0;
    std::uint64_t area = 0;
    std::uint64_t geometry = 0;
    std::uint64_t angle = 0;
    std::uint64_t collinearity = 0;
    std::uint64_t residual = 0;

    StageCounters& operator+=(const StageCounters& o);
    bool operator==(const StageCounters&) const = default;
};

struct Detection {
    TagFamily family;
    TagId id;
    Pose pose;                  // translation in tag side units
    double tag_side_m = 1.0;
    double error_metric = 0.0;
    double white_area = 0.0;    // px
    BoundingBox white_bbox;
    std::vector<Vec2> centroids;  // n^2 region centroids, marker cell row-major
    KeyPointImage keypoints;
    int k2_position = 0;
    int k3_position = 0;
    double reprojection_rms = 0.0;
    bool pose_refined = true;

    Vec3 translation_m() const { return pose.translation * tag_side_m; }
};

struct DetectionReport {
    std::vector<Detection> detections;  // ordered by raster position of the marker interior
    StageTimings timing;
    StageCounters counters;
};

// Immutable after construction; detect() may be called concurrently.
class Detector {
public:
    explicit Detector(DetectorConfig config);

    DetectionReport detect(const GrayImage& img) const;
    const DetectorConfig& config() const { return config_; }

private:
    DetectorConfig config_;
};

}  // namespace lftag
