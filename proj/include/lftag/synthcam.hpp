#pragma once

#include "lftag/detector.hpp"
#include "lftag/image.hpp"
#include "lftag/marker.hpp"
#include "lftag/pose.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lftag {

// A marker in front of an ideal pinhole camera. The marker center sits on
// the ray through (principal point + subpixel_offset) at distance_m; the
// marker is tilted about its horizontal axis, then rotated in-plane.
struct RenderSpec {
    TagFamily family = TagFamily::standard(3);
    TagId id;
    double tag_side_m = 1.0;
    double distance_m = 5.0;
    double inplane_deg = 0.0;
    double tilt_deg = 0.0;
    Vec2 subpixel_offset = Vec2::Zero();  // px
    int width = 640;
    int height = 480;
    double fx = 320.0;
    double fy = 320.0;
    double blur_len_px = 0.0;
    double blur_angle_deg = 0.0;  // 0 = vertical, 90 = horizontal
    int supersample = 4;
    std::uint8_t background = 128;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;

    CameraIntrinsics camera() const { return {fx, fy, (width - 1) / 2.0, (height - 1) / 2.0}; }
    void validate() const;
};

// Ground-truth marker-to-camera pose, translation in tag side units.
Pose render_pose(const RenderSpec& spec);

// Pixel edge length of a frontal marker at the spec's distance.
double frontal_edge_px(const RenderSpec& spec);

// Renders with per-pixel supersampling of the continuous marker (no
// intermediate raster), then applies motion blur and optional noise.
// Throws std::invalid_argument when a marker corner is behind the camera.
GrayImage render(const RenderSpec& spec);

// Unit-mass line-segment PSF as sparse taps (dx, dy, weight).
struct KernelTap {
    int dx;
    int dy;
    double weight;
};
std::vector<KernelTap> motion_blur_kernel(double len_px, double angle_deg);

// Convolution with the line-segment PSF, edge-clamped. len 0 is identity.
GrayImage apply_motion_blur(const GrayImage& img, double len_px, double angle_deg);

// --- experiment sweeps -----------------------------------------------------

struct SweepRecord {
    double x = 0.0;  // distance (m), tilt (deg) or blur fraction, per sweep
    double angle = 0.0;  // blur angle for blur sweeps, otherwise 0
    std::string family;
    std::uint64_t id = 0;
    bool detected = false;
    bool decoded_ok = false;
};

struct SweepPoint {
    double x = 0.0;
    int total = 0;
    int detected = 0;
    int decoded_ok = 0;
    double success_rate() const { return total ? double(decoded_ok) / total : 0.0; }
};

struct FamilySweep {
    std::string family;
    double angle = 0.0;  // blur angle, blur sweeps only
    std::vector<SweepPoint> points;  // ascending x
    std::optional<double> first_miss;
    std::optional<double> miss20;
};

struct SweepResult {
    std::string kind;
    std::vector<FamilySweep> series;
    std::vector<SweepRecord> records;  // deterministic grid order
};

struct SweepOptions {
    std::vector<TagFamily> families{TagFamily::standard(3), TagFamily::standard(4)};
    int ids_per_family = 10;
    std::uint64_t seed = 1;
    bool refine = true;  // re-sample the bracket before the first miss at the fine step
};

// Random ids and sub-pixel offsets for a family, fixed by the seed.
struct SweepTarget {
    TagId id;
    Vec2 offset;
};
std::vector<SweepTarget> sweep_targets(const TagFamily& family, int count, std::uint64_t seed);

struct RangeGrid {
    double start = 2.0;
    double stop = 40.0;
    double coarse_step = 0.5;
    double fine_step = 0.1;
};
SweepResult sweep_range(const SweepOptions& opt, const RangeGrid& grid = {});

struct AngleGrid {
    double distance_m = 3.0;
    double start = 0.0;
    double stop = 88.0;
    double coarse_step = 2.0;
    double fine_step = 0.5;
};
SweepResult sweep_angle(const SweepOptions& opt, const AngleGrid& grid = {});

struct BlurGrid {
    double distance_m = 5.0;
    std::vector<double> angles_deg{0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0};
    double max_fraction = 0.15;  // of the frontal edge length
    double step = 0.005;
};
SweepResult sweep_blur(const SweepOptions& opt, const BlurGrid& grid = {});

// Smallest x with any miss / with miss rate >= 0.2.
std::optional<double> first_miss(const std::vector<SweepPoint>& pts);
std::optional<double> miss_rate_crossing(const std::vector<SweepPoint>& pts, double rate);

}  // namespace lftag
