#pragma once

#include "lftag/geometry.hpp"
#include "lftag/image.hpp"
#include "lftag/marker.hpp"

#include <array>
#include <optional>
#include <span>

namespace lftag {

// Ideal pinhole camera. Pixel centers at integer coordinates.
struct CameraIntrinsics {
    double fx = 320.0;
    double fy = 320.0;
    double cx = 319.5;
    double cy = 239.5;

    // Principal point at the image center.
    static CameraIntrinsics centered(int width, int height, double focal = 320.0);

    Vec2 to_normalized(const Vec2& px) const { return {(px.x() - cx) / fx, (px.y() - cy) / fy}; }
    Vec2 to_pixel(const Vec2& n) const { return {fx * n.x() + cx, fy * n.y() + cy}; }
    Mat3 matrix() const;
    void validate() const;

    bool operator==(const CameraIntrinsics&) const = default;
};

// Marker-to-camera rigid transform. Model points are (x, y, 0) in marker
// units; translation is in the same units.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 transform(const Vec2& model) const {
        return rotation.col(0) * model.x() + rotation.col(1) * model.y() + translation;
    }
};

struct PoseCandidate {
    Pose pose;
    double reprojection_rms = 0.0;  // px
};

// Normalized DLT. H maps homogeneous model points to pixels, H(2,2) == 1.
// nullopt for fewer than 4 points or a rank-deficient configuration.
std::optional<Mat3> estimate_homography(std::span<const Vec2> model, std::span<const Vec2> image);

// Decomposes a model-to-pixel homography into the two pose candidates of
// the infinitesimal planar PnP construction, Jacobian taken at model_origin.
// Translations are least-squares refined per rotation over the given
// correspondences. Candidates are sorted by reprojection RMS.
std::optional<std::array<PoseCandidate, 2>> ippe_decompose(const Mat3& homography, const CameraIntrinsics& intr,
                                                           const Vec2& model_origin, std::span<const Vec2> model,
                                                           std::span<const Vec2> image);

// Homography + decomposition about the model centroid.
std::optional<std::array<PoseCandidate, 2>> solve_planar_pnp(std::span<const Vec2> model, std::span<const Vec2> image,
                                                             const CameraIntrinsics& intr);

// nullopt when the point is not in front of the camera.
std::optional<Vec2> project(const Pose& pose, const CameraIntrinsics& intr, const Vec2& model_pt);

// Infinity if any point fails to project.
double reprojection_rms(const Pose& pose, const CameraIntrinsics& intr, std::span<const Vec2> model,
                        std::span<const Vec2> image);

// Mean Sobel gradient magnitude along the projected inner edge of the
// marker border, sampled about once per pixel of arc length. nullopt when the
// projected perimeter is shorter than 8 px or a corner is behind the camera.
std::optional<double> pose_quality(const GrayImage& img, const Pose& pose, const CameraIntrinsics& intr,
                                   const TagFamily& family);

// Angle of R_a^T R_b, degrees.
double rotation_difference_deg(const Mat3& a, const Mat3& b);

}  // namespace lftag
