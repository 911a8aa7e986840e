#include "lftag/pose.hpp"

#include "lftag/imgproc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lftag {
namespace {

constexpr double kMinPerimeterPx = 8.0;

// Similarity taking the points to centroid 0, RMS distance sqrt(2).
std::optional<Mat3> hartley_normalization(std::span<const Vec2> pts) {
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double ms = 0.0;
    for (const Vec2& p : pts) ms += (p - mean).squaredNorm();
    const double rms = std::sqrt(ms / static_cast<double>(pts.size()));
    if (!(rms > 0.0)) return std::nullopt;
    const double s = std::sqrt(2.0) / rms;
    Mat3 t;
    t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
    return t;
}

Vec2 apply_h(const Mat3& h, const Vec2& p) {
    const Vec3 q = h * Vec3(p.x(), p.y(), 1.0);
    return q.head<2>() / q.z();
}

// Least-squares translation for a fixed rotation, normalized image coordinates.
std::optional<Vec3> solve_translation(const Mat3& r, std::span<const Vec2> model, std::span<const Vec2> normalized) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Vec3 atb = Vec3::Zero();
    for (std::size_t i = 0; i < model.size(); ++i) {
        const Vec3 rp = r.col(0) * model[i].x() + r.col(1) * model[i].y();
        const double a = normalized[i].x();
        const double b = normalized[i].y();
        const Eigen::RowVector3d row1(1.0, 0.0, -a);
        const Eigen::RowVector3d row2(0.0, 1.0, -b);
        const double rhs1 = a * rp.z() - rp.x();
        const double rhs2 = b * rp.z() - rp.y();
        ata += row1.transpose() * row1 + row2.transpose() * row2;
        atb += row1.transpose() * rhs1 + row2.transpose() * rhs2;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
    if (!lu.isInvertible()) return std::nullopt;
    return lu.solve(atb);
}

}  // namespace

CameraIntrinsics CameraIntrinsics::centered(int width, int height, double focal) {
    return {focal, focal, (width - 1) / 2.0, (height - 1) / 2.0};
}

Mat3 CameraIntrinsics::matrix() const {
    Mat3 k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0 && fy > 0.0) || !std::isfinite(cx) || !std::isfinite(cy)) {
        throw std::invalid_argument("camera focal lengths must be positive");
    }
}

std::optional<Mat3> estimate_homography(std::span<const Vec2> model, std::span<const Vec2> image) {
    if (model.size() != image.size() || model.size() < 4) return std::nullopt;
    const auto tm = hartley_normalization(model);
    const auto ti = hartley_normalization(image);
    if (!tm || !ti) return std::nullopt;

    const auto n = static_cast<Eigen::Index>(model.size());
    Eigen::MatrixXd a(2 * n, 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 p = apply_h(*tm, model[static_cast<std::size_t>(i)]);
        const Vec2 q = apply_h(*ti, image[static_cast<std::size_t>(i)]);
        const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A solvable system has an (at least) 8-dimensional row space.
    if (sv.size() < 8 || sv(7) <= 1e-9 * sv(0)) return std::nullopt;
    const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
    Mat3 hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    Mat3 out = ti->inverse() * hn * (*tm);
    if (std::abs(out(2, 2)) < 1e-12 * out.norm()) return std::nullopt;
    out /= out(2, 2);
    if (!out.allFinite()) return std::nullopt;
    return out;
}

std::optional<std::array<PoseCandidate, 2>> ippe_decompose(const Mat3& homography, const CameraIntrinsics& intr,
                                                           const Vec2& model_origin, std::span<const Vec2> model,
                                                           std::span<const Vec2> image) {
    if (model.size() != image.size() || model.size() < 3) return std::nullopt;

    // Homography from origin-centered model coordinates to normalized image coordinates.
    Mat3 shift = Mat3::Identity();
    shift(0, 2) = model_origin.x();
    shift(1, 2) = model_origin.y();
    Mat3 h = intr.matrix().inverse() * homography * shift;
    if (std::abs(h(2, 2)) < 1e-12 * h.norm()) return std::nullopt;  // plane passes through the camera center
    h /= h(2, 2);

    const Vec2 v(h(0, 2), h(1, 2));
    Mat2 jac;
    jac << h(0, 0) - h(2, 0) * v.x(), h(0, 1) - h(2, 1) * v.x(),
           h(1, 0) - h(2, 0) * v.y(), h(1, 1) - h(2, 1) * v.y();

    // Rotation taking the optical axis onto the ray through the origin's image.
    Mat3 rv = Mat3::Identity();
    const double t = v.norm();
    if (t > std::numeric_limits<double>::epsilon()) {
        const double s = std::sqrt(1.0 + t * t);
        const double cos_th = 1.0 / s;
        const double sin_th = std::sqrt(std::max(0.0, 1.0 - 1.0 / (s * s)));
        Mat3 k;
        k << 0, 0, v.x(), 0, 0, v.y(), -v.x(), -v.y(), 0;
        k /= t;
        rv = Mat3::Identity() + sin_th * k + (1.0 - cos_th) * k * k;
    }

    Eigen::Matrix<double, 2, 3> proj;
    proj << 1, 0, -v.x(), 0, 1, -v.y();
    const Mat2 b = proj * rv.leftCols<2>();
    if (std::abs(b.determinant()) < 1e-15) return std::nullopt;
    const Mat2 a = b.inverse() * jac;

    const double ata00 = a(0, 0) * a(0, 0) + a(1, 0) * a(1, 0);
    const double ata01 = a(0, 0) * a(0, 1) + a(1, 0) * a(1, 1);
    const double ata11 = a(0, 1) * a(0, 1) + a(1, 1) * a(1, 1);
    const double gamma2 =
        0.5 * (ata00 + ata11 + std::sqrt((ata00 - ata11) * (ata00 - ata11) + 4.0 * ata01 * ata01));
    const double gamma = std::sqrt(std::max(0.0, gamma2));
    if (!(gamma > 1e-12)) return std::nullopt;

    const Mat2 r22 = a / gamma;
    const Mat2 hh = Mat2::Identity() - r22.transpose() * r22;
    Vec2 bb(std::sqrt(std::max(0.0, hh(0, 0))), std::sqrt(std::max(0.0, hh(1, 1))));
    if (hh(0, 1) < 0.0) bb.y() = -bb.y();
    const Vec3 d = Vec3(r22(0, 0), r22(1, 0), bb.x()).cross(Vec3(r22(0, 1), r22(1, 1), bb.y()));

    Mat3 m1;
    m1 << r22(0, 0), r22(0, 1), d.x(), r22(1, 0), r22(1, 1), d.y(), bb.x(), bb.y(), d.z();
    Mat3 m2;
    m2 << r22(0, 0), r22(0, 1), -d.x(), r22(1, 0), r22(1, 1), -d.y(), -bb.x(), -bb.y(), d.z();
    const std::array<Mat3, 2> rotations{rv * m1, rv * m2};

    std::vector<Vec2> centered(model.size());
    std::vector<Vec2> normalized(image.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        centered[i] = model[i] - model_origin;
        normalized[i] = intr.to_normalized(image[i]);
    }

    std::array<PoseCandidate, 2> out;
    for (int k = 0; k < 2; ++k) {
        const Mat3& r = rotations[static_cast<std::size_t>(k)];
        Vec3 trans = Vec3(v.x(), v.y(), 1.0) / gamma;  // first-order estimate
        if (auto refined = solve_translation(r, centered, normalized)) trans = *refined;
        Pose pose{r, trans - r.col(0) * model_origin.x() - r.col(1) * model_origin.y()};
        out[static_cast<std::size_t>(k)] = {pose, reprojection_rms(pose, intr, model, image)};
    }
    if (out[1].reprojection_rms < out[0].reprojection_rms) std::swap(out[0], out[1]);
    if (!std::isfinite(out[0].reprojection_rms)) return std::nullopt;
    return out;
}

std::optional<std::array<PoseCandidate, 2>> solve_planar_pnp(std::span<const Vec2> model, std::span<const Vec2> image,
                                                             const CameraIntrinsics& intr) {
    const auto h = estimate_homography(model, image);
    if (!h) return std::nullopt;
    Vec2 origin = Vec2::Zero();
    for (const Vec2& p : model) origin += p;
    origin /= static_cast<double>(model.size());
    return ippe_decompose(*h, intr, origin, model, image);
}

std::optional<Vec2> project(const Pose& pose, const CameraIntrinsics& intr, const Vec2& model_pt) {
    const Vec3 c = pose.transform(model_pt);
    if (!(c.z() > 0.0)) return std::nullopt;
    return Vec2(intr.fx * c.x() / c.z() + intr.cx, intr.fy * c.y() / c.z() + intr.cy);
}

double reprojection_rms(const Pose& pose, const CameraIntrinsics& intr, std::span<const Vec2> model,
                        std::span<const Vec2> image) {
    if (model.empty() || model.size() != image.size()) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto p = project(pose, intr, model[i]);
        if (!p) return std::numeric_limits<double>::infinity();
        sum += (*p - image[i]).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(model.size()));
}

std::optional<double> pose_quality(const GrayImage& img, const Pose& pose, const CameraIntrinsics& intr,
                                   const TagFamily& family) {
    const double lo = family.border_width;
    const double hi = 1.0 - family.border_width;
    const std::array<Vec2, 4> model{Vec2(lo, lo), Vec2(hi, lo), Vec2(hi, hi), Vec2(lo, hi)};
    std::array<Vec2, 4> px;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto p = project(pose, intr, model[i]);
        if (!p) return std::nullopt;
        px[i] = *p;
    }

    double perimeter = 0.0;
    double integral = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec2& a = px[i];
        const Vec2& b = px[(i + 1) % 4];
        const double len = (b - a).norm();
        if (!std::isfinite(len)) return std::nullopt;
        perimeter += len;
        // A projective image of a line is a line, so uniform steps in pixel
        // space give uniform arc-length sampling.
        const int steps = std::max(1, static_cast<int>(std::ceil(len)));
        const double ds = len / steps;
        for (int s = 0; s < steps; ++s) {
            const Vec2 q = a + (b - a) * ((s + 0.5) / steps);
            integral += sobel_gradient_mag(img, q.x(), q.y()) * ds;
        }
    }
    if (perimeter < kMinPerimeterPx) return std::nullopt;
    return integral / perimeter;
}

double rotation_difference_deg(const Mat3& a, const Mat3& b) {
    const Mat3 d = a.transpose() * b;
    const Vec3 axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    return std::atan2(axis.norm() / 2.0, (d.trace() - 1.0) / 2.0) * 180.0 / M_PI;
}

}  // namespace lftag
