#pragma once

#include <Eigen/Core>

#include <cmath>

namespace lftag {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// z-component of the 2D cross product. Positive when b is clockwise from a
// on screen (image y axis points down).
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed angle from a to b in (-pi, pi], same sign convention as cross2.
inline double signed_angle(const Vec2& a, const Vec2& b) {
    return std::atan2(cross2(a, b), a.dot(b));
}

}  // namespace lftag
