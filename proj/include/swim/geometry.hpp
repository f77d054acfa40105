#pragma once

#include <Eigen/Dense>

namespace swim {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Counter-clockwise quarter turn: perp(v) = (-v.y, v.x).
inline Vec2 perp(const Vec2& v) { return Vec2(-v[1], v[0]); }

/// Planar cross product a ∧ b = a.x b.y - a.y b.x.
inline double cross2(const Vec2& a, const Vec2& b) {
  return a[0] * b[1] - a[1] * b[0];
}

/// Action of a scalar angular velocity on a plane vector: w ∧ v = w perp(v).
inline Vec2 angular_action(double w, const Vec2& v) { return w * perp(v); }

/// Rotation by angle theta.
inline Mat2 rotation2(double theta) {
  Mat2 r;
  const double c = std::cos(theta), s = std::sin(theta);
  r << c, -s, s, c;
  return r;
}

}  // namespace swim
