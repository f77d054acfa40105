#pragma once

#include <vector>

#include "swim/geometry.hpp"

namespace swim {

/// Cofactor matrix: A * cof(A)ᵀ = det(A) I.
inline Mat2 cofactor(const Mat2& a) {
  Mat2 c;
  c << a(1, 1), -a(1, 0), -a(0, 1), a(0, 0);
  return c;
}

inline Mat3 cofactor3(const Mat3& a) {
  Mat3 c;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      c(i, j) = a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
    }
  }
  return c;
}

/// skew3(w) v = w × v.
inline Mat3 skew3(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0;
  return s;
}

/// Planar analogue: skew2(w) v = w ∧ v = w perp(v).
inline Mat2 skew2(double w) {
  Mat2 s;
  s << 0.0, -w, w, 0.0;
  return s;
}

/// Rodrigues exponential of skew3(w).
Mat3 rotation_exp(const Vec3& w);

/// Rigid placement of the solid: translation h and attitude angle theta.
struct RigidState {
  Vec2 h = Vec2::Zero();
  double theta = 0.0;
  Mat2 R() const { return rotation2(theta); }
};

/// Integrates dθ/dt = e^{-λ t} ω̂(t) on a uniform grid (midpoint-exponential
/// weighting of the decay factor, trapezoidal in ω̂; second order).  Returns
/// angles at the sample times, starting at 0.
std::vector<double> integrate_rotation_angle(const std::vector<double>& omega_hat,
                                             double lambda, double dt);

/// Same scheme for dR/dt = e^{-λ t} R skew3(ω̂): each step multiplies by the
/// Rodrigues exponential of the integrated increment, so R stays orthogonal
/// to roundoff regardless of step count.
std::vector<Mat3> integrate_rotation(const std::vector<Vec3>& omega_hat,
                                     double lambda, double dt);

}  // namespace swim
