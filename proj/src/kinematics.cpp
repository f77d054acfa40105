#include "swim/kinematics.hpp"

#include <cmath>

namespace swim {

Mat3 rotation_exp(const Vec3& w) {
  const double th = w.norm();
  const Mat3 s = skew3(w);
  if (th < 1e-8) {
    // Series keeps full precision where sin/cos quotients lose digits.
    return Mat3::Identity() + s + 0.5 * (s * s);
  }
  return Mat3::Identity() + std::sin(th) / th * s +
         (1.0 - std::cos(th)) / (th * th) * (s * s);
}

namespace {

// ∫_{t_k}^{t_k+dt} e^{-λ s} ds evaluated stably, divided by dt.
double decay_weight(double lambda, double t0, double dt) {
  const double x = lambda * dt;
  double shape;  // (1 - e^{-x}) / x
  if (std::abs(x) < 1e-6) {
    shape = 1.0 - 0.5 * x + x * x / 6.0;
  } else {
    shape = -std::expm1(-x) / x;
  }
  return std::exp(-lambda * t0) * shape;
}

}  // namespace

std::vector<double> integrate_rotation_angle(const std::vector<double>& omega_hat,
                                             double lambda, double dt) {
  std::vector<double> theta(omega_hat.size(), 0.0);
  for (std::size_t k = 0; k + 1 < omega_hat.size(); ++k) {
    const double wbar = 0.5 * (omega_hat[k] + omega_hat[k + 1]);
    theta[k + 1] = theta[k] + dt * decay_weight(lambda, k * dt, dt) * wbar;
  }
  return theta;
}

std::vector<Mat3> integrate_rotation(const std::vector<Vec3>& omega_hat,
                                     double lambda, double dt) {
  std::vector<Mat3> r(omega_hat.size(), Mat3::Identity());
  for (std::size_t k = 0; k + 1 < omega_hat.size(); ++k) {
    const Vec3 wbar = 0.5 * (omega_hat[k] + omega_hat[k + 1]);
    r[k + 1] = r[k] * rotation_exp(dt * decay_weight(lambda, k * dt, dt) * wbar);
  }
  return r;
}

}  // namespace swim
