#pragma once

#include <vector>

#include "swim/error.hpp"
#include "swim/geometry.hpp"
#include "swim/kinematics.hpp"
#include "swim/time_grid.hpp"

namespace swim {

/// C^2 radial cutoff: 1 for r <= inner, 0 for r >= outer, quintic Hermite in
/// between (first and second derivatives vanish at both junctions).
struct CutoffProfile {
  double inner = 0.6;
  double outer = 1.6;

  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;
};

/// Rigid placement history built from rate samples on a uniform grid: the
/// placement integrates trapezoidally (matching the marching schemes used
/// elsewhere), and mid-step queries interpolate the samples linearly.
class RigidMotionSeries {
 public:
  static RigidMotionSeries from_rates(const TimeGrid& time,
                                      std::vector<Vec2> h_dot,
                                      VectorXd omega);

  const TimeGrid& time_grid() const { return time_; }
  RigidState state(int i) const { return {h_[i], theta_[i]}; }
  Vec2 h_dot_sample(int i) const { return h_dot_[i]; }
  double omega_sample(int i) const { return omega_[i]; }

  Vec2 h(double t) const;
  double theta(double t) const;
  Vec2 h_dot(double t) const;
  double omega(double t) const;

 private:
  TimeGrid time_;
  std::vector<Vec2> h_dot_;
  VectorXd omega_;
  std::vector<Vec2> h_;
  std::vector<double> theta_;
};

/// Divergence-free carrier of the rigid motion: the stream function of
/// h_dot + omega perp(x - h) is multiplied by the cutoff (in |x|), so the
/// field is exactly rigid where the cutoff is 1 and exactly zero beyond its
/// outer junction.
Vec2 rigid_flow_velocity(const CutoffProfile& cut, const Vec2& h,
                         const Vec2& h_dot, double omega, const Vec2& x);

/// Spatial gradient of rigid_flow_velocity (the perp of the stream Hessian).
Mat2 rigid_flow_velocity_gradient(const CutoffProfile& cut, const Vec2& h,
                                  const Vec2& h_dot, double omega,
                                  const Vec2& x);

struct RigidFlowOptions {
  int n_seed_r = 65;        // uniform radii, both ends included
  int n_seed_theta = 64;    // uniform angles, periodic
  double seed_r_min = 0.4;  // tracked chart starts inside the interface circle
};

/// Flow map of the cutoff rigid field, tracked on a polar seed grid with one
/// classical fourth-order step per time-grid interval, carrying the seed
/// Jacobian alongside.  Queries interpolate seed displacements (and Jacobian
/// deviations from the identity) with cubic Lagrange stencils, so regions the
/// flow never moves stay exactly at the identity.  The motion series is kept
/// by value, so the tracked map owns everything it needs.
class RigidMapSeries {
 public:
  static RigidMapSeries track(const RigidMotionSeries& motion,
                              const CutoffProfile& cutoff, double outer_radius,
                              const RigidFlowOptions& opt = {});

  const RigidMotionSeries& motion() const { return motion_; }
  const CutoffProfile& cutoff() const { return cutoff_; }
  const TimeGrid& time_grid() const { return motion_.time_grid(); }

  /// Flow position at sample n of the point seeded at x0; GeometryError when
  /// x0 leaves the tracked chart.
  Vec2 map(int n, const Vec2& x0) const;

  /// Seed Jacobian d map / d x0 at sample n.
  Mat2 jacobian(int n, const Vec2& x0) const;

  /// Closed-form field velocity (no interpolation).
  Vec2 velocity(double t, const Vec2& x) const;

  /// Largest |det jacobian - 1| over all seeds and samples; the flow is
  /// volume preserving, so this certifies the tracking error.
  double max_det_error() const { return max_det_error_; }

 private:
  RigidMotionSeries motion_;
  CutoffProfile cutoff_;
  double r_min_ = 0.0, r_max_ = 0.0, dr_ = 0.0, dtheta_ = 0.0;
  int n_r_ = 0, n_theta_ = 0;
  // Per sample, per seed (radius row, angle column).
  std::vector<MatrixXd> dx_, dy_;                  // displacement
  std::vector<MatrixXd> j11_, j12_, j21_, j22_;    // jacobian minus identity
  double max_det_error_ = 0.0;
};

}  // namespace swim
