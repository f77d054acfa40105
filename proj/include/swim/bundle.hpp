#pragma once

#include <array>
#include <functional>
#include <optional>

#include "swim/fem.hpp"
#include "swim/kinematics.hpp"

namespace swim {

/// Body-frame change-of-variables data at one sample point.  The map carries
/// the fluid reference configuration onto the current deformed one; grad_yt is
/// the inverse Jacobian evaluated at the mapped point, lap_yt the Laplacian of
/// the inverse map there, and dxt_dt the true (unweighted) time rate of the
/// body-frame map.
struct BundlePoint {
  Vec2 y = Vec2::Zero();
  Vec2 xt = Vec2::Zero();
  Vec2 dxt_dt = Vec2::Zero();
  Vec2 lap_yt = Vec2::Zero();
  Mat2 grad_xt = Mat2::Identity();
  Mat2 grad_yt = Mat2::Identity();
  double det = 1.0;
};

/// Change-of-variables data sampled at the volume and interface quadrature
/// points of one time slice.  `vol` is indexed like space.cells(), `bnd` like
/// space.trace(SolidBoundary).
struct TransformBundle {
  const FemSpace* space = nullptr;
  double t = 0.0;
  RigidState rigid;
  Vec2 h_dot = Vec2::Zero();
  double omega = 0.0;  // physical angular rate
  std::vector<std::array<BundlePoint, TriQuadrature::n>> vol;
  std::vector<std::array<BundlePoint, EdgeQuadrature::n>> bnd;
  double max_det_err = 0.0;
};

/// Builds the bundle from nodal samples of the physical map X(.,t) and its
/// rate on the fluid P2 space, removing the rigid placement:
/// body map = Rᵀ(X - h), body rate = Rᵀ(∂X/∂t - h' - ω ∧ (X - h)).
TransformBundle assemble_bundle(const FemSpace& fluid_p2,
                                const VectorXd& map_nodal,
                                const VectorXd& map_rate_nodal,
                                const RigidState& rigid, const Vec2& h_dot,
                                double omega, double t);

/// Closed-form body-frame map for manufactured cases; `hess` may be empty, in
/// which case second derivatives are taken by central differences of `grad`.
struct AnalyticMap {
  std::function<Vec2(const Vec2&)> value;
  std::function<Mat2(const Vec2&)> grad;
  std::function<Vec2(const Vec2&)> rate;
  std::function<std::array<Mat2, 2>(const Vec2&)> hess;
};

TransformBundle assemble_bundle_analytic(const FemSpace& fluid_p2,
                                         const AnalyticMap& map, double t);

/// Discrete norm of the row-wise divergence of cof(∇ body map): the weak
/// residual against interior test functions, measured through the inverse
/// mass matrix (an L2 norm of its Riesz representer).  Zero for affine maps.
double piola_residual(const TransformBundle& bundle);

}  // namespace swim
