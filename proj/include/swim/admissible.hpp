#pragma once

#include "swim/lame.hpp"

namespace swim {

/// Interface velocity series in the exponentially weighted scale; each sample
/// holds (x,y)-interleaved values on the interface trace dofs of a solid
/// space, in LameExtension::trace_dofs order.  Samples must be flux-free
/// (|∮ zeta·n| <= 1e-10) and the first sample must vanish (rest start).
struct BoundaryVelocity {
  const FemSpace* space = nullptr;
  TimeGrid grid;
  Series samples;
};

/// Solid displacement series Z with weighted velocity samples
/// v = e^{lambda t} dZ/dt.  Z is the cumulative trapezoid of e^{-lambda t} v,
/// so Z[0] = 0; the rest-start requirement also forces v[0] = 0.
struct DisplacementField {
  const FemSpace* space = nullptr;
  TimeGrid grid;
  double lambda = 0.0;
  Series v;  // weighted velocities, one sample per grid point
  Series Z;  // displacements, Z[0] = 0

  static DisplacementField from_weighted_velocity(const FemSpace& space,
                                                  const TimeGrid& grid, double lambda,
                                                  Series v);

  /// True velocity dZ/dt at sample i.
  VectorXd rate(int i) const { return std::exp(-lambda * grid.time(i)) * v[i]; }
};

/// Per-sample residuals of the admissibility constraints: linear momentum
/// rate a, angular momentum rate b, and volume flux c.  All three vanish
/// identically iff the deformation Id + Z is admissible.
struct ConstraintResidual {
  std::vector<Vec2> a;
  std::vector<double> b;
  std::vector<double> c;

  double max_abs() const;
};

/// a = ∫_S dZ/dt, b = ∫_S (Z+Id) ^ dZ/dt, c = ∮ (com(∇Z+I))ᵀ dZ/dt · n dГ,
/// evaluated by direct quadrature at every sample.
ConstraintResidual constraint_functional(const DisplacementField& Z);

/// Linearization at Z = 0: a = ∫ dZ/dt, b = ∫ Id ^ dZ/dt, c = ∮ dZ/dt · n.
ConstraintResidual linearized_constraints(const DisplacementField& Z);

struct ProjectionReport {
  bool converged = false;
  int iterations = 0;
  double final_constraint = 0.0;  // infinity norm over samples and components
  double final_kkt = 0.0;
  std::vector<double> constraint_history;
  std::vector<double> kkt_history;
};

/// Projection onto the discretely admissible manifold: minimizes the
/// weighted-norm distance ||V - V_in||_Q subject to the per-sample
/// constraints (momentum, angular momentum, volume flux scaled by e^{lambda t})
/// all vanishing, via Gauss-Newton steps on the KKT system.  The quadratic
/// metric Q (trapezoid-in-time mass+stiffness of v plus an H1-in-time term
/// for v' - lambda v) is assembled and factored once per instance.
class AdmissibleProjector {
 public:
  struct Options {
    double tol = 1e-10;           // constraint and KKT stopping threshold
    int max_iterations = 30;
    double small_data_factor = 0.05;  // threshold = factor * solid radius
  };

  AdmissibleProjector(const FemSpace& space, const TimeGrid& grid, double lambda);

  const FemSpace& space() const { return *space_; }
  const TimeGrid& grid() const { return grid_; }
  double lambda() const { return lambda_; }

  /// Weighted norm sqrt(V^T Q V) of the velocity series.
  double weighted_norm(const DisplacementField& Z) const;

  /// Throws SmallDataError above the smallness threshold and ProjectionError
  /// when the iteration fails to reach `tol` within max_iterations.
  DisplacementField project(const DisplacementField& Z_in, const Options& opt,
                            ProjectionReport* report = nullptr) const;
  DisplacementField project(const DisplacementField& Z_in) const {
    return project(Z_in, Options());
  }

 private:
  struct ConstraintData;
  VectorXd stack(const Series& v) const;
  Series unstack(const VectorXd& V) const;
  Series displacements(const Series& v) const;
  void eval_constraints(const Series& v, const Series& Z, ConstraintData& out) const;

  const FemSpace* space_;
  TimeGrid grid_;
  double lambda_ = 0.0;
  int nv_ = 0;  // vector dofs per sample
  SpMat M_, B_, C_;               // mass, ∫ z ^ v, ∮ com(∇z)ᵀ v · n
  VectorXd load_x_, load_y_, load_m_, flux_row_;
  SpMat Q_;
  Eigen::SimplicialLDLT<SpMat> q_ldlt_;
};

DisplacementField project_admissible(const AdmissibleProjector& projector,
                                     const DisplacementField& Z_in, double tol,
                                     ProjectionReport* report = nullptr);

/// Admissible deformation X* = Id + Z* built from an interface velocity:
/// Lame extension per sample, time integration, then projection.  The
/// residual series is e^{lambda t} dX*/dt - zeta on the interface dofs.
struct AdmissibleDeformation {
  DisplacementField displacement;
  Series residual_trace;
  ProjectionReport report;
};

AdmissibleDeformation make_admissible_from_boundary(
    const LameExtension& lame, const AdmissibleProjector& projector,
    const BoundaryVelocity& zeta, const AdmissibleProjector::Options& opt);
inline AdmissibleDeformation make_admissible_from_boundary(
    const LameExtension& lame, const AdmissibleProjector& projector,
    const BoundaryVelocity& zeta) {
  return make_admissible_from_boundary(lame, projector, zeta,
                                       AdmissibleProjector::Options());
}

}  // namespace swim
