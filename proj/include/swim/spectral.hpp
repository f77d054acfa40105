#pragma once

#include <cmath>
#include <complex>

#include "swim/admissible.hpp"

namespace swim {

/// Tensor-product polar grid on the closed annulus a <= r <= b: equispaced
/// angles theta_j = 2 pi j / n_theta and Chebyshev-Lobatto radii ordered from
/// r[0] = b down to r[n_r-1] = a.  A scalar field is an (n_r x n_theta)
/// matrix of nodal values; Dr and Dtheta differentiate the underlying
/// polynomial / trigonometric interpolant exactly at the nodes.
struct AnnulusGrid {
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  int n_r = 0;
  int n_theta = 0;
  VectorXd r;
  VectorXd theta;
  MatrixXd Dr;
  MatrixXd Dtheta;
  VectorXd wr;  // Clenshaw-Curtis weights on [a, b], aligned with r

  static AnnulusGrid make(double inner_radius, double outer_radius, int n_r,
                          int n_theta);

  Vec2 point(int i, int j) const {
    return Vec2(r[i] * std::cos(theta[j]), r[i] * std::sin(theta[j]));
  }
  double area() const {
    return M_PI * (outer_radius * outer_radius - inner_radius * inner_radius);
  }

  MatrixXd d_r(const MatrixXd& f) const { return Dr * f; }
  MatrixXd d_theta(const MatrixXd& f) const { return f * Dtheta.transpose(); }
  /// Cartesian derivatives of a scalar grid function by the polar chain rule.
  void cartesian_gradient(const MatrixXd& f, MatrixXd& fx, MatrixXd& fy) const;
  /// Integral over the annulus (trapezoid in theta, Clenshaw-Curtis in r).
  double integral(const MatrixXd& f) const;
};

/// Cartesian components of a vector field on the grid.
struct GridField {
  MatrixXd x, y;
  static GridField zero(const AnnulusGrid& g) {
    return {MatrixXd::Zero(g.n_r, g.n_theta), MatrixXd::Zero(g.n_r, g.n_theta)};
  }
  double max_abs() const {
    return std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
  }
};

/// Vector field values at the angular nodes of one boundary circle.
struct CircleTrace {
  VectorXd x, y;
  static CircleTrace zero(int n_theta) {
    return {VectorXd::Zero(n_theta), VectorXd::Zero(n_theta)};
  }
};

/// Mode-by-mode solver for  div u = f  on the annulus with full Dirichlet
/// data on both circles.  Each Fourier mode gets a radial potential solve
/// (collocation on the composite operator (1/r) Dr (r Dr .) - m^2/r^2, so the
/// discrete polar divergence of the potential part hits f exactly at interior
/// nodes) plus a nodal stream-function lift that is discretely divergence
/// free by construction and matches the remaining boundary values.  The data
/// defect (boundary flux minus the quadrature of f) triggers
/// CompatibilityError when large; the residual discrete flux imbalance is
/// always absorbed by a uniform source shift so both end rows hold exactly.
class DivergenceSolver {
 public:
  explicit DivergenceSolver(const AnnulusGrid& grid);

  const AnnulusGrid& grid() const { return *grid_; }

  /// `defect_out`, when given, receives the data defect (boundary flux of the
  /// Dirichlet data minus the integral of f).
  GridField solve(const MatrixXd& f, const CircleTrace& inner,
                  const CircleTrace& outer, double compat_tol,
                  double* defect_out = nullptr) const;

  /// Discrete polar divergence (1/r) Dr(r u_r) + (1/r) Dtheta u_theta of a
  /// Cartesian grid field; the solver's interior rows satisfy it exactly.
  MatrixXd polar_divergence(const GridField& u) const;

 private:
  const AnnulusGrid* grid_;
  int m_max_ = 0;  // modes 0..m_max participate; Nyquist is projected out
  std::vector<Eigen::PartialPivLU<MatrixXd>> bvp_;
  std::vector<Eigen::PartialPivLU<Eigen::Matrix4d>> lift_;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 4>> lift_ur_, lift_ut_;
  Eigen::PartialPivLU<Eigen::Matrix2d> swirl_;
  VectorXd phi_unit_;   // potential of the unit source
  double t_unit_ = 0.0; // discrete flux absorbed by the unit source
};

struct ExtensionOptions {
  double picard_tol = 1e-10;   // sup-norm of the update between sweeps;
                               // the solve chain bottoms out near 1e-12
  int max_picard = 30;
  bool warm_start = true;      // seed each step with the previous increment
  double compat_tol = 1e-7;    // data defect of the converged step
  double cert_tol = 1e-8;      // reported against max_det_error by callers
};

struct ExtensionStepReport {
  int iterations = 0;
  double update_norm = 0.0;
  double compat_defect = 0.0;  // step data flux minus converged source mass
};

/// Volume-preserving extension of the interface motion to the fluid annulus:
/// map samples X = Id + displacement with displacement(0) = 0.
struct FluidMapSeries {
  const AnnulusGrid* grid = nullptr;
  TimeGrid time;
  std::vector<GridField> displacement;
  std::vector<GridField> velocity;
  std::vector<ExtensionStepReport> steps;
  double max_det_error = 0.0;
  double max_compat_defect = 0.0;
};

/// Marches the nonlinear divergence problem: per step, Picard on
///   div dX = (I - com(I + grad Zmid)) : grad dX,
/// with the interface displacement increment as inner Dirichlet data and zero
/// outer data.  The midpoint cofactor makes the determinant of the converged
/// map stationary at the grid nodes, so certification reaches solver
/// precision rather than O(dt^2).  Update norms growing three sweeps in a row
/// raise ExtensionDiverged.
FluidMapSeries extend_divergence_free(const DivergenceSolver& solver,
                                      const std::vector<CircleTrace>& inner,
                                      const TimeGrid& time,
                                      const ExtensionOptions& opt);

/// det(I + grad Z) - 1 at the grid nodes (Cartesian spectral gradients).
MatrixXd det_error_field(const AnnulusGrid& grid, const GridField& Z);

/// Chebyshev x Fourier coefficient evaluation of a grid function at arbitrary
/// annulus points; radial coordinates may overshoot [a, b] by `slack` in the
/// mapped Chebyshev variable (GeometryError beyond).
class AnnulusInterpolant {
 public:
  AnnulusInterpolant(const AnnulusGrid& grid, const MatrixXd& values);
  double eval(double r, double theta, double slack = 0.06) const;

 private:
  double inner_ = 0.0, outer_ = 0.0;
  int n_r_ = 0, n_theta_ = 0;
  Eigen::MatrixXcd coeff_;  // (n_r x n_theta): Chebyshev rows, Fourier columns
};

/// Interface-circle samples of a solid FE displacement series at the grid
/// angles; points between the boundary polygon and the true circle are
/// reached by extrapolating the adjacent cell's quadratic.
std::vector<CircleTrace> interface_trace_series(const DisplacementField& Z,
                                                const AnnulusGrid& grid);

}  // namespace swim
