#pragma once

#include <Eigen/SparseCholesky>

#include "swim/assembly.hpp"
#include "swim/error.hpp"
#include "swim/time_grid.hpp"

namespace swim {

/// Elliptic extension of interface velocities into the solid,
///
///   mu phi - 2 div D(phi) = rigid volume forces   in S,
///   phi = zeta                                    on the interface,
///
/// where the rigid forces (a constant force plus a torque density along
/// perp(y)) are Lagrange multipliers enforcing the volume momenta
/// int_S phi = momentum and int_S y ^ phi = moment exactly.  With zero
/// targets this realizes the extension whose side conditions (zero flux,
/// zero linear momentum, zero angular momentum) certify that the linearized
/// admissibility constraints vanish; with nonzero targets it realizes the
/// surjectivity of the linearized constraint map onto (a, b, c) triples.
///
/// The stiffness block mu M + K is factored once per instance; each sample
/// costs one back-substitution plus a 3x3 correction.
class LameExtension {
 public:
  /// `space` must be a degree-2 vector space supported on the solid region.
  /// mu <= 0 selects the default weight 1; the factorization is retried with
  /// mu doubled a few times before giving up with SolverError.
  explicit LameExtension(const FemSpace& space, double mu = 0.0);

  const FemSpace& space() const { return *space_; }
  double mu() const { return mu_; }
  double solid_area() const { return area_; }
  double polar_moment() const { return polar_moment_; }

  /// Scalar interface dofs, in the order trace data is laid out (x,y
  /// interleaved as 2*slot+comp).
  const std::vector<int>& trace_dofs() const { return trace_dofs_; }
  int n_trace() const { return static_cast<int>(trace_dofs_.size()); }

  VectorXd scatter_trace(const VectorXd& zeta) const;
  VectorXd restrict_trace(const VectorXd& full) const;

  /// Discrete flux of interface data: ∮ zeta·n over the polygonal interface.
  double trace_flux(const VectorXd& zeta) const;
  /// Trace of the outward unit normal and its own discrete flux (≈ |∂S|).
  const VectorXd& normal_trace() const { return normal_trace_; }
  double normal_trace_flux() const { return normal_flux_; }

  struct Solution {
    VectorXd phi;  // full solid vector field, boundary values included
    Vec2 force;    // constant volume force realizing the momentum target
    double torque;  // coefficient of the perp(y) volume force
  };

  /// One solve with interface data `zeta` (size 2*n_trace) and momentum
  /// targets.  Throws CompatibilityError when flux-free data is required but
  /// |flux| exceeds flux_tol.
  Solution extend_full(const VectorXd& zeta, const Vec2& momentum = Vec2::Zero(),
                       double moment = 0.0, bool require_flux_free = true,
                       double flux_tol = 1e-10) const;

  VectorXd extend(const VectorXd& zeta) const { return extend_full(zeta).phi; }

  /// phi with int_S phi = a, int_S y ^ phi = b and ∮ phi·n = c; the interface
  /// data is the interpolated normal scaled so its discrete flux equals c.
  Solution extend_targets(const Vec2& a, double b, double c) const;

  /// Boundary stress resultants ∮ 2 D(phi) n dГ (one-sided gradients).
  /// In the continuum the multiplier forces equal -force_resultant/|S| and
  /// -torque_resultant/polar_moment; discretely they differ by the
  /// divergence-theorem consistency gap, which tests track.
  Vec2 stress_force(const VectorXd& phi) const;
  double stress_torque(const VectorXd& phi) const;

 private:
  void factorize(const SpMat& M, const SpMat& K);

  const FemSpace* space_;
  double mu_ = 0.0;
  double area_ = 0.0, polar_moment_ = 0.0;
  std::vector<int> trace_dofs_;
  std::vector<int> free_;             // vector dofs not on the interface
  std::vector<int> vec_to_free_;      // -1 for constrained
  SpMat A_;                           // mu M + K on all solid vector dofs
  VectorXd load_x_, load_y_, load_m_;  // ⟨e1,v⟩, ⟨e2,v⟩, ⟨perp(y),v⟩
  VectorXd flux_row_;                 // ∮ v·n as a linear functional
  VectorXd normal_trace_;
  double normal_flux_ = 0.0;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  MatrixXd W_;      // A_ff^{-1} [loads]
  Mat3 schur_inv_;  // inverse of loads^T A_ff^{-1} loads
};

/// Series wrappers mirroring the per-sample solves.
Series lame_extend(const LameExtension& lame, const Series& zeta,
                   double flux_tol = 1e-10);
Series lame_extend_with_targets(const LameExtension& lame,
                                const std::vector<Vec2>& a,
                                const std::vector<double>& b,
                                const std::vector<double>& c);

}  // namespace swim
