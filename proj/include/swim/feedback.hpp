#pragma once

#include <functional>
#include <vector>

#include "swim/transformed.hpp"

namespace swim {

/// Coupled velocity parameterization: interior fluid dofs followed by the
/// rigid pair (H', Omega).  A combined vector carries the rigid values on the
/// solid-boundary trace and is clamped on the outer circle; boundary data
/// beyond the rigid part is injected separately on the solid-trace dofs.
class CombinedSpace {
 public:
  explicit CombinedSpace(const FemSpace& vel);

  const FemSpace& space() const { return *vel_; }
  int dim() const { return n_interior_ + 3; }
  int n_interior() const { return n_interior_; }
  int n_control() const { return static_cast<int>(control_dofs_.size()); }
  int h_index() const { return n_interior_; }
  int omega_index() const { return n_interior_ + 2; }

  /// Interleaved full-space vector dof behind control slot k; slots pair the
  /// two components of each solid-trace scalar dof in ascending dof order.
  int control_dof(int k) const { return control_dofs_[k]; }
  /// Geometric location of control slot k.
  Vec2 control_point(int k) const {
    return vel_->dof_point(control_dofs_[k] / 2);
  }

  /// Z: combined coordinates to full vector dofs.
  const SpMat& extend() const { return Z_; }
  /// E: control values to full vector dofs.
  const SpMat& inject() const { return E_; }

  /// Z x + E c; c may be empty.
  VectorXd full_field(const VectorXd& x, const VectorXd& c = VectorXd()) const;
  /// Z^T load.
  VectorXd restrict_load(const VectorXd& load) const;

  Vec2 rigid_velocity(const VectorXd& x) const {
    return {x[h_index()], x[h_index() + 1]};
  }
  double rigid_rate(const VectorXd& x) const { return x[omega_index()]; }

 private:
  const FemSpace* vel_;
  int n_interior_ = 0;
  std::vector<int> control_dofs_;
  SpMat Z_, E_;
};

/// The lambda-shifted coupled Stokes-rigid operator on the discrete
/// divergence-free subspace, with the boundary-control input map obtained by
/// lifting flux-free solid-trace data onto the constraint manifold.
struct LinearizedSystem {
  LinearizedSystem(const FemSpace& vel_, const FemSpace& prs_, double lambda_,
                   double nu_, double body_mass_, double body_inertia_)
      : vel(&vel_), prs(&prs_), combined(vel_), nu(nu_), lambda(lambda_),
        body_mass(body_mass_), body_inertia(body_inertia_) {}

  const FemSpace* vel;
  const FemSpace* prs;
  CombinedSpace combined;
  double nu;
  double lambda;
  double body_mass;
  double body_inertia;

  SpMat mass;        // combined fluid+rigid mass, SPD
  SpMat stiffness;   // combined double-contraction of symmetric gradients
  SpMat divergence;  // pressure x combined constraint matrix
  VectorXd gauge;    // pressure integral row (zero-mean multiplier)

  SpMat mass_full;   // fluid vector mass on all dofs
  SpMat grad_full;   // fluid full-gradient stiffness on all dofs
  SpMat mass_in;     // combined x control mass coupling
  SpMat stiff_in;    // combined x control viscous coupling
  SpMat div_in;      // pressure x control constraint coupling

  MatrixXd kernel;   // mass-orthonormal basis of the constraint kernel
  MatrixXd lift;     // flux-free control lifting onto the constraint manifold
  MatrixXd A;        // reduced operator lambda I - nu kernel' stiffness kernel
  MatrixXd B;        // reduced input map over raw control dofs

  SpMat trace_mass;      // solid-trace mass over control dofs
  VectorXd flux_row;     // control-dof normal-flux functional
  VectorXd flux_riesz;   // trace_mass^{-1} flux_row
  double flux_norm2 = 0.0;

  /// Fluid plus body kinetic energy of a combined state under boundary data.
  double energy(const VectorXd& x, const VectorXd& c = VectorXd()) const;
};

LinearizedSystem assemble_linearized(const FemSpace& vel, const FemSpace& prs,
                                     double lambda, double nu,
                                     double body_mass, double body_inertia);

/// Mass-orthogonal projection of a combined vector onto the discrete
/// divergence-free subspace.
VectorXd leray_project(const LinearizedSystem& sys, const VectorXd& x);

/// Removes the normal-flux component of boundary values in the trace inner
/// product, enforcing a zero net flux through the interface.
VectorXd project_flux_free(const LinearizedSystem& sys, const VectorXd& zeta);

/// Kernel coordinates of the shifted state x + lift c.
VectorXd reduced_state(const LinearizedSystem& sys, const VectorXd& x,
                       const VectorXd& c = VectorXd());

/// Velocity shift and extra sources obtained by subtracting a divergence
/// carrier: the volume source collects -dG/dt + lambda G + nu lap G (element
/// Laplacian), the body sources the symmetric-gradient interface integrals.
struct DivergenceLift {
  VectorXd shift;
  VectorXd force;
  Vec2 force_body = Vec2::Zero();
  double torque_body = 0.0;
};

DivergenceLift lift_divergence(const FemSpace& vel, const VectorXd& G,
                               const VectorXd& G_rate, double lambda,
                               double nu);

/// Stabilizing boundary feedback for the reduced pair (A, B): the Riccati
/// gain of the quadratic regulator with identity state cost and control cost
/// gamma I, certified on the closed-loop spectrum.
struct FeedbackGain {
  MatrixXd K;  // control dofs x reduced dofs, zeta = K z
  MatrixXd P;  // Riccati solution, the closed-loop energy weighting
  double closed_loop_margin = 0.0;  // max real part of eig(A + B K)
  double riccati_residual = 0.0;    // relative algebraic residual
  double gamma = 1.0;
};

FeedbackGain compute_feedback_gain(const LinearizedSystem& sys,
                                   double gamma = 1.0, double margin = 1e-6);

/// Solves A^T P + P A = -W for symmetric W by real Schur reduction; requires
/// that no two eigenvalues of A sum to zero.
MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& W);

/// Data of one time node of the nonhomogeneous linear system; empty members
/// stand for zero.
struct LinearStepData {
  VectorXd force;           // weak volume load over full vector dofs
  Vec2 force_body = Vec2::Zero();
  double torque_body = 0.0;
  VectorXd boundary;        // imposed non-rigid boundary values (control dofs)
  VectorXd div_data;        // pressure-space load of the divergence data
};

struct LinearTrajectory {
  std::vector<double> times;
  std::vector<VectorXd> states;     // combined coordinates per node
  std::vector<VectorXd> pressures;  // gauged pressure per node
  std::vector<VectorXd> controls;   // flux-free feedback values per node
  std::vector<double> energies;     // fluid plus body kinetic energy
  double stability_constant = 0.0;  // trajectory-to-data quotient
};

/// Implicit-Euler march of the coupled system; with a gain the control is fed
/// back from the reduced state of the previous node, without one the control
/// is zero.  Boundary data, volume and body sources, and divergence data are
/// sampled per node from `data`.
LinearTrajectory solve_nonhomogeneous_linear(
    const LinearizedSystem& sys, const FeedbackGain* gain,
    const std::function<LinearStepData(double)>& data, const VectorXd& x0,
    double dt, int n_steps);

}  // namespace swim
