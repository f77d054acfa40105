#pragma once

#include <Eigen/SparseCholesky>

#include "swim/assembly.hpp"
#include "swim/bundle.hpp"

namespace swim {

/// Per-cell quadrature-point samples, aligned with TransformBundle::vol and
/// FemSpace::cells().
using QuadVec = std::vector<std::array<Vec2, TriQuadrature::n>>;
using QuadMat = std::vector<std::array<Mat2, TriQuadrature::n>>;
using QuadScalar = std::vector<std::array<double, TriQuadrature::n>>;
/// Interface quadrature-point samples, aligned with TransformBundle::bnd and
/// the solid-boundary trace of the velocity space.
using EdgeVec = std::vector<std::array<Vec2, EdgeQuadrature::n>>;

// ---------------------------------------------------------------------------
// Pointwise pullback operators.  The bundle carries the body-frame map X and
// its inverse-map data at the quadrature points; u is a nodal P2 vector field
// on the bundle's space and p a nodal P1 field on the same cells.  Gradients
// are Jacobians (row i is the gradient of component i).
// ---------------------------------------------------------------------------

/// Laplacian seen through the map: grad u . lap Y(X) plus the Hessian of each
/// component contracted with (grad Y grad Y^T)(X).  Identity map: the plain
/// component Laplacian.
QuadVec transformed_laplacian(const TransformBundle& b, const VectorXd& u);

/// Transport by the frame motion: -grad u . grad Y(X) . (h_dot + omega ^ X +
/// e^{lambda t} dX/dt).  The map rate is a true time derivative while the
/// rigid rates arrive on the weighted scale, so the rate slot is raised by
/// e^{lambda t} here; the overall e^{-lambda t} applied by the volume source
/// then leaves it at true scale.
QuadVec frame_transport(const TransformBundle& b, const VectorXd& u,
                        const Vec2& h_dot, double omega, double lambda);

/// Convection seen through the map: grad u . grad Y(X) . u.
QuadVec transformed_convection(const TransformBundle& b, const VectorXd& u);

/// Pressure gradient seen through the map: grad Y(X)^T grad p.
QuadVec transformed_pressure_gradient(const TransformBundle& b,
                                      const FemSpace& pressure,
                                      const VectorXd& p);

/// Stress seen through the map: nu (grad u grad Y(X) + grad Y(X)^T grad u^T)
/// - p I, at the volume quadrature points.
QuadMat transformed_stress(const TransformBundle& b, const FemSpace& pressure,
                           const VectorXd& u, const VectorXd& p, double nu);

/// Weak-form load <f, phi_i> of quadrature-point data over interleaved vector
/// dofs of `s`.
VectorXd assemble_qp_load(const FemSpace& s, const QuadVec& f);

/// L2 projection of quadrature-point data onto a vector FE space; the mass
/// factorization is reused across calls.
class L2Projector {
 public:
  explicit L2Projector(const FemSpace& s);
  VectorXd project(const QuadVec& f) const;

 private:
  const FemSpace* space_;
  Eigen::SimplicialLDLT<SpMat> mass_;
};

// ---------------------------------------------------------------------------
// Rigid-body data and the deformed inertia.
// ---------------------------------------------------------------------------

/// Mass and reference moment of inertia of the solid region, by quadrature.
struct RigidBody {
  double rho = 1.0;       // solid density
  double area = 0.0;      // |S|
  double mass = 0.0;      // rho |S|
  double inertia0 = 0.0;  // rho * integral of |y|^2 over S

  static RigidBody of(const Mesh& mesh, double rho);
};

/// Moment of inertia of the deformed solid, rho * integral of |y + Z|^2, for
/// a nodal displacement on a degree-2 solid vector space.
double solid_inertia(const FemSpace& solid, const VectorXd& zstar, double rho);

/// Its time derivative 2 rho * integral of (y + Z) . dZ/dt.
double solid_inertia_rate(const FemSpace& solid, const VectorXd& zstar,
                          const VectorXd& zstar_rate, double rho);

// ---------------------------------------------------------------------------
// Source assembly for the fixed-domain system.
// ---------------------------------------------------------------------------

/// Everything the fixed-domain step needs from one evaluation point of the
/// previous iterate: the volume source F, the divergence carrier G with its
/// scalar data g = tr(grad u (I - grad Y)), the interface wobble W, and the
/// extra body force/torque, together with the deformed inertia.
struct SourceBundle {
  double t = 0.0;
  double lambda = 0.0;

  QuadVec F_qp;      // volume source at quadrature points
  VectorXd F_load;   // <F, phi> over velocity dofs

  QuadVec G_qp;      // (I - grad Y(X)) u at quadrature points
  VectorXd G_load;   // <G, phi> over velocity dofs
  VectorXd G_nodal;  // L2 projection of G (empty when no projector is given)

  QuadScalar g_qp;   // divergence data tr(grad u (I - grad Y(X)))
  VectorXd g_load;   // <g, q> over pressure dofs

  EdgeVec G_bnd;     // G at the interface quadrature points
  EdgeVec W_bnd;     // omega ^ (X - y) at the interface quadrature points

  Vec2 F_M = Vec2::Zero();  // extra body-force source
  double F_I = 0.0;         // extra torque source

  double inertia = 0.0;       // deformed moment of inertia
  double inertia_rate = 0.0;  // its time derivative
};

struct SourceParams {
  double nu = 1.0;
  double lambda = 0.0;
  RigidBody body;
};

/// Assembles every source of the fixed-domain system from one previous
/// iterate (u, p, h_dot, omega, omega_dot on the weighted scale, true-scale
/// solid displacement and rate).  The volume source is
///   nu (transformed - plain) Laplacian - e^{-lambda t} (transport +
///   convection + omega ^ u) - (transformed - plain) pressure gradient,
/// the body sources carry the interface stress corrections and the inertia
/// defect terms, and the boundary normal is the reference chord normal.
SourceBundle assemble_sources(const TransformBundle& b,
                              const FemSpace& pressure, const VectorXd& u,
                              const VectorXd& p, const Vec2& h_dot,
                              double omega, double omega_dot,
                              const FemSpace& solid, const VectorXd& zstar,
                              const VectorXd& zstar_rate,
                              const SourceParams& prm,
                              const L2Projector* project_g = nullptr);

/// Interface fluxes whose agreement certifies that the divergence data is
/// compatible with the boundary data actually imposed: the flux of G against
/// the flux of e^{lambda t} dX/dt + omega ^ (X - y).  The rigid parts of the
/// boundary data integrate to zero over the closed interface and are omitted.
struct FluxGap {
  double carrier_flux = 0.0;  // integral of G . n over the interface
  double data_flux = 0.0;     // integral of the imposed non-rigid data . n
  double gap = 0.0;
};

FluxGap interface_flux_gap(const TransformBundle& b, const VectorXd& u,
                           double omega, double lambda);

/// Weighted-scale fluid unknowns: nodal velocity over interleaved vector dofs
/// and nodal pressure carrying a zero-mean gauge.
struct FluidState {
  VectorXd u;
  VectorXd p;
};

/// Shifts the pressure so its integral over the carrier region vanishes.
void apply_pressure_gauge(const FemSpace& pressure, VectorXd& p);

/// Largest velocity magnitude among the outer-circle dofs (zero for fields
/// honoring the outer clamp).
double outer_trace_sup(const FemSpace& vel, const VectorXd& u);

}  // namespace swim
