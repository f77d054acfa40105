#pragma once

#include <functional>

#include "swim/fem.hpp"

namespace swim {

// ---------------------------------------------------------------------------
// Quadrature integrals over regions and tagged boundary circles.  Boundary
// callables receive the physical point and the outward radial unit normal.
// ---------------------------------------------------------------------------

double integrate_region(const Mesh& mesh, Region region,
                        const std::function<double(const Vec2&)>& f);
Vec2 integrate_region_vec(const Mesh& mesh, Region region,
                          const std::function<Vec2(const Vec2&)>& f);

double integrate_boundary(const Mesh& mesh, BoundaryTag tag,
                          const std::function<double(const Vec2&, const Vec2&)>& f);

inline double integrate_boundary_dot_n(
    const Mesh& mesh, BoundaryTag tag,
    const std::function<Vec2(const Vec2&)>& f) {
  return integrate_boundary(
      mesh, tag, [&](const Vec2& x, const Vec2& n) { return f(x).dot(n); });
}

inline Vec2 integrate_boundary_vec(const Mesh& mesh, BoundaryTag tag,
                                   const std::function<Vec2(const Vec2&)>& f) {
  Vec2 out = Vec2::Zero();
  for (int k = 0; k < 2; ++k) {
    out[k] = integrate_boundary(
        mesh, tag, [&](const Vec2& x, const Vec2&) { return f(x)[k]; });
  }
  return out;
}

/// Integral of y ∧ f over a boundary circle.
inline double integrate_boundary_cross(
    const Mesh& mesh, BoundaryTag tag,
    const std::function<Vec2(const Vec2&)>& f) {
  return integrate_boundary(
      mesh, tag, [&](const Vec2& x, const Vec2&) { return cross2(x, f(x)); });
}

/// Integral of M n over a boundary circle (matrix-valued integrand).
inline Vec2 integrate_boundary_mat_n(
    const Mesh& mesh, BoundaryTag tag,
    const std::function<Mat2(const Vec2&)>& f) {
  Vec2 out = Vec2::Zero();
  for (int k = 0; k < 2; ++k) {
    out[k] = integrate_boundary(mesh, tag, [&](const Vec2& x, const Vec2& n) {
      return (f(x) * n)[k];
    });
  }
  return out;
}

/// Integral of y ∧ (M n) over a boundary circle.
inline double integrate_boundary_cross_mat_n(
    const Mesh& mesh, BoundaryTag tag,
    const std::function<Mat2(const Vec2&)>& f) {
  return integrate_boundary(mesh, tag, [&](const Vec2& x, const Vec2& n) {
    return cross2(x, f(x) * n);
  });
}

// ---------------------------------------------------------------------------
// Sparse operators.  Vector dofs interleave as 2*dof+comp.
// ---------------------------------------------------------------------------

SpMat scalar_mass(const FemSpace& s);
SpMat scalar_stiffness(const FemSpace& s);
SpMat vector_mass(const FemSpace& s);
/// Full-gradient stiffness: ∫ ∇u : ∇v.
SpMat vector_grad_stiffness(const FemSpace& s);
/// Symmetric-gradient stiffness: ∫ 2 D(u) : D(v).
SpMat vector_symgrad_stiffness(const FemSpace& s);
/// Mixed divergence: rows are pressure dofs, cols vector dofs, ∫ q div u.
SpMat mixed_divergence(const FemSpace& vel, const FemSpace& prs);
/// Load vector of the pressure space against 1 (zero-mean gauge row).
VectorXd pressure_integral_row(const FemSpace& prs);

/// Weak load ⟨f, v⟩ for a vector-valued integrand given at physical points.
VectorXd assemble_vector_load(const FemSpace& s,
                              const std::function<Vec2(const Vec2&)>& f);

/// Linear functional ∮ v·n over one boundary circle of the space's support,
/// as a vector over interleaved vector dofs.
VectorXd boundary_flux_row(const FemSpace& s, BoundaryTag tag);

/// L2 norm of a vector field over the support of its space.
double vector_field_l2(const FemSpace& s, const VectorXd& nodal);

/// L2 norm of the Riesz representer of a vector-dof load restricted to test
/// functions vanishing on every boundary circle of the support.
double interior_riesz_norm(const FemSpace& s, const VectorXd& load);

}  // namespace swim
