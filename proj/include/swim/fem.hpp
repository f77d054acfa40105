#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "swim/geometry.hpp"
#include "swim/mesh.hpp"
#include "swim/quadrature.hpp"

namespace swim {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class Support : int { FluidOnly = 0, SolidOnly = 1, All = 2 };

inline bool in_support(Support s, Region r) {
  return s == Support::All || (s == Support::FluidOnly && r == Region::Fluid) ||
         (s == Support::SolidOnly && r == Region::Solid);
}

/// Affine geometry of one straight triangle.
struct CellGeom {
  Vec2 p0;
  Mat2 J, Jinv;
  double detJ = 0.0;

  static CellGeom of(const Mesh& mesh, int c) {
    CellGeom g;
    g.p0 = mesh.cell_vertex(c, 0);
    g.J.col(0) = mesh.cell_vertex(c, 1) - g.p0;
    g.J.col(1) = mesh.cell_vertex(c, 2) - g.p0;
    g.detJ = g.J.determinant();
    g.Jinv = g.J.inverse();
    return g;
  }

  Vec2 map(const std::array<double, 3>& bary) const {
    return p0 + J.col(0) * bary[1] + J.col(1) * bary[2];
  }
};

/// Reference Lagrange basis on the unit triangle; local nodes are the three
/// vertices followed (for degree 2) by the midpoints of edges (01),(12),(20).
struct RefBasis {
  int n = 0;
  std::array<double, 6> phi{};
  std::array<Vec2, 6> grad{};  // reference gradients

  static RefBasis at(int degree, const std::array<double, 3>& b);
  /// Constant reference Hessians of the degree-2 basis.
  static const std::array<Mat2, 6>& p2_hessians();
};

/// Continuous Lagrange space of degree 1 or 2, restricted to the cells of one
/// region (or the whole mesh).  Scalar dofs sit on vertices and, for degree 2,
/// on edge midpoints; vector fields interleave components as 2*dof+comp.
class FemSpace {
public:
  FemSpace(const Mesh& mesh, int degree, Support support);

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  Support support() const { return support_; }
  int n_dofs() const { return n_dofs_; }
  int n_local() const { return degree_ == 1 ? 3 : 6; }
  const std::vector<int>& cells() const { return cells_; }

  /// Scalar dof of local node `i` on (global) cell `c`; valid for cells in
  /// the support.
  int cell_dof(int c, int i) const { return cell_dofs_[c][i]; }

  /// Geometric location of a scalar dof (vertex or edge midpoint).
  Vec2 dof_point(int dof) const { return dof_points_[dof]; }

  struct TraceEdge {
    int be = -1;                    // index into mesh.boundary_edges
    int cell = -1;                  // adjacent cell inside this support
    int l0 = -1, l1 = -1;           // local vertex ids of (v0, v1) in `cell`
    std::array<int, 3> dofs{};      // v0, v1, midpoint (midpoint -1 for P1)
  };
  /// Barycentric point inside the adjacent cell at edge parameter t in [0,1].
  static std::array<double, 3> edge_bary(const TraceEdge& te, double t) {
    std::array<double, 3> b{0.0, 0.0, 0.0};
    b[te.l0] = 1.0 - t;
    b[te.l1] = t;
    return b;
  }
  /// Boundary edges of one tag (in CCW order) with their trace dofs.
  const std::vector<TraceEdge>& trace(BoundaryTag tag) const {
    return trace_[static_cast<int>(tag)];
  }
  /// Unique scalar dofs on one boundary circle.
  std::vector<int> boundary_dofs(BoundaryTag tag) const;

  VectorXd interpolate_scalar(const std::function<double(const Vec2&)>& f) const;
  VectorXd interpolate_vector(const std::function<Vec2(const Vec2&)>& f) const;

private:
  const Mesh* mesh_;
  int degree_;
  Support support_;
  int n_dofs_ = 0;
  std::vector<int> cells_;
  std::vector<std::array<int, 6>> cell_dofs_;
  std::vector<Vec2> dof_points_;
  std::array<std::vector<TraceEdge>, 2> trace_;
};

/// Quadratic trace basis on [0,1] with nodes (0, 1, 1/2), matching
/// FemSpace::TraceEdge dof order.
inline std::array<double, 3> trace_basis_p2(double t) {
  return {(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)};
}
inline std::array<double, 3> trace_basis_p2_deriv(double t) {
  return {4.0 * t - 3.0, 4.0 * t - 1.0, 4.0 - 8.0 * t};
}

/// Value/gradient/Hessian evaluation of nodal fields cell by cell.
struct FieldSampler {
  const FemSpace* space;
  const VectorXd* nodal;  // scalar: size n_dofs; vector: size 2*n_dofs

  double value_scalar(int c, const CellGeom& g, const RefBasis& rb) const;
  Vec2 grad_scalar(int c, const CellGeom& g, const RefBasis& rb) const;
  Vec2 value_vector(int c, const CellGeom& g, const RefBasis& rb) const;
  /// Row i is the gradient of component i.
  Mat2 grad_vector(int c, const CellGeom& g, const RefBasis& rb) const;
  /// Hessians of the two components (degree 2 only; constant per cell).
  std::array<Mat2, 2> hessian_vector(int c, const CellGeom& g) const;
};

}  // namespace swim
