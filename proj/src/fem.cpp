#include "swim/fem.hpp"

#include <map>

#include "swim/error.hpp"

namespace swim {

RefBasis RefBasis::at(int degree, const std::array<double, 3>& b) {
  const Vec2 gL0(-1.0, -1.0), gL1(1.0, 0.0), gL2(0.0, 1.0);
  const std::array<Vec2, 3> gL{gL0, gL1, gL2};
  RefBasis rb;
  if (degree == 1) {
    rb.n = 3;
    for (int i = 0; i < 3; ++i) {
      rb.phi[i] = b[i];
      rb.grad[i] = gL[i];
    }
    return rb;
  }
  rb.n = 6;
  for (int i = 0; i < 3; ++i) {
    rb.phi[i] = b[i] * (2.0 * b[i] - 1.0);
    rb.grad[i] = (4.0 * b[i] - 1.0) * gL[i];
  }
  const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
  for (int e = 0; e < 3; ++e) {
    rb.phi[3 + e] = 4.0 * b[ea[e]] * b[eb[e]];
    rb.grad[3 + e] = 4.0 * (b[ea[e]] * gL[eb[e]] + b[eb[e]] * gL[ea[e]]);
  }
  return rb;
}

const std::array<Mat2, 6>& RefBasis::p2_hessians() {
  static const std::array<Mat2, 6> h = [] {
    const Vec2 gL[3] = {Vec2(-1, -1), Vec2(1, 0), Vec2(0, 1)};
    std::array<Mat2, 6> out;
    for (int i = 0; i < 3; ++i) out[i] = 4.0 * gL[i] * gL[i].transpose();
    const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
    for (int e = 0; e < 3; ++e) {
      out[3 + e] = 4.0 * (gL[ea[e]] * gL[eb[e]].transpose() +
                          gL[eb[e]] * gL[ea[e]].transpose());
    }
    return out;
  }();
  return h;
}

FemSpace::FemSpace(const Mesh& mesh, int degree, Support support)
    : mesh_(&mesh), degree_(degree), support_(support) {
  if (degree != 1 && degree != 2) throw AssemblyError("degree must be 1 or 2");
  std::vector<int> vertex_dof(mesh.n_vertices(), -1);
  std::vector<int> edge_dof(mesh.n_edges(), -1);
  cell_dofs_.assign(mesh.n_cells(), {-1, -1, -1, -1, -1, -1});

  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (!in_support(support, mesh.cell_region[c])) continue;
    cells_.push_back(c);
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.cells[c][i];
      if (vertex_dof[v] < 0) {
        vertex_dof[v] = n_dofs_++;
        dof_points_.push_back(mesh.vertices[v]);
      }
      cell_dofs_[c][i] = vertex_dof[v];
    }
    if (degree == 2) {
      for (int e = 0; e < 3; ++e) {
        const int ge = mesh.cell_edges[c][e];
        if (edge_dof[ge] < 0) {
          edge_dof[ge] = n_dofs_++;
          dof_points_.push_back(0.5 * (mesh.vertices[mesh.edges[ge][0]] +
                                       mesh.vertices[mesh.edges[ge][1]]));
        }
        cell_dofs_[c][3 + e] = edge_dof[ge];
      }
    }
  }

  std::map<std::array<int, 2>, int> edge_ids;
  for (int e = 0; e < mesh.n_edges(); ++e) edge_ids[mesh.edges[e]] = e;
  for (int b = 0; b < static_cast<int>(mesh.boundary_edges.size()); ++b) {
    const auto& be = mesh.boundary_edges[b];
    if (vertex_dof[be.v0] < 0 || vertex_dof[be.v1] < 0) continue;
    TraceEdge te;
    te.be = b;
    const int cands[2] = {be.cell, be.cell_opposite};
    for (int c : cands) {
      if (c >= 0 && in_support(support, mesh.cell_region[c])) te.cell = c;
    }
    if (te.cell < 0) continue;
    for (int i = 0; i < 3; ++i) {
      if (mesh.cells[te.cell][i] == be.v0) te.l0 = i;
      if (mesh.cells[te.cell][i] == be.v1) te.l1 = i;
    }
    te.dofs = {vertex_dof[be.v0], vertex_dof[be.v1], -1};
    if (degree == 2) {
      std::array<int, 2> key{be.v0, be.v1};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      te.dofs[2] = edge_dof[edge_ids.at(key)];
      if (te.dofs[2] < 0) continue;
    }
    trace_[static_cast<int>(be.tag)].push_back(te);
  }
}

std::vector<int> FemSpace::boundary_dofs(BoundaryTag tag) const {
  std::vector<int> out;
  std::vector<char> seen(n_dofs_, 0);
  for (const TraceEdge& te : trace(tag)) {
    for (int d : te.dofs) {
      if (d >= 0 && !seen[d]) {
        seen[d] = 1;
        out.push_back(d);
      }
    }
  }
  return out;
}

VectorXd FemSpace::interpolate_scalar(
    const std::function<double(const Vec2&)>& f) const {
  VectorXd u(n_dofs_);
  for (int d = 0; d < n_dofs_; ++d) u[d] = f(dof_points_[d]);
  return u;
}

VectorXd FemSpace::interpolate_vector(
    const std::function<Vec2(const Vec2&)>& f) const {
  VectorXd u(2 * n_dofs_);
  for (int d = 0; d < n_dofs_; ++d) u.segment<2>(2 * d) = f(dof_points_[d]);
  return u;
}

double FieldSampler::value_scalar(int c, const CellGeom&, const RefBasis& rb) const {
  double v = 0.0;
  for (int i = 0; i < rb.n; ++i) v += (*nodal)[space->cell_dof(c, i)] * rb.phi[i];
  return v;
}

Vec2 FieldSampler::grad_scalar(int c, const CellGeom& g, const RefBasis& rb) const {
  Vec2 gr = Vec2::Zero();
  for (int i = 0; i < rb.n; ++i) gr += (*nodal)[space->cell_dof(c, i)] * rb.grad[i];
  return g.Jinv.transpose() * gr;
}

Vec2 FieldSampler::value_vector(int c, const CellGeom&, const RefBasis& rb) const {
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < rb.n; ++i) {
    const int d = space->cell_dof(c, i);
    v[0] += (*nodal)[2 * d] * rb.phi[i];
    v[1] += (*nodal)[2 * d + 1] * rb.phi[i];
  }
  return v;
}

Mat2 FieldSampler::grad_vector(int c, const CellGeom& g, const RefBasis& rb) const {
  Mat2 gr = Mat2::Zero();
  for (int i = 0; i < rb.n; ++i) {
    const int d = space->cell_dof(c, i);
    const Vec2 gphi = g.Jinv.transpose() * rb.grad[i];
    gr.row(0) += (*nodal)[2 * d] * gphi.transpose();
    gr.row(1) += (*nodal)[2 * d + 1] * gphi.transpose();
  }
  return gr;
}

std::array<Mat2, 2> FieldSampler::hessian_vector(int c, const CellGeom& g) const {
  std::array<Mat2, 2> h{Mat2::Zero(), Mat2::Zero()};
  const auto& href = RefBasis::p2_hessians();
  for (int i = 0; i < 6; ++i) {
    const int d = space->cell_dof(c, i);
    const Mat2 hx = g.Jinv.transpose() * href[i] * g.Jinv;
    h[0] += (*nodal)[2 * d] * hx;
    h[1] += (*nodal)[2 * d + 1] * hx;
  }
  return h;
}

}  // namespace swim
