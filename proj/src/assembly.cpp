#include "swim/assembly.hpp"

#include <Eigen/SparseCholesky>

#include "swim/error.hpp"

namespace swim {

namespace {

const TriQuadrature& tq() { return TriQuadrature::degree4(); }
const EdgeQuadrature& eq() { return EdgeQuadrature::degree5(); }

std::vector<RefBasis> basis_table(int degree) {
  std::vector<RefBasis> t;
  for (int q = 0; q < TriQuadrature::n; ++q) {
    t.push_back(RefBasis::at(degree, tq().bary[q]));
  }
  return t;
}

}  // namespace

double integrate_region(const Mesh& mesh, Region region,
                        const std::function<double(const Vec2&)>& f) {
  double acc = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (mesh.cell_region[c] != region) continue;
    const CellGeom g = CellGeom::of(mesh, c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      acc += tq().w[q] * g.detJ * f(g.map(tq().bary[q]));
    }
  }
  return acc;
}

Vec2 integrate_region_vec(const Mesh& mesh, Region region,
                          const std::function<Vec2(const Vec2&)>& f) {
  Vec2 acc = Vec2::Zero();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (mesh.cell_region[c] != region) continue;
    const CellGeom g = CellGeom::of(mesh, c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      acc += tq().w[q] * g.detJ * f(g.map(tq().bary[q]));
    }
  }
  return acc;
}

double integrate_boundary(
    const Mesh& mesh, BoundaryTag tag,
    const std::function<double(const Vec2&, const Vec2&)>& f) {
  double acc = 0.0;
  for (int e = 0; e < static_cast<int>(mesh.boundary_edges.size()); ++e) {
    const auto& be = mesh.boundary_edges[e];
    if (be.tag != tag) continue;
    const Vec2 a = mesh.vertices[be.v0], b = mesh.vertices[be.v1];
    const double len = (b - a).norm();
    const Vec2 n = mesh.boundary_normal(e);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const Vec2 x = a + eq().t[q] * (b - a);
      acc += eq().w[q] * len * f(x, n);
    }
  }
  return acc;
}

namespace {

template <typename CellKernel>
SpMat assemble_cellwise(const FemSpace& s, int block, CellKernel&& kernel) {
  const int n = block * s.n_dofs();
  std::vector<Triplet> trips;
  trips.reserve(s.cells().size() * 36 * block * block);
  const auto table = basis_table(s.degree());
  const int nl = s.n_local();
  MatrixXd local(block * nl, block * nl);
  for (int c : s.cells()) {
    const CellGeom g = CellGeom::of(s.mesh(), c);
    local.setZero();
    for (int q = 0; q < TriQuadrature::n; ++q) {
      kernel(c, g, table[q], tq().w[q] * g.detJ, local);
    }
    for (int i = 0; i < nl; ++i) {
      for (int j = 0; j < nl; ++j) {
        for (int bi = 0; bi < block; ++bi) {
          for (int bj = 0; bj < block; ++bj) {
            const double v = local(block * i + bi, block * j + bj);
            if (v != 0.0) {
              trips.emplace_back(block * s.cell_dof(c, i) + bi,
                                 block * s.cell_dof(c, j) + bj, v);
            }
          }
        }
      }
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

SpMat scalar_mass(const FemSpace& s) {
  return assemble_cellwise(s, 1,
                           [&](int, const CellGeom&, const RefBasis& rb,
                               double w, MatrixXd& local) {
                             for (int i = 0; i < rb.n; ++i)
                               for (int j = 0; j < rb.n; ++j)
                                 local(i, j) += w * rb.phi[i] * rb.phi[j];
                           });
}

SpMat scalar_stiffness(const FemSpace& s) {
  return assemble_cellwise(
      s, 1,
      [&](int, const CellGeom& g, const RefBasis& rb, double w, MatrixXd& local) {
        std::array<Vec2, 6> gp;
        for (int i = 0; i < rb.n; ++i) gp[i] = g.Jinv.transpose() * rb.grad[i];
        for (int i = 0; i < rb.n; ++i)
          for (int j = 0; j < rb.n; ++j)
            local(i, j) += w * gp[i].dot(gp[j]);
      });
}

SpMat vector_mass(const FemSpace& s) {
  return assemble_cellwise(s, 2,
                           [&](int, const CellGeom&, const RefBasis& rb,
                               double w, MatrixXd& local) {
                             for (int i = 0; i < rb.n; ++i)
                               for (int j = 0; j < rb.n; ++j) {
                                 const double v = w * rb.phi[i] * rb.phi[j];
                                 local(2 * i, 2 * j) += v;
                                 local(2 * i + 1, 2 * j + 1) += v;
                               }
                           });
}

SpMat vector_grad_stiffness(const FemSpace& s) {
  return assemble_cellwise(
      s, 2,
      [&](int, const CellGeom& g, const RefBasis& rb, double w, MatrixXd& local) {
        std::array<Vec2, 6> gp;
        for (int i = 0; i < rb.n; ++i) gp[i] = g.Jinv.transpose() * rb.grad[i];
        for (int i = 0; i < rb.n; ++i)
          for (int j = 0; j < rb.n; ++j) {
            const double v = w * gp[i].dot(gp[j]);
            local(2 * i, 2 * j) += v;
            local(2 * i + 1, 2 * j + 1) += v;
          }
      });
}

SpMat vector_symgrad_stiffness(const FemSpace& s) {
  // 2 D(u):D(v) = ∇u:∇v + ∇u:∇vᵀ, assembled from basis gradients.
  return assemble_cellwise(
      s, 2,
      [&](int, const CellGeom& g, const RefBasis& rb, double w, MatrixXd& local) {
        std::array<Vec2, 6> gp;
        for (int i = 0; i < rb.n; ++i) gp[i] = g.Jinv.transpose() * rb.grad[i];
        for (int i = 0; i < rb.n; ++i)
          for (int j = 0; j < rb.n; ++j) {
            const double dot = gp[i].dot(gp[j]);
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b) {
                double v = gp[i][b] * gp[j][a];
                if (a == b) v += dot;
                local(2 * i + a, 2 * j + b) += w * v;
              }
          }
      });
}

SpMat mixed_divergence(const FemSpace& vel, const FemSpace& prs) {
  std::vector<Triplet> trips;
  const auto vtab = basis_table(vel.degree());
  const auto ptab = basis_table(prs.degree());
  for (int c : vel.cells()) {
    if (prs.cell_dof(c, 0) < 0) continue;
    const CellGeom g = CellGeom::of(vel.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const double w = tq().w[q] * g.detJ;
      for (int i = 0; i < prs.n_local(); ++i) {
        const double qi = ptab[q].phi[i];
        const int row = prs.cell_dof(c, i);
        for (int j = 0; j < vel.n_local(); ++j) {
          const Vec2 gj = g.Jinv.transpose() * vtab[q].grad[j];
          const int col = vel.cell_dof(c, j);
          trips.emplace_back(row, 2 * col, w * qi * gj[0]);
          trips.emplace_back(row, 2 * col + 1, w * qi * gj[1]);
        }
      }
    }
  }
  SpMat m(prs.n_dofs(), 2 * vel.n_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

VectorXd pressure_integral_row(const FemSpace& prs) {
  VectorXd row = VectorXd::Zero(prs.n_dofs());
  const auto tab = basis_table(prs.degree());
  for (int c : prs.cells()) {
    const CellGeom g = CellGeom::of(prs.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const double w = tq().w[q] * g.detJ;
      for (int i = 0; i < prs.n_local(); ++i) {
        row[prs.cell_dof(c, i)] += w * tab[q].phi[i];
      }
    }
  }
  return row;
}

VectorXd assemble_vector_load(const FemSpace& s,
                              const std::function<Vec2(const Vec2&)>& f) {
  VectorXd load = VectorXd::Zero(2 * s.n_dofs());
  const auto tab = basis_table(s.degree());
  for (int c : s.cells()) {
    const CellGeom g = CellGeom::of(s.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const double w = tq().w[q] * g.detJ;
      const Vec2 fx = f(g.map(tq().bary[q]));
      for (int i = 0; i < s.n_local(); ++i) {
        const int d = s.cell_dof(c, i);
        load[2 * d] += w * fx[0] * tab[q].phi[i];
        load[2 * d + 1] += w * fx[1] * tab[q].phi[i];
      }
    }
  }
  return load;
}

VectorXd boundary_flux_row(const FemSpace& s, BoundaryTag tag) {
  VectorXd row = VectorXd::Zero(2 * s.n_dofs());
  const auto& eq = EdgeQuadrature::degree5();
  const Mesh& mesh = s.mesh();
  for (const auto& te : s.trace(tag)) {
    const Vec2 n = mesh.boundary_normal(te.be);
    const double len = mesh.boundary_edge_length(te.be);
    for (int q = 0; q < eq.n; ++q) {
      const double t = eq.t[q];
      const double w = eq.w[q] * len;
      if (s.degree() == 2) {
        const auto tb = trace_basis_p2(t);
        for (int k = 0; k < 3; ++k) {
          row[2 * te.dofs[k]] += w * tb[k] * n[0];
          row[2 * te.dofs[k] + 1] += w * tb[k] * n[1];
        }
      } else {
        const double tb[2] = {1.0 - t, t};
        for (int k = 0; k < 2; ++k) {
          row[2 * te.dofs[k]] += w * tb[k] * n[0];
          row[2 * te.dofs[k] + 1] += w * tb[k] * n[1];
        }
      }
    }
  }
  return row;
}

double vector_field_l2(const FemSpace& s, const VectorXd& nodal) {
  const auto tab = basis_table(s.degree());
  FieldSampler fs{&s, &nodal};
  double acc = 0.0;
  for (int c : s.cells()) {
    const CellGeom g = CellGeom::of(s.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      acc += tq().w[q] * g.detJ * fs.value_vector(c, g, tab[q]).squaredNorm();
    }
  }
  return std::sqrt(acc);
}

double interior_riesz_norm(const FemSpace& s, const VectorXd& load) {
  std::vector<char> is_boundary(s.n_dofs(), 0);
  for (BoundaryTag tag :
       {BoundaryTag::SolidBoundary, BoundaryTag::OuterBoundary}) {
    for (int d : s.boundary_dofs(tag)) is_boundary[d] = 1;
  }
  std::vector<int> keep;
  for (int d = 0; d < s.n_dofs(); ++d) {
    if (!is_boundary[d]) {
      keep.push_back(2 * d);
      keep.push_back(2 * d + 1);
    }
  }
  VectorXd r(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) r[i] = load[keep[i]];

  const SpMat mass_full = vector_mass(s);
  std::vector<Triplet> trips;
  std::vector<int> where(2 * s.n_dofs(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    where[keep[i]] = static_cast<int>(i);
  }
  for (int k = 0; k < mass_full.outerSize(); ++k) {
    for (SpMat::InnerIterator it(mass_full, k); it; ++it) {
      if (where[it.row()] >= 0 && where[it.col()] >= 0) {
        trips.emplace_back(where[it.row()], where[it.col()], it.value());
      }
    }
  }
  SpMat mass(keep.size(), keep.size());
  mass.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SpMat> chol(mass);
  if (chol.info() != Eigen::Success) {
    throw SolverError("interior mass factorization failed");
  }
  return std::sqrt(r.dot(chol.solve(r)));
}

}  // namespace swim
