#include "swim/bundle.hpp"

#include <Eigen/SparseCholesky>

#include "swim/assembly.hpp"
#include "swim/error.hpp"

namespace swim {

namespace {

// Completes grad_yt, det and lap_yt from grad_xt and the two y-derivative
// slices D[m] = ∂(∇ body map)/∂y_m.  With B(y) the inverse Jacobian at the
// mapped point, ∂_m B = -B D_m B and the Hessian chain rule contracts to
// lap_i = Σ_j Σ_m (∂_m B)_{ij} B_{mj}.
void finish_point(BundlePoint& p, const Mat2 D[2]) {
  p.det = p.grad_xt.determinant();
  if (!(std::abs(p.det) > 1e-12)) {
    throw GeometryError("body map Jacobian is singular at a sample point");
  }
  p.grad_yt = p.grad_xt.inverse();
  Mat2 dB[2];
  for (int m = 0; m < 2; ++m) dB[m] = -p.grad_yt * D[m] * p.grad_yt;
  p.lap_yt.setZero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int m = 0; m < 2; ++m) {
        p.lap_yt[i] += dB[m](i, j) * p.grad_yt(m, j);
      }
    }
  }
}

}  // namespace

TransformBundle assemble_bundle(const FemSpace& fluid_p2,
                                const VectorXd& map_nodal,
                                const VectorXd& map_rate_nodal,
                                const RigidState& rigid, const Vec2& h_dot,
                                double omega, double t) {
  if (fluid_p2.degree() != 2) throw AssemblyError("bundle needs a P2 space");
  TransformBundle b;
  b.space = &fluid_p2;
  b.t = t;
  b.rigid = rigid;
  b.h_dot = h_dot;
  b.omega = omega;

  const Mat2 Rt = rigid.R().transpose();
  const auto& tq = TriQuadrature::degree4();
  const auto& eq = EdgeQuadrature::degree5();
  FieldSampler pos{&fluid_p2, &map_nodal};
  FieldSampler rate{&fluid_p2, &map_rate_nodal};

  auto fill = [&](int c, const CellGeom& g, const std::array<double, 3>& bary,
                  BundlePoint& p) {
    const RefBasis rb = RefBasis::at(2, bary);
    p.y = g.map(bary);
    const Vec2 x = pos.value_vector(c, g, rb);
    p.xt = Rt * (x - rigid.h);
    p.grad_xt = Rt * pos.grad_vector(c, g, rb);
    p.dxt_dt =
        Rt * (rate.value_vector(c, g, rb) - h_dot - omega * perp(x - rigid.h));
    const auto hess = pos.hessian_vector(c, g);
    // Body-frame Hessians are row mixtures of the physical ones.
    Mat2 hb[2];
    for (int i = 0; i < 2; ++i) hb[i] = Rt(i, 0) * hess[0] + Rt(i, 1) * hess[1];
    Mat2 D[2];
    for (int m = 0; m < 2; ++m) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) D[m](i, j) = hb[i](j, m);
      }
    }
    finish_point(p, D);
  };

  b.vol.resize(fluid_p2.cells().size());
  for (std::size_t k = 0; k < fluid_p2.cells().size(); ++k) {
    const int c = fluid_p2.cells()[k];
    const CellGeom g = CellGeom::of(fluid_p2.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      fill(c, g, tq.bary[q], b.vol[k][q]);
      b.max_det_err =
          std::max(b.max_det_err, std::abs(b.vol[k][q].det - 1.0));
    }
  }
  const auto& trace = fluid_p2.trace(BoundaryTag::SolidBoundary);
  b.bnd.resize(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const CellGeom g = CellGeom::of(fluid_p2.mesh(), trace[k].cell);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      fill(trace[k].cell, g, FemSpace::edge_bary(trace[k], eq.t[q]),
           b.bnd[k][q]);
    }
  }
  return b;
}

TransformBundle assemble_bundle_analytic(const FemSpace& fluid_p2,
                                         const AnalyticMap& map, double t) {
  TransformBundle b;
  b.space = &fluid_p2;
  b.t = t;

  auto hess_at = [&](const Vec2& y) -> std::array<Mat2, 2> {
    if (map.hess) return map.hess(y);
    const double h = 1e-5;
    std::array<Mat2, 2> out{Mat2::Zero(), Mat2::Zero()};
    for (int m = 0; m < 2; ++m) {
      Vec2 e = Vec2::Zero();
      e[m] = h;
      const Mat2 d = (map.grad(y + e) - map.grad(y - e)) / (2.0 * h);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) out[i](j, m) = d(i, j);
      }
    }
    // Returned as Hessians H_i(j,m) = ∂²(body map)_i / ∂y_j ∂y_m.
    return out;
  };

  auto fill = [&](const Vec2& y, BundlePoint& p) {
    p.y = y;
    p.xt = map.value(y);
    p.grad_xt = map.grad(y);
    p.dxt_dt = map.rate ? map.rate(y) : Vec2::Zero();
    const auto hb = hess_at(y);
    Mat2 D[2];
    for (int m = 0; m < 2; ++m) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) D[m](i, j) = hb[i](j, m);
      }
    }
    finish_point(p, D);
  };

  const auto& tq = TriQuadrature::degree4();
  const auto& eq = EdgeQuadrature::degree5();
  b.vol.resize(fluid_p2.cells().size());
  for (std::size_t k = 0; k < fluid_p2.cells().size(); ++k) {
    const int c = fluid_p2.cells()[k];
    const CellGeom g = CellGeom::of(fluid_p2.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      fill(g.map(tq.bary[q]), b.vol[k][q]);
      b.max_det_err = std::max(b.max_det_err, std::abs(b.vol[k][q].det - 1.0));
    }
  }
  const auto& trace = fluid_p2.trace(BoundaryTag::SolidBoundary);
  b.bnd.resize(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const CellGeom g = CellGeom::of(fluid_p2.mesh(), trace[k].cell);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      Vec2 y = g.map(FemSpace::edge_bary(trace[k], eq.t[q]));
      fill(y, b.bnd[k][q]);
    }
  }
  return b;
}

double piola_residual(const TransformBundle& bundle) {
  const FemSpace& s = *bundle.space;
  const auto& tq = TriQuadrature::degree4();

  // Weak residual ⟨div cof(∇ body map), φ⟩ = -∫ cof : ∇φ against interior
  // test functions, then the L2 norm of its Riesz representer.
  VectorXd load = VectorXd::Zero(2 * s.n_dofs());
  for (std::size_t k = 0; k < s.cells().size(); ++k) {
    const int c = s.cells()[k];
    const CellGeom g = CellGeom::of(s.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const double w = tq.w[q] * g.detJ;
      const Mat2 cof = cofactor(bundle.vol[k][q].grad_xt);
      const RefBasis rb = RefBasis::at(2, tq.bary[q]);
      for (int i = 0; i < 6; ++i) {
        const Vec2 gphi = g.Jinv.transpose() * rb.grad[i];
        const int d = s.cell_dof(c, i);
        load[2 * d] -= w * cof.row(0).dot(gphi);
        load[2 * d + 1] -= w * cof.row(1).dot(gphi);
      }
    }
  }

  return interior_riesz_norm(s, load);
}

}  // namespace swim
