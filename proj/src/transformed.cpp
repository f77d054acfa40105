#include "swim/transformed.hpp"

#include <cmath>

#include "swim/error.hpp"

namespace swim {

namespace {

const TriQuadrature& tq() { return TriQuadrature::degree4(); }
const EdgeQuadrature& eq() { return EdgeQuadrature::degree5(); }

const std::vector<RefBasis>& p2_table() {
  static const std::vector<RefBasis> t = [] {
    std::vector<RefBasis> out;
    for (int q = 0; q < TriQuadrature::n; ++q) {
      out.push_back(RefBasis::at(2, tq().bary[q]));
    }
    return out;
  }();
  return t;
}

const std::vector<RefBasis>& p1_table() {
  static const std::vector<RefBasis> t = [] {
    std::vector<RefBasis> out;
    for (int q = 0; q < TriQuadrature::n; ++q) {
      out.push_back(RefBasis::at(1, tq().bary[q]));
    }
    return out;
  }();
  return t;
}

void check_bundle(const TransformBundle& b) {
  if (b.space == nullptr || b.vol.size() != b.space->cells().size()) {
    throw AssemblyError("transform bundle does not match its space");
  }
}

/// Applies `f(k, q, point, cell geom, qp weight)` over the volume samples.
template <typename F>
void for_volume(const TransformBundle& b, F&& f) {
  const FemSpace& s = *b.space;
  for (std::size_t k = 0; k < s.cells().size(); ++k) {
    const int c = s.cells()[k];
    const CellGeom g = CellGeom::of(s.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      f(static_cast<int>(k), c, q, g);
    }
  }
}

}  // namespace

QuadVec transformed_laplacian(const TransformBundle& b, const VectorXd& u) {
  check_bundle(b);
  QuadVec out(b.vol.size());
  FieldSampler fu{b.space, &u};
  for_volume(b, [&](int k, int c, int q, const CellGeom& g) {
    const BundlePoint& pt = b.vol[k][q];
    const Mat2 gu = fu.grad_vector(c, g, p2_table()[q]);
    const auto hess = fu.hessian_vector(c, g);
    const Mat2 yy = pt.grad_yt * pt.grad_yt.transpose();
    out[k][q] = gu * pt.lap_yt + Vec2(hess[0].cwiseProduct(yy).sum(),
                                      hess[1].cwiseProduct(yy).sum());
  });
  return out;
}

QuadVec frame_transport(const TransformBundle& b, const VectorXd& u,
                        const Vec2& h_dot, double omega, double lambda) {
  check_bundle(b);
  QuadVec out(b.vol.size());
  FieldSampler fu{b.space, &u};
  const double raise = std::exp(lambda * b.t);
  for_volume(b, [&](int k, int c, int q, const CellGeom& g) {
    const BundlePoint& pt = b.vol[k][q];
    const Mat2 gu = fu.grad_vector(c, g, p2_table()[q]);
    const Vec2 drive = h_dot + omega * perp(pt.xt) + raise * pt.dxt_dt;
    out[k][q] = -(gu * (pt.grad_yt * drive));
  });
  return out;
}

QuadVec transformed_convection(const TransformBundle& b, const VectorXd& u) {
  check_bundle(b);
  QuadVec out(b.vol.size());
  FieldSampler fu{b.space, &u};
  for_volume(b, [&](int k, int c, int q, const CellGeom& g) {
    const BundlePoint& pt = b.vol[k][q];
    const Mat2 gu = fu.grad_vector(c, g, p2_table()[q]);
    out[k][q] = gu * (pt.grad_yt * fu.value_vector(c, g, p2_table()[q]));
  });
  return out;
}

QuadVec transformed_pressure_gradient(const TransformBundle& b,
                                      const FemSpace& pressure,
                                      const VectorXd& p) {
  check_bundle(b);
  QuadVec out(b.vol.size());
  FieldSampler fp{&pressure, &p};
  for_volume(b, [&](int k, int c, int q, const CellGeom& g) {
    const Vec2 gp = fp.grad_scalar(c, g, p1_table()[q]);
    out[k][q] = b.vol[k][q].grad_yt.transpose() * gp;
  });
  return out;
}

QuadMat transformed_stress(const TransformBundle& b, const FemSpace& pressure,
                           const VectorXd& u, const VectorXd& p, double nu) {
  check_bundle(b);
  QuadMat out(b.vol.size());
  FieldSampler fu{b.space, &u};
  FieldSampler fp{&pressure, &p};
  for_volume(b, [&](int k, int c, int q, const CellGeom& g) {
    const Mat2 a = fu.grad_vector(c, g, p2_table()[q]) * b.vol[k][q].grad_yt;
    const double pv = fp.value_scalar(c, g, p1_table()[q]);
    out[k][q] = nu * (a + a.transpose()) - pv * Mat2::Identity();
  });
  return out;
}

VectorXd assemble_qp_load(const FemSpace& s, const QuadVec& f) {
  if (f.size() != s.cells().size()) {
    throw AssemblyError("quadrature data does not match the space");
  }
  VectorXd load = VectorXd::Zero(2 * s.n_dofs());
  for (std::size_t k = 0; k < s.cells().size(); ++k) {
    const int c = s.cells()[k];
    const CellGeom g = CellGeom::of(s.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const double w = tq().w[q] * g.detJ;
      const RefBasis& rb =
          s.degree() == 2 ? p2_table()[q] : RefBasis::at(1, tq().bary[q]);
      for (int i = 0; i < s.n_local(); ++i) {
        const int d = s.cell_dof(c, i);
        load[2 * d] += w * rb.phi[i] * f[k][q][0];
        load[2 * d + 1] += w * rb.phi[i] * f[k][q][1];
      }
    }
  }
  return load;
}

L2Projector::L2Projector(const FemSpace& s) : space_(&s) {
  mass_.compute(vector_mass(s));
  if (mass_.info() != Eigen::Success) {
    throw SolverError("vector mass factorization failed");
  }
}

VectorXd L2Projector::project(const QuadVec& f) const {
  return mass_.solve(assemble_qp_load(*space_, f));
}

RigidBody RigidBody::of(const Mesh& mesh, double rho) {
  RigidBody body;
  body.rho = rho;
  body.area =
      integrate_region(mesh, Region::Solid, [](const Vec2&) { return 1.0; });
  body.mass = rho * body.area;
  body.inertia0 = rho * integrate_region(mesh, Region::Solid, [](const Vec2& y) {
    return y.squaredNorm();
  });
  return body;
}

namespace {

template <typename F>
double solid_quadrature(const FemSpace& solid, F&& f) {
  if (solid.degree() != 2 || solid.support() != Support::SolidOnly) {
    throw AssemblyError("deformed inertia needs a quadratic solid space");
  }
  double acc = 0.0;
  for (int c : solid.cells()) {
    const CellGeom g = CellGeom::of(solid.mesh(), c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Vec2 y = g.map(tq().bary[q]);
      acc += tq().w[q] * g.detJ * f(c, g, p2_table()[q], y);
    }
  }
  return acc;
}

}  // namespace

double solid_inertia(const FemSpace& solid, const VectorXd& zstar,
                     double rho) {
  FieldSampler fz{&solid, &zstar};
  return rho * solid_quadrature(solid, [&](int c, const CellGeom& g,
                                           const RefBasis& rb, const Vec2& y) {
    return (y + fz.value_vector(c, g, rb)).squaredNorm();
  });
}

double solid_inertia_rate(const FemSpace& solid, const VectorXd& zstar,
                          const VectorXd& zstar_rate, double rho) {
  FieldSampler fz{&solid, &zstar};
  FieldSampler fr{&solid, &zstar_rate};
  return 2.0 * rho *
         solid_quadrature(solid, [&](int c, const CellGeom& g,
                                     const RefBasis& rb, const Vec2& y) {
           return (y + fz.value_vector(c, g, rb))
               .dot(fr.value_vector(c, g, rb));
         });
}

SourceBundle assemble_sources(const TransformBundle& b,
                              const FemSpace& pressure, const VectorXd& u,
                              const VectorXd& p, const Vec2& h_dot,
                              double omega, double omega_dot,
                              const FemSpace& solid, const VectorXd& zstar,
                              const VectorXd& zstar_rate,
                              const SourceParams& prm,
                              const L2Projector* project_g) {
  check_bundle(b);
  const FemSpace& s = *b.space;
  SourceBundle out;
  out.t = b.t;
  out.lambda = prm.lambda;

  const double decay = std::exp(-prm.lambda * b.t);
  FieldSampler fu{&s, &u};
  FieldSampler fp{&pressure, &p};

  out.F_qp.resize(b.vol.size());
  out.G_qp.resize(b.vol.size());
  out.g_qp.resize(b.vol.size());
  VectorXd g_load = VectorXd::Zero(pressure.n_dofs());

  for_volume(b, [&](int k, int c, int q, const CellGeom& g) {
    const BundlePoint& pt = b.vol[k][q];
    const RefBasis& rb2 = p2_table()[q];
    const RefBasis& rb1 = p1_table()[q];
    const Mat2 gu = fu.grad_vector(c, g, rb2);
    const Vec2 uv = fu.value_vector(c, g, rb2);
    const Vec2 gp = fp.grad_scalar(c, g, rb1);
    const auto hess = fu.hessian_vector(c, g);

    // nu (transformed - plain) Laplacian.
    const Mat2 yy = pt.grad_yt * pt.grad_yt.transpose() - Mat2::Identity();
    Vec2 f = prm.nu * (gu * pt.lap_yt + Vec2(hess[0].cwiseProduct(yy).sum(),
                                             hess[1].cwiseProduct(yy).sum()));
    // Transport by the frame: the rigid rates arrive weighted, the map rate
    // at true scale, so the e^{-lambda t} cancels on the rate slot.
    f += gu * (pt.grad_yt * (decay * (h_dot + omega * perp(pt.xt)) +
                             pt.dxt_dt));
    // Convection and the rotating-frame term, both weighted.
    f -= decay * (gu * (pt.grad_yt * uv));
    f -= decay * omega * perp(uv);
    // (transformed - plain) pressure gradient.
    f -= (pt.grad_yt.transpose() - Mat2::Identity()) * gp;
    out.F_qp[k][q] = f;

    out.G_qp[k][q] = (Mat2::Identity() - pt.grad_yt) * uv;
    const double gval = (gu * (Mat2::Identity() - pt.grad_yt)).trace();
    out.g_qp[k][q] = gval;

    const double w = tq().w[q] * g.detJ;
    for (int i = 0; i < pressure.n_local(); ++i) {
      g_load[pressure.cell_dof(c, i)] += w * rb1.phi[i] * gval;
    }
  });

  out.F_load = assemble_qp_load(s, out.F_qp);
  out.G_load = assemble_qp_load(s, out.G_qp);
  out.g_load = std::move(g_load);
  if (project_g != nullptr) out.G_nodal = project_g->project(out.G_qp);

  // Interface integrals.  n is the outward chord normal of the solid polygon,
  // sigma the plain stress of the weighted fields, and the deformed-frame
  // stress enters the torque through the mapped normal weighting.
  const auto& trace = s.trace(BoundaryTag::SolidBoundary);
  if (b.bnd.size() != trace.size()) {
    throw AssemblyError("transform bundle carries no interface samples");
  }
  out.G_bnd.resize(trace.size());
  out.W_bnd.resize(trace.size());
  Vec2 fm = -prm.body.mass * decay * omega * perp(h_dot);
  double fi_bnd = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& te = trace[k];
    const CellGeom g = CellGeom::of(s.mesh(), te.cell);
    const Vec2 n = s.mesh().boundary_normal(te.be);
    const double len = s.mesh().boundary_edge_length(te.be);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const BundlePoint& pt = b.bnd[k][q];
      const auto bary = FemSpace::edge_bary(te, eq().t[q]);
      const RefBasis rb2 = RefBasis::at(2, bary);
      const RefBasis rb1 = RefBasis::at(1, bary);
      const Mat2 gu = fu.grad_vector(te.cell, g, rb2);
      const Vec2 uv = fu.value_vector(te.cell, g, rb2);
      const double pv = fp.value_scalar(te.cell, g, rb1);

      out.G_bnd[k][q] = (Mat2::Identity() - pt.grad_yt) * uv;
      out.W_bnd[k][q] = omega * perp(pt.xt - pt.y);

      const double w = eq().w[q] * len;
      const Mat2 B = pt.grad_yt - Mat2::Identity();
      const Mat2 sig =
          prm.nu * (gu + gu.transpose()) - pv * Mat2::Identity();
      const Mat2 a = gu * pt.grad_yt;
      const Mat2 sig_t = prm.nu * (a + a.transpose()) - pv * Mat2::Identity();

      const Vec2 visc = (gu * B + B.transpose() * gu.transpose()) *
                        (pt.grad_yt.transpose() * n);
      const Vec2 corr = sig * (B.transpose() * n);
      fm -= w * (prm.nu * visc + corr);
      fi_bnd -= w * (prm.nu * cross2(pt.y, visc) + cross2(pt.y, corr));
      fi_bnd += w * cross2(pt.xt - pt.y, sig_t * (pt.grad_yt.transpose() * n));
    }
  }
  out.F_M = fm;

  out.inertia = solid_inertia(solid, zstar, prm.body.rho);
  out.inertia_rate =
      solid_inertia_rate(solid, zstar, zstar_rate, prm.body.rho);
  const double defect = out.inertia - prm.body.inertia0;
  out.F_I = -defect * omega_dot + prm.lambda * defect * omega -
            out.inertia_rate * omega + fi_bnd;
  return out;
}

FluxGap interface_flux_gap(const TransformBundle& b, const VectorXd& u,
                           double omega, double lambda) {
  check_bundle(b);
  const FemSpace& s = *b.space;
  FieldSampler fu{&s, &u};
  const double raise = std::exp(lambda * b.t);
  const auto& trace = s.trace(BoundaryTag::SolidBoundary);
  FluxGap out;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& te = trace[k];
    const CellGeom g = CellGeom::of(s.mesh(), te.cell);
    const Vec2 n = s.mesh().boundary_normal(te.be);
    const double len = s.mesh().boundary_edge_length(te.be);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const BundlePoint& pt = b.bnd[k][q];
      const auto bary = FemSpace::edge_bary(te, eq().t[q]);
      const Vec2 uv = fu.value_vector(te.cell, g, RefBasis::at(2, bary));
      const double w = eq().w[q] * len;
      out.carrier_flux += w * ((Mat2::Identity() - pt.grad_yt) * uv).dot(n);
      out.data_flux +=
          w * (raise * pt.dxt_dt + omega * perp(pt.xt - pt.y)).dot(n);
    }
  }
  out.gap = std::abs(out.carrier_flux - out.data_flux);
  return out;
}

void apply_pressure_gauge(const FemSpace& pressure, VectorXd& p) {
  const VectorXd row = pressure_integral_row(pressure);
  p.array() -= row.dot(p) / row.sum();
}

double outer_trace_sup(const FemSpace& vel, const VectorXd& u) {
  double sup = 0.0;
  for (int d : vel.boundary_dofs(BoundaryTag::OuterBoundary)) {
    sup = std::max(sup, Vec2(u[2 * d], u[2 * d + 1]).norm());
  }
  return sup;
}

}  // namespace swim
