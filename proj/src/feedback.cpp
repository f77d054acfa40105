#include "swim/feedback.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "swim/error.hpp"

namespace swim {

namespace {

const EdgeQuadrature& eq() { return EdgeQuadrature::degree5(); }
const TriQuadrature& tq() { return TriQuadrature::degree4(); }

/// Map from solid-trace scalar dofs to their first control slot.
std::unordered_map<int, int> control_slots(const CombinedSpace& cs) {
  std::unordered_map<int, int> slot;
  for (int k = 0; k < cs.n_control(); k += 2) {
    slot[cs.control_dof(k) / 2] = k;
  }
  return slot;
}

SpMat solid_trace_mass(const FemSpace& vel, const CombinedSpace& cs) {
  const auto slot = control_slots(cs);
  std::vector<Triplet> trip;
  for (const auto& te : vel.trace(BoundaryTag::SolidBoundary)) {
    const double len = vel.mesh().boundary_edge_length(te.be);
    double local[3][3] = {};
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const auto phi = trace_basis_p2(eq().t[q]);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          local[a][b] += eq().w[q] * len * phi[a] * phi[b];
        }
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int sa = slot.at(te.dofs[a]), sb = slot.at(te.dofs[b]);
        for (int comp = 0; comp < 2; ++comp) {
          trip.emplace_back(sa + comp, sb + comp, local[a][b]);
        }
      }
    }
  }
  SpMat m(cs.n_control(), cs.n_control());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Bordered saddle matrix [A  B'  0; B  0  g; 0  g'  0] over combined,
/// pressure, and gauge unknowns.
SpMat bordered_saddle(const SpMat& a, const SpMat& b, const VectorXd& g) {
  const int nc = static_cast<int>(a.rows());
  const int np = static_cast<int>(b.rows());
  std::vector<Triplet> trip;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                        it.value());
    }
  }
  for (int k = 0; k < b.outerSize(); ++k) {
    for (SpMat::InnerIterator it(b, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      trip.emplace_back(nc + r, c, it.value());
      trip.emplace_back(c, nc + r, it.value());
    }
  }
  for (int p = 0; p < np; ++p) {
    if (g[p] != 0.0) {
      trip.emplace_back(nc + np, nc + p, g[p]);
      trip.emplace_back(nc + p, nc + np, g[p]);
    }
  }
  SpMat s(nc + np + 1, nc + np + 1);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

/// In-place small Sylvester solve T_ii' Y + Y T_jj = R for blocks of size
/// one or two, by the Kronecker form.
MatrixXd small_sylvester(const MatrixXd& tii, const MatrixXd& tjj,
                         const MatrixXd& r) {
  const int p = static_cast<int>(tii.rows());
  const int q = static_cast<int>(tjj.rows());
  MatrixXd sys(p * q, p * q);
  for (int col = 0; col < q; ++col) {
    for (int row = 0; row < p; ++row) {
      for (int col2 = 0; col2 < q; ++col2) {
        for (int row2 = 0; row2 < p; ++row2) {
          double v = 0.0;
          if (col == col2) v += tii(row2, row);  // T_ii' acting on the left
          if (row == row2) v += tjj(col2, col);  // T_jj acting on the right
          sys(col * p + row, col2 * p + row2) = v;
        }
      }
    }
  }
  const Eigen::Map<const VectorXd> rv(r.data(), p * q);
  const VectorXd y = Eigen::PartialPivLU<MatrixXd>(sys).solve(rv);
  return Eigen::Map<const MatrixXd>(y.data(), p, q);
}

}  // namespace

CombinedSpace::CombinedSpace(const FemSpace& vel) : vel_(&vel) {
  if (vel.degree() != 2 || vel.support() != Support::FluidOnly) {
    throw AssemblyError("combined space needs a quadratic fluid velocity");
  }
  const int n = vel.n_dofs();
  std::vector<char> outer(n, 0), solid(n, 0);
  for (int d : vel.boundary_dofs(BoundaryTag::OuterBoundary)) outer[d] = 1;
  for (int d : vel.boundary_dofs(BoundaryTag::SolidBoundary)) solid[d] = 1;

  std::vector<int> index(2 * n, -1);
  for (int s = 0; s < n; ++s) {
    if (outer[s] || solid[s]) continue;
    index[2 * s] = n_interior_++;
    index[2 * s + 1] = n_interior_++;
  }
  for (int s = 0; s < n; ++s) {
    if (!solid[s]) continue;
    control_dofs_.push_back(2 * s);
    control_dofs_.push_back(2 * s + 1);
  }

  std::vector<Triplet> zt, et;
  for (int s = 0; s < n; ++s) {
    if (index[2 * s] >= 0) {
      zt.emplace_back(2 * s, index[2 * s], 1.0);
      zt.emplace_back(2 * s + 1, index[2 * s + 1], 1.0);
    } else if (solid[s]) {
      const Vec2 y = vel.dof_point(s);
      zt.emplace_back(2 * s, h_index(), 1.0);
      zt.emplace_back(2 * s + 1, h_index() + 1, 1.0);
      zt.emplace_back(2 * s, omega_index(), -y[1]);
      zt.emplace_back(2 * s + 1, omega_index(), y[0]);
    }
  }
  for (int k = 0; k < n_control(); ++k) et.emplace_back(control_dofs_[k], k, 1.0);

  Z_.resize(2 * n, dim());
  Z_.setFromTriplets(zt.begin(), zt.end());
  E_.resize(2 * n, n_control());
  E_.setFromTriplets(et.begin(), et.end());
}

VectorXd CombinedSpace::full_field(const VectorXd& x, const VectorXd& c) const {
  VectorXd u = Z_ * x;
  if (c.size() > 0) u += E_ * c;
  return u;
}

VectorXd CombinedSpace::restrict_load(const VectorXd& load) const {
  return Z_.transpose() * load;
}

double LinearizedSystem::energy(const VectorXd& x, const VectorXd& c) const {
  const VectorXd u = combined.full_field(x, c);
  const Vec2 h = combined.rigid_velocity(x);
  const double om = combined.rigid_rate(x);
  return 0.5 * (u.dot(mass_full * u) + body_mass * h.squaredNorm() +
                body_inertia * om * om);
}

LinearizedSystem assemble_linearized(const FemSpace& vel, const FemSpace& prs,
                                     double lambda, double nu,
                                     double body_mass, double body_inertia) {
  if (prs.degree() != 1 || vel.degree() != 2 ||
      prs.support() != vel.support() || &prs.mesh() != &vel.mesh()) {
    throw AssemblyError("velocity-pressure pair is not inf-sup stable");
  }
  LinearizedSystem sys{&vel, &prs, CombinedSpace(vel), nu, lambda,
                       body_mass, body_inertia};
  const CombinedSpace& cs = sys.combined;
  const SpMat& Z = cs.extend();
  const SpMat& E = cs.inject();
  const int nc = cs.dim();
  const int np = prs.n_dofs();

  sys.mass_full = vector_mass(vel);
  sys.grad_full = vector_grad_stiffness(vel);
  const SpMat k_full = vector_symgrad_stiffness(vel);
  const SpMat d_full = mixed_divergence(vel, prs);

  sys.mass = SpMat(Z.transpose() * sys.mass_full * Z);
  {
    std::vector<Triplet> body{
        {cs.h_index(), cs.h_index(), body_mass},
        {cs.h_index() + 1, cs.h_index() + 1, body_mass},
        {cs.omega_index(), cs.omega_index(), body_inertia}};
    SpMat b(nc, nc);
    b.setFromTriplets(body.begin(), body.end());
    sys.mass = sys.mass + b;
  }
  sys.stiffness = SpMat(Z.transpose() * k_full * Z);
  sys.divergence = SpMat(d_full * Z);
  sys.gauge = pressure_integral_row(prs);
  sys.mass_in = SpMat(Z.transpose() * (sys.mass_full * E));
  sys.stiff_in = SpMat(Z.transpose() * (k_full * E));
  sys.div_in = SpMat(d_full * E);

  // Constraint kernel: the divergence matrix loses exactly one rank to the
  // constant-pressure gauge; anything else signals a defective pairing.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(
      MatrixXd(sys.divergence.transpose()));
  qr.setThreshold(1e-9);
  const int rank = static_cast<int>(qr.rank());
  if (rank != np - 1) {
    throw AssemblyError("velocity-pressure pair is not inf-sup stable");
  }
  const MatrixXd q_full = qr.householderQ();
  MatrixXd n_raw = q_full.rightCols(nc - rank);
  const MatrixXd gram = n_raw.transpose() * (sys.mass * n_raw);
  const Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw SolverError("kernel mass factorization failed");
  }
  sys.kernel =
      llt.matrixL().solve(n_raw.transpose()).transpose();

  sys.trace_mass = solid_trace_mass(vel, cs);
  const VectorXd flux_full = boundary_flux_row(vel, BoundaryTag::SolidBoundary);
  sys.flux_row.resize(cs.n_control());
  for (int k = 0; k < cs.n_control(); ++k) {
    sys.flux_row[k] = flux_full[cs.control_dof(k)];
  }
  Eigen::SimplicialLDLT<SpMat> trace_ldlt(sys.trace_mass);
  if (trace_ldlt.info() != Eigen::Success) {
    throw SolverError("trace mass factorization failed");
  }
  sys.flux_riesz = trace_ldlt.solve(sys.flux_row);
  sys.flux_norm2 = sys.flux_row.dot(sys.flux_riesz);

  // Flux-free control lifting: per control dof, the mass-saddle solve whose
  // kernel component absorbs the boundary-mass coupling, so the reduced
  // dynamics never sees the rate of the boundary data.
  const SpMat saddle = bordered_saddle(sys.mass, sys.divergence, sys.gauge);
  Eigen::SparseLU<SpMat> lu(saddle);
  if (lu.info() != Eigen::Success) {
    throw SolverError("lifting saddle factorization failed");
  }
  const int nb = cs.n_control();
  MatrixXd proj = MatrixXd::Identity(nb, nb) -
                  (sys.flux_riesz * sys.flux_row.transpose()) / sys.flux_norm2;
  sys.lift.resize(nc, nb);
  VectorXd rhs = VectorXd::Zero(nc + np + 1);
  for (int j = 0; j < nb; ++j) {
    const VectorXd zeta = proj.col(j);
    rhs.head(nc) = sys.mass_in * zeta;
    rhs.segment(nc, np) = sys.div_in * zeta;
    rhs[nc + np] = 0.0;
    const VectorXd sol = lu.solve(rhs);
    sys.lift.col(j) = sol.head(nc);
  }

  sys.A = lambda * MatrixXd::Identity(nc - rank, nc - rank) -
          nu * (sys.kernel.transpose() * (sys.stiffness * sys.kernel));
  sys.A = 0.5 * (sys.A + sys.A.transpose()).eval();
  sys.B = nu * (sys.kernel.transpose() *
                (sys.stiffness * sys.lift - sys.stiff_in * proj));
  return sys;
}

VectorXd leray_project(const LinearizedSystem& sys, const VectorXd& x) {
  return sys.kernel * (sys.kernel.transpose() * (sys.mass * x));
}

VectorXd project_flux_free(const LinearizedSystem& sys, const VectorXd& zeta) {
  return zeta - sys.flux_riesz * (sys.flux_row.dot(zeta) / sys.flux_norm2);
}

VectorXd reduced_state(const LinearizedSystem& sys, const VectorXd& x,
                       const VectorXd& c) {
  VectorXd shifted = x;
  if (c.size() > 0) shifted += sys.lift * c;
  return sys.kernel.transpose() * (sys.mass * shifted);
}

DivergenceLift lift_divergence(const FemSpace& vel, const VectorXd& G,
                               const VectorXd& G_rate, double lambda,
                               double nu) {
  DivergenceLift out;
  out.shift = G;
  FieldSampler fg{&vel, &G};
  FieldSampler fr{&vel, &G_rate};

  QuadVec f(vel.cells().size());
  for (std::size_t k = 0; k < vel.cells().size(); ++k) {
    const int c = vel.cells()[k];
    const CellGeom g = CellGeom::of(vel.mesh(), c);
    const auto hess = fg.hessian_vector(c, g);
    const Vec2 lap(hess[0].trace(), hess[1].trace());
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const RefBasis rb = RefBasis::at(2, tq().bary[q]);
      f[k][q] = -fr.value_vector(c, g, rb) + lambda * fg.value_vector(c, g, rb) +
                nu * lap;
    }
  }
  out.force = assemble_qp_load(vel, f);

  for (const auto& te : vel.trace(BoundaryTag::SolidBoundary)) {
    const CellGeom g = CellGeom::of(vel.mesh(), te.cell);
    const Vec2 n = vel.mesh().boundary_normal(te.be);
    const double len = vel.mesh().boundary_edge_length(te.be);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const auto bary = FemSpace::edge_bary(te, eq().t[q]);
      const Vec2 y = g.map(bary);
      const Mat2 gu = fg.grad_vector(te.cell, g, RefBasis::at(2, bary));
      const Vec2 dn = 0.5 * (gu + gu.transpose()) * n;
      const double w = eq().w[q] * len;
      out.force_body -= w * 2.0 * nu * dn;
      out.torque_body -= w * 2.0 * nu * cross2(y, dn);
    }
  }
  return out;
}

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& W) {
  const int n = static_cast<int>(A.rows());
  const Eigen::RealSchur<MatrixXd> schur(A);
  if (schur.info() != Eigen::Success) {
    throw SolverError("Schur reduction failed");
  }
  const MatrixXd& T = schur.matrixT();
  const MatrixXd& U = schur.matrixU();
  const MatrixXd C = U.transpose() * W * U;

  std::vector<std::pair<int, int>> blocks;  // (start, size)
  for (int i = 0; i < n;) {
    const int s = (i + 1 < n && T(i + 1, i) != 0.0) ? 2 : 1;
    blocks.emplace_back(i, s);
    i += s;
  }

  MatrixXd Y = MatrixXd::Zero(n, n);
  for (std::size_t bj = 0; bj < blocks.size(); ++bj) {
    const auto [j0, sj] = blocks[bj];
    MatrixXd r = -C.middleCols(j0, sj);
    if (j0 > 0) r -= Y.leftCols(j0) * T.block(0, j0, j0, sj);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto [i0, si] = blocks[bi];
      MatrixXd rhs = r.middleRows(i0, si);
      if (i0 > 0) {
        rhs -= T.block(0, i0, i0, si).transpose() * Y.block(0, j0, i0, sj);
      }
      Y.block(i0, j0, si, sj) =
          small_sylvester(T.block(i0, i0, si, si), T.block(j0, j0, sj, sj), rhs);
    }
  }
  MatrixXd P = U * Y * U.transpose();
  return 0.5 * (P + P.transpose()).eval();
}

FeedbackGain compute_feedback_gain(const LinearizedSystem& sys, double gamma,
                                   double margin) {
  const MatrixXd& A = sys.A;
  const MatrixXd& B = sys.B;
  const int nz = static_cast<int>(A.rows());
  const int nb = static_cast<int>(B.cols());
  if (gamma <= 0.0) throw ConfigError("control cost must be positive");

  // The shifted operator is symmetric, so its unstable subspace comes out of
  // one symmetric eigensolve and the Hautus test reads off the rows of B.
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const VectorXd d = es.eigenvalues();
  std::vector<int> unstable;
  for (int i = 0; i < nz; ++i) {
    if (d[i] >= -margin) unstable.push_back(i);
  }

  FeedbackGain gain;
  gain.gamma = gamma;
  MatrixXd K = MatrixXd::Zero(nb, nz);
  if (!unstable.empty()) {
    const int m = static_cast<int>(unstable.size());
    MatrixXd vu(nz, m);
    VectorXd du(m);
    for (int k = 0; k < m; ++k) {
      vu.col(k) = es.eigenvectors().col(unstable[k]);
      du[k] = d[unstable[k]];
    }
    const MatrixXd bu = vu.transpose() * B;
    const Eigen::JacobiSVD<MatrixXd> svd(bu);
    const VectorXd sv = svd.singularValues();
    const double smin = static_cast<int>(sv.size()) == m ? sv[m - 1] : 0.0;
    if (nb < m || smin < 1e-9 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0)) {
      throw StabilizabilityError("an unstable mode is out of control reach");
    }
    // Feedback through the unstable coordinates only: the closed loop is
    // block triangular, so placing the small block left of the axis
    // stabilizes the whole operator.
    const double shift = std::max(1.0, 2.0 * du.maxCoeff());
    const VectorXd placed = (-du.array() - shift).matrix();
    const MatrixXd target = placed.asDiagonal();
    const MatrixXd f =
        bu.transpose() * (bu * bu.transpose()).ldlt().solve(target);
    K = f * vu.transpose();
  }

  const MatrixXd Q = MatrixXd::Identity(nz, nz);
  double residual = std::numeric_limits<double>::infinity();
  MatrixXd P;
  for (int iter = 0; iter < 60; ++iter) {
    const MatrixXd acl = A + B * K;
    const MatrixXd w = Q + gamma * K.transpose() * K;
    P = solve_lyapunov(acl, w);
    const MatrixXd k_next = -(B.transpose() * P) / gamma;
    const double step = (k_next - K).norm() / (1.0 + K.norm());
    K = k_next;
    const MatrixXd res =
        A.transpose() * P + P * A - P * B * B.transpose() * P / gamma + Q;
    residual = res.norm() / Q.norm();
    if (!std::isfinite(residual)) {
      throw SolverError("Riccati iteration diverged");
    }
    if (residual < 1e-10 || step < 1e-13) break;
  }
  if (residual > 1e-6) {
    throw SolverError("Riccati iteration did not converge");
  }

  gain.K = K;
  gain.P = P;
  gain.riccati_residual = residual;
  const Eigen::EigenSolver<MatrixXd> cl(A + B * K, false);
  gain.closed_loop_margin = cl.eigenvalues().real().maxCoeff();
  if (!(gain.closed_loop_margin <= -margin)) {
    throw StabilizabilityError("closed-loop margin certificate failed");
  }
  return gain;
}

LinearTrajectory solve_nonhomogeneous_linear(
    const LinearizedSystem& sys, const FeedbackGain* gain,
    const std::function<LinearStepData(double)>& data, const VectorXd& x0,
    double dt, int n_steps) {
  if (dt <= 0.0 || n_steps < 1) throw ConfigError("march needs dt > 0 and steps");
  const CombinedSpace& cs = sys.combined;
  const int nc = cs.dim();
  const int np = sys.prs->n_dofs();
  const int nb = cs.n_control();

  const SpMat a_step = SpMat((1.0 / dt - sys.lambda) * sys.mass) +
                       SpMat(sys.nu * sys.stiffness);
  Eigen::SparseLU<SpMat> lu(bordered_saddle(a_step, sys.divergence, sys.gauge));
  if (lu.info() != Eigen::Success) {
    throw SolverError("linear step factorization failed");
  }
  Eigen::SimplicialLDLT<SpMat> mass_ldlt;
  bool mass_factored = false;

  auto total_boundary = [&](const LinearStepData& d, const VectorXd& zeta) {
    VectorXd c = VectorXd::Zero(nb);
    if (d.boundary.size() > 0) c += d.boundary;
    if (zeta.size() > 0) c += zeta;
    return c;
  };

  LinearTrajectory out;
  out.times.reserve(n_steps + 1);
  out.states.reserve(n_steps + 1);

  LinearStepData d0 = data(0.0);
  VectorXd zeta = VectorXd::Zero(nb);
  if (gain != nullptr) {
    zeta = project_flux_free(
        sys, gain->K * reduced_state(sys, x0, total_boundary(d0, VectorXd())));
  }
  VectorXd x = x0;
  VectorXd c = total_boundary(d0, zeta);
  out.times.push_back(0.0);
  out.states.push_back(x);
  out.pressures.push_back(VectorXd::Zero(np));
  out.controls.push_back(zeta);
  out.energies.push_back(sys.energy(x, c));

  double init_norm = 0.0;
  {
    const VectorXd u0 = cs.full_field(x, c);
    init_norm =
        std::sqrt(u0.dot(sys.mass_full * u0) + u0.dot(sys.grad_full * u0)) +
        cs.rigid_velocity(x).norm() + std::abs(cs.rigid_rate(x));
  }

  // Trajectory and data quotients accumulate the discrete analogues of the
  // space-time norms on the two sides of the closed-loop estimate.
  double num2 = 0.0, den2_src = 0.0, den2_bnd = 0.0;
  VectorXd rhs(nc + np + 1);
  for (int step = 1; step <= n_steps; ++step) {
    const double t = step * dt;
    const LinearStepData d = data(t);
    VectorXd zeta_next = VectorXd::Zero(nb);
    if (gain != nullptr) {
      zeta_next =
          project_flux_free(sys, gain->K * reduced_state(sys, x, c));
    }
    const VectorXd c_next = total_boundary(d, zeta_next);

    rhs.setZero();
    rhs.head(nc) = (1.0 / dt) * (sys.mass * x + sys.mass_in * c) +
                   (sys.lambda - 1.0 / dt) * (sys.mass_in * c_next) -
                   sys.nu * (sys.stiff_in * c_next);
    if (d.force.size() > 0) rhs.head(nc) += cs.restrict_load(d.force);
    rhs[cs.h_index()] += d.force_body[0];
    rhs[cs.h_index() + 1] += d.force_body[1];
    rhs[cs.omega_index()] += d.torque_body;
    if (d.div_data.size() > 0) rhs.segment(nc, np) = d.div_data;
    rhs.segment(nc, np) -= sys.div_in * c_next;

    const VectorXd sol = lu.solve(rhs);
    x = sol.head(nc);
    VectorXd p = sol.segment(nc, np);
    apply_pressure_gauge(*sys.prs, p);

    const VectorXd u = cs.full_field(x, c_next);
    const Vec2 h = cs.rigid_velocity(x);
    const double om = cs.rigid_rate(x);
    num2 += dt * (u.dot(sys.mass_full * u) + u.dot(sys.grad_full * u) +
                  h.squaredNorm() + om * om);
    if (d.force.size() > 0) {
      if (!mass_factored) {
        mass_ldlt.compute(sys.mass_full);
        mass_factored = true;
      }
      den2_src += dt * d.force.dot(mass_ldlt.solve(d.force));
    }
    den2_src += dt * (d.force_body.squaredNorm() +
                      d.torque_body * d.torque_body);
    if (d.boundary.size() > 0) {
      den2_bnd += dt * d.boundary.dot(sys.trace_mass * d.boundary);
    }

    c = c_next;
    out.times.push_back(t);
    out.states.push_back(x);
    out.pressures.push_back(p);
    out.controls.push_back(zeta_next);
    out.energies.push_back(sys.energy(x, c));
  }

  const double den = init_norm + std::sqrt(den2_src) + std::sqrt(den2_bnd);
  out.stability_constant = den > 0.0 ? std::sqrt(num2) / den : 0.0;
  return out;
}

}  // namespace swim
