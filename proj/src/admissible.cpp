#include "swim/admissible.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "swim/kinematics.hpp"

namespace swim {

namespace {

struct SampleValues {
  Vec2 a = Vec2::Zero();
  double b = 0.0;
  double c = 0.0;
};

/// Direct quadrature of one constraint sample against unweighted velocity w:
/// a = ∫ w, b = ∫ (Z+Id) ^ w, c = ∮ (com(∇Z+I))ᵀ w · n; with `linearized`
/// the Z contributions drop (Z treated as 0).
SampleValues sample_constraints(const FemSpace& sp, const VectorXd& vel,
                                const VectorXd& Z, bool linearized) {
  const Mesh& mesh = sp.mesh();
  const auto& tq = TriQuadrature::degree4();
  const auto& eq = EdgeQuadrature::degree5();
  FieldSampler fv{&sp, &vel};
  FieldSampler fz{&sp, &Z};
  SampleValues out;
  for (int c : sp.cells()) {
    const CellGeom g = CellGeom::of(mesh, c);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const auto rb = RefBasis::at(sp.degree(), tq.bary[q]);
      const double w = tq.w[q] * g.detJ;
      const Vec2 val = fv.value_vector(c, g, rb);
      Vec2 pos = g.map(tq.bary[q]);
      if (!linearized) pos += fz.value_vector(c, g, rb);
      out.a += w * val;
      out.b += w * cross2(pos, val);
    }
  }
  for (const auto& te : sp.trace(BoundaryTag::SolidBoundary)) {
    const Vec2 n = mesh.boundary_normal(te.be);
    const double len = mesh.boundary_edge_length(te.be);
    const CellGeom g = CellGeom::of(mesh, te.cell);
    for (int q = 0; q < eq.n; ++q) {
      const auto rb = RefBasis::at(sp.degree(), FemSpace::edge_bary(te, eq.t[q]));
      const double w = eq.w[q] * len;
      const Vec2 val = fv.value_vector(te.cell, g, rb);
      if (linearized) {
        out.c += w * val.dot(n);
      } else {
        const Mat2 A = Mat2::Identity() + fz.grad_vector(te.cell, g, rb);
        out.c += w * val.dot(cofactor(A) * n);
      }
    }
  }
  return out;
}

ConstraintResidual eval_functional(const DisplacementField& Z, bool linearized) {
  const int n = Z.grid.n_samples();
  ConstraintResidual r;
  r.a.resize(n);
  r.b.resize(n);
  r.c.resize(n);
  for (int i = 0; i < n; ++i) {
    const double decay = std::exp(-Z.lambda * Z.grid.time(i));
    const SampleValues s = sample_constraints(*Z.space, Z.v[i], Z.Z[i], linearized);
    r.a[i] = decay * s.a;
    r.b[i] = decay * s.b;
    r.c[i] = decay * s.c;
  }
  return r;
}

}  // namespace

DisplacementField DisplacementField::from_weighted_velocity(const FemSpace& space,
                                                            const TimeGrid& grid,
                                                            double lambda, Series v) {
  if (static_cast<int>(v.size()) != grid.n_samples()) {
    throw CompatibilityError("velocity series length does not match the grid");
  }
  for (const auto& s : v) {
    if (s.size() != 2 * space.n_dofs()) {
      throw CompatibilityError("velocity sample size does not match the space");
    }
  }
  if (v[0].lpNorm<Eigen::Infinity>() > 1e-14) {
    throw CompatibilityError("rest start requires a vanishing initial velocity");
  }
  DisplacementField out;
  out.space = &space;
  out.grid = grid;
  out.lambda = lambda;
  Series rate(v.size());
  for (int i = 0; i < grid.n_samples(); ++i) {
    rate[i] = std::exp(-lambda * grid.time(i)) * v[i];
  }
  out.Z = cumtrapz(rate, grid.dt);
  out.v = std::move(v);
  return out;
}

double ConstraintResidual::max_abs() const {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, v.lpNorm<Eigen::Infinity>());
  for (double x : b) m = std::max(m, std::abs(x));
  for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

ConstraintResidual constraint_functional(const DisplacementField& Z) {
  return eval_functional(Z, false);
}

ConstraintResidual linearized_constraints(const DisplacementField& Z) {
  return eval_functional(Z, true);
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

struct AdmissibleProjector::ConstraintData {
  VectorXd g;        // 4 per sample: (a_x, a_y, b, c), samples 1..N
  MatrixXd Ub, Uc;   // B v_i, C v_i per sample (columns)
  MatrixXd Gb, Gc;   // gradient-of-own-sample parts per sample (columns)
};

AdmissibleProjector::AdmissibleProjector(const FemSpace& space, const TimeGrid& grid,
                                         double lambda)
    : space_(&space), grid_(grid), lambda_(lambda) {
  if (space.degree() != 2 || space.support() != Support::SolidOnly) {
    throw AssemblyError("AdmissibleProjector needs a degree-2 solid vector space");
  }
  if (grid.n_steps < 1 || grid.dt <= 0.0) {
    throw CompatibilityError("projection needs a nonempty time grid");
  }
  nv_ = 2 * space.n_dofs();
  M_ = vector_mass(space);
  const SpMat MK = M_ + vector_grad_stiffness(space);

  // ∫ Z ^ v as the antisymmetric interleaving of the scalar mass matrix.
  {
    const SpMat ms = scalar_mass(space);
    std::vector<Triplet> trip;
    trip.reserve(2 * ms.nonZeros());
    for (int col = 0; col < ms.outerSize(); ++col) {
      for (SpMat::InnerIterator it(ms, col); it; ++it) {
        trip.emplace_back(2 * it.row(), 2 * it.col() + 1, it.value());
        trip.emplace_back(2 * it.row() + 1, 2 * it.col(), -it.value());
      }
    }
    B_.resize(nv_, nv_);
    B_.setFromTriplets(trip.begin(), trip.end());
  }

  // ∮ (com ∇Z)ᵀ v · n with one-sided gradients on the interface.
  {
    const Mesh& mesh = space.mesh();
    const auto& eq = EdgeQuadrature::degree5();
    std::vector<Triplet> trip;
    for (const auto& te : space.trace(BoundaryTag::SolidBoundary)) {
      const Vec2 n = mesh.boundary_normal(te.be);
      const double len = mesh.boundary_edge_length(te.be);
      const CellGeom g = CellGeom::of(mesh, te.cell);
      for (int q = 0; q < eq.n; ++q) {
        const auto rb = RefBasis::at(2, FemSpace::edge_bary(te, eq.t[q]));
        const double w = eq.w[q] * len;
        for (int lz = 0; lz < 6; ++lz) {
          const Vec2 gz = g.Jinv.transpose() * rb.grad[lz];
          for (int cz = 0; cz < 2; ++cz) {
            Mat2 G = Mat2::Zero();
            G.row(cz) = gz.transpose();
            const Vec2 cn = cofactor(G) * n;
            for (int lv = 0; lv < 6; ++lv) {
              if (rb.phi[lv] == 0.0) continue;
              for (int cv = 0; cv < 2; ++cv) {
                const double val = w * rb.phi[lv] * cn[cv];
                if (val != 0.0) {
                  trip.emplace_back(2 * space.cell_dof(te.cell, lz) + cz,
                                    2 * space.cell_dof(te.cell, lv) + cv, val);
                }
              }
            }
          }
        }
      }
    }
    C_.resize(nv_, nv_);
    C_.setFromTriplets(trip.begin(), trip.end());
  }

  load_x_ = assemble_vector_load(space, [](const Vec2&) { return Vec2(1.0, 0.0); });
  load_y_ = assemble_vector_load(space, [](const Vec2&) { return Vec2(0.0, 1.0); });
  load_m_ = assemble_vector_load(space, [](const Vec2& y) { return perp(y); });
  flux_row_ = boundary_flux_row(space, BoundaryTag::SolidBoundary);

  // Q: trapezoid-in-time of the H1 inner product of v plus the squared
  // finite-difference weighted acceleration v' - lambda v on every interval.
  {
    const int N = grid.n_steps;
    const double dt = grid.dt;
    const double alpha = 1.0 / dt;
    const double cp = dt * (alpha - 0.5 * lambda) * (alpha - 0.5 * lambda);
    const double cm = dt * (alpha + 0.5 * lambda) * (alpha + 0.5 * lambda);
    const double cx = -dt * (alpha - 0.5 * lambda) * (alpha + 0.5 * lambda);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(N) * (MK.nonZeros() + 3 * M_.nonZeros()));
    for (int i = 1; i <= N; ++i) {
      const int base = (i - 1) * nv_;
      const double wi = trapz_weight(grid, i);
      for (int col = 0; col < MK.outerSize(); ++col) {
        for (SpMat::InnerIterator it(MK, col); it; ++it) {
          trip.emplace_back(base + it.row(), base + it.col(), wi * it.value());
        }
      }
      const double diag = cp + (i < N ? cm : 0.0);
      for (int col = 0; col < M_.outerSize(); ++col) {
        for (SpMat::InnerIterator it(M_, col); it; ++it) {
          trip.emplace_back(base + it.row(), base + it.col(), diag * it.value());
          if (i < N) {
            trip.emplace_back(base + it.row(), base + nv_ + it.col(), cx * it.value());
            trip.emplace_back(base + nv_ + it.row(), base + it.col(), cx * it.value());
          }
        }
      }
    }
    Q_.resize(N * nv_, N * nv_);
    Q_.setFromTriplets(trip.begin(), trip.end());
  }
  q_ldlt_.compute(Q_);
  if (q_ldlt_.info() != Eigen::Success) {
    throw SolverError("projection metric factorization failed");
  }
}

VectorXd AdmissibleProjector::stack(const Series& v) const {
  const int N = grid_.n_steps;
  VectorXd V(N * nv_);
  for (int i = 1; i <= N; ++i) V.segment((i - 1) * nv_, nv_) = v[i];
  return V;
}

Series AdmissibleProjector::unstack(const VectorXd& V) const {
  const int N = grid_.n_steps;
  Series v(N + 1);
  v[0] = VectorXd::Zero(nv_);
  for (int i = 1; i <= N; ++i) v[i] = V.segment((i - 1) * nv_, nv_);
  return v;
}

Series AdmissibleProjector::displacements(const Series& v) const {
  Series rate(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    rate[i] = std::exp(-lambda_ * grid_.time(static_cast<int>(i))) * v[i];
  }
  return cumtrapz(rate, grid_.dt);
}

void AdmissibleProjector::eval_constraints(const Series& v, const Series& Z,
                                           ConstraintData& out) const {
  const int N = grid_.n_steps;
  out.g.resize(4 * N);
  out.Ub.resize(nv_, N);
  out.Uc.resize(nv_, N);
  out.Gb.resize(nv_, N);
  out.Gc.resize(nv_, N);
  for (int i = 1; i <= N; ++i) {
    const VectorXd& vi = v[i];
    const VectorXd& zi = Z[i];
    out.Ub.col(i - 1) = B_ * vi;
    out.Uc.col(i - 1) = C_ * vi;
    out.Gb.col(i - 1) = load_m_ + B_.transpose() * zi;
    out.Gc.col(i - 1) = flux_row_ + C_.transpose() * zi;
    out.g[4 * (i - 1) + 0] = load_x_.dot(vi);
    out.g[4 * (i - 1) + 1] = load_y_.dot(vi);
    out.g[4 * (i - 1) + 2] = out.Gb.col(i - 1).dot(vi);
    out.g[4 * (i - 1) + 3] = out.Gc.col(i - 1).dot(vi);
  }
}

double AdmissibleProjector::weighted_norm(const DisplacementField& Z) const {
  const VectorXd V = stack(Z.v);
  return std::sqrt(V.dot(Q_ * V));
}

DisplacementField AdmissibleProjector::project(const DisplacementField& Z_in,
                                               const Options& opt,
                                               ProjectionReport* report) const {
  if (Z_in.space != space_ || Z_in.lambda != lambda_ ||
      Z_in.grid.n_steps != grid_.n_steps || Z_in.grid.dt != grid_.dt) {
    throw CompatibilityError("displacement does not match the projector setup");
  }
  const double threshold = opt.small_data_factor * space_->mesh().solid_radius;
  const double input_norm = weighted_norm(Z_in);
  if (input_norm > threshold) {
    throw SmallDataError("input norm " + std::to_string(input_norm) +
                         " exceeds the smallness threshold " +
                         std::to_string(threshold));
  }

  const int N = grid_.n_steps;
  const double dt = grid_.dt;
  std::vector<double> decay(N + 1);
  for (int i = 0; i <= N; ++i) decay[i] = std::exp(-lambda_ * grid_.time(i));

  // Row-wise application of the constraint Jacobian using the cumulative
  // structure of Z = cumtrapz(e^{-lambda t} v).
  const auto apply_j = [&](const ConstraintData& data,
                           const Eigen::Ref<const VectorXd>& x) {
    VectorXd out(4 * N);
    VectorXd partial = VectorXd::Zero(nv_);
    for (int i = 1; i <= N; ++i) {
      const auto xi = x.segment((i - 1) * nv_, nv_);
      const VectorXd yi = partial + 0.5 * dt * decay[i] * xi;
      out[4 * (i - 1) + 0] = load_x_.dot(xi);
      out[4 * (i - 1) + 1] = load_y_.dot(xi);
      out[4 * (i - 1) + 2] = data.Gb.col(i - 1).dot(xi) + data.Ub.col(i - 1).dot(yi);
      out[4 * (i - 1) + 3] = data.Gc.col(i - 1).dot(xi) + data.Uc.col(i - 1).dot(yi);
      partial += dt * decay[i] * xi;
    }
    return out;
  };
  const auto transpose_columns = [&](const ConstraintData& data, MatrixXd& P) {
    P.setZero();
    for (int i = 1; i <= N; ++i) {
      const int base = (i - 1) * nv_;
      P.col(4 * (i - 1) + 0).segment(base, nv_) = load_x_;
      P.col(4 * (i - 1) + 1).segment(base, nv_) = load_y_;
      P.col(4 * (i - 1) + 2).segment(base, nv_) = data.Gb.col(i - 1);
      P.col(4 * (i - 1) + 3).segment(base, nv_) = data.Gc.col(i - 1);
      for (int k = 1; k <= i; ++k) {
        const double cik = (k == i ? 0.5 : 1.0) * dt * decay[k];
        P.col(4 * (i - 1) + 2).segment((k - 1) * nv_, nv_) += cik * data.Ub.col(i - 1);
        P.col(4 * (i - 1) + 3).segment((k - 1) * nv_, nv_) += cik * data.Uc.col(i - 1);
      }
    }
  };

  const VectorXd V_in = stack(Z_in.v);
  VectorXd V = V_in;
  ProjectionReport rep;
  ConstraintData data;
  MatrixXd P(N * nv_, 4 * N);

  Series v = unstack(V);
  Series Z = displacements(v);
  eval_constraints(v, Z, data);
  double gnorm = data.g.lpNorm<Eigen::Infinity>();

  bool converged = false;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    transpose_columns(data, P);
    const MatrixXd X = q_ldlt_.solve(P);
    MatrixXd S(4 * N, 4 * N);
    for (int j = 0; j < 4 * N; ++j) S.col(j) = apply_j(data, X.col(j));

    const VectorXd r = V - V_in;
    const VectorXd Jr = apply_j(data, r);
    Eigen::LDLT<MatrixXd> sldlt(S);
    if (sldlt.info() != Eigen::Success) {
      throw ProjectionError("constraint Schur system is not factorizable");
    }
    const VectorXd mu = sldlt.solve(data.g - Jr);

    const VectorXd stat = Q_ * r + P * mu;
    const double kkt = std::sqrt(std::abs(stat.dot(q_ldlt_.solve(stat))));
    rep.constraint_history.push_back(gnorm);
    rep.kkt_history.push_back(kkt);
    rep.iterations = iter;
    rep.final_constraint = gnorm;
    rep.final_kkt = kkt;
    if (gnorm < opt.tol && kkt < opt.tol) {
      converged = true;
      break;
    }

    const VectorXd dV = -r - X * mu;
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 10; ++halving) {
      const VectorXd V_try = V + step * dV;
      Series v_try = unstack(V_try);
      Series Z_try = displacements(v_try);
      ConstraintData trial;
      eval_constraints(v_try, Z_try, trial);
      const double gtry = trial.g.lpNorm<Eigen::Infinity>();
      if (gtry < gnorm || gtry < opt.tol) {
        V = V_try;
        v = std::move(v_try);
        Z = std::move(Z_try);
        data = std::move(trial);
        gnorm = gtry;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw ProjectionError("constraint residual stopped decreasing at " +
                            std::to_string(gnorm));
    }
  }
  if (!converged) {
    throw ProjectionError("no convergence within the iteration budget (residual " +
                          std::to_string(rep.final_constraint) + ")");
  }
  rep.converged = true;
  if (report != nullptr) *report = rep;

  DisplacementField out;
  out.space = space_;
  out.grid = grid_;
  out.lambda = lambda_;
  out.v = std::move(v);
  out.Z = std::move(Z);
  return out;
}

DisplacementField project_admissible(const AdmissibleProjector& projector,
                                     const DisplacementField& Z_in, double tol,
                                     ProjectionReport* report) {
  AdmissibleProjector::Options opt;
  opt.tol = tol;
  return projector.project(Z_in, opt, report);
}

AdmissibleDeformation make_admissible_from_boundary(
    const LameExtension& lame, const AdmissibleProjector& projector,
    const BoundaryVelocity& zeta, const AdmissibleProjector::Options& opt) {
  if (zeta.space != &projector.space() || &lame.space() != &projector.space()) {
    throw CompatibilityError("interface data, extension and projector spaces differ");
  }
  const TimeGrid& grid = projector.grid();
  if (static_cast<int>(zeta.samples.size()) != grid.n_samples() ||
      zeta.grid.n_steps != grid.n_steps || zeta.grid.dt != grid.dt) {
    throw CompatibilityError("interface series does not match the time grid");
  }
  if (zeta.samples[0].lpNorm<Eigen::Infinity>() > 1e-14) {
    throw CompatibilityError("rest start requires vanishing initial interface data");
  }

  Series v(grid.n_samples());
  v[0] = VectorXd::Zero(2 * projector.space().n_dofs());
  for (int i = 1; i < grid.n_samples(); ++i) {
    v[i] = lame.extend(zeta.samples[i]);
  }
  DisplacementField Z_zeta = DisplacementField::from_weighted_velocity(
      projector.space(), grid, projector.lambda(), std::move(v));

  AdmissibleDeformation out;
  out.displacement = projector.project(Z_zeta, opt, &out.report);
  out.residual_trace.resize(grid.n_samples());
  for (int i = 0; i < grid.n_samples(); ++i) {
    out.residual_trace[i] =
        lame.restrict_trace(out.displacement.v[i]) - zeta.samples[i];
  }
  return out;
}

}  // namespace swim
