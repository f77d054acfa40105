#include "swim/lame.hpp"

#include <cmath>

namespace swim {

namespace {

std::vector<int> constrained_vector_dofs(const std::vector<int>& trace_dofs) {
  std::vector<int> out;
  out.reserve(2 * trace_dofs.size());
  for (int d : trace_dofs) {
    out.push_back(2 * d);
    out.push_back(2 * d + 1);
  }
  return out;
}

}  // namespace

LameExtension::LameExtension(const FemSpace& space, double mu) : space_(&space) {
  if (space.degree() != 2 || space.support() != Support::SolidOnly) {
    throw AssemblyError("LameExtension needs a degree-2 solid vector space");
  }
  const Mesh& mesh = space.mesh();
  area_ = integrate_region(mesh, Region::Solid, [](const Vec2&) { return 1.0; });
  polar_moment_ =
      integrate_region(mesh, Region::Solid, [](const Vec2& y) { return y.squaredNorm(); });
  trace_dofs_ = space.boundary_dofs(BoundaryTag::SolidBoundary);

  const SpMat M = vector_mass(space);
  const SpMat K = vector_symgrad_stiffness(space);
  // Any mu >= 0 leaves the Dirichlet-constrained block positive definite
  // (Korn with boundary values pinned); an O(1) weight keeps the extension
  // free of mesh-scale boundary layers.
  mu_ = mu > 0.0 ? mu : 1.0;

  load_x_ = assemble_vector_load(space, [](const Vec2&) { return Vec2(1.0, 0.0); });
  load_y_ = assemble_vector_load(space, [](const Vec2&) { return Vec2(0.0, 1.0); });
  load_m_ = assemble_vector_load(space, [](const Vec2& y) { return perp(y); });

  flux_row_ = boundary_flux_row(space, BoundaryTag::SolidBoundary);

  normal_trace_ = VectorXd::Zero(2 * n_trace());
  for (int j = 0; j < n_trace(); ++j) {
    const Vec2 p = space.dof_point(trace_dofs_[j]);
    const Vec2 nrm = p / p.norm();
    normal_trace_[2 * j] = nrm.x();
    normal_trace_[2 * j + 1] = nrm.y();
  }
  normal_flux_ = trace_flux(normal_trace_);

  factorize(M, K);
}

void LameExtension::factorize(const SpMat& M, const SpMat& K) {
  const int nv = 2 * space_->n_dofs();
  vec_to_free_.assign(nv, 0);
  for (int d : constrained_vector_dofs(trace_dofs_)) vec_to_free_[d] = -1;
  free_.clear();
  for (int d = 0; d < nv; ++d) {
    if (vec_to_free_[d] == 0) {
      vec_to_free_[d] = static_cast<int>(free_.size());
      free_.push_back(d);
    }
  }
  const int nf = static_cast<int>(free_.size());

  for (int attempt = 0;; ++attempt) {
    A_ = mu_ * M + K;
    std::vector<Triplet> trip;
    trip.reserve(A_.nonZeros());
    for (int col = 0; col < A_.outerSize(); ++col) {
      for (SpMat::InnerIterator it(A_, col); it; ++it) {
        const int fr = vec_to_free_[it.row()], fc = vec_to_free_[it.col()];
        if (fr >= 0 && fc >= 0) trip.emplace_back(fr, fc, it.value());
      }
    }
    SpMat Aff(nf, nf);
    Aff.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(Aff);
    if (ldlt_.info() == Eigen::Success) break;
    if (attempt >= 4) throw SolverError("extension system factorization failed");
    mu_ *= 2.0;
  }

  MatrixXd Lf(nf, 3);
  for (int i = 0; i < nf; ++i) {
    Lf(i, 0) = load_x_[free_[i]];
    Lf(i, 1) = load_y_[free_[i]];
    Lf(i, 2) = load_m_[free_[i]];
  }
  W_ = ldlt_.solve(Lf);
  const Mat3 S = Lf.transpose() * W_;
  const double det = S.determinant();
  if (!(std::abs(det) > 1e-300)) throw SolverError("rigid-load Schur block is singular");
  schur_inv_ = S.inverse();
}

VectorXd LameExtension::scatter_trace(const VectorXd& zeta) const {
  VectorXd full = VectorXd::Zero(2 * space_->n_dofs());
  for (int j = 0; j < n_trace(); ++j) {
    full[2 * trace_dofs_[j]] = zeta[2 * j];
    full[2 * trace_dofs_[j] + 1] = zeta[2 * j + 1];
  }
  return full;
}

VectorXd LameExtension::restrict_trace(const VectorXd& full) const {
  VectorXd out(2 * n_trace());
  for (int j = 0; j < n_trace(); ++j) {
    out[2 * j] = full[2 * trace_dofs_[j]];
    out[2 * j + 1] = full[2 * trace_dofs_[j] + 1];
  }
  return out;
}

double LameExtension::trace_flux(const VectorXd& zeta) const {
  double flux = 0.0;
  for (int j = 0; j < n_trace(); ++j) {
    flux += flux_row_[2 * trace_dofs_[j]] * zeta[2 * j];
    flux += flux_row_[2 * trace_dofs_[j] + 1] * zeta[2 * j + 1];
  }
  return flux;
}

LameExtension::Solution LameExtension::extend_full(const VectorXd& zeta,
                                                   const Vec2& momentum, double moment,
                                                   bool require_flux_free,
                                                   double flux_tol) const {
  if (zeta.size() != 2 * n_trace()) {
    throw CompatibilityError("interface data size does not match the trace");
  }
  if (require_flux_free) {
    const double flux = trace_flux(zeta);
    if (std::abs(flux) > flux_tol) {
      throw CompatibilityError("interface data carries nonzero flux");
    }
  }
  const VectorXd g = scatter_trace(zeta);
  const VectorXd Ag = A_ * g;
  const int nf = static_cast<int>(free_.size());
  VectorXd rf(nf);
  for (int i = 0; i < nf; ++i) rf[i] = -Ag[free_[i]];
  const VectorXd x0 = ldlt_.solve(rf);

  Vec3 target(momentum.x() - load_x_.dot(g), momentum.y() - load_y_.dot(g),
              moment - load_m_.dot(g));
  Vec3 lx0;
  lx0.setZero();
  for (int i = 0; i < nf; ++i) {
    lx0[0] += load_x_[free_[i]] * x0[i];
    lx0[1] += load_y_[free_[i]] * x0[i];
    lx0[2] += load_m_[free_[i]] * x0[i];
  }
  const Vec3 m = schur_inv_ * (lx0 - target);

  Solution sol;
  sol.phi = g;
  const VectorXd corr = W_ * m;
  for (int i = 0; i < nf; ++i) sol.phi[free_[i]] = x0[i] - corr[i];
  sol.force = Vec2(-m[0], -m[1]);
  sol.torque = -m[2];
  return sol;
}

LameExtension::Solution LameExtension::extend_targets(const Vec2& a, double b,
                                                      double c) const {
  VectorXd zeta = VectorXd::Zero(2 * n_trace());
  if (c != 0.0) zeta = (c / normal_flux_) * normal_trace_;
  return extend_full(zeta, a, b, false);
}

Vec2 LameExtension::stress_force(const VectorXd& phi) const {
  const Mesh& mesh = space_->mesh();
  const auto& eq = EdgeQuadrature::degree5();
  FieldSampler f{space_, &phi};
  Vec2 out = Vec2::Zero();
  for (const auto& te : space_->trace(BoundaryTag::SolidBoundary)) {
    const Vec2 n = mesh.boundary_normal(te.be);
    const double len = mesh.boundary_edge_length(te.be);
    const CellGeom geom = CellGeom::of(mesh, te.cell);
    for (int q = 0; q < eq.n; ++q) {
      const auto rb = RefBasis::at(2, FemSpace::edge_bary(te, eq.t[q]));
      const Mat2 grad = f.grad_vector(te.cell, geom, rb);
      out += eq.w[q] * len * ((grad + grad.transpose()) * n);
    }
  }
  return out;
}

double LameExtension::stress_torque(const VectorXd& phi) const {
  const Mesh& mesh = space_->mesh();
  const auto& eq = EdgeQuadrature::degree5();
  FieldSampler f{space_, &phi};
  double out = 0.0;
  for (const auto& te : space_->trace(BoundaryTag::SolidBoundary)) {
    const Vec2 n = mesh.boundary_normal(te.be);
    const double len = mesh.boundary_edge_length(te.be);
    const CellGeom geom = CellGeom::of(mesh, te.cell);
    for (int q = 0; q < eq.n; ++q) {
      const auto bary = FemSpace::edge_bary(te, eq.t[q]);
      const auto rb = RefBasis::at(2, bary);
      const Mat2 grad = f.grad_vector(te.cell, geom, rb);
      out += eq.w[q] * len * cross2(geom.map(bary), (grad + grad.transpose()) * n);
    }
  }
  return out;
}

Series lame_extend(const LameExtension& lame, const Series& zeta, double flux_tol) {
  Series phi(zeta.size());
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    phi[i] = lame.extend_full(zeta[i], Vec2::Zero(), 0.0, true, flux_tol).phi;
  }
  return phi;
}

Series lame_extend_with_targets(const LameExtension& lame, const std::vector<Vec2>& a,
                                const std::vector<double>& b,
                                const std::vector<double>& c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw CompatibilityError("target series lengths differ");
  }
  Series phi(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    phi[i] = lame.extend_targets(a[i], b[i], c[i]).phi;
  }
  return phi;
}

}  // namespace swim
