#include "swim/spectral.hpp"

#include <algorithm>
#include <climits>
#include <limits>

namespace swim {

namespace {

using Cx = std::complex<double>;
using VectorXcd = Eigen::VectorXcd;
using MatrixXcd = Eigen::MatrixXcd;

/// Chebyshev-Lobatto differentiation matrix on x_i = cos(pi i / N),
/// diagonal closed by the zero-row-sum identity.
MatrixXd chebyshev_diff(int n) {
  const int N = n - 1;
  MatrixXd D = MatrixXd::Zero(n, n);
  VectorXd x(n), c(n);
  for (int i = 0; i < n; ++i) {
    x[i] = std::cos(M_PI * i / N);
    c[i] = (i == 0 || i == N) ? 2.0 : 1.0;
  }
  for (int i = 0; i < n; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (c[i] / c[j]) * ((i + j) % 2 == 0 ? 1.0 : -1.0) / (x[i] - x[j]);
      rowsum += D(i, j);
    }
    D(i, i) = -rowsum;
  }
  return D;
}

/// Periodic spectral differentiation for an even number of nodes.
MatrixXd fourier_diff(int n) {
  MatrixXd D = MatrixXd::Zero(n, n);
  const double h = 2.0 * M_PI / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      D(i, j) = 0.5 * (k % 2 == 0 ? 1.0 : -1.0) / std::tan(0.5 * h * k);
    }
  }
  return D;
}

/// Clenshaw-Curtis weights by moment matching: V w = Chebyshev moments.
VectorXd clenshaw_curtis(const VectorXd& x) {
  const int n = static_cast<int>(x.size());
  MatrixXd V(n, n);
  VectorXd mom(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      V(k, i) = std::cos(k * std::acos(std::clamp(x[i], -1.0, 1.0)));
    }
    mom[k] = (k % 2 == 0) ? 2.0 / (1.0 - k * k) : 0.0;
  }
  mom[0] = 2.0;
  return V.partialPivLu().solve(mom);
}

/// Angular analysis coefficients c_m = (1/n) sum_j f_j e^{-i m theta_j} for
/// the rows of a grid function, modes 0..m_count-1.
MatrixXcd dft_rows(const MatrixXd& f, int m_count) {
  const int nr = static_cast<int>(f.rows()), nt = static_cast<int>(f.cols());
  MatrixXcd c(nr, m_count);
  for (int m = 0; m < m_count; ++m) {
    VectorXcd e(nt);
    for (int j = 0; j < nt; ++j) {
      const double ang = -2.0 * M_PI * m * j / nt;
      e[j] = Cx(std::cos(ang), std::sin(ang));
    }
    c.col(m) = (f.cast<Cx>() * e) / double(nt);
  }
  return c;
}

VectorXcd dft_vector(const VectorXd& g, int m_count) {
  const int nt = static_cast<int>(g.size());
  VectorXcd c = VectorXcd::Zero(m_count);
  for (int m = 0; m < m_count; ++m) {
    Cx acc(0.0, 0.0);
    for (int j = 0; j < nt; ++j) {
      const double ang = -2.0 * M_PI * m * j / nt;
      acc += g[j] * Cx(std::cos(ang), std::sin(ang));
    }
    c[m] = acc / double(nt);
  }
  return c;
}

/// Adds 2 Re(col e^{i m theta}) (or the plain real part for m = 0) of one
/// mode's radial profile into a grid field.
void add_mode(MatrixXd& f, const VectorXcd& col, int m, const VectorXd& theta) {
  const int nr = static_cast<int>(f.rows()), nt = static_cast<int>(f.cols());
  const double fac = (m == 0) ? 1.0 : 2.0;
  for (int j = 0; j < nt; ++j) {
    const Cx e(std::cos(m * theta[j]), std::sin(m * theta[j]));
    for (int i = 0; i < nr; ++i) {
      f(i, j) += fac * (col[i] * e).real();
    }
  }
}

}  // namespace

AnnulusGrid AnnulusGrid::make(double inner_radius, double outer_radius, int n_r,
                              int n_theta) {
  if (!(0.0 < inner_radius && inner_radius < outer_radius)) {
    throw InvalidGeometry("annulus radii must satisfy 0 < a < b");
  }
  if (n_r < 8 || n_theta < 8 || n_theta % 2 != 0) {
    throw InvalidGeometry("annulus grid needs n_r >= 8 and even n_theta >= 8");
  }
  AnnulusGrid g;
  g.inner_radius = inner_radius;
  g.outer_radius = outer_radius;
  g.n_r = n_r;
  g.n_theta = n_theta;
  const double c0 = 0.5 * (inner_radius + outer_radius);
  const double c1 = 0.5 * (outer_radius - inner_radius);
  g.r.resize(n_r);
  VectorXd x(n_r);
  for (int i = 0; i < n_r; ++i) {
    x[i] = std::cos(M_PI * i / (n_r - 1));
    g.r[i] = c0 + c1 * x[i];
  }
  g.theta.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) g.theta[j] = 2.0 * M_PI * j / n_theta;
  g.Dr = chebyshev_diff(n_r) / c1;
  g.Dtheta = fourier_diff(n_theta);
  g.wr = clenshaw_curtis(x) * c1;
  return g;
}

void AnnulusGrid::cartesian_gradient(const MatrixXd& f, MatrixXd& fx,
                                     MatrixXd& fy) const {
  const MatrixXd fr = Dr * f;
  const MatrixXd ft = f * Dtheta.transpose();
  fx.resize(n_r, n_theta);
  fy.resize(n_r, n_theta);
  for (int j = 0; j < n_theta; ++j) {
    const double c = std::cos(theta[j]), s = std::sin(theta[j]);
    for (int i = 0; i < n_r; ++i) {
      fx(i, j) = c * fr(i, j) - s / r[i] * ft(i, j);
      fy(i, j) = s * fr(i, j) + c / r[i] * ft(i, j);
    }
  }
}

double AnnulusGrid::integral(const MatrixXd& f) const {
  double out = 0.0;
  for (int i = 0; i < n_r; ++i) {
    out += wr[i] * r[i] * f.row(i).sum();
  }
  return out * 2.0 * M_PI / n_theta;
}

DivergenceSolver::DivergenceSolver(const AnnulusGrid& grid) : grid_(&grid) {
  const int nr = grid.n_r;
  m_max_ = grid.n_theta / 2 - 1;
  const MatrixXd rDr = grid.r.asDiagonal() * grid.Dr;
  const MatrixXd base = grid.r.cwiseInverse().asDiagonal() * (grid.Dr * rDr);
  const VectorXd inv_r2 = grid.r.cwiseAbs2().cwiseInverse();

  bvp_.reserve(m_max_ + 1);
  lift_.resize(m_max_ + 1);
  lift_ur_.resize(m_max_ + 1);
  lift_ut_.resize(m_max_ + 1);
  for (int m = 0; m <= m_max_; ++m) {
    MatrixXd L = base - double(m) * m * MatrixXd(inv_r2.asDiagonal());
    L.row(0).setZero();
    L(0, 0) = 1.0;
    L.row(nr - 1).setZero();
    L(nr - 1, nr - 1) = 1.0;
    bvp_.emplace_back(L);
    if (m == 0) continue;

    const double a = grid.inner_radius, b = grid.outer_radius;
    Eigen::Matrix<double, Eigen::Dynamic, 4> S(nr, 4);
    for (int i = 0; i < nr; ++i) {
      const double rr = grid.r[i];
      if (m == 1) {
        S(i, 0) = rr / b;
        S(i, 1) = a / rr;
        S(i, 2) = std::pow(rr / b, 3);
        S(i, 3) = (rr / b) * std::log(rr / a);
      } else {
        S(i, 0) = std::pow(rr / b, m);
        S(i, 1) = std::pow(a / rr, m);
        S(i, 2) = std::pow(rr / b, m + 2);
        S(i, 3) = std::pow(a / rr, m - 2);
      }
    }
    lift_ur_[m] = grid.r.cwiseInverse().asDiagonal() * S;
    lift_ut_[m] = -(grid.Dr * S);
    Eigen::Matrix4d B;
    B.row(0) = S.row(nr - 1);
    B.row(1) = lift_ut_[m].row(nr - 1);
    B.row(2) = S.row(0);
    B.row(3) = lift_ut_[m].row(0);
    lift_[m] = Eigen::PartialPivLU<Eigen::Matrix4d>(B);
  }

  VectorXd one = VectorXd::Ones(nr);
  one[0] = 0.0;
  one[nr - 1] = 0.0;
  phi_unit_ = bvp_[0].solve(one);
  const VectorXd dphi = grid.Dr * phi_unit_;
  t_unit_ = 2.0 * M_PI *
            (grid.outer_radius * dphi[0] - grid.inner_radius * dphi[nr - 1]);
  if (std::abs(t_unit_) < 1e-12) {
    throw SolverError("unit-source flux functional degenerate");
  }

  Eigen::Matrix2d W;
  const double a = grid.inner_radius, b = grid.outer_radius;
  W << a, 1.0 / a, b, 1.0 / b;
  swirl_ = Eigen::PartialPivLU<Eigen::Matrix2d>(W);
}

MatrixXd DivergenceSolver::polar_divergence(const GridField& u) const {
  const AnnulusGrid& g = *grid_;
  MatrixXd ur(g.n_r, g.n_theta), ut(g.n_r, g.n_theta);
  for (int j = 0; j < g.n_theta; ++j) {
    const double c = std::cos(g.theta[j]), s = std::sin(g.theta[j]);
    for (int i = 0; i < g.n_r; ++i) {
      ur(i, j) = c * u.x(i, j) + s * u.y(i, j);
      ut(i, j) = -s * u.x(i, j) + c * u.y(i, j);
    }
  }
  const MatrixXd div_r = g.Dr * (g.r.asDiagonal() * ur);
  const MatrixXd div_t = ut * g.Dtheta.transpose();
  return g.r.cwiseInverse().asDiagonal() * (div_r + div_t);
}

GridField DivergenceSolver::solve(const MatrixXd& f, const CircleTrace& inner,
                                  const CircleTrace& outer, double compat_tol,
                                  double* defect_out) const {
  const AnnulusGrid& g = *grid_;
  const int nr = g.n_r, nt = g.n_theta;
  if (f.rows() != nr || f.cols() != nt || inner.x.size() != nt ||
      outer.x.size() != nt) {
    throw CompatibilityError("divergence data does not match the grid");
  }

  // Polar boundary components and their angular modes.
  VectorXd gr_in(nt), gt_in(nt), gr_out(nt), gt_out(nt);
  for (int j = 0; j < nt; ++j) {
    const double c = std::cos(g.theta[j]), s = std::sin(g.theta[j]);
    gr_in[j] = c * inner.x[j] + s * inner.y[j];
    gt_in[j] = -s * inner.x[j] + c * inner.y[j];
    gr_out[j] = c * outer.x[j] + s * outer.y[j];
    gt_out[j] = -s * outer.x[j] + c * outer.y[j];
  }
  const int mc = m_max_ + 1;
  const MatrixXcd fm = dft_rows(f, mc);
  const VectorXcd mr_in = dft_vector(gr_in, mc), mt_in = dft_vector(gt_in, mc);
  const VectorXcd mr_out = dft_vector(gr_out, mc), mt_out = dft_vector(gt_out, mc);

  MatrixXd ur = MatrixXd::Zero(nr, nt), ut = MatrixXd::Zero(nr, nt);

  // Mode 0: potential + flux carrier + swirl.  The uniform source correction
  // closes the discrete flux balance exactly, so both radial end conditions
  // are met by the single 1/r field.
  {
    VectorXd rhs = fm.col(0).real();
    rhs[0] = 0.0;
    rhs[nr - 1] = 0.0;
    VectorXd phi = bvp_[0].solve(rhs);
    VectorXd dphi = g.Dr * phi;
    const double t_f =
        2.0 * M_PI * (g.outer_radius * dphi[0] - g.inner_radius * dphi[nr - 1]);
    const double flux = 2.0 * M_PI * (g.outer_radius * mr_out[0].real() -
                                      g.inner_radius * mr_in[0].real());
    // Admissibility is judged against the exact quadrature of the source; the
    // gap between that and the endpoint functional t_f is the collocation
    // closure residual, absorbed below so both end conditions hold exactly.
    const double defect = flux - g.integral(f);
    if (defect_out) *defect_out = defect;
    if (std::abs(defect) > compat_tol) {
      throw CompatibilityError("interface data carries an incompatible flux (defect " +
                               std::to_string(defect) + ")");
    }
    const double gamma = (flux - t_f) / t_unit_;
    phi += gamma * phi_unit_;
    dphi = g.Dr * phi;

    const double C = g.inner_radius * (mr_in[0].real() - dphi[nr - 1]);
    VectorXcd u0 = (dphi + C * g.r.cwiseInverse()).cast<Cx>();
    add_mode(ur, u0, 0, g.theta);

    Eigen::Vector2d sw = swirl_.solve(
        Eigen::Vector2d(mt_in[0].real(), mt_out[0].real()));
    VectorXcd t0 = (sw[0] * g.r + sw[1] * g.r.cwiseInverse()).cast<Cx>();
    add_mode(ut, t0, 0, g.theta);
  }

  for (int m = 1; m <= m_max_; ++m) {
    VectorXcd rhs = fm.col(m);
    rhs[0] = Cx(0, 0);
    rhs[nr - 1] = Cx(0, 0);
    VectorXcd phi(nr);
    phi.real() = bvp_[m].solve(VectorXd(rhs.real()));
    phi.imag() = bvp_[m].solve(VectorXd(rhs.imag()));
    VectorXcd urm = (g.Dr * phi.real()).cast<Cx>() +
                    Cx(0, 1) * (g.Dr * phi.imag()).cast<Cx>();
    const Cx im(0.0, double(m));
    VectorXcd utm = im * g.r.cwiseInverse().cast<Cx>().cwiseProduct(phi);

    const Cx rr_in = mr_in[m] - urm[nr - 1], rt_in = mt_in[m] - utm[nr - 1];
    const Cx rr_out = mr_out[m] - urm[0], rt_out = mt_out[m] - utm[0];
    Eigen::Vector4cd rhs4;
    rhs4 << g.inner_radius * rr_in / im, rt_in, g.outer_radius * rr_out / im,
        rt_out;
    Eigen::Vector4cd c;
    c.real() = lift_[m].solve(Eigen::Vector4d(rhs4.real()));
    c.imag() = lift_[m].solve(Eigen::Vector4d(rhs4.imag()));

    urm += im * (lift_ur_[m] * c);
    utm += lift_ut_[m] * c;
    add_mode(ur, urm, m, g.theta);
    add_mode(ut, utm, m, g.theta);
  }

  GridField u = GridField::zero(g);
  for (int j = 0; j < nt; ++j) {
    const double c = std::cos(g.theta[j]), s = std::sin(g.theta[j]);
    for (int i = 0; i < nr; ++i) {
      u.x(i, j) = c * ur(i, j) - s * ut(i, j);
      u.y(i, j) = s * ur(i, j) + c * ut(i, j);
    }
  }
  return u;
}

MatrixXd det_error_field(const AnnulusGrid& grid, const GridField& Z) {
  MatrixXd xx, xy, yx, yy;
  grid.cartesian_gradient(Z.x, xx, xy);
  grid.cartesian_gradient(Z.y, yx, yy);
  MatrixXd out(grid.n_r, grid.n_theta);
  for (int j = 0; j < grid.n_theta; ++j) {
    for (int i = 0; i < grid.n_r; ++i) {
      out(i, j) = (1.0 + xx(i, j)) * (1.0 + yy(i, j)) - xy(i, j) * yx(i, j) - 1.0;
    }
  }
  return out;
}

FluidMapSeries extend_divergence_free(const DivergenceSolver& solver,
                                      const std::vector<CircleTrace>& inner,
                                      const TimeGrid& time,
                                      const ExtensionOptions& opt) {
  const AnnulusGrid& g = solver.grid();
  if (static_cast<int>(inner.size()) != time.n_samples()) {
    throw CompatibilityError("interface trace series does not match the time grid");
  }
  for (const auto& tr : inner) {
    if (tr.x.size() != g.n_theta || tr.y.size() != g.n_theta) {
      throw CompatibilityError("interface trace does not match the grid angles");
    }
  }
  if (std::max(inner[0].x.lpNorm<Eigen::Infinity>(),
               inner[0].y.lpNorm<Eigen::Infinity>()) > 1e-13) {
    throw CompatibilityError("rest start requires vanishing initial interface data");
  }

  FluidMapSeries out;
  out.grid = &g;
  out.time = time;
  out.displacement.assign(time.n_samples(), GridField::zero(g));
  out.velocity.assign(time.n_samples(), GridField::zero(g));
  out.steps.reserve(time.n_steps);

  const CircleTrace outer = CircleTrace::zero(g.n_theta);
  GridField prev_inc = GridField::zero(g);
  MatrixXd gxx, gxy, gyx, gyy, dxx, dxy, dyx, dyy;

  for (int n = 0; n < time.n_steps; ++n) {
    const CircleTrace data{inner[n + 1].x - inner[n].x,
                           inner[n + 1].y - inner[n].y};
    GridField inc = opt.warm_start ? prev_inc : GridField::zero(g);

    ExtensionStepReport rep;
    double prev_upd = std::numeric_limits<double>::infinity();
    int growing = 0;
    const auto cofactor_source = [&](const GridField& step) -> MatrixXd {
      const GridField mid{out.displacement[n].x + 0.5 * step.x,
                          out.displacement[n].y + 0.5 * step.y};
      g.cartesian_gradient(mid.x, gxx, gxy);
      g.cartesian_gradient(mid.y, gyx, gyy);
      g.cartesian_gradient(step.x, dxx, dxy);
      g.cartesian_gradient(step.y, dyx, dyy);
      // (I - com(I + grad mid)) : grad step, with com[[1+gxx,gxy],[gyx,1+gyy]]
      // = [[1+gyy,-gyx],[-gxy,1+gxx]].
      return -gyy.cwiseProduct(dxx) + gyx.cwiseProduct(dxy) +
             gxy.cwiseProduct(dyx) - gxx.cwiseProduct(dyy);
    };
    for (int k = 0; k < opt.max_picard; ++k) {
      // The per-sweep defect lags one Picard iterate behind, so the
      // admissibility verdict waits for the converged source below.
      const GridField next =
          solver.solve(cofactor_source(inc), data, outer,
                       std::numeric_limits<double>::infinity());
      const double upd = std::max((next.x - inc.x).cwiseAbs().maxCoeff(),
                                  (next.y - inc.y).cwiseAbs().maxCoeff());
      inc = next;
      rep.iterations = k + 1;
      rep.update_norm = upd;
      if (upd < opt.picard_tol) break;
      if (upd > prev_upd) {
        if (++growing >= 3) {
          throw ExtensionDiverged("update norm grew three sweeps in a row at step " +
                                  std::to_string(n));
        }
      } else {
        growing = 0;
      }
      prev_upd = upd;
    }

    double data_flux = 0.0;
    for (int j = 0; j < g.n_theta; ++j) {
      data_flux += std::cos(g.theta[j]) * data.x[j] +
                   std::sin(g.theta[j]) * data.y[j];
    }
    data_flux *= -2.0 * M_PI * g.inner_radius / g.n_theta;
    rep.compat_defect = data_flux - g.integral(cofactor_source(inc));
    out.max_compat_defect =
        std::max(out.max_compat_defect, std::abs(rep.compat_defect));
    if (std::abs(rep.compat_defect) > opt.compat_tol) {
      throw CompatibilityError(
          "interface data carries an incompatible flux (defect " +
          std::to_string(rep.compat_defect) + " at step " + std::to_string(n) +
          ")");
    }

    out.displacement[n + 1].x = out.displacement[n].x + inc.x;
    out.displacement[n + 1].y = out.displacement[n].y + inc.y;
    out.velocity[n + 1].x = (2.0 / time.dt) * inc.x - out.velocity[n].x;
    out.velocity[n + 1].y = (2.0 / time.dt) * inc.y - out.velocity[n].y;
    prev_inc = inc;
    out.steps.push_back(rep);
  }

  for (const auto& Z : out.displacement) {
    out.max_det_error = std::max(
        out.max_det_error, det_error_field(g, Z).cwiseAbs().maxCoeff());
  }
  return out;
}

AnnulusInterpolant::AnnulusInterpolant(const AnnulusGrid& grid,
                                       const MatrixXd& values)
    : inner_(grid.inner_radius),
      outer_(grid.outer_radius),
      n_r_(grid.n_r),
      n_theta_(grid.n_theta) {
  const MatrixXcd fm = dft_rows(values, n_theta_);
  // Chebyshev analysis per mode: a_k = 2/(N c_k) sum_i v_i cos(pi i k/N)/c_i.
  const int N = n_r_ - 1;
  coeff_.resize(n_r_, n_theta_);
  for (int m = 0; m < n_theta_; ++m) {
    for (int k = 0; k < n_r_; ++k) {
      Cx acc(0.0, 0.0);
      for (int i = 0; i < n_r_; ++i) {
        const double ci = (i == 0 || i == N) ? 2.0 : 1.0;
        acc += fm(i, m) * std::cos(M_PI * i * k / N) / ci;
      }
      const double ck = (k == 0 || k == N) ? 2.0 : 1.0;
      coeff_(k, m) = acc * (2.0 / (N * ck));
    }
  }
}

double AnnulusInterpolant::eval(double r, double theta, double slack) const {
  const double c0 = 0.5 * (inner_ + outer_), c1 = 0.5 * (outer_ - inner_);
  const double x = (r - c0) / c1;
  if (std::abs(x) > 1.0 + slack) {
    throw GeometryError("evaluation point leaves the annulus (r = " +
                        std::to_string(r) + ")");
  }
  Cx total(0.0, 0.0);
  for (int m = 0; m < n_theta_; ++m) {
    // Clenshaw recurrence for the Chebyshev series of this mode.
    Cx b1(0.0, 0.0), b2(0.0, 0.0);
    for (int k = n_r_ - 1; k >= 1; --k) {
      const Cx b0 = coeff_(k, m) + 2.0 * x * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    const Cx val = coeff_(0, m) + x * b1 - b2;
    const int freq = (m <= n_theta_ / 2) ? m : m - n_theta_;
    total += val * Cx(std::cos(freq * theta), std::sin(freq * theta));
  }
  return total.real();
}

std::vector<CircleTrace> interface_trace_series(const DisplacementField& Z,
                                                const AnnulusGrid& grid) {
  const FemSpace& sp = *Z.space;
  const Mesh& mesh = sp.mesh();
  if (std::abs(mesh.solid_radius - grid.inner_radius) > 1e-12) {
    throw CompatibilityError("mesh interface circle does not match the annulus");
  }

  // Sorted angular spans of the interface edges, then per grid angle the
  // adjacent cell and barycentric point of the exact circle position.
  const auto& edges = sp.trace(BoundaryTag::SolidBoundary);
  std::vector<std::pair<double, int>> starts;
  starts.reserve(edges.size());
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const Vec2 p = sp.dof_point(edges[e].dofs[0]);
    double ang = std::atan2(p.y(), p.x());
    if (ang < 0) ang += 2.0 * M_PI;
    starts.emplace_back(ang, e);
  }
  std::sort(starts.begin(), starts.end());

  struct Loc {
    int cell;
    std::array<double, 3> bary;
  };
  std::vector<Loc> locs(grid.n_theta);
  for (int j = 0; j < grid.n_theta; ++j) {
    const double th = grid.theta[j];
    auto it = std::upper_bound(starts.begin(), starts.end(),
                               std::make_pair(th, INT_MAX));
    const int e = (it == starts.begin() ? starts.back() : *std::prev(it)).second;
    const auto& te = edges[e];
    const CellGeom cg = CellGeom::of(mesh, te.cell);
    const Vec2 p(grid.inner_radius * std::cos(th), grid.inner_radius * std::sin(th));
    const Vec2 bc = cg.Jinv * (p - cg.p0);
    locs[j] = {te.cell, {1.0 - bc[0] - bc[1], bc[0], bc[1]}};
  }

  std::vector<CircleTrace> out(Z.Z.size(), CircleTrace::zero(grid.n_theta));
  for (std::size_t i = 0; i < Z.Z.size(); ++i) {
    const VectorXd& nodal = Z.Z[i];
    for (int j = 0; j < grid.n_theta; ++j) {
      const RefBasis rb = RefBasis::at(2, locs[j].bary);
      Vec2 val = Vec2::Zero();
      for (int l = 0; l < 6; ++l) {
        const int d = sp.cell_dof(locs[j].cell, l);
        val.x() += rb.phi[l] * nodal[2 * d];
        val.y() += rb.phi[l] * nodal[2 * d + 1];
      }
      out[i].x[j] = val.x();
      out[i].y[j] = val.y();
    }
  }
  return out;
}

}  // namespace swim
