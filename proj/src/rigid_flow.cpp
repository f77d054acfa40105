#include "swim/rigid_flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace swim {

namespace {

// Perp matrix: P v = perp(v).
const Mat2 kPerp = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();

// Stream function of the rigid field h_dot + omega perp(x - h).
double rigid_stream(const Vec2& h, const Vec2& h_dot, double omega,
                    const Vec2& x) {
  const Vec2 rel = x - h;
  return h_dot.dot(perp(rel)) + 0.5 * omega * rel.squaredNorm();
}

Vec2 rigid_stream_gradient(const Vec2& h, const Vec2& h_dot, double omega,
                           const Vec2& x) {
  return -perp(h_dot) + omega * (x - h);
}

// Cubic Lagrange weights on nodes {-1, 0, 1, 2} at parameter s in [0, 1].
std::array<double, 4> lagrange4(double s) {
  return {-s * (s - 1.0) * (s - 2.0) / 6.0,
          (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
          -s * (s + 1.0) * (s - 2.0) / 2.0,
          s * (s + 1.0) * (s - 1.0) / 6.0};
}

}  // namespace

double CutoffProfile::value(double r) const {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double s = (r - inner) / (outer - inner);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double CutoffProfile::d1(double r) const {
  if (r <= inner || r >= outer) return 0.0;
  const double w = outer - inner, s = (r - inner) / w;
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
}

double CutoffProfile::d2(double r) const {
  if (r <= inner || r >= outer) return 0.0;
  const double w = outer - inner, s = (r - inner) / w;
  return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
}

RigidMotionSeries RigidMotionSeries::from_rates(const TimeGrid& time,
                                                std::vector<Vec2> h_dot,
                                                VectorXd omega) {
  if (static_cast<int>(h_dot.size()) != time.n_samples() ||
      omega.size() != time.n_samples()) {
    throw CompatibilityError("rigid rate series does not match the time grid");
  }
  RigidMotionSeries out;
  out.time_ = time;
  out.h_dot_ = std::move(h_dot);
  out.omega_ = std::move(omega);
  out.h_.assign(time.n_samples(), Vec2::Zero());
  out.theta_.assign(time.n_samples(), 0.0);
  for (int i = 0; i < time.n_steps; ++i) {
    out.h_[i + 1] = out.h_[i] + 0.5 * time.dt * (out.h_dot_[i] + out.h_dot_[i + 1]);
    out.theta_[i + 1] =
        out.theta_[i] + 0.5 * time.dt * (out.omega_[i] + out.omega_[i + 1]);
  }
  return out;
}

namespace {
// Clamped linear sample locator: index k and fraction s with t = (k + s) dt.
std::pair<int, double> locate(const TimeGrid& time, double t) {
  const double u = t / time.dt;
  int k = static_cast<int>(std::floor(u));
  k = std::clamp(k, 0, time.n_steps - 1);
  return {k, std::clamp(u - k, 0.0, 1.0)};
}
}  // namespace

Vec2 RigidMotionSeries::h(double t) const {
  const auto [k, s] = locate(time_, t);
  return (1.0 - s) * h_[k] + s * h_[k + 1];
}

double RigidMotionSeries::theta(double t) const {
  const auto [k, s] = locate(time_, t);
  return (1.0 - s) * theta_[k] + s * theta_[k + 1];
}

Vec2 RigidMotionSeries::h_dot(double t) const {
  const auto [k, s] = locate(time_, t);
  return (1.0 - s) * h_dot_[k] + s * h_dot_[k + 1];
}

double RigidMotionSeries::omega(double t) const {
  const auto [k, s] = locate(time_, t);
  return (1.0 - s) * omega_[k] + s * omega_[k + 1];
}

Vec2 rigid_flow_velocity(const CutoffProfile& cut, const Vec2& h,
                         const Vec2& h_dot, double omega, const Vec2& x) {
  const double r = x.norm();
  if (r >= cut.outer) return Vec2::Zero();
  const Vec2 rigid = h_dot + omega * perp(x - h);
  if (r <= cut.inner) return rigid;
  const Vec2 rhat = x / r;
  return cut.value(r) * rigid +
         cut.d1(r) * rigid_stream(h, h_dot, omega, x) * perp(rhat);
}

Mat2 rigid_flow_velocity_gradient(const CutoffProfile& cut, const Vec2& h,
                                  const Vec2& h_dot, double omega,
                                  const Vec2& x) {
  const double r = x.norm();
  if (r >= cut.outer) return Mat2::Zero();
  if (r <= cut.inner) return omega * kPerp;
  const Vec2 rhat = x / r;
  const double psi = rigid_stream(h, h_dot, omega, x);
  const Vec2 grad_psi = rigid_stream_gradient(h, h_dot, omega, x);
  const Mat2 rr = rhat * rhat.transpose();
  Mat2 hess = cut.d2(r) * psi * rr +
              cut.d1(r) * (rhat * grad_psi.transpose() +
                           grad_psi * rhat.transpose()) +
              cut.d1(r) * psi * (Mat2::Identity() - rr) / r +
              cut.value(r) * omega * Mat2::Identity();
  return kPerp * hess;
}

RigidMapSeries RigidMapSeries::track(const RigidMotionSeries& motion,
                                     const CutoffProfile& cutoff,
                                     double outer_radius,
                                     const RigidFlowOptions& opt) {
  if (opt.n_seed_r < 4 || opt.n_seed_theta < 4 ||
      opt.seed_r_min >= outer_radius) {
    throw InvalidGeometry("rigid flow seed grid is degenerate");
  }
  const TimeGrid& time = motion.time_grid();
  RigidMapSeries out;
  out.motion_ = motion;
  out.cutoff_ = cutoff;
  out.n_r_ = opt.n_seed_r;
  out.n_theta_ = opt.n_seed_theta;
  out.r_min_ = opt.seed_r_min;
  out.r_max_ = outer_radius;
  out.dr_ = (outer_radius - opt.seed_r_min) / (opt.n_seed_r - 1);
  out.dtheta_ = 2.0 * M_PI / opt.n_seed_theta;

  const int nr = out.n_r_, nt = out.n_theta_;
  MatrixXd px(nr, nt), py(nr, nt);
  MatrixXd a11 = MatrixXd::Ones(nr, nt), a12 = MatrixXd::Zero(nr, nt);
  MatrixXd a21 = MatrixXd::Zero(nr, nt), a22 = MatrixXd::Ones(nr, nt);
  for (int i = 0; i < nr; ++i) {
    const double r = opt.seed_r_min + i * out.dr_;
    for (int j = 0; j < nt; ++j) {
      px(i, j) = r * std::cos(j * out.dtheta_);
      py(i, j) = r * std::sin(j * out.dtheta_);
    }
  }
  const MatrixXd seed_x = px, seed_y = py;

  const auto store = [&]() {
    out.dx_.push_back(px - seed_x);
    out.dy_.push_back(py - seed_y);
    out.j11_.push_back(a11 - MatrixXd::Ones(nr, nt));
    out.j12_.push_back(a12);
    out.j21_.push_back(a21);
    out.j22_.push_back(a22 - MatrixXd::Ones(nr, nt));
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nt; ++j) {
        const double det = a11(i, j) * a22(i, j) - a12(i, j) * a21(i, j);
        out.max_det_error_ = std::max(out.max_det_error_, std::abs(det - 1.0));
      }
  };
  store();

  for (int n = 0; n < time.n_steps; ++n) {
    const double t0 = time.time(n), dt = time.dt;
    // Stage data is shared by every seed.
    struct Stage {
      Vec2 h, h_dot;
      double omega;
    };
    std::array<Stage, 3> st;
    for (int q = 0; q < 3; ++q) {
      const double t = t0 + 0.5 * dt * q;
      st[q] = {motion.h(t), motion.h_dot(t), motion.omega(t)};
    }
    const auto vel = [&](int q, const Vec2& x) {
      return rigid_flow_velocity(cutoff, st[q].h, st[q].h_dot, st[q].omega, x);
    };
    const auto grad = [&](int q, const Vec2& x) {
      return rigid_flow_velocity_gradient(cutoff, st[q].h, st[q].h_dot,
                                          st[q].omega, x);
    };
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nt; ++j) {
        Vec2 x(px(i, j), py(i, j));
        Mat2 J;
        J << a11(i, j), a12(i, j), a21(i, j), a22(i, j);

        const Vec2 k1 = vel(0, x);
        const Mat2 K1 = grad(0, x) * J;
        const Vec2 x2 = x + 0.5 * dt * k1;
        const Vec2 k2 = vel(1, x2);
        const Mat2 K2 = grad(1, x2) * (J + 0.5 * dt * K1);
        const Vec2 x3 = x + 0.5 * dt * k2;
        const Vec2 k3 = vel(1, x3);
        const Mat2 K3 = grad(1, x3) * (J + 0.5 * dt * K2);
        const Vec2 x4 = x + dt * k3;
        const Vec2 k4 = vel(2, x4);
        const Mat2 K4 = grad(2, x4) * (J + dt * K3);

        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        J += dt / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);

        const double r = x.norm();
        if (r < 0.3 || r > out.r_max_ + 1e-9) {
          throw GeometryError("tracked seed left the fluid chart at step " +
                              std::to_string(n));
        }
        px(i, j) = x[0];
        py(i, j) = x[1];
        a11(i, j) = J(0, 0);
        a12(i, j) = J(0, 1);
        a21(i, j) = J(1, 0);
        a22(i, j) = J(1, 1);
      }
    }
    store();
  }
  return out;
}

namespace {
struct Stencil {
  int i0 = 0;                     // first radial row
  std::array<int, 4> cols{};      // wrapped angular columns
  std::array<double, 4> wr{}, wt{};
};
}  // namespace

// Shared stencil construction for map and jacobian queries.
static Stencil make_stencil(double r_min, double r_max, double dr,
                            double dtheta, int n_r, int n_theta,
                            const Vec2& x0) {
  const double r = x0.norm();
  if (r < r_min - 1e-9 || r > r_max + 1e-9) {
    throw GeometryError("query point leaves the tracked chart (r = " +
                        std::to_string(r) + ")");
  }
  double theta = std::atan2(x0[1], x0[0]);
  if (theta < 0.0) theta += 2.0 * M_PI;

  Stencil s;
  const double u = std::clamp((r - r_min) / dr, 0.0, double(n_r - 1));
  int i1 = std::clamp(static_cast<int>(std::floor(u)), 1, n_r - 3);
  s.i0 = i1 - 1;
  s.wr = lagrange4(u - i1);

  const double w = theta / dtheta;
  const int j1 = static_cast<int>(std::floor(w)) % n_theta;
  s.wt = lagrange4(w - std::floor(w));
  for (int q = 0; q < 4; ++q) {
    s.cols[q] = ((j1 + q - 1) % n_theta + n_theta) % n_theta;
  }
  return s;
}

Vec2 RigidMapSeries::map(int n, const Vec2& x0) const {
  if (n < 0 || n >= static_cast<int>(dx_.size())) {
    throw CompatibilityError("sample index outside the tracked series");
  }
  const Stencil s =
      make_stencil(r_min_, r_max_, dr_, dtheta_, n_r_, n_theta_, x0);
  Vec2 d = Vec2::Zero();
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const double w = s.wr[p] * s.wt[q];
      d[0] += w * dx_[n](s.i0 + p, s.cols[q]);
      d[1] += w * dy_[n](s.i0 + p, s.cols[q]);
    }
  return x0 + d;
}

Mat2 RigidMapSeries::jacobian(int n, const Vec2& x0) const {
  if (n < 0 || n >= static_cast<int>(j11_.size())) {
    throw CompatibilityError("sample index outside the tracked series");
  }
  const Stencil s =
      make_stencil(r_min_, r_max_, dr_, dtheta_, n_r_, n_theta_, x0);
  Mat2 d = Mat2::Zero();
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const double w = s.wr[p] * s.wt[q];
      d(0, 0) += w * j11_[n](s.i0 + p, s.cols[q]);
      d(0, 1) += w * j12_[n](s.i0 + p, s.cols[q]);
      d(1, 0) += w * j21_[n](s.i0 + p, s.cols[q]);
      d(1, 1) += w * j22_[n](s.i0 + p, s.cols[q]);
    }
  return Mat2::Identity() + d;
}

Vec2 RigidMapSeries::velocity(double t, const Vec2& x) const {
  return rigid_flow_velocity(cutoff_, motion_.h(t), motion_.h_dot(t),
                             motion_.omega(t), x);
}

}  // namespace swim
