/// @file test_rigid_composition.cpp
/// @brief Cutoff rigid carrier flow, its tracked flow map, and the nodal
///        composition of the two fluid extensions.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "swim/bundle.hpp"
#include "swim/compose.hpp"
#include "swim/mesh.hpp"
#include "swim/rigid_flow.hpp"
#include "swim/spectral.hpp"

using namespace swim;

namespace {

const AnnulusGrid& grid() {
  static const AnnulusGrid g = AnnulusGrid::make(0.5, 2.0, 48, 48);
  return g;
}

const DivergenceSolver& dsolver() {
  static const DivergenceSolver s(grid());
  return s;
}

/// Smooth rigid rates that start and return to rest: rate envelopes are
/// 1 - cos(2 pi t / T), horizon T from the grid.
RigidMotionSeries generic_motion(const TimeGrid& tg, double h_scale,
                                 double omega_scale) {
  std::vector<Vec2> hd(tg.n_samples());
  VectorXd om(tg.n_samples());
  for (int i = 0; i < tg.n_samples(); ++i) {
    const double env = 1.0 - std::cos(2.0 * M_PI * tg.time(i) / tg.horizon());
    hd[i] = h_scale * env * Vec2(1.0, -0.5);
    om[i] = omega_scale * env;
  }
  return RigidMotionSeries::from_rates(tg, std::move(hd), std::move(om));
}

std::vector<CircleTrace> zero_traces(const AnnulusGrid& g, const TimeGrid& tg) {
  return std::vector<CircleTrace>(tg.n_samples(), CircleTrace::zero(g.n_theta));
}

/// Interface material angles sliding under d(theta)/ds = kappa cos(3 theta).
double slide_angle(double theta0, double s, double kappa) {
  const int steps = 200;
  const double h = s / steps;
  double th = theta0;
  for (int k = 0; k < steps; ++k) {
    const auto f = [kappa](double t) { return kappa * std::cos(3.0 * t); };
    const double k1 = f(th);
    const double k2 = f(th + 0.5 * h * k1);
    const double k3 = f(th + 0.5 * h * k2);
    const double k4 = f(th + h * k3);
    th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return th;
}

double slide_arc(const TimeGrid& tg, double beta_max, double t) {
  return beta_max * (1.0 - std::cos(M_PI * t / tg.horizon()));
}

std::vector<CircleTrace> sliding_trace(const AnnulusGrid& g, const TimeGrid& tg,
                                       double beta_max) {
  const double a = g.inner_radius, kappa = a * a;
  std::vector<CircleTrace> out(tg.n_samples(), CircleTrace::zero(g.n_theta));
  for (int i = 0; i < tg.n_samples(); ++i) {
    const double beta = slide_arc(tg, beta_max, tg.time(i));
    for (int j = 0; j < g.n_theta; ++j) {
      const double th = slide_angle(g.theta[j], beta, kappa);
      out[i].x[j] = a * std::cos(th) - a * std::cos(g.theta[j]);
      out[i].y[j] = a * std::sin(th) - a * std::sin(g.theta[j]);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("cutoff profile is C2 with flat junctions") {
  const CutoffProfile cut;
  CHECK(cut.value(0.3) == 1.0);
  CHECK(cut.value(cut.inner) == 1.0);
  CHECK(cut.value(cut.outer) == 0.0);
  CHECK(cut.value(1.9) == 0.0);
  CHECK(cut.value(0.5 * (cut.inner + cut.outer)) == doctest::Approx(0.5));

  // Central differences confirm the analytic derivatives inside the band and
  // their decay to zero at the junctions.
  const double e = 1e-5;
  for (const double r : {0.7, 0.9, 1.1, 1.3, 1.5}) {
    const double fd1 = (cut.value(r + e) - cut.value(r - e)) / (2.0 * e);
    const double fd2 =
        (cut.value(r + e) - 2.0 * cut.value(r) + cut.value(r - e)) / (e * e);
    CHECK(std::abs(fd1 - cut.d1(r)) < 1e-9);
    CHECK(std::abs(fd2 - cut.d2(r)) < 1e-5);
    CHECK(cut.d1(r) < 0.0);
  }
  CHECK(cut.d1(cut.inner) == 0.0);
  CHECK(cut.d1(cut.outer) == 0.0);
  CHECK(cut.d2(cut.inner) == 0.0);
  CHECK(cut.d2(cut.outer) == 0.0);
}

TEST_CASE("carrier velocity is rigid inside and divergence free everywhere") {
  const CutoffProfile cut;
  const Vec2 h(0.02, -0.01), hd(0.3, 0.1);
  const double om = 0.4;

  // Rigid zone: the field and its gradient are the rigid motion exactly.
  const Vec2 x_in(0.3, -0.4);
  CHECK((rigid_flow_velocity(cut, h, hd, om, x_in) -
         (hd + om * perp(x_in - h)))
            .norm() == 0.0);
  CHECK((rigid_flow_velocity_gradient(cut, h, hd, om, x_in) - om * skew2(1.0))
            .norm() == 0.0);

  // Beyond the outer junction the carrier vanishes identically.
  const Vec2 x_out(1.7, 0.4);
  CHECK(rigid_flow_velocity(cut, h, hd, om, x_out).norm() == 0.0);
  CHECK(rigid_flow_velocity_gradient(cut, h, hd, om, x_out).norm() == 0.0);

  // In the band: the gradient matches finite differences of the field and
  // has zero trace (the field is a perp gradient).
  const double e = 1e-6;
  for (const Vec2& x : {Vec2(0.9, 0.3), Vec2(-0.7, 0.8), Vec2(0.1, -1.2)}) {
    const Mat2 G = rigid_flow_velocity_gradient(cut, h, hd, om, x);
    for (int c = 0; c < 2; ++c) {
      Vec2 dp = Vec2::Zero();
      dp[c] = e;
      const Vec2 fd = (rigid_flow_velocity(cut, h, hd, om, x + dp) -
                       rigid_flow_velocity(cut, h, hd, om, x - dp)) /
                      (2.0 * e);
      CHECK((fd - G.col(c)).norm() < 1e-7);
    }
    CHECK(std::abs(G.trace()) < 1e-13);
  }
}

TEST_CASE("resting rates leave the tracked flow at the identity") {
  TimeGrid tg{0.05, 10};
  const RigidMotionSeries motion = generic_motion(tg, 0.0, 0.0);
  const RigidMapSeries flow = RigidMapSeries::track(motion, CutoffProfile{}, 2.0);
  CHECK(flow.max_det_error() == 0.0);
  for (const Vec2& x : {Vec2(0.45, 0.1), Vec2(-0.9, 0.8), Vec2(1.3, -1.2)}) {
    CHECK((flow.map(tg.n_steps, x) - x).norm() == 0.0);
    CHECK((flow.jacobian(tg.n_steps, x) - Mat2::Identity()).norm() == 0.0);
  }
}

TEST_CASE("pure rotation follows the differential-rotation oracle at fourth order") {
  const CutoffProfile cut;
  const double T = 0.5, om = 1.0;

  // With a constant spin the streamlines are circles and the angular rate at
  // radius r is xi(r) om + om r xi'(r) / 2: an exact oracle at every radius.
  const auto oracle = [&](const Vec2& x0, double t) {
    const double r = x0.norm();
    const double alpha = cut.value(r) * om + 0.5 * om * r * cut.d1(r);
    return Vec2(rotation2(alpha * t) * x0);
  };

  std::array<double, 2> err{};
  std::array<double, 2> jerr{};
  int k = 0;
  for (const int steps : {10, 20}) {
    TimeGrid tg{T / steps, steps};
    std::vector<Vec2> hd(tg.n_samples(), Vec2::Zero());
    const RigidMotionSeries motion = RigidMotionSeries::from_rates(
        tg, std::move(hd), VectorXd::Constant(tg.n_samples(), om));
    const RigidMapSeries flow = RigidMapSeries::track(motion, cut, 2.0);

    double e = 0.0;
    // Query on the seed lattice so interpolation is exact node lookup.
    for (const double r : {0.4, 0.5, 0.8, 1.0, 1.25, 1.5}) {
      for (int j = 0; j < 8; ++j) {
        const double th = 2.0 * M_PI * j / 64.0 * 8.0;
        const Vec2 x0 = r * Vec2(std::cos(th), std::sin(th));
        e = std::max(e, (flow.map(tg.n_steps, x0) - oracle(x0, T)).norm());
      }
    }
    err[k] = e;

    // Inside the rigid zone the seed Jacobian is the rotation itself.
    const Vec2 x_in(0.5, 0.0);
    jerr[k] = (flow.jacobian(tg.n_steps, x_in) - rotation2(om * T)).norm();

    // Beyond the outer junction nothing moves, exactly.
    const Vec2 x_fix = 1.75 * Vec2(std::cos(0.3), std::sin(0.3));
    CHECK((flow.map(tg.n_steps, x_fix) - x_fix).norm() == 0.0);
    CHECK(flow.max_det_error() < 1e-7);
    ++k;
  }
  REQUIRE(err[1] > 1e-13);
  CHECK(err[0] / err[1] > 11.0);
  CHECK(err[0] / err[1] < 22.0);
  REQUIRE(jerr[1] > 1e-13);
  CHECK(jerr[0] / jerr[1] > 11.0);
  CHECK(jerr[0] / jerr[1] < 22.0);
}

TEST_CASE("generic motion: rigid-zone reduction converges and guards hold") {
  const CutoffProfile cut;
  const double T = 0.6;

  // The flow map restricted to the rigid zone is the placement itself, an
  // exact oracle; interpolated inter-sample rates make the march second
  // order, which is what the composed maps need.
  std::array<double, 2> err{};
  int k = 0;
  for (const int steps : {12, 24}) {
    TimeGrid tg{T / steps, steps};
    const RigidMotionSeries motion = generic_motion(tg, 0.02, 0.05);
    const RigidMapSeries flow = RigidMapSeries::track(motion, cut, 2.0);
    const RigidState end = motion.state(tg.n_steps);

    double e = 0.0;
    for (const double r : {0.4, 0.45, 0.5}) {
      for (int j = 0; j < 8; ++j) {
        const double th = 2.0 * M_PI * j / 8.0;
        const Vec2 x0 = r * Vec2(std::cos(th), std::sin(th));
        const Vec2 exact = end.h + end.R() * x0;
        e = std::max(e, (flow.map(tg.n_steps, x0) - exact).norm());
        e = std::max(e, (flow.jacobian(tg.n_steps, x0) - end.R()).norm());
      }
    }
    err[k++] = e;
    CHECK(flow.max_det_error() < 1e-7);
  }
  REQUIRE(err[1] > 1e-13);
  CHECK(err[0] / err[1] > 3.0);
  CHECK(err[0] / err[1] < 5.5);

  TimeGrid tg{T / 12, 12};
  const RigidMotionSeries motion = generic_motion(tg, 0.02, 0.05);
  const RigidMapSeries flow = RigidMapSeries::track(motion, cut, 2.0);
  CHECK_THROWS_AS((void)flow.map(3, Vec2(0.2, 0.1)), GeometryError);
  CHECK_THROWS_AS((void)flow.map(3, Vec2(2.3, 0.0)), GeometryError);
  CHECK_THROWS_AS((void)flow.map(-1, Vec2(1.0, 0.0)), CompatibilityError);
  CHECK_THROWS_AS((void)flow.jacobian(99, Vec2(1.0, 0.0)), CompatibilityError);
}

TEST_CASE("both extensions at rest compose to the identity") {
  TimeGrid tg{0.05, 8};
  const FluidMapSeries def =
      extend_divergence_free(dsolver(), zero_traces(grid(), tg), tg, {});
  const RigidMapSeries flow =
      RigidMapSeries::track(generic_motion(tg, 0.0, 0.0), CutoffProfile{}, 2.0);

  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 2);
  const FemSpace fluid(mesh, 2, Support::FluidOnly);
  const ComposedMapSeries comp = compose_full_map(fluid, def, flow);

  CHECK(comp.interface_gap == 0.0);
  CHECK(comp.outer_identity_error == 0.0);
  for (int n = 0; n < tg.n_samples(); ++n) {
    double map_err = 0.0;
    for (int d = 0; d < fluid.n_dofs(); ++d) {
      const Vec2 y = fluid.dof_point(d);
      map_err = std::max(map_err, std::abs(comp.map[n][2 * d] - y[0]));
      map_err = std::max(map_err, std::abs(comp.map[n][2 * d + 1] - y[1]));
    }
    CHECK(map_err == 0.0);
    CHECK(comp.rate[n].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("composition with no deformation reproduces the rigid placement") {
  TimeGrid tg{0.05, 12};
  const FluidMapSeries def =
      extend_divergence_free(dsolver(), zero_traces(grid(), tg), tg, {});
  const RigidMotionSeries motion = generic_motion(tg, 0.02, 0.05);
  const RigidMapSeries flow =
      RigidMapSeries::track(motion, CutoffProfile{}, 2.0);

  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 3);
  const FemSpace fluid(mesh, 2, Support::FluidOnly);
  const ComposedMapSeries comp = compose_full_map(fluid, def, flow);

  CHECK(comp.outer_identity_error == 0.0);

  // Nodes whose trajectories provably stay inside the rigid zone follow the
  // closed-form placement exactly; |h| peaks near 0.012, hence the margin.
  double rigid_err = 0.0, rate_err = 0.0, far_err = 0.0;
  for (int n = 0; n < tg.n_samples(); ++n) {
    const RigidState st = comp.rigid[n];
    for (int d = 0; d < fluid.n_dofs(); ++d) {
      const Vec2 y = fluid.dof_point(d);
      const Vec2 X(comp.map[n][2 * d], comp.map[n][2 * d + 1]);
      const Vec2 Xt(comp.rate[n][2 * d], comp.rate[n][2 * d + 1]);
      if (y.norm() < 0.58) {
        rigid_err = std::max(rigid_err, (X - (st.h + st.R() * y)).norm());
        rate_err = std::max(
            rate_err,
            (Xt - (comp.h_dot[n] + comp.omega[n] * perp(X - st.h))).norm());
      }
      if (y.norm() > 1.7) far_err = std::max(far_err, (X - y).norm());
    }
  }
  CHECK(rigid_err < 1e-12);
  CHECK(rate_err < 1e-12);
  CHECK(far_err == 0.0);
  CHECK(comp.interface_gap < 5e-6);
}

TEST_CASE("composed sliding interface matches the analytic map") {
  TimeGrid tg{0.05, 12};
  const double beta_max = 0.04, a = 0.5, kappa = a * a;
  const FluidMapSeries def =
      extend_divergence_free(dsolver(), sliding_trace(grid(), tg, beta_max), tg, {});
  const RigidMotionSeries motion = generic_motion(tg, 0.02, 0.05);
  const RigidMapSeries flow =
      RigidMapSeries::track(motion, CutoffProfile{}, 2.0);

  // The exact full map on the interface circle: slide, then place rigidly.
  const auto exact = [&](int n, double phi) {
    const double th = slide_angle(phi, slide_arc(tg, beta_max, tg.time(n)), kappa);
    const RigidState st = motion.state(n);
    return Vec2(st.h + st.R() * (a * Vec2(std::cos(th), std::sin(th))));
  };

  std::array<double, 2> mid_err{};
  int k = 0;
  for (const int refinement : {2, 4}) {
    const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, refinement);
    const FemSpace fluid(mesh, 2, Support::FluidOnly);
    const ComposedMapSeries comp = compose_full_map(fluid, def, flow);

    double vertex_err = 0.0, e_mid = 0.0;
    for (int n = 0; n < tg.n_samples(); ++n) {
      for (const auto& te : fluid.trace(BoundaryTag::SolidBoundary)) {
        const Vec2 p0 = fluid.dof_point(te.dofs[0]);
        const Vec2 p1 = fluid.dof_point(te.dofs[1]);
        const double phi0 = std::atan2(p0[1], p0[0]);
        double dphi = std::atan2(p1[1], p1[0]) - phi0;
        if (dphi <= 0.0) dphi += 2.0 * M_PI;

        const Vec2 Xv(comp.map[n][2 * te.dofs[0]],
                      comp.map[n][2 * te.dofs[0] + 1]);
        vertex_err = std::max(vertex_err, (Xv - exact(n, phi0)).norm());
        const Vec2 Xm(comp.map[n][2 * te.dofs[2]],
                      comp.map[n][2 * te.dofs[2] + 1]);
        e_mid = std::max(e_mid, (Xm - exact(n, phi0 + 0.5 * dphi)).norm());
      }
    }
    CHECK(vertex_err < 1e-9);
    mid_err[k++] = e_mid;
  }
  // Midpoint nodes sit on the chord, one mesh-size-squared away from the
  // circle, so their composed values converge quadratically to the arc map.
  REQUIRE(mid_err[1] > 1e-12);
  CHECK(mid_err[0] / mid_err[1] >= 3.5);
  CHECK(mid_err[0] / mid_err[1] <= 4.6);
}

TEST_CASE("composed maps assemble into transform bundles") {
  const double beta_max = 0.04, horizon = 0.6;
  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 3);
  const FemSpace fluid(mesh, 2, Support::FluidOnly);

  // Chain-rule rates agree with central differences of the map at second
  // order in the sample spacing.
  std::array<double, 2> fd_err{};
  double rate_scale = 0.0;
  std::vector<ComposedMapSeries> comps;
  int k = 0;
  for (const int steps : {12, 24}) {
    TimeGrid tg{horizon / steps, steps};
    const FluidMapSeries def = extend_divergence_free(
        dsolver(), sliding_trace(grid(), tg, beta_max), tg, {});
    const RigidMotionSeries motion = generic_motion(tg, 0.02, 0.05);
    const RigidMapSeries flow =
        RigidMapSeries::track(motion, CutoffProfile{}, 2.0);
    comps.push_back(compose_full_map(fluid, def, flow));
    const ComposedMapSeries& comp = comps.back();

    double e = 0.0;
    for (int n = 1; n < tg.n_steps; ++n) {
      const VectorXd fd = (comp.map[n + 1] - comp.map[n - 1]) / (2.0 * tg.dt);
      e = std::max(e, (fd - comp.rate[n]).cwiseAbs().maxCoeff());
      rate_scale = std::max(rate_scale, comp.rate[n].cwiseAbs().maxCoeff());
    }
    fd_err[k++] = e;
  }
  CHECK(rate_scale > 1e-2);
  CHECK(fd_err[0] < 0.05 * rate_scale);
  CHECK(fd_err[0] / fd_err[1] > 3.0);
  CHECK(fd_err[0] / fd_err[1] < 5.5);

  // Nodal determinants are certified spectrally, but bundles sample the
  // quadratic interpolant at quadrature points, so pointwise determinants
  // carry the mesh-size-squared interpolation error while the mapped volume
  // stays that of the annulus.
  const ComposedMapSeries& comp = comps.front();
  TimeGrid tg{horizon / 12, 12};
  for (const int n : {0, 6, 12}) {
    const TransformBundle bundle =
        assemble_bundle(fluid, comp.map[n], comp.rate[n], comp.rigid[n],
                        comp.h_dot[n], comp.omega[n], tg.time(n));
    CHECK(bundle.max_det_err < 5e-2);
    double area = 0.0;
    for (size_t c = 0; c < bundle.vol.size(); ++c) {
      const int cell = fluid.cells()[c];
      const CellGeom geom = CellGeom::of(mesh, cell);
      for (int q = 0; q < TriQuadrature::n; ++q) {
        area += TriQuadrature::degree4().w[q] * std::abs(geom.detJ) *
                bundle.vol[c][q].det;
      }
    }
    CHECK(area == doctest::Approx(M_PI * (4.0 - 0.25)).epsilon(2e-4));
  }
}
