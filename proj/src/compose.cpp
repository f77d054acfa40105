#include "swim/compose.hpp"

#include <cmath>
#include <vector>

namespace swim {

ComposedMapSeries compose_full_map(const FemSpace& fluid_p2,
                                   const FluidMapSeries& deformation,
                                   const RigidMapSeries& rigid) {
  if (fluid_p2.degree() != 2 || fluid_p2.support() != Support::FluidOnly) {
    throw CompatibilityError("composition expects the quadratic fluid space");
  }
  const TimeGrid& time = deformation.time;
  const TimeGrid& rt = rigid.time_grid();
  if (time.n_steps != rt.n_steps ||
      std::abs(time.dt - rt.dt) > 1e-12 * std::max(time.dt, rt.dt)) {
    throw CompatibilityError("extension series disagree on the time grid");
  }
  const AnnulusGrid& g = *deformation.grid;

  std::vector<char> on_interface(fluid_p2.n_dofs(), 0);
  for (int d : fluid_p2.boundary_dofs(BoundaryTag::SolidBoundary))
    on_interface[d] = 1;
  std::vector<char> on_outer(fluid_p2.n_dofs(), 0);
  for (int d : fluid_p2.boundary_dofs(BoundaryTag::OuterBoundary))
    on_outer[d] = 1;

  // Deformed positions confined to the cutoff plateau for the whole motion
  // follow the closed-form placement; |flow(x)| <= |x| + max |h| there.
  double max_h = 0.0;
  for (int n = 0; n < time.n_samples(); ++n) {
    max_h = std::max(max_h, rigid.motion().state(n).h.norm());
  }
  const double rigid_safe = rigid.cutoff().inner - max_h - 1e-9;

  ComposedMapSeries out;
  out.space = &fluid_p2;
  out.time = time;
  out.rigid.resize(time.n_samples());
  out.h_dot.resize(time.n_samples());
  out.omega.resize(time.n_samples());
  out.map.assign(time.n_samples(), VectorXd::Zero(2 * fluid_p2.n_dofs()));
  out.rate.assign(time.n_samples(), VectorXd::Zero(2 * fluid_p2.n_dofs()));

  for (int n = 0; n < time.n_samples(); ++n) {
    const RigidState state = rigid.motion().state(n);
    const Mat2 R = state.R();
    const Vec2 hd = rigid.motion().h_dot_sample(n);
    const double om = rigid.motion().omega_sample(n);
    out.rigid[n] = state;
    out.h_dot[n] = hd;
    out.omega[n] = om;

    const AnnulusInterpolant zx(g, deformation.displacement[n].x);
    const AnnulusInterpolant zy(g, deformation.displacement[n].y);
    const AnnulusInterpolant wx(g, deformation.velocity[n].x);
    const AnnulusInterpolant wy(g, deformation.velocity[n].y);
    const double t = time.time(n);

    for (int d = 0; d < fluid_p2.n_dofs(); ++d) {
      const Vec2 y = fluid_p2.dof_point(d);
      const double r = y.norm();
      double th = std::atan2(y[1], y[0]);
      if (th < 0.0) th += 2.0 * M_PI;

      const Vec2 zstar = y + Vec2(zx.eval(r, th), zy.eval(r, th));
      const Vec2 w(wx.eval(r, th), wy.eval(r, th));

      Vec2 X, Xt;
      if (on_interface[d] || zstar.norm() <= rigid_safe) {
        // The carrier flow is exactly rigid around the solid, so interface
        // nodes and provably confined interior nodes take the closed-form
        // placement; at the interface the interpolated flow serves as a
        // cross-check.
        X = state.h + R * zstar;
        Xt = hd + om * perp(X - state.h) + R * w;
        if (on_interface[d]) {
          out.interface_gap =
              std::max(out.interface_gap, (X - rigid.map(n, zstar)).norm());
        }
      } else {
        X = rigid.map(n, zstar);
        Xt = rigid.velocity(t, X) + rigid.jacobian(n, zstar) * w;
      }
      if (on_outer[d]) {
        out.outer_identity_error =
            std::max(out.outer_identity_error, (X - y).norm());
      }
      out.map[n][2 * d] = X[0];
      out.map[n][2 * d + 1] = X[1];
      out.rate[n][2 * d] = Xt[0];
      out.rate[n][2 * d + 1] = Xt[1];
    }
  }
  return out;
}

}  // namespace swim
