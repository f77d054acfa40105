#pragma once

#include <vector>

#include "swim/geometry.hpp"

namespace swim {

/// Uniform time grid on [0, dt * n_steps] with n_steps + 1 samples.
struct TimeGrid {
  double dt = 0.0;
  int n_steps = 0;

  int n_samples() const { return n_steps + 1; }
  double time(int i) const { return dt * i; }
  double horizon() const { return dt * n_steps; }
};

using Series = std::vector<VectorXd>;

/// Cumulative trapezoidal integral of a sampled series; out[0] = 0.
inline Series cumtrapz(const Series& f, double dt) {
  Series out(f.size());
  if (f.empty()) return out;
  out[0] = VectorXd::Zero(f[0].size());
  for (std::size_t i = 1; i < f.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
  }
  return out;
}

inline std::vector<double> cumtrapz(const std::vector<double>& f, double dt) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
  }
  return out;
}

/// Trapezoidal quadrature weight of sample i on the grid.
inline double trapz_weight(const TimeGrid& grid, int i) {
  return (i == 0 || i == grid.n_steps) ? 0.5 * grid.dt : grid.dt;
}

}  // namespace swim
