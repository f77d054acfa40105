#pragma once

#include <vector>

#include "swim/fem.hpp"
#include "swim/rigid_flow.hpp"
#include "swim/spectral.hpp"
#include "swim/time_grid.hpp"

namespace swim {

/// Nodal samples of the full fluid map X(y, t): the volume-preserving
/// interface extension followed by the cutoff rigid flow, with the chain-rule
/// rate alongside, ready for transform-bundle assembly on the fluid space.
struct ComposedMapSeries {
  const FemSpace* space = nullptr;  // quadratic, fluid support
  TimeGrid time;
  std::vector<RigidState> rigid;
  std::vector<Vec2> h_dot;
  VectorXd omega;
  Series map;   // 2 * n_dofs per sample
  Series rate;  // time derivative of the map, same layout

  /// Largest gap at interface nodes between the interpolated rigid flow and
  /// the exact rigid placement it reduces to there.
  double interface_gap = 0.0;
  /// Largest |X(y) - y| over outer-circle nodes (the wall never moves).
  double outer_identity_error = 0.0;
};

/// Composes the two extensions node by node.  Interface nodes use the exact
/// rigid placement of the interpolated deformation (the rigid flow is exactly
/// rigid there); interior nodes query the tracked flow at the deformed
/// position.  Rates follow the chain rule with the closed-form carrier
/// velocity.  Points leaving either chart raise GeometryError.
ComposedMapSeries compose_full_map(const FemSpace& fluid_p2,
                                   const FluidMapSeries& deformation,
                                   const RigidMapSeries& rigid);

}  // namespace swim
