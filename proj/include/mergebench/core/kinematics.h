#pragma once

#include "mergebench/core/types.h"

namespace mergebench {

// Kinematic bicycle, explicit Euler. Position advances with the pre-update
// speed, then heading and speed are updated; speed is floored at zero. The
// vehicle length stands in for the wheelbase. vx/vy follow the new heading
// and ax/ay are the finite difference of the velocity vector over dt.
// Controls are clipped to the actuation limits. Throws ValidationError on
// non-finite input or dt <= 0.
VehicleState step_bicycle(const VehicleState& state, Control u, double dt = kDt);

Control clip(Control u);

struct TrajectoryStep {
  VehicleState state;
  // Set when the position jumped by more than kTeleportDistance in one tick.
  bool teleport = false;
};

inline constexpr double kTeleportDistance = 5.0;

// Adopts the pose and speed of `next` (one tick ahead, global frame).
// Accelerations are recomputed by finite difference against `state` at kDt.
TrajectoryStep apply_trajectory_step(const VehicleState& state, const PlannedFrame& next);

}  // namespace mergebench
