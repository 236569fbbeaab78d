#include "mergebench/core/kinematics.h"

#include <algorithm>
#include <cmath>

#include "mergebench/core/errors.h"

namespace mergebench {

Control clip(Control u) {
  return {std::clamp(u.accel, -kMaxAccel, kMaxAccel), std::clamp(u.steer, -kMaxSteer, kMaxSteer)};
}

VehicleState step_bicycle(const VehicleState& state, Control u, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("step_bicycle: dt must be positive");
  if (!state.finite() || !std::isfinite(u.accel) || !std::isfinite(u.steer)) {
    throw ValidationError("step_bicycle: non-finite input");
  }
  u = clip(u);
  const double v = state.speed();
  VehicleState out = state;
  out.x = state.x + v * std::cos(state.theta) * dt;
  out.y = state.y + v * std::sin(state.theta) * dt;
  out.theta = state.theta + v * std::tan(u.steer) / state.length * dt;
  const double v_next = std::max(0.0, v + u.accel * dt);
  out.vx = v_next * std::cos(out.theta);
  out.vy = v_next * std::sin(out.theta);
  out.ax = (out.vx - state.vx) / dt;
  out.ay = (out.vy - state.vy) / dt;
  return out;
}

TrajectoryStep apply_trajectory_step(const VehicleState& state, const PlannedFrame& next) {
  TrajectoryStep step;
  VehicleState& out = step.state;
  out = state;
  out.x = next.x;
  out.y = next.y;
  out.theta = next.theta;
  out.vx = next.speed * std::cos(next.theta);
  out.vy = next.speed * std::sin(next.theta);
  out.ax = (out.vx - state.vx) / kDt;
  out.ay = (out.vy - state.vy) / kDt;
  step.teleport = std::hypot(next.x - state.x, next.y - state.y) > kTeleportDistance;
  return step;
}

}  // namespace mergebench
