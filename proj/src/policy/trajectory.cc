#include "mergebench/policy/trajectory.h"

#include <cmath>

namespace mergebench {

PlannedTrajectory from_frame(const PlannedTrajectory& t, const Frame& f) {
  PlannedTrajectory out;
  for (int k = 0; k < kFutureFrames; ++k) out.frames[k] = from_frame(t.frames[k], f);
  return out;
}

PlannedTrajectory to_frame(const PlannedTrajectory& t, const Frame& f) {
  PlannedTrajectory out;
  for (int k = 0; k < kFutureFrames; ++k) out.frames[k] = to_frame(t.frames[k], f);
  return out;
}

bool finite(const PlannedTrajectory& t) {
  for (const PlannedFrame& p : t.frames) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta) || !std::isfinite(p.speed)) {
      return false;
    }
  }
  return true;
}

}  // namespace mergebench
