#pragma once

#include <array>

#include "mergebench/core/frame.h"
#include "mergebench/core/sample.h"
#include "mergebench/core/types.h"

namespace mergebench {

// Supervised output channels per future frame: x, y, theta, speed.
inline constexpr int kOutputChannels = 4;

// kFutureFrames frames at kDt spacing; frames[0] is one tick ahead.
struct PlannedTrajectory {
  std::array<PlannedFrame, kFutureFrames> frames{};

  friend bool operator==(const PlannedTrajectory&, const PlannedTrajectory&) = default;
};

PlannedTrajectory from_frame(const PlannedTrajectory& t, const Frame& f);
PlannedTrajectory to_frame(const PlannedTrajectory& t, const Frame& f);

bool finite(const PlannedTrajectory& t);

}  // namespace mergebench
