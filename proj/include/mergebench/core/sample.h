#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "mergebench/core/frame.h"
#include "mergebench/core/road.h"
#include "mergebench/core/types.h"

namespace mergebench {

inline constexpr int kHistoryFrames = 10;
inline constexpr int kFutureFrames = 40;
inline constexpr int kMaxNeighbors = 15;
inline constexpr int kRoadPolylines = 2;
inline constexpr int kRoadPoints = 20;
inline constexpr double kRoadPointSpacing = 4.0;
inline constexpr double kRoadLookBehind = 20.0;

// Per-frame target channels. Neighbors carry only the first five.
enum Channel : int {
  kChX = 0,
  kChY,
  kChTheta,
  kChVx,
  kChVy,
  kChAx,
  kChAy,
  kChAccelNorm,
  kChSteer,
  kChTimeHeadway,
  kChOffset,
  kChStyle,
  kChLength,
  kVehicleChannels
};
inline constexpr int kNeighborChannels = 5;

// Channel names in layout order, as written into weight file headers.
const std::array<std::string_view, kVehicleChannels>& channel_names();

// Scalar code used for the style channel. Unlabeled vehicles encode as 0.
double style_code(StyleLabel label);

// Neighbor selection ranges, measured bumper to bumper along the target's heading.
inline constexpr double kLeadingRange = 10.0;
inline constexpr double kInteractionRange = 5.0;
// Time headway is capped here when there is no leader or the target is stopped.
inline constexpr double kMaxTimeHeadway = 10.0;

using TargetFrameFeatures = std::array<double, kVehicleChannels>;
using NeighborFrameFeatures = std::array<double, kNeighborChannels>;

struct NeighborTrack {
  int id = 0;
  Lane lane = Lane::Main;
  double length = kShortLength;
  double width = kShortWidth;
  std::array<NeighborFrameFeatures, kHistoryFrames> history{};

  friend bool operator==(const NeighborTrack&, const NeighborTrack&) = default;
};

// One model input record, expressed in the target's current frame. The last
// history frame of the target sits at the origin with zero heading.
struct Sample {
  int target_id = 0;
  StyleLabel label = StyleLabel::Friendly;
  Lane lane = Lane::Main;
  double length = kShortLength;
  double width = kShortWidth;
  // Target pose at the anchor tick, global frame.
  Frame frame;
  std::array<TargetFrameFeatures, kHistoryFrames> target_history{};
  // Nearest first, at most kMaxNeighbors.
  std::vector<NeighborTrack> neighbors;
  // [0] main centerline, [1] merge centerline, resampled around the target.
  std::array<std::array<Point2, kRoadPoints>, kRoadPolylines> road{};

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Builds the sample for `target_id` from a rolling scene history (oldest
// first, last entry is the anchor tick). Up to the last kHistoryFrames
// snapshots are used; shorter histories, or frames where a vehicle is absent,
// repeat the earliest available frame. Neighbors are vehicles within the
// leading range (same lane, ahead, gap <= 10 m) or the interaction range
// (other lane, longitudinal clearance <= 5 m). Throws LookupError when the
// target is missing from the anchor snapshot.
Sample build_sample(std::span<const SceneSnapshot> history, int target_id, const RoadGeometry& road);

// Bumper-to-bumper gap from `follower` to `leader` along the follower's heading.
double longitudinal_gap(const VehicleState& follower, const VehicleState& leader);

// Nearest same-lane vehicle ahead of `self` within max_gap, or nullptr.
const Agent* find_leader(const SceneSnapshot& scene, int self_id, double max_gap);

}  // namespace mergebench
