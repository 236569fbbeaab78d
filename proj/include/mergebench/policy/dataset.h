#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "mergebench/core/sample.h"
#include "mergebench/policy/trajectory.h"

namespace mergebench {

inline constexpr int kWindowFrames = kHistoryFrames + kFutureFrames;  // 50

// One supervised window: the model input plus the 40-frame futures of the
// target and of every neighbor row, all in the sample's local frame.
struct TrainingExample {
  Sample sample;
  PlannedTrajectory future;
  // Row order matches the model's vehicle rows: target first, then neighbors.
  std::vector<PlannedTrajectory> aux_future;
  // False for rows whose vehicle leaves the scene inside the horizon.
  std::vector<bool> aux_valid;
};

// Dense-traffic window filters, applied at the anchor (last input) frame.
struct WindowFilter {
  double max_leader_gap = 10.0;  // m, same-lane leader must exist within this gap
  double min_speed = 1.0;        // m/s, target and leader
  double max_speed = 5.0;
  // Require at least one vehicle on another lane within the interaction range.
  bool require_interaction = true;
};

struct WindowStats {
  std::size_t candidates = 0;
  std::size_t kept = 0;
};

// True when the sample's anchor frame passes `filter` the way training windows
// do: a main-lane target, a same-lane leader within max_leader_gap, both
// speeds in band and, if required, a neighbor on another lane.
bool within_filter(const Sample& s, const WindowFilter& filter);

// Slides a 50-frame window (stride 1 by default) over a scene log and emits
// one example per main-lane vehicle and window that passes the filter. A log
// of n snapshots yields at most n - 49 windows per vehicle.
std::vector<TrainingExample> extract_windows(std::span<const SceneSnapshot> log, const RoadGeometry& road,
                                             const WindowFilter& filter = {}, int stride = 1,
                                             WindowStats* stats = nullptr);

struct DatasetOptions {
  WindowFilter filter;
  int stride = 1;
  int max_ticks = 300;
};

struct Dataset {
  std::vector<TrainingExample> examples;
  std::size_t scenes = 0;
  WindowStats stats;
};

// Runs n_scenes closed-loop episodes with the rule-based environment and the
// gap-acceptance ego, cycling density classes, and collects filtered windows.
// May return fewer examples than windows considered; counts are in stats.
Dataset generate_dataset(int n_scenes, std::mt19937_64& rng, const DatasetOptions& opts = {});

}  // namespace mergebench
