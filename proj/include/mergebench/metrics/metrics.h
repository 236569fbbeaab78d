#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mergebench/sim/engine.h"

namespace mergebench {

enum class DriveMode { Hurry, Medium, Relax };

// "hurry" | "medium" | "relax"
std::string_view to_string(DriveMode m);
DriveMode drive_mode_from_string(std::string_view s);

// Gap reported for ticks without any other vehicle.
inline constexpr double kMaxReportedGap = 50.0;

struct EpisodeMetrics {
  int ticks = 0;
  double total_time = 0.0;  // s, ticks * 0.1
  double avg_speed = 0.0;   // m/s
  std::optional<double> merging_point_x;
  double avg_jerk = 0.0;  // m/s^3, from |a| differences
  double max_jerk = 0.0;
  // Diagnostics: jerk of each global acceleration component.
  double avg_jerk_x = 0.0, max_jerk_x = 0.0;
  double avg_jerk_y = 0.0, max_jerk_y = 0.0;
  double avg_gap = 0.0;  // m, to the nearest other vehicle
  double min_gap = 0.0;
  double others_avg_speed = 0.0;  // m/s, over all other vehicles and ticks
  Outcome outcome;
  DriveMode drive_mode = DriveMode::Medium;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

// Clearance between the two footprints: shortest distance between the
// rectangles, 0 when they touch or overlap. Equals center distance minus
// half-lengths for vehicles in line.
double footprint_gap(const VehicleState& a, const VehicleState& b);

// Single-pass fold over snapshots; memory does not grow with episode length.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(int ego_id = kEgoId) : ego_id_(ego_id) {}
  void add(const SceneSnapshot& scene);
  EpisodeMetrics finish(const Outcome& outcome, DriveMode mode) const;

 private:
  int ego_id_;
  long snapshots_ = 0;
  double speed_sum_ = 0.0;
  bool has_prev_ = false;
  double prev_a_ = 0.0, prev_ax_ = 0.0, prev_ay_ = 0.0;
  long jerk_n_ = 0;
  double jerk_sum_ = 0.0, jerk_max_ = 0.0;
  double jx_sum_ = 0.0, jx_max_ = 0.0, jy_sum_ = 0.0, jy_max_ = 0.0;
  double gap_sum_ = 0.0, gap_min_ = kMaxReportedGap;
  long others_n_ = 0;
  double others_speed_sum_ = 0.0;
};

// Throws ValidationError on an empty log.
EpisodeMetrics compute_metrics(const EpisodeLog& log, DriveMode mode);

}  // namespace mergebench
