#pragma once

#include <string>

#include "mergebench/metrics/metrics.h"

namespace mergebench {

// Reference values the evaluator judges against.
struct PriorKnowledge {
  double comfort_accel_max = 2.5;   // m/s^2, |a| considered comfortable
  double comfort_jerk_max = 2.0;    // m/s^3
  double speed_band_low = 0.8;      // x others' average speed
  double speed_band_high = 1.5;
  double safe_time_gap = 1.0;       // s
  double time_band_low = 5.0;       // s, total merge time considered efficient
  double time_band_high = 15.0;

  friend bool operator==(const PriorKnowledge&, const PriorKnowledge&) = default;
};

// Throws ValidationError unless all values are positive and bands ordered.
void validate(const PriorKnowledge& p);

// System message sent ahead of every prompt.
const std::string& system_prompt();

// Deterministic user prompt: metrics with units, main-lane traffic, prior
// knowledge, the drive mode (the only mode-dependent line), the three
// perspectives, the single-score instruction and the fenced-JSON contract.
std::string build_prompt(const EpisodeMetrics& m, const PriorKnowledge& p, DriveMode mode);

}  // namespace mergebench
