#pragma once

#include <random>

#include "mergebench/core/sample.h"
#include "mergebench/policy/idm.h"
#include "mergebench/policy/trajectory.h"

namespace mergebench {

struct RulePolicyConfig {
  // Std-dev of a per-plan acceleration perturbation, m/s^2. Zero disables it.
  double accel_noise = 0.05;
  // Fraction of the remaining lateral error closed per tick.
  double lateral_rate = 0.1;
  // Friendly-labeled vehicles treat a merger alongside or ahead as a leader,
  // braking at most at their comfortable deceleration.
  bool yield_to_mergers = true;
  // When false the lateral target is always the lane center.
  bool lateral_behavior = true;
};

// Merge-side pressure in [0, 1]: 1 - clearance / kInteractionRange for the
// closest neighbor on another lane, 0 when none is in range.
double merge_pressure(const Sample& sample);

// Lateral offset target: offset_bias - lateral_gain * pressure while a merging
// vehicle is in range, otherwise the lane center.
double lateral_target(const Sample& sample, const IdmParams& p);

// Rolls IDM for kFutureFrames steps against the constant-speed projection of
// the nearest same-lane leader and tracks the lateral target with a
// first-order lag. Frames are in the sample's local frame.
PlannedTrajectory rule_policy_plan(const Sample& sample, const IdmParams& p, std::mt19937_64& rng,
                                   const RulePolicyConfig& cfg = {});

}  // namespace mergebench
