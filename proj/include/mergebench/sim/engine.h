#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mergebench/core/types.h"
#include "mergebench/scenario/scenario.h"
#include "mergebench/sim/env_policy.h"
#include "mergebench/sim/planner.h"

namespace mergebench {

inline constexpr int kEgoId = 0;

struct SimConfig {
  int timeout_ticks = 300;
  std::uint64_t seed = 0;
  // Wall-clock budget for one ego planner call; 0 disables the check.
  double planner_budget_ms = 50.0;
  // Environment vehicles replan every this many ticks, following their last
  // plan in between.
  int replan_every = 1;
  // Check every pair instead of ego-vs-all plus consecutive main-lane pairs.
  bool full_pairwise_collisions = false;
  int merged_hold_ticks = 5;
  double merged_heading_tol = 0.1;
  int stagnation_ticks = 50;
  double stagnation_speed = 0.1;
  // Environment vehicles may stray this far past the lane edge.
  double lateral_margin = 0.5;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

enum class OutcomeKind { Merged, Collision, Timeout, Stagnation, PlannerFault };

// "merged" | "collision" | "timeout" | "stagnation" | "planner_fault"
std::string_view to_string(OutcomeKind k);
OutcomeKind outcome_from_string(std::string_view s);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  int tick = 0;
  // Merged: x of the first tick of the confirming hold.
  double at_x = 0.0;
  // Collision: the two vehicles involved; `vehicle_id` is the ego when it is
  // one of them.
  int vehicle_id = kEgoId;
  int other_id = -1;
  std::string detail;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct EpisodeLog {
  Scenario scenario;
  EnvPolicyKind env = EnvPolicyKind::RuleBased;
  std::string planner;
  SimConfig config;
  // snapshots[t] is the scene after tick t; snapshots[0] is the initial scene.
  // The ego has id kEgoId, main-lane vehicles 1..N in scenario order.
  std::vector<SceneSnapshot> snapshots;
  // controls[t] was applied to move from snapshots[t] to snapshots[t + 1].
  std::vector<Control> controls;
  Outcome outcome;
  // False when an environment vehicle jumped more than kTeleportDistance.
  bool valid = true;

  int ticks() const { return static_cast<int>(snapshots.size()) - 1; }
};

// Ego lane from its position: Main once its center is within half a lane of
// the main centerline.
Lane ego_lane(const RoadGeometry& road, const VehicleState& ego);

// Initial scene: ego first, then main-lane vehicles with ids 1..N.
SceneSnapshot initial_snapshot(const Scenario& s);

// Evaluates termination on the log so far (snapshots[0..tick]), with
// precedence Collision > Merged > Stagnation > Timeout. Collisions are found
// by the engine and passed in. Returns nullopt to continue.
std::optional<Outcome> check_termination(std::span<const SceneSnapshot> snapshots, const RoadGeometry& road, int tick,
                                         const SimConfig& cfg, const std::optional<Outcome>& collision = std::nullopt);

// Colliding pair at this snapshot under the configured pair set, if any.
std::optional<Outcome> find_collision(const SceneSnapshot& scene, const RoadGeometry& road, int tick,
                                      bool full_pairwise);

// Runs one closed-loop episode. Deterministic in (scenario.seed, cfg.seed)
// unless the planner budget trips.
EpisodeLog run_episode(const Scenario& scenario, EgoPlanner& ego, const EnvPolicy& env, const SimConfig& cfg = {});

}  // namespace mergebench
