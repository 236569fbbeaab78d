#include "mergebench/sim/engine.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "mergebench/core/collision.h"
#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"
#include "mergebench/core/kinematics.h"
#include "mergebench/core/sample.h"

namespace mergebench {

std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Merged:
      return "merged";
    case OutcomeKind::Collision:
      return "collision";
    case OutcomeKind::Timeout:
      return "timeout";
    case OutcomeKind::Stagnation:
      return "stagnation";
    case OutcomeKind::PlannerFault:
      return "planner_fault";
  }
  return "timeout";
}

OutcomeKind outcome_from_string(std::string_view s) {
  for (OutcomeKind k : {OutcomeKind::Merged, OutcomeKind::Collision, OutcomeKind::Timeout, OutcomeKind::Stagnation,
                        OutcomeKind::PlannerFault}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown outcome '" + std::string(s) + "'");
}

Lane ego_lane(const RoadGeometry& road, const VehicleState& ego) {
  return std::abs(lane_offset(road, Lane::Main, {ego.x, ego.y})) < 0.5 * road.lane_width ? Lane::Main : Lane::Merge;
}

SceneSnapshot initial_snapshot(const Scenario& s) {
  SceneSnapshot scene;
  scene.reserve(s.main_vehicles.size() + 1);
  VehicleState ego = s.ego;
  ego.lane = ego_lane(s.road, ego);
  scene.push_back({kEgoId, ego});
  for (std::size_t i = 0; i < s.main_vehicles.size(); ++i) scene.push_back({static_cast<int>(i) + 1, s.main_vehicles[i]});
  return scene;
}

namespace {

const VehicleState* find_state(const SceneSnapshot& scene, int id) {
  for (const Agent& a : scene) {
    if (a.id == id) return &a.state;
  }
  return nullptr;
}

bool in_main_band(const RoadGeometry& road, const VehicleState& ego, double heading_tol) {
  const PolylineProjection p = project(road.main_centerline, {ego.x, ego.y});
  return std::abs(p.lateral) < 0.25 * road.lane_width && std::abs(wrap_angle(ego.theta - p.heading)) < heading_tol;
}

Outcome collision_outcome(int tick, int a, int b) {
  Outcome o;
  o.kind = OutcomeKind::Collision;
  o.tick = tick;
  if (b == kEgoId) std::swap(a, b);
  o.vehicle_id = a;
  o.other_id = b;
  return o;
}

// Keeps an environment vehicle's body within the lane edge plus `margin`.
VehicleState clamp_lateral(const RoadGeometry& road, VehicleState s, double margin) {
  const PolylineProjection p = project(centerline(road, s.lane), {s.x, s.y});
  const double bound = 0.5 * road.lane_width - 0.5 * s.width + margin;
  const double clamped = std::clamp(p.lateral, -bound, bound);
  if (clamped != p.lateral) {
    const double shift = clamped - p.lateral;
    s.x += -std::sin(p.heading) * shift;
    s.y += std::cos(p.heading) * shift;
  }
  return s;
}

}  // namespace

std::optional<Outcome> find_collision(const SceneSnapshot& scene, const RoadGeometry& road, int tick,
                                      bool full_pairwise) {
  if (full_pairwise) {
    for (std::size_t i = 0; i < scene.size(); ++i) {
      for (std::size_t j = i + 1; j < scene.size(); ++j) {
        if (check_collision(scene[i].state, scene[j].state)) return collision_outcome(tick, scene[i].id, scene[j].id);
      }
    }
    return std::nullopt;
  }
  const VehicleState* ego = find_state(scene, kEgoId);
  if (ego != nullptr) {
    for (const Agent& a : scene) {
      if (a.id != kEgoId && check_collision(*ego, a.state)) return collision_outcome(tick, kEgoId, a.id);
    }
  }
  std::vector<std::pair<double, const Agent*>> main;
  for (const Agent& a : scene) {
    if (a.id != kEgoId && a.state.lane == Lane::Main) {
      main.emplace_back(project(road.main_centerline, {a.state.x, a.state.y}).s, &a);
    }
  }
  std::sort(main.begin(), main.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first < r.first : l.second->id < r.second->id;
  });
  for (std::size_t i = 1; i < main.size(); ++i) {
    if (check_collision(main[i - 1].second->state, main[i].second->state)) {
      return collision_outcome(tick, main[i - 1].second->id, main[i].second->id);
    }
  }
  return std::nullopt;
}

std::optional<Outcome> check_termination(std::span<const SceneSnapshot> snapshots, const RoadGeometry& road, int tick,
                                         const SimConfig& cfg, const std::optional<Outcome>& collision) {
  if (collision) return collision;
  if (snapshots.empty() || tick < 0 || tick >= static_cast<int>(snapshots.size())) {
    throw ValidationError("check_termination: tick outside the log");
  }
  const VehicleState* ego = find_state(snapshots[tick], kEgoId);
  if (ego == nullptr) throw LookupError("check_termination: ego missing at tick " + std::to_string(tick));

  const int hold = std::max(1, cfg.merged_hold_ticks);
  if (tick + 1 >= hold) {
    bool held = true;
    for (int t = tick - hold + 1; held && t <= tick; ++t) {
      const VehicleState* e = find_state(snapshots[t], kEgoId);
      held = e != nullptr && in_main_band(road, *e, cfg.merged_heading_tol);
    }
    if (held) {
      Outcome o;
      o.kind = OutcomeKind::Merged;
      o.tick = tick - hold + 1;
      o.at_x = find_state(snapshots[o.tick], kEgoId)->x;
      return o;
    }
  }

  int still = 0;
  for (int t = tick; t >= 1 && still < cfg.stagnation_ticks; --t) {
    const VehicleState* e = find_state(snapshots[t], kEgoId);
    if (e == nullptr || e->speed() >= cfg.stagnation_speed || ego_lane(road, *e) != Lane::Merge) break;
    ++still;
  }
  if (still >= cfg.stagnation_ticks) {
    Outcome o;
    o.kind = OutcomeKind::Stagnation;
    o.tick = tick;
    return o;
  }

  const bool past_merge_end = ego->x >= road.merge_end_x && !in_main_band(road, *ego, cfg.merged_heading_tol);
  if (tick >= cfg.timeout_ticks || past_merge_end) {
    Outcome o;
    o.kind = OutcomeKind::Timeout;
    o.tick = tick;
    o.detail = past_merge_end ? "reached end of merge lane" : "tick limit";
    return o;
  }
  return std::nullopt;
}

EpisodeLog run_episode(const Scenario& scenario, EgoPlanner& ego, const EnvPolicy& env, const SimConfig& cfg) {
  validate(scenario);
  if (cfg.timeout_ticks < 1 || cfg.replan_every < 1) throw ValidationError("timeout_ticks and replan_every must be >= 1");

  EpisodeLog log;
  log.scenario = scenario;
  log.env = env.kind();
  log.planner = ego.name();
  log.config = cfg;
  log.snapshots.reserve(cfg.timeout_ticks + 1);
  log.controls.reserve(cfg.timeout_ticks);
  log.snapshots.push_back(initial_snapshot(scenario));

  std::seed_seq seq{static_cast<std::uint32_t>(scenario.seed), static_cast<std::uint32_t>(scenario.seed >> 32),
                    static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32)};
  std::mt19937_64 rng(seq);
  const RoadGeometry& road = scenario.road;

  std::map<int, PlannedTrajectory> plans;
  for (int tick = 1;; ++tick) {
    const SceneSnapshot& prev = log.snapshots.back();
    const std::size_t n = log.snapshots.size();
    const std::span<const SceneSnapshot> history(log.snapshots.data() + (n - std::min<std::size_t>(n, kHistoryFrames)),
                                                 std::min<std::size_t>(n, kHistoryFrames));
    const int step = (tick - 1) % cfg.replan_every;

    SceneSnapshot next;
    next.reserve(prev.size());
    for (const Agent& a : prev) {
      if (a.id == kEgoId) continue;
      if (step == 0) {
        const Sample sample = build_sample(history, a.id, road);
        plans[a.id] = from_frame(env.plan(sample, rng), sample.frame);
      }
      const TrajectoryStep ts = apply_trajectory_step(a.state, plans[a.id].frames[step]);
      if (ts.teleport || !ts.state.finite()) log.valid = false;
      next.push_back({a.id, clamp_lateral(road, ts.state, cfg.lateral_margin)});
    }

    const VehicleState& ego_prev = *find_state(prev, kEgoId);
    ObsFrame obs{ego_prev, {}, &road, tick - 1};
    obs.others.reserve(prev.size());
    for (const Agent& a : prev) {
      if (a.id != kEgoId) obs.others.push_back(a);
    }
    Control u;
    try {
      const auto start = std::chrono::steady_clock::now();
      u = ego.observe(obs);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (!std::isfinite(u.accel) || !std::isfinite(u.steer)) throw PlannerFault("non-finite control");
      if (cfg.planner_budget_ms > 0.0 && ms > cfg.planner_budget_ms) {
        throw PlannerFault("planner exceeded its " + format_double(cfg.planner_budget_ms) + " ms budget");
      }
    } catch (const std::exception& e) {
      log.outcome.kind = OutcomeKind::PlannerFault;
      log.outcome.tick = tick;
      log.outcome.detail = e.what();
      return log;
    }
    VehicleState ego_next = step_bicycle(ego_prev, u);
    ego_next.lane = ego_lane(road, ego_next);
    next.insert(next.begin(), Agent{kEgoId, ego_next});

    log.controls.push_back(u);
    log.snapshots.push_back(std::move(next));
    const auto collision = find_collision(log.snapshots.back(), road, tick, cfg.full_pairwise_collisions);
    if (auto out = check_termination(log.snapshots, road, tick, cfg, collision)) {
      log.outcome = *out;
      return log;
    }
  }
}

}  // namespace mergebench
