#include "mergebench/sim/planner.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mergebench/core/errors.h"
#include "mergebench/core/frame.h"
#include "mergebench/core/kinematics.h"

namespace mergebench {

double pure_pursuit_steer(const VehicleState& s, Point2 target, double wheelbase) {
  const Point2 local = to_frame(target, frame_of(s));
  const double ld = std::hypot(local.x, local.y);
  if (ld < 1e-6) return 0.0;
  const double alpha = std::atan2(local.y, local.x);
  return std::clamp(std::atan(2.0 * wheelbase * std::sin(alpha) / ld), -kMaxSteer, kMaxSteer);
}

namespace {

struct Neighbor {
  const VehicleState* state = nullptr;
  double clearance = std::numeric_limits<double>::infinity();
};

}  // namespace

Control GapAcceptancePlanner::observe(const ObsFrame& obs) {
  const RoadGeometry& road = *obs.road;
  const VehicleState& e = obs.ego;
  const Polyline& main = centerline(road, Lane::Main);
  const double s_e = project(main, {e.x, e.y}).s;
  const double offset = project(main, {e.x, e.y}).lateral;

  Neighbor ahead, behind;
  for (const Agent& a : obs.others) {
    if (a.state.lane != Lane::Main) continue;
    const double s = project(main, {a.state.x, a.state.y}).s;
    const double half = 0.5 * (e.length + a.state.length);
    if (s > s_e) {
      const double c = s - s_e - half;
      if (c < ahead.clearance) ahead = {&a.state, c};
    } else {
      const double c = s_e - s - half;
      if (c < behind.clearance) behind = {&a.state, c};
    }
  }
  const double v = e.speed();
  const double closing = behind.state != nullptr ? std::max(0.0, behind.state->speed() - v) : 0.0;
  const bool front_ok = ahead.clearance >= cfg_.front_gap;
  const bool rear_ok = behind.clearance >= cfg_.rear_gap + cfg_.rear_closing_time * closing;
  const bool on_merge_side = offset < -0.5 * road.lane_width;

  if (!committed_ && front_ok && rear_ok) committed_ = true;
  // Back out while still mostly on the merge lane if the gap collapsed.
  if (committed_ && on_merge_side && (ahead.clearance < 0.3 || behind.clearance < 0.3)) committed_ = false;

  const double lookahead = std::max(cfg_.lookahead_min, cfg_.lookahead_time * v);
  Point2 target;
  if (committed_) {
    const PolylinePose p = point_at(main, s_e + lookahead);
    target = p.point;
  } else {
    const Polyline& merge = centerline(road, Lane::Merge);
    const double s_m = project(merge, {e.x, e.y}).s;
    const PolylinePose p = point_at(merge, std::min(s_m + lookahead, project(merge, {road.merge_end_x, 0.0}).s));
    target = {std::max(p.point.x, e.x + 0.5 * lookahead), p.point.y};
  }

  double accel;
  if (committed_) {
    const double v_lead = ahead.state != nullptr ? ahead.state->speed() : 0.0;
    accel = idm_accel(v, v_lead, ahead.clearance, cfg_.idm);
  } else {
    IdmParams creep = cfg_.idm;
    creep.v0 = cfg_.creep_speed;
    const double wall_gap = road.merge_end_x - e.x - 0.5 * e.length;
    accel = idm_accel(v, 0.0, wall_gap, creep);
    // Above creep speed the IDM free-road term brakes at the emergency limit;
    // slow down comfortably while the wall still allows it.
    if (wall_gap > creep.s0 + v * v / (2.0 * creep.b)) accel = std::max(accel, -creep.b);
    // Do not run into a main-lane vehicle that is already cutting across.
    if (ahead.state != nullptr && std::abs(project(main, {ahead.state->x, ahead.state->y}).lateral - offset) <
                                      0.5 * (e.width + ahead.state->width)) {
      accel = std::min(accel, idm_accel(v, ahead.state->speed(), ahead.clearance, creep));
    }
  }
  if (accel >= -cfg_.idm.b) {
    const double prev = last_accel_.value_or(e.ax * std::cos(e.theta) + e.ay * std::sin(e.theta));
    const double step = cfg_.max_jerk * kDt;
    accel = std::clamp(accel, prev - step, prev + step);
  }
  last_accel_ = accel;
  return Control{accel, pure_pursuit_steer(e, target, e.length)};
}

ScriptedPlanner::ScriptedPlanner(std::vector<Control> controls, std::string name)
    : controls_(std::move(controls)), name_(std::move(name)) {
  if (controls_.empty()) throw ConfigError("scripted planner needs at least one control");
}

ScriptedPlanner::ScriptedPlanner(Profile profile, std::string name)
    : profile_(std::move(profile)), name_(std::move(name)) {}

Control ScriptedPlanner::observe(const ObsFrame& obs) {
  if (profile_) return profile_(obs);
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(obs.tick, 0)), controls_.size() - 1);
  return controls_[i];
}

TrajectoryFollower::TrajectoryFollower(PathPlanner planner, std::string name, double lookahead)
    : planner_(std::move(planner)), name_(std::move(name)), lookahead_(lookahead) {}

Control TrajectoryFollower::observe(const ObsFrame& obs) {
  const PlannedTrajectory plan = planner_(obs);
  if (!finite(plan)) throw PlannerFault(name_ + ": non-finite trajectory");
  const double accel = (plan.frames[0].speed - obs.ego.speed()) / kDt;
  const int k = std::clamp(static_cast<int>(std::lround(lookahead_ / kDt)) - 1, 0, kFutureFrames - 1);
  const PlannedFrame& f = plan.frames[k];
  return clip(Control{accel, pure_pursuit_steer(obs.ego, {f.x, f.y}, obs.ego.length)});
}

PlannerFactory planner_factory(const std::string& name, const GapAcceptanceConfig& cfg) {
  if (name == "gap_acceptance") return [cfg] { return std::make_unique<GapAcceptancePlanner>(cfg); };
  if (name == "brake") {
    return [] { return std::make_unique<ScriptedPlanner>(std::vector<Control>{{-3.0, 0.0}}, "brake"); };
  }
  if (name == "keep") {
    return [] { return std::make_unique<ScriptedPlanner>(std::vector<Control>{{0.0, 0.0}}, "keep"); };
  }
  throw ConfigError("unknown planner '" + name + "' (expected gap_acceptance|brake|keep)");
}

}  // namespace mergebench
