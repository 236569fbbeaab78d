#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mergebench/core/road.h"
#include "mergebench/core/types.h"
#include "mergebench/policy/idm.h"
#include "mergebench/policy/trajectory.h"

namespace mergebench {

// What the ego planner sees at a tick: the pre-tick state of every vehicle.
struct ObsFrame {
  VehicleState ego;
  std::vector<Agent> others;
  const RoadGeometry* road = nullptr;
  int tick = 0;
};

// The merging policy under evaluation. Must return finite controls within
// the engine's per-tick budget; exceptions end the episode as a planner fault.
class EgoPlanner {
 public:
  virtual ~EgoPlanner() = default;
  virtual Control observe(const ObsFrame& obs) = 0;
  virtual std::string name() const = 0;
};

using PlannerFactory = std::function<std::unique_ptr<EgoPlanner>()>;

// Steering angle that drives a bicycle of `wheelbase` through `target`.
double pure_pursuit_steer(const VehicleState& s, Point2 target, double wheelbase);

struct GapAcceptanceConfig {
  // Bumper clearances required to the nearest main-lane vehicle ahead and behind.
  double front_gap = 1.5;
  double rear_gap = 1.0;
  // Extra rear clearance per m/s the follower closes on the ego.
  double rear_closing_time = 1.0;
  // Speed held while searching for a gap.
  double creep_speed = 1.0;
  double lookahead_min = 4.0;
  double lookahead_time = 1.5;
  // Acceleration changes by at most this rate (m/s^3) unless braking harder
  // than idm.b is needed.
  double max_jerk = 4.0;
  IdmParams idm{3.0, 1.0, 1.0, 1.5, 2.0, 4.0, 0.01, 0.0};
};

// Baseline ego: stay on the merge lane and creep until both clearances to the
// adjacent main-lane vehicles are acceptable, then commit and steer onto the
// main centerline with pure pursuit while following the new leader with IDM.
class GapAcceptancePlanner final : public EgoPlanner {
 public:
  explicit GapAcceptancePlanner(GapAcceptanceConfig cfg = {}) : cfg_(cfg) {}
  Control observe(const ObsFrame& obs) override;
  std::string name() const override { return "gap_acceptance"; }
  bool committed() const { return committed_; }

 private:
  GapAcceptanceConfig cfg_;
  bool committed_ = false;
  std::optional<double> last_accel_;
};

// Replays a fixed control sequence, holding the last entry afterwards, or
// evaluates a tick-indexed profile.
class ScriptedPlanner final : public EgoPlanner {
 public:
  using Profile = std::function<Control(const ObsFrame&)>;
  explicit ScriptedPlanner(std::vector<Control> controls, std::string name = "scripted");
  explicit ScriptedPlanner(Profile profile, std::string name = "scripted");
  Control observe(const ObsFrame& obs) override;
  std::string name() const override { return name_; }

 private:
  std::vector<Control> controls_;
  Profile profile_;
  std::string name_;
};

// Adapter for planners that emit a global-frame path: tracks the planned
// speed one tick ahead and steers toward a frame ~lookahead seconds out.
class TrajectoryFollower final : public EgoPlanner {
 public:
  using PathPlanner = std::function<PlannedTrajectory(const ObsFrame&)>;
  explicit TrajectoryFollower(PathPlanner planner, std::string name = "trajectory_follower", double lookahead = 1.0);
  Control observe(const ObsFrame& obs) override;
  std::string name() const override { return name_; }

 private:
  PathPlanner planner_;
  std::string name_;
  double lookahead_;
};

// Known planner names: "gap_acceptance", "brake" (full stop), "keep" (zero control).
// Throws ConfigError otherwise.
PlannerFactory planner_factory(const std::string& name, const GapAcceptanceConfig& cfg = {});

}  // namespace mergebench
