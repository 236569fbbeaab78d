#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace mergebench {

// Simulation step; everything runs at 10 Hz.
inline constexpr double kDt = 0.1;

// Vehicles longer than this are classed as long vehicles.
inline constexpr double kLongVehicleThreshold = 6.0;
inline constexpr double kMaxSpeed = 40.0;
inline constexpr double kMaxAccel = 8.0;
inline constexpr double kMaxSteer = 0.6;

inline constexpr double kShortLength = 4.7;
inline constexpr double kShortWidth = 1.9;
inline constexpr double kLongLength = 11.5;
inline constexpr double kLongWidth = 2.5;

enum class StyleLabel { Offensive, Friendly, Long };
enum class Lane { Main, Merge };

std::string_view to_string(StyleLabel label);
std::string_view to_string(Lane lane);
StyleLabel style_from_string(std::string_view s);
Lane lane_from_string(std::string_view s);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double length = kShortLength;
  double width = kShortWidth;
  StyleLabel label = StyleLabel::Friendly;
  Lane lane = Lane::Main;

  double speed() const { return std::hypot(vx, vy); }
  bool finite() const;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

// Throws ValidationError on non-finite values, bad dimensions, a style label
// inconsistent with the vehicle length, or a speed above kMaxSpeed.
void validate(const VehicleState& state);

// Vehicle with a stable identity inside one scene.
struct Agent {
  int id = 0;
  VehicleState state;

  friend bool operator==(const Agent&, const Agent&) = default;
};

// All agents at one tick.
using SceneSnapshot = std::vector<Agent>;

// Ego actuation. Clipped to |accel| <= kMaxAccel, |steer| <= kMaxSteer when applied.
struct Control {
  double accel = 0.0;
  double steer = 0.0;

  friend bool operator==(const Control&, const Control&) = default;
};

// One future tick of a planned trajectory.
struct PlannedFrame {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double speed = 0.0;

  friend bool operator==(const PlannedFrame&, const PlannedFrame&) = default;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace mergebench
