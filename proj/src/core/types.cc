#include "mergebench/core/types.h"

#include <numbers>

#include "mergebench/core/errors.h"

namespace mergebench {

std::string_view to_string(StyleLabel label) {
  switch (label) {
    case StyleLabel::Offensive:
      return "offensive";
    case StyleLabel::Friendly:
      return "friendly";
    case StyleLabel::Long:
      return "long";
  }
  return "friendly";
}

std::string_view to_string(Lane lane) { return lane == Lane::Main ? "main" : "merge"; }

StyleLabel style_from_string(std::string_view s) {
  if (s == "offensive") return StyleLabel::Offensive;
  if (s == "friendly") return StyleLabel::Friendly;
  if (s == "long") return StyleLabel::Long;
  throw ValidationError("unknown style label '" + std::string(s) + "'");
}

Lane lane_from_string(std::string_view s) {
  if (s == "main") return Lane::Main;
  if (s == "merge") return Lane::Merge;
  throw ValidationError("unknown lane '" + std::string(s) + "'");
}

bool VehicleState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) && std::isfinite(vx) &&
         std::isfinite(vy) && std::isfinite(ax) && std::isfinite(ay) && std::isfinite(length) &&
         std::isfinite(width);
}

void validate(const VehicleState& s) {
  if (!s.finite()) throw ValidationError("vehicle state has non-finite fields");
  if (s.length <= 0.0 || s.width <= 0.0) throw ValidationError("vehicle dimensions must be positive");
  const bool is_long = s.length > kLongVehicleThreshold;
  if ((s.label == StyleLabel::Long) != is_long) {
    throw ValidationError("style label '" + std::string(to_string(s.label)) +
                          "' inconsistent with length " + std::to_string(s.length));
  }
  if (s.speed() > kMaxSpeed) throw ValidationError("vehicle speed exceeds sanity bound");
}

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

}  // namespace mergebench
