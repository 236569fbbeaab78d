#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mergebench/core/road.h"
#include "mergebench/core/types.h"

namespace mergebench {

enum class DensityClass { HighlyDense, MediumDense, LowerDense };

inline constexpr std::array<DensityClass, 3> kAllDensities = {DensityClass::HighlyDense, DensityClass::MediumDense,
                                                              DensityClass::LowerDense};

// "highly" | "medium" | "lower"
std::string_view to_string(DensityClass d);
DensityClass density_from_string(std::string_view s);

struct Scenario {
  RoadGeometry road;
  // Ordered front to back.
  std::vector<VehicleState> main_vehicles;
  VehicleState ego;
  DensityClass density = DensityClass::HighlyDense;
  std::uint64_t seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Minimum bumper-to-bumper gap between consecutive main-lane vehicles.
inline constexpr double kMinInitialGap = 0.3;

// Throws ValidationError when the road is invalid, main vehicles are out of
// order or overlap, or the ego is not on the merge lane before merge_end_x.
void validate(const Scenario& s);

// Per-class traffic distribution. Each scenario draws its own gap center
// normal(gap_mean, scene_gap_sigma); bumper gaps are normal(center, gap_sigma)
// truncated below at min_gap; speed = speed_per_gap * gap + normal(0, speed_sigma).
struct DensityParams {
  double gap_mean = 2.5;
  double gap_sigma = 0.8;
  double speed_per_gap = 0.6;
  double speed_sigma = 0.3;
  // Scenario-to-scenario spread of the gap center, so classes overlap mildly.
  double scene_gap_sigma = 0.45;
};

struct ScenarioParams {
  int min_vehicles = 8;
  int max_vehicles = 12;
  std::array<DensityParams, 3> density = {
      DensityParams{2.5, 0.8, 1.5 / 2.5, 0.3, 0.45},
      DensityParams{4.5, 1.0, 2.5 / 4.5, 0.35, 0.55},
      DensityParams{7.0, 1.3, 3.5 / 7.0, 0.4, 0.7},
  };
  // Offensive / Friendly / Long.
  std::array<double, 3> style_probs = {0.4, 0.4, 0.2};
  double min_gap = 0.5;
  double min_speed = 0.2;
  double ego_x = 30.0;
  double ego_speed = 3.0;
  // Where the ego sits along the platoon, as a fraction of its span from the
  // rear; drawn uniformly from this range.
  std::array<double, 2> ego_position_fraction = {0.3, 0.7};
  RoadLayout road;
};

const DensityParams& params_for(const ScenarioParams& p, DensityClass d);

// Deterministic in (seed, density, params). Throws ValidationError for
// infeasible params (non-positive gaps, empty count range, bad probabilities).
Scenario sample_scenario(std::uint64_t seed, DensityClass density, const ScenarioParams& params = {});

struct ScenarioFeatures {
  double avg_speed = 0.0;
  double avg_gap = 0.0;
};

// Mean main-lane speed and mean bumper gap between longitudinally consecutive
// main-lane vehicles. Throws ValidationError with fewer than two vehicles.
ScenarioFeatures scenario_features(const Scenario& s);

}  // namespace mergebench
