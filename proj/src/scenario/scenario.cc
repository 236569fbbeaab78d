#include "mergebench/scenario/scenario.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "mergebench/core/errors.h"

namespace mergebench {

std::string_view to_string(DensityClass d) {
  switch (d) {
    case DensityClass::HighlyDense:
      return "highly";
    case DensityClass::MediumDense:
      return "medium";
    case DensityClass::LowerDense:
      return "lower";
  }
  return "highly";
}

DensityClass density_from_string(std::string_view s) {
  if (s == "highly" || s == "HighlyDense") return DensityClass::HighlyDense;
  if (s == "medium" || s == "MediumDense") return DensityClass::MediumDense;
  if (s == "lower" || s == "LowerDense") return DensityClass::LowerDense;
  throw ValidationError("unknown density class '" + std::string(s) + "'");
}

const DensityParams& params_for(const ScenarioParams& p, DensityClass d) {
  return p.density[static_cast<size_t>(d)];
}

void validate(const Scenario& s) {
  validate(s.road);
  for (size_t i = 0; i < s.main_vehicles.size(); ++i) {
    const VehicleState& v = s.main_vehicles[i];
    validate(v);
    if (v.lane != Lane::Main) throw ValidationError("main vehicle " + std::to_string(i) + " is not on the main lane");
    if (i > 0) {
      const VehicleState& front = s.main_vehicles[i - 1];
      const double gap = (front.x - v.x) - 0.5 * (front.length + v.length);
      if (!(gap > kMinInitialGap)) {
        throw ValidationError("main vehicles " + std::to_string(i - 1) + " and " + std::to_string(i) +
                              " are out of order or overlap");
      }
    }
  }
  validate(s.ego);
  if (s.ego.lane != Lane::Merge) throw ValidationError("ego must start on the merge lane");
  if (!(s.ego.x < s.road.merge_end_x)) throw ValidationError("ego must start before merge_end_x");
}

namespace {

void check_params(const ScenarioParams& p) {
  if (p.min_vehicles < 1 || p.max_vehicles < p.min_vehicles) throw ValidationError("invalid vehicle count range");
  for (const DensityParams& d : p.density) {
    if (!(d.gap_mean > 0.0) || d.gap_sigma < 0.0 || d.speed_sigma < 0.0 || d.scene_gap_sigma < 0.0) {
      throw ValidationError("density params need a positive mean gap and non-negative sigmas");
    }
  }
  if (!(p.min_gap > kMinInitialGap)) throw ValidationError("min_gap must exceed the initial overlap margin");
  const double total = std::accumulate(p.style_probs.begin(), p.style_probs.end(), 0.0);
  if (std::any_of(p.style_probs.begin(), p.style_probs.end(), [](double q) { return q < 0.0; }) || !(total > 0.0)) {
    throw ValidationError("style probabilities must be non-negative with a positive sum");
  }
  if (p.ego_position_fraction[0] > p.ego_position_fraction[1]) throw ValidationError("bad ego position range");
}

VehicleState make_vehicle(StyleLabel label) {
  VehicleState v;
  v.label = label;
  v.lane = Lane::Main;
  if (label == StyleLabel::Long) {
    v.length = kLongLength;
    v.width = kLongWidth;
  }
  return v;
}

}  // namespace

Scenario sample_scenario(std::uint64_t seed, DensityClass density, const ScenarioParams& params) {
  check_params(params);
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(density)};
  std::mt19937_64 rng(seq);
  const DensityParams& dp = params_for(params, density);

  Scenario s;
  s.seed = seed;
  s.density = density;
  s.road = make_merge_road(params.road);

  std::uniform_int_distribution<int> count(params.min_vehicles, params.max_vehicles);
  std::discrete_distribution<int> style(params.style_probs.begin(), params.style_probs.end());
  std::normal_distribution<double> gap_noise(0.0, 1.0);
  std::normal_distribution<double> speed_noise(0.0, 1.0);
  std::uniform_real_distribution<double> frac(params.ego_position_fraction[0], params.ego_position_fraction[1]);

  const int n = count(rng);
  const double center = dp.gap_mean + dp.scene_gap_sigma * gap_noise(rng);
  double x = 0.0;
  for (int i = 0; i < n; ++i) {
    VehicleState v = make_vehicle(static_cast<StyleLabel>(style(rng)));
    const double gap = std::max(params.min_gap, center + dp.gap_sigma * gap_noise(rng));
    const double speed =
        std::clamp(dp.speed_per_gap * gap + dp.speed_sigma * speed_noise(rng), params.min_speed, kMaxSpeed);
    if (i > 0) {
      const VehicleState& front = s.main_vehicles.back();
      x = front.x - 0.5 * (front.length + v.length) - gap;
    }
    v.x = x;
    v.vx = speed;
    s.main_vehicles.push_back(v);
  }

  const double front_x = s.main_vehicles.front().x;
  const double span = front_x - s.main_vehicles.back().x;
  const double shift = params.ego_x - (s.main_vehicles.back().x + frac(rng) * span);
  for (VehicleState& v : s.main_vehicles) v.x += shift;

  s.ego = make_vehicle(StyleLabel::Friendly);
  s.ego.lane = Lane::Merge;
  s.ego.x = params.ego_x;
  s.ego.y = point_at(s.road.merge_centerline, project(s.road.merge_centerline, {params.ego_x, 0.0}).s).point.y;
  s.ego.vx = params.ego_speed;
  return s;
}

ScenarioFeatures scenario_features(const Scenario& s) {
  if (s.main_vehicles.size() < 2) throw ValidationError("scenario_features: gap undefined with fewer than two vehicles");
  std::vector<const VehicleState*> order;
  for (const VehicleState& v : s.main_vehicles) order.push_back(&v);
  // Summing in road order keeps the result independent of storage order.
  std::sort(order.begin(), order.end(), [](const VehicleState* a, const VehicleState* b) { return a->x > b->x; });
  double speed_sum = order.front()->speed();
  double gap_sum = 0.0;
  for (size_t i = 1; i < order.size(); ++i) {
    speed_sum += order[i]->speed();
    gap_sum += (order[i - 1]->x - order[i]->x) - 0.5 * (order[i - 1]->length + order[i]->length);
  }
  return {speed_sum / static_cast<double>(s.main_vehicles.size()), gap_sum / static_cast<double>(order.size() - 1)};
}

}  // namespace mergebench
