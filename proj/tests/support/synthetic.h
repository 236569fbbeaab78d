#pragma once

// Random but well-formed model inputs for property tests.

#include <algorithm>
#include <cmath>
#include <random>

#include "mergebench/policy/dataset.h"

namespace mergebench::testing {

inline Sample random_sample(std::mt19937_64& rng, int n_neighbors) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sample s;
  s.target_id = 1;
  s.label = static_cast<StyleLabel>(rng() % 3);
  for (int t = 0; t < kHistoryFrames; ++t) {
    auto& f = s.target_history[t];
    for (int c = 0; c < kVehicleChannels; ++c) f[c] = g(rng);
    f[kChX] = (t - kHistoryFrames + 1) * 0.3 + 0.05 * g(rng);
    f[kChY] = 0.1 * g(rng);
    f[kChStyle] = style_code(s.label);
    f[kChLength] = 4.7;
  }
  for (int i = 0; i < n_neighbors; ++i) {
    NeighborTrack nb;
    nb.id = i + 2;
    nb.lane = (rng() % 2) ? Lane::Main : Lane::Merge;
    const double x0 = 12.0 * u(rng);
    const double y0 = nb.lane == Lane::Main ? 0.2 * u(rng) : -3.5 + 0.2 * u(rng);
    for (int t = 0; t < kHistoryFrames; ++t) {
      nb.history[t] = {x0 + (t - kHistoryFrames + 1) * 0.25, y0, 0.05 * g(rng), 2.5 + 0.3 * g(rng), 0.1 * g(rng)};
    }
    s.neighbors.push_back(nb);
  }
  for (int p = 0; p < kRoadPolylines; ++p) {
    for (int j = 0; j < kRoadPoints; ++j) {
      s.road[p][j] = {-20.0 + 4.0 * j, p == 0 ? 0.05 * g(rng) : -3.5 + 0.05 * g(rng)};
    }
  }
  return s;
}

// Smooth constant-acceleration, constant-drift rollout starting at the origin.
inline PlannedTrajectory random_future(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  PlannedTrajectory t;
  const double v0 = 2.5 + 0.8 * g(rng);
  const double a = 0.3 * g(rng);
  const double drift = 0.1 * g(rng);
  for (int k = 0; k < kFutureFrames; ++k) {
    const double time = (k + 1) * 0.1;
    const double v = std::max(0.0, v0 + a * time);
    t.frames[k] = {v0 * time + 0.5 * a * time * time, drift * time, std::atan2(drift, std::max(v, 0.1)), v};
  }
  return t;
}

inline TrainingExample random_example(std::mt19937_64& rng, int n_neighbors) {
  TrainingExample ex;
  ex.sample = random_sample(rng, n_neighbors);
  ex.future = random_future(rng);
  ex.aux_future.push_back(ex.future);
  ex.aux_valid.push_back(true);
  for (int i = 0; i < n_neighbors; ++i) {
    ex.aux_future.push_back(random_future(rng));
    ex.aux_valid.push_back(i % 3 != 2);
  }
  return ex;
}

}  // namespace mergebench::testing
