#include "mergebench/policy/dataset.h"

#include <cmath>

#include "mergebench/core/errors.h"
#include "mergebench/scenario/scenario.h"
#include "mergebench/sim/engine.h"

namespace mergebench {

namespace {

const VehicleState* find_state(const SceneSnapshot& scene, int id) {
  for (const Agent& a : scene) {
    if (a.id == id) return &a.state;
  }
  return nullptr;
}

bool in_band(double v, const WindowFilter& f) { return v >= f.min_speed && v <= f.max_speed; }

// Future of `id` over the 40 frames after `anchor`, in `frame`; false when
// the vehicle is missing from any of them.
bool future_of(std::span<const SceneSnapshot> log, int anchor, int id, const Frame& frame, PlannedTrajectory& out) {
  for (int k = 0; k < kFutureFrames; ++k) {
    const VehicleState* s = find_state(log[anchor + 1 + k], id);
    if (s == nullptr) return false;
    const VehicleState local = to_frame(*s, frame);
    out.frames[k] = PlannedFrame{local.x, local.y, local.theta, s->speed()};
  }
  return true;
}

}  // namespace

bool within_filter(const Sample& s, const WindowFilter& filter) {
  if (s.lane != Lane::Main) return false;
  const TargetFrameFeatures& t = s.target_history.back();
  if (!in_band(std::hypot(t[kChVx], t[kChVy]), filter)) return false;
  const NeighborTrack* leader = nullptr;
  bool interacting = false;
  for (const NeighborTrack& nb : s.neighbors) {
    interacting = interacting || nb.lane != s.lane;
    const NeighborFrameFeatures& n = nb.history.back();
    if (nb.lane != s.lane || n[0] <= 0.0 || n[0] - 0.5 * (s.length + nb.length) > filter.max_leader_gap) continue;
    if (leader == nullptr || n[0] < leader->history.back()[0]) leader = &nb;
  }
  if (leader == nullptr) return false;
  const NeighborFrameFeatures& l = leader->history.back();
  return in_band(std::hypot(l[3], l[4]), filter) && (interacting || !filter.require_interaction);
}

std::vector<TrainingExample> extract_windows(std::span<const SceneSnapshot> log, const RoadGeometry& road,
                                             const WindowFilter& filter, int stride, WindowStats* stats) {
  if (stride < 1) throw ValidationError("extract_windows: stride must be >= 1");
  std::vector<TrainingExample> out;
  WindowStats local;
  const int n = static_cast<int>(log.size());
  for (int start = 0; start + kWindowFrames <= n; start += stride) {
    const int anchor = start + kHistoryFrames - 1;
    const SceneSnapshot& scene = log[anchor];
    for (const Agent& a : scene) {
      if (a.state.lane != Lane::Main) continue;
      ++local.candidates;
      const Agent* leader = find_leader(scene, a.id, filter.max_leader_gap);
      if (leader == nullptr || !in_band(a.state.speed(), filter) || !in_band(leader->state.speed(), filter)) continue;

      TrainingExample ex;
      ex.sample = build_sample(log.subspan(start, kHistoryFrames), a.id, road);
      if (filter.require_interaction) {
        bool interacting = false;
        for (const NeighborTrack& nb : ex.sample.neighbors) interacting = interacting || nb.lane != ex.sample.lane;
        if (!interacting) continue;
      }
      if (!future_of(log, anchor, a.id, ex.sample.frame, ex.future)) continue;
      ex.aux_future.push_back(ex.future);
      ex.aux_valid.push_back(true);
      for (const NeighborTrack& nb : ex.sample.neighbors) {
        PlannedTrajectory t;
        const bool ok = future_of(log, anchor, nb.id, ex.sample.frame, t);
        ex.aux_future.push_back(ok ? t : PlannedTrajectory{});
        ex.aux_valid.push_back(ok);
      }
      out.push_back(std::move(ex));
      ++local.kept;
    }
  }
  if (stats != nullptr) {
    stats->candidates += local.candidates;
    stats->kept += local.kept;
  }
  return out;
}

Dataset generate_dataset(int n_scenes, std::mt19937_64& rng, const DatasetOptions& opts) {
  if (n_scenes < 1) throw ValidationError("generate_dataset: n_scenes must be >= 1");
  Dataset d;
  const RuleBasedEnv env;
  SimConfig cfg;
  cfg.timeout_ticks = opts.max_ticks;
  cfg.planner_budget_ms = 0.0;
  for (int i = 0; i < n_scenes; ++i) {
    const DensityClass density = kAllDensities[i % kAllDensities.size()];
    const Scenario scenario = sample_scenario(rng(), density);
    cfg.seed = rng();
    GapAcceptancePlanner ego;
    const EpisodeLog log = run_episode(scenario, ego, env, cfg);
    auto windows = extract_windows(log.snapshots, scenario.road, opts.filter, opts.stride, &d.stats);
    d.examples.insert(d.examples.end(), std::make_move_iterator(windows.begin()), std::make_move_iterator(windows.end()));
    ++d.scenes;
  }
  return d;
}

}  // namespace mergebench
