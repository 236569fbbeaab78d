#include "mergebench/policy/rule_policy.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mergebench {

namespace {

// Lane-aligned axes around the target, taken from the resampled centerline
// of the target's own lane at its projection point.
struct LaneAxes {
  double ex = 1.0, ey = 0.0;  // along the lane
  double nx = 0.0, ny = 1.0;  // to the left
  double phi = 0.0;
};

LaneAxes lane_axes(const Sample& s) {
  const auto& line = s.road[s.lane == Lane::Main ? 0 : 1];
  const int j = static_cast<int>(kRoadLookBehind / kRoadPointSpacing);
  LaneAxes a;
  a.phi = std::atan2(line[j + 1].y - line[j].y, line[j + 1].x - line[j].x);
  a.ex = std::cos(a.phi);
  a.ey = std::sin(a.phi);
  a.nx = -a.ey;
  a.ny = a.ex;
  return a;
}

struct Track {
  double s = 0.0;       // longitudinal position of the center along the lane
  double v = 0.0;       // speed along the lane
  double length = 0.0;
};

Track track_of(const NeighborTrack& n, const LaneAxes& ax) {
  const auto& f = n.history.back();
  return {f[kChX] * ax.ex + f[kChY] * ax.ey, f[kChVx] * ax.ex + f[kChVy] * ax.ey, n.length};
}

}  // namespace

double merge_pressure(const Sample& sample) {
  const LaneAxes ax = lane_axes(sample);
  double pressure = 0.0;
  for (const NeighborTrack& n : sample.neighbors) {
    if (n.lane == sample.lane) continue;
    const Track t = track_of(n, ax);
    const double clearance = std::max(0.0, std::abs(t.s) - 0.5 * (sample.length + t.length));
    pressure = std::max(pressure, 1.0 - clearance / kInteractionRange);
  }
  return std::clamp(pressure, 0.0, 1.0);
}

double lateral_target(const Sample& sample, const IdmParams& p) {
  const double pressure = merge_pressure(sample);
  if (pressure <= 0.0) return 0.0;
  return p.offset_bias - p.lateral_gain * pressure;
}

PlannedTrajectory rule_policy_plan(const Sample& sample, const IdmParams& p, std::mt19937_64& rng,
                                   const RulePolicyConfig& cfg) {
  const LaneAxes ax = lane_axes(sample);
  const auto& self = sample.target_history.back();
  const double d_start = self[kChOffset];
  const double d_target = cfg.lateral_behavior ? lateral_target(sample, p) : 0.0;

  const Track* leader = nullptr;
  double leader_gap = std::numeric_limits<double>::infinity();
  std::vector<Track> tracks;
  tracks.reserve(sample.neighbors.size());
  for (const NeighborTrack& n : sample.neighbors) tracks.push_back(track_of(n, ax));
  std::vector<const Track*> mergers;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Track& t = tracks[i];
    if (sample.neighbors[i].lane == sample.lane) {
      if (t.s <= 0.0) continue;
      const double gap = t.s - 0.5 * (sample.length + t.length);
      if (gap < leader_gap) {
        leader_gap = gap;
        leader = &t;
      }
    } else if (cfg.yield_to_mergers && sample.label == StyleLabel::Friendly && t.s >= 0.0) {
      mergers.push_back(&t);
    }
  }

  double noise = 0.0;
  if (cfg.accel_noise > 0.0) noise = std::normal_distribution<double>(0.0, cfg.accel_noise)(rng);

  PlannedTrajectory plan;
  double s = 0.0;
  double v = self[kChVx] * ax.ex + self[kChVy] * ax.ey;
  v = std::max(0.0, v);
  double d = d_start;
  for (int k = 0; k < kFutureFrames; ++k) {
    const double elapsed = k * kDt;
    double a = idm_accel(v, 0.0, std::numeric_limits<double>::infinity(), p);
    double s_limit = std::numeric_limits<double>::infinity();
    if (leader != nullptr) {
      const double lead_s = leader->s + leader->v * elapsed;
      const double half = 0.5 * (sample.length + leader->length);
      a = idm_accel(v, leader->v, lead_s - s - half, p);
      s_limit = lead_s + leader->v * kDt - half;
    }
    for (const Track* m : mergers) {
      const double m_s = m->s + m->v * elapsed;
      const double gap = m_s - s - 0.5 * (sample.length + m->length);
      a = std::min(a, std::max(idm_accel(v, m->v, gap, p), -p.b));
    }
    a = std::clamp(a + noise, -kMaxAccel, kMaxAccel);

    double v_next = std::clamp(v + a * kDt, 0.0, kMaxSpeed);
    double s_next = s + v_next * kDt;
    if (s_next > s_limit) {
      s_next = std::max(s, s_limit);
      v_next = (s_next - s) / kDt;
    }
    const double d_next = d_target + (d - d_target) * (1.0 - cfg.lateral_rate);

    const double ds = s_next - s;
    const double rel = ds > 1e-6 ? std::atan2(d_next - d, ds) : 0.0;
    const double lx = s_next * ax.ex + (d_next - d_start) * ax.nx;
    const double ly = s_next * ax.ey + (d_next - d_start) * ax.ny;
    plan.frames[k] = PlannedFrame{lx, ly, wrap_angle(ax.phi + rel), v_next};
    s = s_next;
    v = v_next;
    d = d_next;
  }
  return plan;
}

}  // namespace mergebench
