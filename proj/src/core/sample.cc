#include "mergebench/core/sample.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "mergebench/core/errors.h"

namespace mergebench {

const std::array<std::string_view, kVehicleChannels>& channel_names() {
  static const std::array<std::string_view, kVehicleChannels> names = {
      "x", "y", "theta", "vx", "vy", "ax", "ay", "accel_norm", "steer", "thw", "offset", "style", "length"};
  return names;
}

double style_code(StyleLabel label) {
  switch (label) {
    case StyleLabel::Offensive:
      return 1.0;
    case StyleLabel::Friendly:
      return 2.0;
    case StyleLabel::Long:
      return 3.0;
  }
  return 0.0;
}

double longitudinal_gap(const VehicleState& follower, const VehicleState& leader) {
  const Point2 rel = to_frame(Point2{leader.x, leader.y}, frame_of(follower));
  return rel.x - 0.5 * (follower.length + leader.length);
}

namespace {

const Agent* find_agent(const SceneSnapshot& scene, int id) {
  for (const Agent& a : scene) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

// For each window slot, the index into `history` to read a vehicle from.
// Slots before the vehicle's first appearance repeat its earliest frame.
std::array<int, kHistoryFrames> slot_indices(std::span<const SceneSnapshot> history, int id) {
  const int n = static_cast<int>(history.size());
  const int used = std::min(n, kHistoryFrames);
  const int first = n - used;
  int earliest = n - 1;
  for (int j = n - 1; j >= first; --j) {
    if (find_agent(history[j], id) != nullptr) {
      earliest = j;
    } else {
      break;
    }
  }
  std::array<int, kHistoryFrames> idx{};
  const int pad = kHistoryFrames - (n - earliest);
  for (int i = 0; i < kHistoryFrames; ++i) idx[i] = (i < pad) ? earliest : earliest + (i - pad);
  return idx;
}

double estimate_steer(const VehicleState& prev, const VehicleState& cur) {
  const double v = cur.speed();
  if (v < 0.1) return 0.0;
  const double yaw_rate = wrap_angle(cur.theta - prev.theta) / kDt;
  return std::atan(yaw_rate * cur.length / v);
}

double time_headway(const SceneSnapshot& scene, const Agent& self) {
  const double v = self.state.speed();
  const Agent* lead = find_leader(scene, self.id, 50.0);
  if (lead == nullptr || v < 0.1) return kMaxTimeHeadway;
  const double gap = std::max(0.0, longitudinal_gap(self.state, lead->state));
  return std::min(kMaxTimeHeadway, gap / v);
}

}  // namespace

const Agent* find_leader(const SceneSnapshot& scene, int self_id, double max_gap) {
  const Agent* self = find_agent(scene, self_id);
  if (self == nullptr) return nullptr;
  const Frame f = frame_of(self->state);
  const Agent* best = nullptr;
  double best_dx = std::numeric_limits<double>::infinity();
  for (const Agent& o : scene) {
    if (o.id == self_id || o.state.lane != self->state.lane) continue;
    const double dx = to_frame(Point2{o.state.x, o.state.y}, f).x;
    if (dx <= 0.0) continue;
    const double gap = dx - 0.5 * (self->state.length + o.state.length);
    if (gap > max_gap) continue;
    if (dx < best_dx) {
      best_dx = dx;
      best = &o;
    }
  }
  return best;
}

Sample build_sample(std::span<const SceneSnapshot> history, int target_id, const RoadGeometry& road) {
  if (history.empty()) throw LookupError("build_sample: empty history");
  const SceneSnapshot& anchor_scene = history.back();
  const Agent* target = find_agent(anchor_scene, target_id);
  if (target == nullptr) throw LookupError("build_sample: unknown target id " + std::to_string(target_id));

  Sample sample;
  sample.target_id = target_id;
  sample.label = target->state.label;
  sample.lane = target->state.lane;
  sample.length = target->state.length;
  sample.width = target->state.width;
  sample.frame = frame_of(target->state);
  const Frame& f = sample.frame;

  const auto tslots = slot_indices(history, target_id);
  std::array<const Agent*, kHistoryFrames> tstates{};
  for (int i = 0; i < kHistoryFrames; ++i) tstates[i] = find_agent(history[tslots[i]], target_id);

  for (int i = 0; i < kHistoryFrames; ++i) {
    const VehicleState& g = tstates[i]->state;
    const VehicleState l = to_frame(g, f);
    TargetFrameFeatures& feat = sample.target_history[i];
    feat[kChX] = l.x;
    feat[kChY] = l.y;
    feat[kChTheta] = l.theta;
    feat[kChVx] = l.vx;
    feat[kChVy] = l.vy;
    feat[kChAx] = l.ax;
    feat[kChAy] = l.ay;
    feat[kChAccelNorm] = std::hypot(l.ax, l.ay);
    // The first slot has no predecessor and reuses the next slot's estimate.
    const int cur = std::max(i, 1);
    feat[kChSteer] = estimate_steer(tstates[cur - 1]->state, tstates[cur]->state);
    feat[kChTimeHeadway] = time_headway(history[tslots[i]], *tstates[i]);
    feat[kChOffset] = lane_offset(road, g.lane, Point2{g.x, g.y});
    feat[kChStyle] = style_code(g.label);
    feat[kChLength] = g.length;
  }
  struct Candidate {
    double dist;
    double dx;
    double dy;
    const Agent* agent;
  };
  std::vector<Candidate> candidates;
  for (const Agent& o : anchor_scene) {
    if (o.id == target_id) continue;
    const Point2 rel = to_frame(Point2{o.state.x, o.state.y}, f);
    const double half_sum = 0.5 * (target->state.length + o.state.length);
    bool in_range = false;
    if (o.state.lane == target->state.lane) {
      in_range = rel.x > 0.0 && rel.x - half_sum <= kLeadingRange;
    } else {
      in_range = std::abs(rel.x) - half_sum <= kInteractionRange;
    }
    if (in_range) candidates.push_back({std::hypot(rel.x, rel.y), rel.x, rel.y, &o});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dist, a.dx, a.dy) < std::tie(b.dist, b.dx, b.dy);
  });
  if (candidates.size() > kMaxNeighbors) candidates.resize(kMaxNeighbors);

  for (const Candidate& c : candidates) {
    NeighborTrack track;
    track.id = c.agent->id;
    track.lane = c.agent->state.lane;
    track.length = c.agent->state.length;
    track.width = c.agent->state.width;
    const auto nslots = slot_indices(history, c.agent->id);
    for (int i = 0; i < kHistoryFrames; ++i) {
      const VehicleState l = to_frame(find_agent(history[nslots[i]], c.agent->id)->state, f);
      track.history[i] = {l.x, l.y, l.theta, l.vx, l.vy};
    }
    sample.neighbors.push_back(track);
  }

  for (int k = 0; k < kRoadPolylines; ++k) {
    const Polyline& line = k == 0 ? road.main_centerline : road.merge_centerline;
    const double s0 = project(line, Point2{target->state.x, target->state.y}).s;
    for (int j = 0; j < kRoadPoints; ++j) {
      const PolylinePose pose = point_at(line, s0 - kRoadLookBehind + kRoadPointSpacing * j);
      sample.road[k][j] = to_frame(pose.point, f);
    }
  }
  return sample;
}

}  // namespace mergebench
