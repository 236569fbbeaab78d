#include "mergebench/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mergebench/core/collision.h"
#include "mergebench/core/errors.h"

namespace mergebench {

std::string_view to_string(DriveMode m) {
  switch (m) {
    case DriveMode::Hurry:
      return "hurry";
    case DriveMode::Medium:
      return "medium";
    case DriveMode::Relax:
      return "relax";
  }
  return "medium";
}

DriveMode drive_mode_from_string(std::string_view s) {
  if (s == "hurry") return DriveMode::Hurry;
  if (s == "medium") return DriveMode::Medium;
  if (s == "relax") return DriveMode::Relax;
  throw ConfigError("unknown drive mode '" + std::string(s) + "' (expected hurry|medium|relax)");
}

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  const double t = len2 > 0.0 ? std::clamp(((p.x - a.x) * ex + (p.y - a.y) * ey) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(p.x - a.x - t * ex, p.y - a.y - t * ey);
}

}  // namespace

double footprint_gap(const VehicleState& a, const VehicleState& b) {
  if (check_collision(a, b)) return 0.0;
  // Disjoint convex polygons: the closest pair always involves a corner.
  const auto fa = footprint(a), fb = footprint(b);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(fa[i], fb[j], fb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(fb[i], fa[j], fa[(j + 1) % 4]));
    }
  }
  return best;
}

void MetricsAccumulator::add(const SceneSnapshot& scene) {
  const VehicleState* ego = nullptr;
  for (const Agent& a : scene) {
    if (a.id == ego_id_) ego = &a.state;
  }
  if (ego == nullptr) throw LookupError("metrics: ego missing from snapshot");

  ++snapshots_;
  speed_sum_ += ego->speed();

  const double a_norm = std::hypot(ego->ax, ego->ay);
  if (has_prev_) {
    const double j = std::abs(a_norm - prev_a_) / kDt;
    const double jx = std::abs(ego->ax - prev_ax_) / kDt;
    const double jy = std::abs(ego->ay - prev_ay_) / kDt;
    ++jerk_n_;
    jerk_sum_ += j;
    jerk_max_ = std::max(jerk_max_, j);
    jx_sum_ += jx;
    jx_max_ = std::max(jx_max_, jx);
    jy_sum_ += jy;
    jy_max_ = std::max(jy_max_, jy);
  }
  has_prev_ = true;
  prev_a_ = a_norm;
  prev_ax_ = ego->ax;
  prev_ay_ = ego->ay;

  double gap = kMaxReportedGap;
  for (const Agent& a : scene) {
    if (a.id == ego_id_) continue;
    gap = std::min(gap, footprint_gap(*ego, a.state));
    ++others_n_;
    others_speed_sum_ += a.state.speed();
  }
  gap_sum_ += gap;
  gap_min_ = std::min(gap_min_, gap);
}

EpisodeMetrics MetricsAccumulator::finish(const Outcome& outcome, DriveMode mode) const {
  if (snapshots_ == 0) throw ValidationError("metrics: empty log");
  EpisodeMetrics m;
  m.ticks = static_cast<int>(snapshots_ - 1);
  m.total_time = m.ticks * kDt;
  m.avg_speed = speed_sum_ / snapshots_;
  if (outcome.kind == OutcomeKind::Merged) m.merging_point_x = outcome.at_x;
  if (jerk_n_ > 0) {
    m.avg_jerk = jerk_sum_ / jerk_n_;
    m.avg_jerk_x = jx_sum_ / jerk_n_;
    m.avg_jerk_y = jy_sum_ / jerk_n_;
  }
  m.max_jerk = jerk_max_;
  m.max_jerk_x = jx_max_;
  m.max_jerk_y = jy_max_;
  m.avg_gap = gap_sum_ / snapshots_;
  m.min_gap = gap_min_;
  m.others_avg_speed = others_n_ > 0 ? others_speed_sum_ / others_n_ : 0.0;
  m.outcome = outcome;
  m.drive_mode = mode;
  return m;
}

EpisodeMetrics compute_metrics(const EpisodeLog& log, DriveMode mode) {
  if (log.snapshots.empty()) throw ValidationError("metrics: empty log");
  MetricsAccumulator acc;
  for (const SceneSnapshot& s : log.snapshots) acc.add(s);
  return acc.finish(log.outcome, mode);
}

}  // namespace mergebench
