#include "mergebench/core/road.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mergebench/core/errors.h"

namespace mergebench {

RoadGeometry make_merge_road(const RoadLayout& layout) {
  RoadGeometry road;
  road.lane_width = layout.lane_width;
  road.merge_end_x = layout.merge_end_x;

  for (double x = 0.0; x < layout.main_length; x += layout.node_spacing) road.main_centerline.push_back({x, 0.0});
  road.main_centerline.push_back({layout.main_length, 0.0});

  const double merge_y = -layout.lane_width;
  for (double x = layout.merge_start_x; x < layout.merge_end_x; x += layout.node_spacing) {
    road.merge_centerline.push_back({x, merge_y});
  }
  road.merge_centerline.push_back({layout.merge_end_x, merge_y});
  road.merge_centerline.push_back({layout.merge_end_x + layout.taper_length, 0.0});
  return road;
}

namespace {

void validate_polyline(const Polyline& line, const char* name) {
  if (line.empty()) throw ValidationError(std::string("road polyline '") + name + "' is empty");
  for (size_t i = 0; i < line.size(); ++i) {
    if (!std::isfinite(line[i].x) || !std::isfinite(line[i].y)) {
      throw ValidationError(std::string("road polyline '") + name + "' has non-finite waypoints");
    }
    if (i > 0 && !(line[i].x > line[i - 1].x)) {
      throw ValidationError(std::string("road polyline '") + name + "' is not strictly increasing in x");
    }
  }
}

}  // namespace

void validate(const RoadGeometry& road) {
  validate_polyline(road.main_centerline, "main");
  validate_polyline(road.merge_centerline, "merge");
  if (!(road.lane_width > 0.0)) throw ValidationError("lane_width must be positive");
  if (road.merge_end_x < road.merge_centerline.front().x || road.merge_end_x > road.merge_centerline.back().x) {
    throw ValidationError("merge_end_x outside the merge lane x-range");
  }
}

double polyline_length(const Polyline& line) {
  double len = 0.0;
  for (size_t i = 1; i < line.size(); ++i) len += std::hypot(line[i].x - line[i - 1].x, line[i].y - line[i - 1].y);
  return len;
}

PolylineProjection project(const Polyline& line, Point2 p) {
  if (line.size() == 1) {
    return {std::hypot(p.x - line[0].x, p.y - line[0].y) * ((p.x >= line[0].x) ? 1.0 : -1.0), 0.0, 0.0};
  }
  PolylineProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  double s_start = 0.0;
  const size_t n_seg = line.size() - 1;
  for (size_t i = 0; i < n_seg; ++i) {
    const Point2 a = line[i];
    const Point2 b = line[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double seg_len = std::hypot(dx, dy);
    if (seg_len <= 0.0) continue;
    const double ux = dx / seg_len;
    const double uy = dy / seg_len;
    double t = (p.x - a.x) * ux + (p.y - a.y) * uy;
    // Only the outer segments extend past their ends.
    const double t_lo = (i == 0) ? -std::numeric_limits<double>::infinity() : 0.0;
    const double t_hi = (i + 1 == n_seg) ? std::numeric_limits<double>::infinity() : seg_len;
    t = std::clamp(t, t_lo, t_hi);
    const double fx = a.x + ux * t;
    const double fy = a.y + uy * t;
    const double d2 = (p.x - fx) * (p.x - fx) + (p.y - fy) * (p.y - fy);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.s = s_start + t;
      best.lateral = ux * (p.y - a.y) - uy * (p.x - a.x);
      best.heading = std::atan2(uy, ux);
    }
    s_start += seg_len;
  }
  return best;
}

PolylinePose point_at(const Polyline& line, double s) {
  if (line.size() == 1) return {line[0], 0.0};
  double s_start = 0.0;
  const size_t n_seg = line.size() - 1;
  for (size_t i = 0; i < n_seg; ++i) {
    const Point2 a = line[i];
    const Point2 b = line[i + 1];
    const double seg_len = std::hypot(b.x - a.x, b.y - a.y);
    const bool last = (i + 1 == n_seg);
    if (seg_len > 0.0 && (s <= s_start + seg_len || last)) {
      const double ux = (b.x - a.x) / seg_len;
      const double uy = (b.y - a.y) / seg_len;
      const double t = s - s_start;
      return {{a.x + ux * t, a.y + uy * t}, std::atan2(uy, ux)};
    }
    s_start += seg_len;
  }
  return {line.back(), 0.0};
}

const Polyline& centerline(const RoadGeometry& road, Lane lane) {
  return lane == Lane::Main ? road.main_centerline : road.merge_centerline;
}

double lane_offset(const RoadGeometry& road, Lane lane, Point2 p) {
  return project(centerline(road, lane), p).lateral;
}

}  // namespace mergebench
