#include "mergebench/core/frame.h"

#include <cmath>

namespace mergebench {

Frame frame_of(const VehicleState& s) { return {s.x, s.y, s.theta}; }

Point2 rotate_to_frame(Point2 v, const Frame& f) {
  const double c = std::cos(f.origin_theta);
  const double s = std::sin(f.origin_theta);
  return {c * v.x + s * v.y, -s * v.x + c * v.y};
}

namespace {

Point2 rotate_from_frame(Point2 v, const Frame& f) {
  const double c = std::cos(f.origin_theta);
  const double s = std::sin(f.origin_theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace

Point2 to_frame(Point2 p, const Frame& f) {
  return rotate_to_frame({p.x - f.origin_x, p.y - f.origin_y}, f);
}

Point2 from_frame(Point2 p, const Frame& f) {
  const Point2 r = rotate_from_frame(p, f);
  return {r.x + f.origin_x, r.y + f.origin_y};
}

VehicleState to_frame(const VehicleState& s, const Frame& f) {
  VehicleState out = s;
  const Point2 p = to_frame(Point2{s.x, s.y}, f);
  const Point2 v = rotate_to_frame({s.vx, s.vy}, f);
  const Point2 a = rotate_to_frame({s.ax, s.ay}, f);
  out.x = p.x;
  out.y = p.y;
  out.vx = v.x;
  out.vy = v.y;
  out.ax = a.x;
  out.ay = a.y;
  out.theta = s.theta - f.origin_theta;
  return out;
}

VehicleState from_frame(const VehicleState& s, const Frame& f) {
  VehicleState out = s;
  const Point2 p = from_frame(Point2{s.x, s.y}, f);
  const Point2 v = rotate_from_frame({s.vx, s.vy}, f);
  const Point2 a = rotate_from_frame({s.ax, s.ay}, f);
  out.x = p.x;
  out.y = p.y;
  out.vx = v.x;
  out.vy = v.y;
  out.ax = a.x;
  out.ay = a.y;
  out.theta = s.theta + f.origin_theta;
  return out;
}

PlannedFrame to_frame(const PlannedFrame& p, const Frame& f) {
  const Point2 q = to_frame(Point2{p.x, p.y}, f);
  return {q.x, q.y, p.theta - f.origin_theta, p.speed};
}

PlannedFrame from_frame(const PlannedFrame& p, const Frame& f) {
  const Point2 q = from_frame(Point2{p.x, p.y}, f);
  return {q.x, q.y, p.theta + f.origin_theta, p.speed};
}

Frame compose(const Frame& parent, const Frame& child) {
  const Point2 o = from_frame(Point2{child.origin_x, child.origin_y}, parent);
  return {o.x, o.y, parent.origin_theta + child.origin_theta};
}

}  // namespace mergebench
