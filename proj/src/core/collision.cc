#include "mergebench/core/collision.h"

#include <cmath>

namespace mergebench {

std::array<Point2, 4> footprint(const VehicleState& s) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double hl = 0.5 * s.length;
  const double hw = 0.5 * s.width;
  auto corner = [&](double lx, double ly) { return Point2{s.x + c * lx - sn * ly, s.y + sn * lx + c * ly}; };
  return {corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)};
}

double projected_half_extent(const VehicleState& s, double ux, double uy) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  return 0.5 * s.length * std::abs(c * ux + sn * uy) + 0.5 * s.width * std::abs(-sn * ux + c * uy);
}

bool check_collision(const VehicleState& a, const VehicleState& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const std::array<Point2, 4> axes = {Point2{std::cos(a.theta), std::sin(a.theta)},
                                      Point2{-std::sin(a.theta), std::cos(a.theta)},
                                      Point2{std::cos(b.theta), std::sin(b.theta)},
                                      Point2{-std::sin(b.theta), std::cos(b.theta)}};
  for (const Point2& n : axes) {
    const double dist = std::abs(dx * n.x + dy * n.y);
    if (dist > projected_half_extent(a, n.x, n.y) + projected_half_extent(b, n.x, n.y)) return false;
  }
  return true;
}

}  // namespace mergebench
