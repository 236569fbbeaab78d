#pragma once

#include <array>

#include "mergebench/core/types.h"

namespace mergebench {

// Corners of the vehicle footprint, counter-clockwise starting front-left.
std::array<Point2, 4> footprint(const VehicleState& s);

// Separating-axis test on the two oriented footprints. Touching edges count
// as overlap.
bool check_collision(const VehicleState& a, const VehicleState& b);

// Half-extent of the footprint projected on the unit direction (ux, uy).
double projected_half_extent(const VehicleState& s, double ux, double uy);

}  // namespace mergebench
