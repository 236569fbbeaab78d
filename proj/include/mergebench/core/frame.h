#pragma once

#include "mergebench/core/types.h"

namespace mergebench {

// A local coordinate system expressed in the global frame.
struct Frame {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double origin_theta = 0.0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Frame centered on a vehicle with its x-axis along the heading.
Frame frame_of(const VehicleState& state);

// Global -> local: translate by -origin, rotate by -origin_theta. Vectors
// (velocity, acceleration) are rotated only; headings are shifted.
Point2 to_frame(Point2 p, const Frame& f);
VehicleState to_frame(const VehicleState& s, const Frame& f);
PlannedFrame to_frame(const PlannedFrame& p, const Frame& f);
Point2 rotate_to_frame(Point2 v, const Frame& f);

// Local -> global, the exact inverse of to_frame.
Point2 from_frame(Point2 p, const Frame& f);
VehicleState from_frame(const VehicleState& s, const Frame& f);
PlannedFrame from_frame(const PlannedFrame& p, const Frame& f);

// Composition: a frame given in local coordinates of `parent`, lifted to global.
Frame compose(const Frame& parent, const Frame& child);

}  // namespace mergebench
