#pragma once

#include <vector>

#include "mergebench/core/types.h"

namespace mergebench {

using Polyline = std::vector<Point2>;

struct RoadGeometry {
  Polyline main_centerline;
  Polyline merge_centerline;
  double lane_width = 3.5;
  // Last drivable x on the merge lane.
  double merge_end_x = 150.0;

  friend bool operator==(const RoadGeometry&, const RoadGeometry&) = default;
};

// Dimensions of the default single-ramp layout. The merge lane runs parallel
// to the main lane and tapers into it after merge_end_x.
struct RoadLayout {
  double main_length = 200.0;
  double lane_width = 3.5;
  double merge_start_x = 0.0;
  double merge_end_x = 150.0;
  double taper_length = 10.0;
  double node_spacing = 10.0;
};

RoadGeometry make_merge_road(const RoadLayout& layout = {});

// Throws ValidationError unless both polylines are non-empty with strictly
// increasing x, lane_width > 0, and merge_end_x lies within the merge x-range.
void validate(const RoadGeometry& road);

struct PolylineProjection {
  double s = 0.0;        // arc length of the foot point
  double lateral = 0.0;  // signed offset, positive to the left of travel
  double heading = 0.0;  // tangent direction at the foot point
};

// Nearest-segment projection. Beyond either end the first/last segment is
// extended, so s may be negative or exceed the polyline length.
PolylineProjection project(const Polyline& line, Point2 p);

struct PolylinePose {
  Point2 point;
  double heading = 0.0;
};

// Point at arc length s, extrapolating linearly past the ends.
PolylinePose point_at(const Polyline& line, double s);

double polyline_length(const Polyline& line);

const Polyline& centerline(const RoadGeometry& road, Lane lane);

// Signed lateral offset of p from the lane's centerline.
double lane_offset(const RoadGeometry& road, Lane lane, Point2 p);

}  // namespace mergebench
