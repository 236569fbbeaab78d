#pragma once

#include <filesystem>
#include <string>

#include "mergebench/scenario/scenario.h"

namespace mergebench {

// JSON layout, keys written in this order:
//   { "seed", "density", "road": { "lane_width", "merge_end_x", "main", "merge" },
//     "ego": vehicle, "main_vehicles": [vehicle...] }
// vehicle: { x, y, theta, vx, vy, ax, ay, length, width, label, lane }.
std::string scenario_to_json(const Scenario& s);

// Throws ParseError naming the line (for syntax errors) or the field path
// (for missing or mistyped keys), and ValidationError when the decoded
// scenario violates its invariants.
Scenario scenario_from_json(const std::string& text);

void save_scenario(const std::filesystem::path& path, const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace mergebench
