#include "mergebench/scenario/scenario_io.h"

#include <algorithm>

#include <json.hpp>

#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"

namespace mergebench {

using Json = nlohmann::ordered_json;

namespace {

Json vehicle_to_json(const VehicleState& v) {
  Json j;
  j["x"] = v.x;
  j["y"] = v.y;
  j["theta"] = v.theta;
  j["vx"] = v.vx;
  j["vy"] = v.vy;
  j["ax"] = v.ax;
  j["ay"] = v.ay;
  j["length"] = v.length;
  j["width"] = v.width;
  j["label"] = std::string(to_string(v.label));
  j["lane"] = std::string(to_string(v.lane));
  return j;
}

Json polyline_to_json(const Polyline& line) {
  Json arr = Json::array();
  for (const Point2& p : line) arr.push_back({p.x, p.y});
  return arr;
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("scenario: '" + path + "' is not an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("scenario: missing key '" + (path.empty() ? key : path + "." + key) + "'");
  return *it;
}

double number(const Json& obj, const char* key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_number()) throw ParseError("scenario: '" + path + "." + key + "' must be a number");
  return v.get<double>();
}

std::string text(const Json& obj, const char* key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_string()) throw ParseError("scenario: '" + path + "." + key + "' must be a string");
  return v.get<std::string>();
}

VehicleState vehicle_from_json(const Json& j, const std::string& path) {
  VehicleState v;
  v.x = number(j, "x", path);
  v.y = number(j, "y", path);
  v.theta = number(j, "theta", path);
  v.vx = number(j, "vx", path);
  v.vy = number(j, "vy", path);
  v.ax = number(j, "ax", path);
  v.ay = number(j, "ay", path);
  v.length = number(j, "length", path);
  v.width = number(j, "width", path);
  try {
    v.label = style_from_string(text(j, "label", path));
    v.lane = lane_from_string(text(j, "lane", path));
  } catch (const ValidationError& e) {
    throw ParseError("scenario: '" + path + "': " + e.what());
  }
  return v;
}

Polyline polyline_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError("scenario: '" + path + "' must be an array of [x,y] pairs");
  Polyline line;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError("scenario: '" + path + "[" + std::to_string(i) + "]' must be an [x,y] pair");
    }
    line.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return line;
}

int line_of(const std::string& text, size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  Json j;
  j["seed"] = s.seed;
  j["density"] = std::string(to_string(s.density));
  Json road;
  road["lane_width"] = s.road.lane_width;
  road["merge_end_x"] = s.road.merge_end_x;
  road["main"] = polyline_to_json(s.road.main_centerline);
  road["merge"] = polyline_to_json(s.road.merge_centerline);
  j["road"] = road;
  j["ego"] = vehicle_to_json(s.ego);
  Json vehicles = Json::array();
  for (const VehicleState& v : s.main_vehicles) vehicles.push_back(vehicle_to_json(v));
  j["main_vehicles"] = vehicles;
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text_in) {
  Json j;
  try {
    j = Json::parse(text_in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("scenario: syntax error at line " + std::to_string(line_of(text_in, e.byte)) + ": " + e.what(),
                     text_in);
  }
  Scenario s;
  const Json& seed = field(j, "seed", "");
  if (!seed.is_number_integer() && !seed.is_number_unsigned()) throw ParseError("scenario: 'seed' must be an integer");
  s.seed = seed.get<std::uint64_t>();
  try {
    s.density = density_from_string(text(j, "density", ""));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("scenario: 'density': ") + e.what());
  }
  const Json& road = field(j, "road", "");
  s.road.lane_width = number(road, "lane_width", "road");
  s.road.merge_end_x = number(road, "merge_end_x", "road");
  s.road.main_centerline = polyline_from_json(field(road, "main", "road"), "road.main");
  s.road.merge_centerline = polyline_from_json(field(road, "merge", "road"), "road.merge");
  s.ego = vehicle_from_json(field(j, "ego", ""), "ego");
  const Json& vehicles = field(j, "main_vehicles", "");
  if (!vehicles.is_array()) throw ParseError("scenario: 'main_vehicles' must be an array");
  for (size_t i = 0; i < vehicles.size(); ++i) {
    s.main_vehicles.push_back(vehicle_from_json(vehicles[i], "main_vehicles[" + std::to_string(i) + "]"));
  }
  validate(s);
  return s;
}

void save_scenario(const std::filesystem::path& path, const Scenario& s) {
  write_file_atomic(path, scenario_to_json(s));
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.raw());
  }
}

}  // namespace mergebench
