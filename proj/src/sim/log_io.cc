#include "mergebench/sim/log_io.h"

#include <charconv>
#include <map>
#include <sstream>

#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"
#include "mergebench/scenario/scenario_io.h"

namespace mergebench {

using Json = nlohmann::ordered_json;

std::string log_to_csv(const EpisodeLog& log) {
  std::string out = std::string(kLogCsvHeader) + "\n";
  for (std::size_t t = 0; t < log.snapshots.size(); ++t) {
    for (const Agent& a : log.snapshots[t]) {
      const VehicleState& s = a.state;
      out += std::to_string(t) + "," + std::to_string(a.id);
      for (double v : {s.x, s.y, s.theta, s.vx, s.vy, s.ax, s.ay}) out += "," + format_double(v);
      out += ",";
      out += to_string(s.lane);
      out += "\n";
    }
  }
  return out;
}

Json outcome_to_json(const Outcome& o) {
  Json j;
  j["kind"] = std::string(to_string(o.kind));
  j["tick"] = o.tick;
  if (o.kind == OutcomeKind::Merged) j["at_x"] = o.at_x;
  if (o.kind == OutcomeKind::Collision) {
    j["vehicle_id"] = o.vehicle_id;
    j["other_id"] = o.other_id;
  }
  if (!o.detail.empty()) j["detail"] = o.detail;
  return j;
}

Outcome outcome_from_json(const Json& j) {
  Outcome o;
  o.kind = outcome_from_string(j.at("kind").get<std::string>());
  o.tick = j.at("tick").get<int>();
  o.at_x = j.value("at_x", 0.0);
  o.vehicle_id = j.value("vehicle_id", kEgoId);
  o.other_id = j.value("other_id", -1);
  o.detail = j.value("detail", std::string());
  return o;
}

Json sim_config_to_json(const SimConfig& c) {
  Json j;
  j["timeout_ticks"] = c.timeout_ticks;
  j["seed"] = c.seed;
  j["planner_budget_ms"] = c.planner_budget_ms;
  j["replan_every"] = c.replan_every;
  j["full_pairwise_collisions"] = c.full_pairwise_collisions;
  j["merged_hold_ticks"] = c.merged_hold_ticks;
  j["merged_heading_tol"] = c.merged_heading_tol;
  j["stagnation_ticks"] = c.stagnation_ticks;
  j["stagnation_speed"] = c.stagnation_speed;
  j["lateral_margin"] = c.lateral_margin;
  return j;
}

namespace {

SimConfig sim_config_from_json(const Json& j) {
  SimConfig c;
  c.timeout_ticks = j.at("timeout_ticks").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.planner_budget_ms = j.at("planner_budget_ms").get<double>();
  c.replan_every = j.at("replan_every").get<int>();
  c.full_pairwise_collisions = j.at("full_pairwise_collisions").get<bool>();
  c.merged_hold_ticks = j.at("merged_hold_ticks").get<int>();
  c.merged_heading_tol = j.at("merged_heading_tol").get<double>();
  c.stagnation_ticks = j.at("stagnation_ticks").get<int>();
  c.stagnation_speed = j.at("stagnation_speed").get<double>();
  c.lateral_margin = j.at("lateral_margin").get<double>();
  return c;
}

double parse_number(std::string_view field, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(where + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

Json log_sidecar(const EpisodeLog& log) {
  Json j;
  j["scenario"] = Json::parse(scenario_to_json(log.scenario));
  j["env_policy"] = std::string(to_string(log.env));
  j["planner"] = log.planner;
  j["config"] = sim_config_to_json(log.config);
  j["ticks"] = log.ticks();
  j["valid"] = log.valid;
  j["outcome"] = outcome_to_json(log.outcome);
  Json controls = Json::array();
  for (const Control& u : log.controls) controls.push_back(Json::array({u.accel, u.steer}));
  j["controls"] = std::move(controls);
  return j;
}

void save_log(const std::filesystem::path& base, const EpisodeLog& log) {
  std::filesystem::path csv = base, json = base;
  csv += ".csv";
  json += ".json";
  write_file_atomic(csv, log_to_csv(log));
  write_file_atomic(json, log_sidecar(log).dump(1) + "\n");
}

EpisodeLog load_log(const std::filesystem::path& base) {
  std::filesystem::path csv_path = base, json_path = base;
  csv_path += ".csv";
  json_path += ".json";
  EpisodeLog log;
  Json j;
  try {
    j = Json::parse(read_file(json_path));
    log.scenario = scenario_from_json(j.at("scenario").dump());
    log.env = env_policy_from_string(j.at("env_policy").get<std::string>());
    log.planner = j.at("planner").get<std::string>();
    log.config = sim_config_from_json(j.at("config"));
    log.valid = j.at("valid").get<bool>();
    log.outcome = outcome_from_json(j.at("outcome"));
    for (const auto& u : j.at("controls")) log.controls.push_back({u.at(0).get<double>(), u.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(json_path.string() + ": " + e.what());
  }

  // Dimensions and labels are static, so they come from the scenario.
  std::map<int, VehicleState> statics;
  for (const Agent& a : initial_snapshot(log.scenario)) statics[a.id] = a.state;

  std::istringstream in(read_file(csv_path));
  std::string line;
  std::getline(in, line);
  if (line != kLogCsvHeader) throw ParseError(csv_path.string() + ": unexpected header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = csv_path.string() + " line " + std::to_string(line_no);
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      f.push_back(rest.substr(0, pos));
    }
    f.push_back(rest);
    if (f.size() != 10) throw ParseError(where + ": expected 10 fields, got " + std::to_string(f.size()));
    const int tick = static_cast<int>(parse_number(f[0], where));
    const int id = static_cast<int>(parse_number(f[1], where));
    auto it = statics.find(id);
    if (it == statics.end()) throw ParseError(where + ": unknown vehicle id " + std::to_string(id));
    if (tick < 0 || tick > static_cast<int>(log.snapshots.size())) throw ParseError(where + ": ticks out of order");
    if (tick == static_cast<int>(log.snapshots.size())) log.snapshots.emplace_back();
    VehicleState s = it->second;
    s.x = parse_number(f[2], where);
    s.y = parse_number(f[3], where);
    s.theta = parse_number(f[4], where);
    s.vx = parse_number(f[5], where);
    s.vy = parse_number(f[6], where);
    s.ax = parse_number(f[7], where);
    s.ay = parse_number(f[8], where);
    try {
      s.lane = lane_from_string(f[9]);
    } catch (const Error&) {
      throw ParseError(where + ": bad lane '" + std::string(f[9]) + "'");
    }
    log.snapshots[tick].push_back({id, s});
  }
  if (log.snapshots.empty()) throw ParseError(csv_path.string() + ": no rows");
  return log;
}

}  // namespace mergebench
