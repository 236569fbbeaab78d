#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mergebench/sim/engine.h"

namespace mergebench {

// Fixed CSV header of the per-tick state table.
inline constexpr const char* kLogCsvHeader = "tick,vehicle_id,x,y,theta,vx,vy,ax,ay,lane";

// One row per vehicle per tick, in snapshot order.
std::string log_to_csv(const EpisodeLog& log);

// Everything not in the CSV: scenario, env policy, planner, config, controls,
// outcome and validity.
nlohmann::ordered_json log_sidecar(const EpisodeLog& log);

nlohmann::ordered_json outcome_to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json sim_config_to_json(const SimConfig& c);

// Writes <base>.csv and <base>.json atomically.
void save_log(const std::filesystem::path& base, const EpisodeLog& log);

// Reads the pair written by save_log. Throws ParseError naming the file and
// line on malformed input.
EpisodeLog load_log(const std::filesystem::path& base);

}  // namespace mergebench
