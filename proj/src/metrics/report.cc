#include "mergebench/metrics/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"
#include "mergebench/sim/log_io.h"

namespace mergebench {

using Json = nlohmann::ordered_json;

void Tally::add(const EpisodeRecord& r) {
  ++episodes;
  switch (r.metrics.outcome.kind) {
    case OutcomeKind::Merged:
      ++merged;
      break;
    case OutcomeKind::Collision:
      ++collisions;
      break;
    case OutcomeKind::Timeout:
      ++timeouts;
      break;
    case OutcomeKind::Stagnation:
      ++stagnations;
      break;
    case OutcomeKind::PlannerFault:
      ++planner_faults;
      break;
  }
  if (r.eval) {
    ++scored;
    score_sum += r.eval->score;
  }
}

void Tally::merge(const Tally& o) {
  episodes += o.episodes;
  merged += o.merged;
  collisions += o.collisions;
  timeouts += o.timeouts;
  stagnations += o.stagnations;
  planner_faults += o.planner_faults;
  scored += o.scored;
  score_sum += o.score_sum;
}

double Tally::success_rate(const ReportOptions& opts) const {
  const long denom = opts.exclude_planner_faults ? episodes - planner_faults : episodes;
  return denom > 0 ? static_cast<double>(merged) / static_cast<double>(denom) : 0.0;
}

double Tally::avg_score() const { return scored > 0 ? score_sum / static_cast<double>(scored) : 0.0; }

long BenchmarkReport::suggestion_total() const {
  long n = 0;
  for (const auto& [id, c] : suggestion_counts) n += c;
  return n;
}

namespace {

void add_record(BenchmarkReport& rep, const EpisodeRecord& r) {
  rep.total.add(r);
  rep.per_density[r.density].add(r);
  if (r.eval) {
    const int bin = std::clamp(static_cast<int>(std::floor(r.eval->score)), 0, kScoreBins - 1);
    ++rep.score_histogram[bin];
    for (SuggestionId id : r.eval->suggestions) ++rep.suggestion_counts[id];
  }
  rep.episodes.push_back(r);
}

}  // namespace

BenchmarkReport aggregate(const std::vector<EpisodeRecord>& records, const ReportOptions& opts) {
  if (records.empty()) throw ValidationError("aggregate: no episodes");
  BenchmarkReport rep;
  rep.options = opts;
  std::vector<const EpisodeRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->index < b->index; });
  for (const EpisodeRecord* r : sorted) add_record(rep, *r);
  return rep;
}

BenchmarkReport merge(const BenchmarkReport& a, const BenchmarkReport& b) {
  BenchmarkReport out = a;
  out.total.merge(b.total);
  for (int i = 0; i < kScoreBins; ++i) out.score_histogram[i] += b.score_histogram[i];
  for (const auto& [id, c] : b.suggestion_counts) out.suggestion_counts[id] += c;
  for (const auto& [d, t] : b.per_density) out.per_density[d].merge(t);
  out.episodes.insert(out.episodes.end(), b.episodes.begin(), b.episodes.end());
  std::stable_sort(out.episodes.begin(), out.episodes.end(),
                   [](const EpisodeRecord& x, const EpisodeRecord& y) { return x.index < y.index; });
  return out;
}

namespace {

Json metrics_to_json(const EpisodeMetrics& m) {
  Json j;
  j["ticks"] = m.ticks;
  j["total_time"] = m.total_time;
  j["avg_speed"] = m.avg_speed;
  j["merging_point_x"] = m.merging_point_x ? Json(*m.merging_point_x) : Json(nullptr);
  j["avg_jerk"] = m.avg_jerk;
  j["max_jerk"] = m.max_jerk;
  j["avg_jerk_x"] = m.avg_jerk_x;
  j["max_jerk_x"] = m.max_jerk_x;
  j["avg_jerk_y"] = m.avg_jerk_y;
  j["max_jerk_y"] = m.max_jerk_y;
  j["avg_gap"] = m.avg_gap;
  j["min_gap"] = m.min_gap;
  j["others_avg_speed"] = m.others_avg_speed;
  j["outcome"] = outcome_to_json(m.outcome);
  j["drive_mode"] = std::string(to_string(m.drive_mode));
  return j;
}

EpisodeMetrics metrics_from_json(const Json& j) {
  EpisodeMetrics m;
  m.ticks = j.at("ticks").get<int>();
  m.total_time = j.at("total_time").get<double>();
  m.avg_speed = j.at("avg_speed").get<double>();
  if (!j.at("merging_point_x").is_null()) m.merging_point_x = j.at("merging_point_x").get<double>();
  m.avg_jerk = j.at("avg_jerk").get<double>();
  m.max_jerk = j.at("max_jerk").get<double>();
  m.avg_jerk_x = j.at("avg_jerk_x").get<double>();
  m.max_jerk_x = j.at("max_jerk_x").get<double>();
  m.avg_jerk_y = j.at("avg_jerk_y").get<double>();
  m.max_jerk_y = j.at("max_jerk_y").get<double>();
  m.avg_gap = j.at("avg_gap").get<double>();
  m.min_gap = j.at("min_gap").get<double>();
  m.others_avg_speed = j.at("others_avg_speed").get<double>();
  m.outcome = outcome_from_json(j.at("outcome"));
  m.drive_mode = drive_mode_from_string(j.at("drive_mode").get<std::string>());
  return m;
}

Json eval_to_json(const EvalResult& e) {
  Json j;
  j["score"] = e.score;
  j["source"] = std::string(to_string(e.source));
  j["score_clamped"] = e.score_clamped;
  j["analysis"] = e.analysis;
  Json s = Json::array();
  for (std::size_t i = 0; i < e.suggestions.size(); ++i) {
    Json item;
    item["id"] = std::string(to_string(e.suggestions[i]));
    item["text"] = i < e.suggestion_texts.size() ? e.suggestion_texts[i] : std::string(to_string(e.suggestions[i]));
    s.push_back(std::move(item));
  }
  j["suggestions"] = std::move(s);
  return j;
}

EvalResult eval_from_json(const Json& j) {
  EvalResult e;
  e.score = j.at("score").get<double>();
  e.source = eval_source_from_string(j.at("source").get<std::string>());
  e.score_clamped = j.at("score_clamped").get<bool>();
  e.analysis = j.at("analysis").get<std::string>();
  for (const auto& s : j.at("suggestions")) {
    e.suggestions.push_back(suggestion_from_string(s.at("id").get<std::string>()));
    e.suggestion_texts.push_back(s.at("text").get<std::string>());
  }
  return e;
}

Json tally_to_json(const Tally& t, const ReportOptions& opts) {
  Json j;
  j["episodes"] = t.episodes;
  j["merged"] = t.merged;
  j["collisions"] = t.collisions;
  j["timeouts"] = t.timeouts;
  j["stagnations"] = t.stagnations;
  j["planner_faults"] = t.planner_faults;
  j["scored"] = t.scored;
  j["score_sum"] = t.score_sum;
  j["success_rate"] = t.success_rate(opts);
  j["avg_score"] = t.avg_score();
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Json episode_to_json(const EpisodeRecord& r) {
  Json j;
  j["index"] = r.index;
  j["seed"] = r.seed;
  j["density"] = std::string(to_string(r.density));
  j["planner"] = r.planner;
  j["env_policy"] = std::string(to_string(r.env));
  j["metrics"] = metrics_to_json(r.metrics);
  j["eval"] = r.eval ? eval_to_json(*r.eval) : Json(nullptr);
  return j;
}

EpisodeRecord episode_from_json(const Json& j) {
  try {
    EpisodeRecord r;
    r.index = j.at("index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.density = density_from_string(j.at("density").get<std::string>());
    r.planner = j.at("planner").get<std::string>();
    r.env = env_policy_from_string(j.at("env_policy").get<std::string>());
    r.metrics = metrics_from_json(j.at("metrics"));
    if (!j.at("eval").is_null()) r.eval = eval_from_json(j.at("eval"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  }
}

Json report_to_json(const BenchmarkReport& r) {
  Json j;
  j["summary"] = tally_to_json(r.total, r.options);
  j["exclude_planner_faults"] = r.options.exclude_planner_faults;
  j["score_histogram"] = r.score_histogram;
  Json sug;
  for (SuggestionId id : kAllSuggestions) {
    const auto it = r.suggestion_counts.find(id);
    sug[std::string(to_string(id))] = it == r.suggestion_counts.end() ? 0 : it->second;
  }
  j["suggestion_counts"] = std::move(sug);
  j["suggestion_total"] = r.suggestion_total();
  Json dens = Json::array();
  for (const auto& [d, t] : r.per_density) {
    Json row = tally_to_json(t, r.options);
    row["density"] = std::string(to_string(d));
    dens.push_back(std::move(row));
  }
  j["per_density"] = std::move(dens);
  Json eps = Json::array();
  for (const EpisodeRecord& e : r.episodes) eps.push_back(episode_to_json(e));
  j["episodes"] = std::move(eps);
  return j;
}

std::string report_to_csv(const BenchmarkReport& r) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const EpisodeRecord& e : r.episodes) {
    const EpisodeMetrics& m = e.metrics;
    std::string sugg;
    if (e.eval) {
      for (std::size_t i = 0; i < e.eval->suggestions.size(); ++i) {
        if (i > 0) sugg += ";";
        sugg += to_string(e.eval->suggestions[i]);
      }
    }
    out += std::to_string(e.index) + "," + std::to_string(e.seed) + "," + std::string(to_string(e.density)) + "," +
           csv_field(e.planner) + "," + std::string(to_string(e.env)) + "," +
           std::string(to_string(m.outcome.kind)) + "," + std::string(to_string(m.drive_mode)) + "," +
           format_double(m.total_time) + "," + format_double(m.avg_speed) + "," +
           (m.merging_point_x ? format_double(*m.merging_point_x) : std::string()) + "," + format_double(m.avg_jerk) +
           "," + format_double(m.max_jerk) + "," + format_double(m.avg_gap) + "," + format_double(m.min_gap) + "," +
           format_double(m.others_avg_speed) + "," + (e.eval ? format_double(e.eval->score) : std::string()) + "," +
           (e.eval ? std::string(to_string(e.eval->source)) : std::string()) + "," + csv_field(sugg) + "\n";
  }
  return out;
}

std::string render_density_table(const BenchmarkReport& r) {
  std::string out = "| Density | Episodes | Success Rate | Average Score |\n|---|---|---|---|\n";
  auto row = [&](const std::string& name, const Tally& t) {
    out += "| " + name + " | " + std::to_string(t.episodes) + " | " + fixed(100.0 * t.success_rate(r.options), 0) +
           "% | " + fixed(t.avg_score(), 2) + " |\n";
  };
  for (const auto& [d, t] : r.per_density) row(std::string(to_string(d)), t);
  row("all", r.total);
  return out;
}

std::string render_metrics_table(const EpisodeMetrics& m, const std::optional<EvalResult>& eval) {
  std::string out = "| Metric | Value |\n|---|---|\n";
  auto row = [&](const std::string& k, const std::string& v) { out += "| " + k + " | " + v + " |\n"; };
  row("Total time (s)", fixed(m.total_time, 2));
  row("Average speed (m/s)", fixed(m.avg_speed, 2));
  row("Merging point (m)", m.merging_point_x ? fixed(*m.merging_point_x, 2) : std::string("-"));
  row("Average jerk (m/s^3)", fixed(m.avg_jerk, 2));
  row("Max jerk (m/s^3)", fixed(m.max_jerk, 2));
  row("Average gap (m)", fixed(m.avg_gap, 2));
  row("Minimum gap (m)", fixed(m.min_gap, 2));
  row("Others average speed (m/s)", fixed(m.others_avg_speed, 2));
  row("Outcome", std::string(to_string(m.outcome.kind)));
  row("Drive mode", std::string(to_string(m.drive_mode)));
  if (eval) row("Overall score", fixed(eval->score, 1));
  return out;
}

std::vector<PlannerSummary> summarize_by_planner(const std::vector<EpisodeRecord>& records) {
  std::map<std::string, PlannerSummary> by_name;
  for (const EpisodeRecord& e : records) {
    PlannerSummary& row = by_name[e.planner];
    row.planner = e.planner;
    row.tally.add(e);
    if (e.eval) {
      for (SuggestionId id : e.eval->suggestions) ++row.suggestion_counts[id];
    }
  }
  std::vector<PlannerSummary> out;
  for (auto& [name, row] : by_name) out.push_back(std::move(row));
  return out;
}

Json planner_summary_to_json(const std::vector<PlannerSummary>& rows, const ReportOptions& opts) {
  Json j = Json::array();
  for (const PlannerSummary& row : rows) {
    Json r = tally_to_json(row.tally, opts);
    r["planner"] = row.planner;
    Json sug;
    for (SuggestionId id : kAllSuggestions) {
      const auto it = row.suggestion_counts.find(id);
      sug[std::string(to_string(id))] = it == row.suggestion_counts.end() ? 0 : it->second;
    }
    r["suggestion_counts"] = std::move(sug);
    j.push_back(std::move(r));
  }
  return j;
}

std::string render_planner_table(const std::vector<PlannerSummary>& rows, const ReportOptions& opts) {
  std::string out = "| Planner | Episodes | Success Rate | Average Score";
  std::string rule = "|---|---|---|---";
  for (SuggestionId id : kAllSuggestions) {
    out += " | " + std::string(to_string(id));
    rule += "|---";
  }
  out += " |\n" + rule + "|\n";
  for (const PlannerSummary& row : rows) {
    out += "| " + row.planner + " | " + std::to_string(row.tally.episodes) + " | " +
           fixed(100.0 * row.tally.success_rate(opts), 0) + "% | " + fixed(row.tally.avg_score(), 2);
    for (SuggestionId id : kAllSuggestions) {
      const auto it = row.suggestion_counts.find(id);
      out += " | " + std::to_string(it == row.suggestion_counts.end() ? 0 : it->second);
    }
    out += " |\n";
  }
  return out;
}

}  // namespace mergebench
