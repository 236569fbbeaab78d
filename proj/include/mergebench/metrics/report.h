#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mergebench/eval/suggestions.h"
#include "mergebench/metrics/metrics.h"
#include "mergebench/scenario/scenario.h"

namespace mergebench {

// One evaluated episode as it appears in reports.
struct EpisodeRecord {
  int index = 0;
  std::uint64_t seed = 0;
  DensityClass density = DensityClass::HighlyDense;
  std::string planner;
  EnvPolicyKind env = EnvPolicyKind::RuleBased;
  EpisodeMetrics metrics;
  std::optional<EvalResult> eval;  // absent when evaluation failed without fallback

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct ReportOptions {
  // Drop planner faults from success-rate denominators.
  bool exclude_planner_faults = false;
};

inline constexpr int kScoreBins = 10;

// Counts and sums only, so reports over disjoint batches merge exactly on
// counts. Derived rates are computed on demand.
struct Tally {
  long episodes = 0;
  long merged = 0;
  long collisions = 0;
  long timeouts = 0;
  long stagnations = 0;
  long planner_faults = 0;
  long scored = 0;
  double score_sum = 0.0;

  void add(const EpisodeRecord& r);
  void merge(const Tally& o);
  double success_rate(const ReportOptions& opts = {}) const;
  double avg_score() const;  // 0 when nothing was scored

  friend bool operator==(const Tally&, const Tally&) = default;
};

struct BenchmarkReport {
  ReportOptions options;
  Tally total;
  // Bin i covers [i, i+1); a score of exactly 10 falls in the last bin.
  std::array<long, kScoreBins> score_histogram{};
  std::map<SuggestionId, long> suggestion_counts;
  std::map<DensityClass, Tally> per_density;
  std::vector<EpisodeRecord> episodes;  // ordered by index

  long suggestion_total() const;
};

// Throws ValidationError on an empty list.
BenchmarkReport aggregate(const std::vector<EpisodeRecord>& records, const ReportOptions& opts = {});

// Report over the union of two disjoint batches.
BenchmarkReport merge(const BenchmarkReport& a, const BenchmarkReport& b);

nlohmann::ordered_json episode_to_json(const EpisodeRecord& r);
EpisodeRecord episode_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json report_to_json(const BenchmarkReport& r);

// Fixed CSV header for per-episode rows.
inline constexpr const char* kReportCsvHeader =
    "index,seed,density,planner,env_policy,outcome,drive_mode,total_time,avg_speed,merging_point_x,avg_jerk,"
    "max_jerk,avg_gap,min_gap,others_avg_speed,score,source,suggestions";
std::string report_to_csv(const BenchmarkReport& r);

// Per-density table: density, episodes, success rate, average score.
std::string render_density_table(const BenchmarkReport& r);

// Single-episode table of metric rows with units, ending in the score.
// One row per planner (sorted by name): episodes, success rate, average score
// and per-suggestion frequencies recounted from the raw suggestion lists.
struct PlannerSummary {
  std::string planner;
  Tally tally;
  std::map<SuggestionId, long> suggestion_counts;
};
std::vector<PlannerSummary> summarize_by_planner(const std::vector<EpisodeRecord>& records);
nlohmann::ordered_json planner_summary_to_json(const std::vector<PlannerSummary>& rows,
                                               const ReportOptions& opts = {});
std::string render_planner_table(const std::vector<PlannerSummary>& rows, const ReportOptions& opts = {});

std::string render_metrics_table(const EpisodeMetrics& m, const std::optional<EvalResult>& eval);

}  // namespace mergebench
