#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mergebench/eval/llm_client.h"
#include "mergebench/eval/prompt.h"
#include "mergebench/metrics/report.h"
#include "mergebench/policy/dataset.h"
#include "mergebench/policy/trainer.h"
#include "mergebench/scenario/gmm.h"
#include "mergebench/scenario/scenario.h"
#include "mergebench/sim/env_policy.h"

namespace mergebench {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitEvaluatorUnreachable = 4;

// Per-episode scenario seed, a pure function of (base, density, index).
std::uint64_t episode_seed(std::uint64_t base, DensityClass density, int index);

struct GenOptions {
  std::filesystem::path out;
  int count = 10;  // per density class
  std::vector<DensityClass> densities{kAllDensities.begin(), kAllDensities.end()};
  std::uint64_t seed = 0;
};
// Writes <out>/<Density>_<i>.json; returns the written paths in order.
std::vector<std::filesystem::path> cmd_gen(const GenOptions& opts);

struct FitGmmOptions {
  std::filesystem::path scenarios;  // directory of scenario JSON files
  std::filesystem::path out;
  int k = 3;
  int max_iter = 200;
  std::uint64_t seed = 0;
};
struct FitGmmResult {
  GmmFit fit;
  std::size_t scenarios = 0;
};
FitGmmResult cmd_fit_gmm(const FitGmmOptions& opts);

struct TrainCommandOptions {
  std::filesystem::path out;          // weights (.json selects the text twin)
  std::filesystem::path curve;        // optional per-epoch loss curve (JSON)
  int scenes = 12;                    // closed-loop scenes simulated for data
  int max_samples = 0;                // 0 keeps every extracted window
  int steps = 0;                      // 0 trains for `config.epochs` epochs
  TrainConfig config;
};
struct TrainCommandResult {
  TrainResult train;
  std::size_t samples = 0;
  WindowStats windows;
};
TrainCommandResult cmd_train(const TrainCommandOptions& opts);

enum class EvaluatorKind { Llm, Rubric, LlmWithFallback };
std::string_view to_string(EvaluatorKind k);
EvaluatorKind evaluator_from_string(std::string_view s);

struct RunOptions {
  std::filesystem::path out;
  // Empty: generate `episodes` scenarios per density. Otherwise a file path
  // or a glob whose last component may contain * and ?.
  std::string scenarios;
  std::vector<DensityClass> densities{DensityClass::HighlyDense};
  int episodes = 10;  // per density when generating
  std::uint64_t seed = 0;
  std::string planner = "gap_acceptance";
  EnvPolicySpec env;
  EvaluatorKind evaluator = EvaluatorKind::Rubric;
  DriveMode mode = DriveMode::Medium;
  PriorKnowledge prior;
  LlmEndpointConfig llm;
  int workers = 1;
  int timeout_ticks = 300;
  double planner_budget_ms = 50.0;
  bool save_logs = false;
  bool exclude_planner_faults = false;
};
struct RunResult {
  BenchmarkReport report;
  int exit_code = kExitOk;
  long evaluator_failures = 0;  // episodes left unscored
};
// Writes <out>/report.json, report.csv, density_table.md, episodes/*.json
// and, with save_logs, logs/episode_NNNNN.{csv,json}.
RunResult cmd_run(const RunOptions& opts);

struct ReportCommandOptions {
  // Run directories (reads <dir>/report.json) or report JSON files.
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path out;  // directory for planners.json / planners.md
  bool exclude_planner_faults = false;
};
std::vector<PlannerSummary> cmd_report(const ReportCommandOptions& opts);

}  // namespace mergebench
