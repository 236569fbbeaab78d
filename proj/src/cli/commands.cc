#include "mergebench/cli/commands.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <regex>
#include <thread>

#include <json.hpp>

#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"
#include "mergebench/eval/rubric.h"
#include "mergebench/metrics/metrics.h"
#include "mergebench/policy/weights_io.h"
#include "mergebench/scenario/scenario_io.h"
#include "mergebench/sim/engine.h"
#include "mergebench/sim/log_io.h"
#include "mergebench/sim/planner.h"

namespace mergebench {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

int density_index(DensityClass d) {
  return static_cast<int>(std::find(kAllDensities.begin(), kAllDensities.end(), d) - kAllDensities.begin());
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("output directory is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

std::string numbered(const std::string& stem, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05d", i);
  return stem + buf;
}

std::vector<fs::path> json_files_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Expands a path whose final component may contain * and ?. A directory
// expands to its JSON files.
std::vector<fs::path> expand_glob(const std::string& pattern) {
  const fs::path p(pattern);
  if (fs::is_directory(p)) return json_files_in(p);
  const std::string name = p.filename().string();
  if (name.find_first_of("*?") == std::string::npos) {
    if (!fs::is_regular_file(p)) throw ConfigError("scenario file '" + pattern + "' does not exist");
    return {p};
  }
  std::string re;
  for (char c : name) {
    if (c == '*') re += ".*";
    else if (c == '?') re += '.';
    else if (std::string_view("\\^$.|+()[]{}").find(c) != std::string_view::npos) re += std::string("\\") + c;
    else re += c;
  }
  const std::regex rx(re);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw ConfigError("scenario directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && std::regex_match(e.path().filename().string(), rx)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct EpisodeJob {
  int index = 0;
  Scenario scenario;
};

}  // namespace

std::uint64_t episode_seed(std::uint64_t base, DensityClass density, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(density_index(density)), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  return rng();
}

std::vector<fs::path> cmd_gen(const GenOptions& opts) {
  if (opts.count < 1) throw ConfigError("gen: count must be >= 1");
  if (opts.densities.empty()) throw ConfigError("gen: at least one density is required");
  ensure_dir(opts.out);
  std::vector<fs::path> written;
  for (DensityClass d : opts.densities) {
    for (int i = 0; i < opts.count; ++i) {
      const Scenario s = sample_scenario(episode_seed(opts.seed, d, i), d);
      const fs::path path = opts.out / (std::string(to_string(d)) + "_" + numbered("", i) + ".json");
      save_scenario(path, s);
      written.push_back(path);
    }
  }
  return written;
}

FitGmmResult cmd_fit_gmm(const FitGmmOptions& opts) {
  if (opts.k < 1) throw ConfigError("fit-gmm: k must be >= 1");
  if (!fs::is_directory(opts.scenarios)) {
    throw ConfigError("fit-gmm: scenario directory '" + opts.scenarios.string() + "' does not exist");
  }
  std::vector<FeaturePoint> points;
  for (const fs::path& p : json_files_in(opts.scenarios)) points.push_back(to_point(scenario_features(load_scenario(p))));
  if (points.size() < static_cast<std::size_t>(opts.k)) {
    throw ConfigError("fit-gmm: need at least k scenarios, found " + std::to_string(points.size()));
  }
  GmmFitOptions fo;
  fo.k = opts.k;
  fo.max_iter = opts.max_iter;
  fo.seed = opts.seed;
  FitGmmResult r{fit_gmm(points, fo), points.size()};
  if (!opts.out.empty()) write_file_atomic(opts.out, gmm_to_json(r.fit.model, r.fit.log_likelihood));
  return r;
}

TrainCommandResult cmd_train(const TrainCommandOptions& opts) {
  if (opts.out.empty()) throw ConfigError("train: --out is required");
  if (opts.scenes < 1) throw ConfigError("train: scenes must be >= 1");
  if (opts.max_samples < 0 || opts.steps < 0) throw ConfigError("train: samples and steps must be >= 0");
  validate(opts.config.model);

  std::mt19937_64 rng(opts.config.seed);
  Dataset data = generate_dataset(opts.scenes, rng);
  if (opts.max_samples > 0 && data.examples.size() > static_cast<std::size_t>(opts.max_samples)) {
    data.examples.resize(opts.max_samples);
  }
  if (data.examples.empty()) throw ValidationError("train: the simulated scenes yielded no training windows");

  TrainConfig cfg = opts.config;
  if (opts.steps > 0) {
    const int per_epoch = static_cast<int>((data.examples.size() + cfg.batch - 1) / cfg.batch);
    cfg.max_steps = opts.steps;
    cfg.epochs = (opts.steps + per_epoch - 1) / per_epoch;
  }
  TrainCommandResult r{train(data.examples, cfg), data.examples.size(), data.stats};
  save_weights(opts.out, r.train.weights);
  if (!opts.curve.empty()) {
    Json j;
    j["samples"] = r.samples;
    j["steps"] = r.train.steps;
    j["epoch_loss"] = r.train.epoch_loss;
    j["epoch_l_tar"] = r.train.epoch_l_tar;
    write_file_atomic(opts.curve, j.dump(2) + "\n");
  }
  return r;
}

std::string_view to_string(EvaluatorKind k) {
  switch (k) {
    case EvaluatorKind::Llm:
      return "llm";
    case EvaluatorKind::Rubric:
      return "rubric";
    case EvaluatorKind::LlmWithFallback:
      return "llm-with-rubric-fallback";
  }
  return "rubric";
}

EvaluatorKind evaluator_from_string(std::string_view s) {
  for (EvaluatorKind k : {EvaluatorKind::Llm, EvaluatorKind::Rubric, EvaluatorKind::LlmWithFallback}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown evaluator '" + std::string(s) + "' (expected llm, rubric or llm-with-rubric-fallback)");
}

RunResult cmd_run(const RunOptions& opts) {
  if (opts.episodes < 1) throw ConfigError("run: episodes must be >= 1");
  if (opts.workers < 1) throw ConfigError("run: workers must be >= 1");
  if (opts.timeout_ticks < 1) throw ConfigError("run: timeout ticks must be >= 1");
  validate(opts.prior);
  if (opts.evaluator != EvaluatorKind::Rubric) validate(opts.llm);
  const PlannerFactory factory = planner_factory(opts.planner);
  const std::shared_ptr<const EnvPolicy> env = make_env_policy(opts.env);
  ensure_dir(opts.out);

  std::vector<EpisodeJob> jobs;
  if (opts.scenarios.empty()) {
    if (opts.densities.empty()) throw ConfigError("run: at least one density is required");
    for (DensityClass d : opts.densities) {
      for (int i = 0; i < opts.episodes; ++i) {
        const int index = static_cast<int>(jobs.size());
        jobs.push_back({index, sample_scenario(episode_seed(opts.seed, d, i), d)});
      }
    }
  } else {
    const auto files = expand_glob(opts.scenarios);
    if (files.empty()) throw ConfigError("run: no scenario files match '" + opts.scenarios + "'");
    for (const fs::path& f : files) {
      Scenario s = load_scenario(f);
      if (std::find(opts.densities.begin(), opts.densities.end(), s.density) == opts.densities.end()) continue;
      const int index = static_cast<int>(jobs.size());
      jobs.push_back({index, std::move(s)});
    }
    if (jobs.empty()) throw ConfigError("run: no scenario matches the requested densities");
  }

  SimConfig sim;
  sim.timeout_ticks = opts.timeout_ticks;
  sim.seed = opts.seed;
  sim.planner_budget_ms = opts.planner_budget_ms;
  if (opts.save_logs) ensure_dir(opts.out / "logs");

  std::vector<EpisodeRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<long> eval_failures{0};
  std::atomic<bool> unreachable{false};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::mutex log_mu;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const EpisodeJob& job = jobs[j];
        auto ego = factory();
        const EpisodeLog log = run_episode(job.scenario, *ego, *env, sim);
        if (opts.save_logs) save_log(opts.out / "logs" / numbered("episode_", job.index), log);
        EpisodeRecord& rec = records[j];
        rec.index = job.index;
        rec.seed = job.scenario.seed;
        rec.density = job.scenario.density;
        rec.planner = ego->name();
        rec.env = env->kind();
        rec.metrics = compute_metrics(log, opts.mode);
        if (opts.evaluator == EvaluatorKind::Rubric) {
          rec.eval = evaluate_rubric(rec.metrics, opts.prior, opts.mode);
          continue;
        }
        try {
          rec.eval = evaluate_llm(opts.llm, build_prompt(rec.metrics, opts.prior, opts.mode));
        } catch (const Error& e) {
          const bool transport = dynamic_cast<const TransportError*>(&e) != nullptr;
          {
            std::lock_guard<std::mutex> lock(log_mu);
            std::fprintf(stderr, "episode %d: evaluator failed: %s\n", job.index, e.what());
          }
          if (opts.evaluator == EvaluatorKind::LlmWithFallback) {
            rec.eval = evaluate_rubric(rec.metrics, opts.prior, opts.mode);
          } else {
            ++eval_failures;
            if (transport) unreachable = true;
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int n_workers = std::min<int>(opts.workers, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  RunResult r;
  r.report = aggregate(records, ReportOptions{opts.exclude_planner_faults});
  r.evaluator_failures = eval_failures;
  r.exit_code = unreachable ? kExitEvaluatorUnreachable : kExitOk;

  ensure_dir(opts.out / "episodes");
  for (const EpisodeRecord& rec : records) {
    write_file_atomic(opts.out / "episodes" / (numbered("episode_", rec.index) + ".json"),
                      episode_to_json(rec).dump(2) + "\n");
  }
  write_file_atomic(opts.out / "report.json", report_to_json(r.report).dump(2) + "\n");
  write_file_atomic(opts.out / "report.csv", report_to_csv(r.report));
  write_file_atomic(opts.out / "density_table.md", render_density_table(r.report));
  return r;
}

std::vector<PlannerSummary> cmd_report(const ReportCommandOptions& opts) {
  std::vector<EpisodeRecord> records;
  for (const fs::path& in : opts.inputs) {
    const fs::path file = fs::is_directory(in) ? in / "report.json" : in;
    if (!fs::is_regular_file(file)) throw ConfigError("report: '" + file.string() + "' does not exist");
    Json j;
    try {
      j = Json::parse(read_file(file));
    } catch (const Json::parse_error& e) {
      throw ParseError("report: '" + file.string() + "' is not valid JSON", e.what());
    }
    if (!j.contains("episodes") || !j["episodes"].is_array()) {
      throw ParseError("report: '" + file.string() + "' has no episodes list", file.string());
    }
    for (const auto& e : j["episodes"]) records.push_back(episode_from_json(e));
  }
  if (records.empty()) throw ConfigError("report: no episodes in the given inputs");
  const ReportOptions ro{opts.exclude_planner_faults};
  auto rows = summarize_by_planner(records);
  if (!opts.out.empty()) {
    ensure_dir(opts.out);
    write_file_atomic(opts.out / "planners.json", planner_summary_to_json(rows, ro).dump(2) + "\n");
    write_file_atomic(opts.out / "planners.md", render_planner_table(rows, ro));
  }
  return rows;
}

}  // namespace mergebench
