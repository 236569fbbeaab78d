#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mergebench/cli/commands.h"
#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"

using namespace mergebench;

namespace {

std::vector<DensityClass> parse_densities(const std::vector<std::string>& names) {
  std::vector<DensityClass> out;
  for (const std::string& n : names) {
    if (n == "all") return {kAllDensities.begin(), kAllDensities.end()};
    out.push_back(density_from_string(n));
  }
  return out;
}

// Every subcommand accepts --config FILE with one `flag-name = value` per
// line; explicit flags override the file.
void add_config(CLI::App* app) {
  app->add_option("--config", "key = value file mirroring the long flags");
}

bool truthy(const std::string& v) { return v == "true" || v == "1" || v == "yes" || v == "on"; }

// CLI11 only reads config files for the top-level app, so a subcommand's
// --config is expanded here: file entries become flags ahead of the explicit
// ones, skipping any flag that is also given on the command line.
std::vector<std::string> expand_config(CLI::App& app, int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string name = args[i].substr(0, args[i].find('='));
    if (name.rfind("--", 0) != 0) continue;
    if (name == "--config") {
      path = name.size() < args[i].size() ? args[i].substr(name.size() + 1) : i + 1 < args.size() ? args[i + 1] : "";
    } else {
      given.insert(name);
    }
  }
  if (path.empty()) return args;

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::ParseError& e) {
    throw ConfigError("cannot read config " + path + ": " + e.what());
  }
  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub->get_name()}) {
      throw ConfigError("config section '" + item.parents.front() + "' does not match '" + sub->get_name() + "'");
    }
    const std::string flag = "--" + item.name;
    const CLI::Option* opt = flag == "--config" ? nullptr : sub->get_option_no_throw(flag);
    if (opt == nullptr) throw ConfigError("unknown config key '" + item.name + "' for " + sub->get_name());
    if (given.count(flag)) continue;
    if (opt->get_expected_max() == 0) {  // flag
      if (item.inputs.size() == 1 && truthy(item.inputs.front())) injected.push_back(flag);
      continue;
    }
    injected.push_back(flag);
    injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense-traffic merge benchmark"};
  app.require_subcommand(1);

  std::vector<std::string> densities{"all"};
  std::uint64_t seed = 0;

  GenOptions gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate scenario files per density class");
  add_config(gen_cmd);
  gen_cmd->add_option("--out", gen_out, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Scenarios per density class");
  gen_cmd->add_option("--density", densities, "Density classes: highly, medium, lower (comma separated) or all")->delimiter(',');
  gen_cmd->add_option("--seed", seed, "Base seed");

  FitGmmOptions fit;
  std::string fit_in, fit_out;
  auto* fit_cmd = app.add_subcommand("fit-gmm", "Fit the density classifier on a scenario directory");
  add_config(fit_cmd);
  fit_cmd->add_option("--scenarios", fit_in, "Scenario directory")->required();
  fit_cmd->add_option("--out", fit_out, "Model JSON path")->required();
  fit_cmd->add_option("--k", fit.k, "Mixture components");
  fit_cmd->add_option("--max-iter", fit.max_iter, "EM iteration cap");
  fit_cmd->add_option("--seed", seed, "Initialization seed");

  TrainCommandOptions tr;
  std::string tr_out, tr_curve;
  auto* train_cmd = app.add_subcommand("train", "Simulate a dataset and train the neural environment policy");
  add_config(train_cmd);
  train_cmd->add_option("--out", tr_out, "Weights path (.json for the text format)")->required();
  train_cmd->add_option("--curve", tr_curve, "Loss curve JSON path");
  train_cmd->add_option("--scenes", tr.scenes, "Closed-loop scenes to simulate");
  train_cmd->add_option("--samples", tr.max_samples, "Cap on training windows (0 = all)");
  train_cmd->add_option("--steps", tr.steps, "Optimizer steps (0 = use --epochs)");
  train_cmd->add_option("--epochs", tr.config.epochs, "Epochs when --steps is 0");
  train_cmd->add_option("--batch", tr.config.batch, "Mini-batch size");
  train_cmd->add_option("--lr", tr.config.lr, "Adam learning rate");
  train_cmd->add_option("--gamma1", tr.config.gamma1, "Target loss weight");
  train_cmd->add_option("--gamma2", tr.config.gamma2, "Auxiliary loss weight");
  train_cmd->add_option("--d-model", tr.config.model.d_model, "Feature width");
  train_cmd->add_option("--self-layers", tr.config.model.self_layers, "Self-attention layers");
  train_cmd->add_option("--cross-layers", tr.config.model.cross_layers, "Cross-attention layers");
  train_cmd->add_option("--heads", tr.config.model.heads, "Attention heads");
  train_cmd->add_option("--seed", seed, "Data and initialization seed");

  RunOptions run;
  std::string run_out, env_kind = "rule", weights, evaluator = "rubric", mode = "medium";
  std::vector<std::string> run_densities{"highly"};
  auto* run_cmd = app.add_subcommand("run", "Run a batch of benchmark episodes");
  add_config(run_cmd);
  run_cmd->add_option("--out", run_out, "Output directory")->required();
  run_cmd->add_option("--scenarios", run.scenarios, "Scenario file, directory or glob (default: generate)");
  run_cmd->add_option("--episodes", run.episodes, "Episodes per density when generating");
  run_cmd->add_option("--density", run_densities, "Density classes: highly, medium, lower (comma separated) or all")->delimiter(',');
  run_cmd->add_option("--seed", seed, "Base seed");
  run_cmd->add_option("--planner", run.planner, "Ego planner: gap_acceptance, brake, keep");
  run_cmd->add_option("--env-policy", env_kind, "Environment policy: rule, neural, idm");
  run_cmd->add_option("--weights", weights, "Weights file for --env-policy neural");
  run_cmd->add_option("--evaluator", evaluator, "llm, rubric or llm-with-rubric-fallback");
  run_cmd->add_option("--mode", mode, "Drive mode: hurry, medium, relax");
  run_cmd->add_option("--workers", run.workers, "Parallel episode workers");
  run_cmd->add_option("--timeout-ticks", run.timeout_ticks, "Episode length cap in 0.1 s ticks");
  run_cmd->add_option("--planner-budget-ms", run.planner_budget_ms, "Per-tick ego planner budget (0 = off)");
  run_cmd->add_flag("--save-logs", run.save_logs, "Write per-episode CSV/JSON logs");
  run_cmd->add_flag("--exclude-planner-faults", run.exclude_planner_faults,
                    "Drop planner faults from success-rate denominators");
  run_cmd->add_option("--llm-url", run.llm.base_url, "Chat completions base URL");
  run_cmd->add_option("--llm-model", run.llm.model, "Model name");
  run_cmd->add_option("--token-env", run.llm.token_env, "Environment variable holding the API token");
  run_cmd->add_option("--llm-timeout", run.llm.timeout_s, "Request timeout (s)");
  run_cmd->add_option("--llm-retries", run.llm.max_retries, "Retries on transport errors and 5xx");

  ReportCommandOptions rep;
  std::vector<std::string> rep_in;
  std::string rep_out;
  auto* rep_cmd = app.add_subcommand("report", "Merge run results into per-planner tables");
  add_config(rep_cmd);
  rep_cmd->add_option("--in", rep_in, "Run directories or report.json files")->required();
  rep_cmd->add_option("--out", rep_out, "Output directory");
  rep_cmd->add_flag("--exclude-planner-faults", rep.exclude_planner_faults,
                    "Drop planner faults from success-rate denominators");

  try {
    std::vector<std::string> args = expand_config(app, argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen_cmd) {
      gen.out = gen_out;
      gen.seed = seed;
      gen.densities = parse_densities(densities);
      const auto files = cmd_gen(gen);
      std::printf("wrote %zu scenarios to %s\n", files.size(), gen_out.c_str());
    } else if (*fit_cmd) {
      fit.scenarios = fit_in;
      fit.out = fit_out;
      fit.seed = seed;
      const auto r = cmd_fit_gmm(fit);
      std::printf("fitted %d components on %zu scenarios in %d iterations, log-likelihood %s\n", r.fit.model.k(),
                  r.scenarios, r.fit.iterations, format_double(r.fit.log_likelihood).c_str());
    } else if (*train_cmd) {
      tr.out = tr_out;
      tr.curve = tr_curve;
      tr.config.seed = seed;
      const auto r = cmd_train(tr);
      std::printf("trained on %zu windows for %d steps; loss %s -> %s\n", r.samples, r.train.steps,
                  format_double(r.train.epoch_loss.front()).c_str(), format_double(r.train.epoch_loss.back()).c_str());
    } else if (*run_cmd) {
      run.out = run_out;
      run.seed = seed;
      run.densities = parse_densities(run_densities);
      run.env.kind = env_policy_from_string(env_kind);
      run.env.weights_path = weights;
      run.evaluator = evaluator_from_string(evaluator);
      run.mode = drive_mode_from_string(mode);
      const auto r = cmd_run(run);
      std::fputs(render_density_table(r.report).c_str(), stdout);
      if (r.exit_code == kExitEvaluatorUnreachable) {
        std::fprintf(stderr, "evaluator unreachable: %ld episodes unscored\n", r.evaluator_failures);
      }
      return r.exit_code;
    } else if (*rep_cmd) {
      for (const auto& p : rep_in) rep.inputs.emplace_back(p);
      rep.out = rep_out;
      std::fputs(render_planner_table(cmd_report(rep), ReportOptions{rep.exclude_planner_faults}).c_str(), stdout);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitConfig;
  } catch (const TransportError& e) {
    std::fprintf(stderr, "evaluator unreachable: %s\n", e.what());
    return kExitEvaluatorUnreachable;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
