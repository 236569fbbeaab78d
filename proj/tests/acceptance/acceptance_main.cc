// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "geometry_oracle.h"
#include "mergebench/cli/commands.h"
#include "mergebench/core/collision.h"
#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"
#include "mergebench/eval/mock_llm_server.h"
#include "mergebench/eval/rubric.h"
#include "mergebench/metrics/stats.h"
#include "mergebench/policy/loss.h"
#include "mergebench/policy/trainer.h"
#include "mergebench/scenario/gmm.h"
#include "mergebench/sim/engine.h"
#include "synthetic.h"

using namespace mergebench;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mergebench_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Verdict lambda_weighting() {
  bool ok = lambda_weight(40) == 2.0 && std::abs(lambda_weight(20) - 1.367879) <= 1e-6 &&
            std::abs(lambda_weight(1) - 1.0) <= 1e-12;
  for (int t = 1; t < 40; ++t) ok = ok && lambda_weight(t) < lambda_weight(t + 1);
  return {ok, "lambda(20)=" + fmt("%.7f", lambda_weight(20))};
}

Verdict loss_correctness() {
  Eigen::MatrixXd gt(kFutureFrames, kOutputChannels);
  for (Eigen::Index i = 0; i < gt.size(); ++i) gt.data()[i] = 0.01 * static_cast<double>(i % 97);
  Eigen::MatrixXd pred = gt;
  pred(39, 2) += 1.0;
  const LossBreakdown hit = loss(pred, gt, {gt}, {gt}, 1.0, 0.5);
  const LossBreakdown zero = loss(gt, gt, {gt}, {gt}, 1.0, 0.5);
  return {hit.l_tar == 0.05 && zero.total == 0.0, "l_tar=" + fmt("%.17g", hit.l_tar)};
}

Verdict gradient_check() {
  double worst = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const ModelConfig cfg{8, 1, 1, 2};
    ModelWeights w = init_weights(cfg, seed);
    std::normal_distribution<double> g(0.0, 0.3);
    w.out_w = w.out_w.unaryExpr([&](double) { return g(rng); });
    w.aux_w = w.aux_w.unaryExpr([&](double) { return g(rng); });
    const std::vector<TrainingExample> data{testing::random_example(rng, 3), testing::random_example(rng, 1)};
    const std::vector<const TrainingExample*> batch{&data[0], &data[1]};
    ModelWeights grad = zero_weights(cfg);
    batch_gradient(w, batch, 1.0, 0.5, &grad);
    std::vector<Eigen::MatrixXd*> ws, gs;
    for_each_tensor(w, [&](const std::string&, Eigen::MatrixXd& m) { ws.push_back(&m); });
    for_each_tensor(grad, [&](const std::string&, Eigen::MatrixXd& m) { gs.push_back(&m); });
    const double h = 1e-5;
    for (std::size_t t = 0; t < ws.size(); ++t) {
      for (Eigen::Index i = 0; i < ws[t]->size(); ++i) {
        double& p = ws[t]->data()[i];
        const double orig = p;
        p = orig + h;
        const double lp = batch_gradient(w, batch, 1.0, 0.5, nullptr).total;
        p = orig - h;
        const double lm = batch_gradient(w, batch, 1.0, 0.5, nullptr).total;
        p = orig;
        const double num = (lp - lm) / (2 * h), an = gs[t]->data()[i];
        // Relative error with a 1e-4 floor: below it, central-difference
        // truncation dominates any analytic error.
        worst = std::max(worst, std::abs(num - an) / std::max({std::abs(num), std::abs(an), 1e-4}));
      }
    }
  }
  return {worst < 1e-4, "max rel err " + fmt("%.2e", worst) + " over 5 seeds"};
}

Verdict overfit() {
  std::mt19937_64 rng(3);
  std::vector<TrainingExample> data;
  for (int i = 0; i < 8; ++i) data.push_back(testing::random_example(rng, 2 + i % 4));
  TrainConfig cfg;
  cfg.batch = 8;
  cfg.epochs = 2000;
  cfg.max_steps = 2000;
  cfg.seed = 1;
  const TrainResult r = train(data, cfg);
  const LossBreakdown l = evaluate_loss(r.weights, data, cfg.gamma1, cfg.gamma2);
  return {r.steps <= 2000 && l.l_tar < 1e-3, "l_tar " + fmt("%.2e", l.l_tar) + " after " + std::to_string(r.steps) + " steps"};
}

Verdict permutation() {
  const ModelWeights w = init_weights(ModelConfig{}, 5);
  std::normal_distribution<double> g(0.0, 0.3);
  ModelWeights wr = w;
  std::mt19937_64 wrng(5);
  wr.out_w = wr.out_w.unaryExpr([&](double) { return g(wrng); });
  double worst = 0.0;
  for (int scene = 0; scene < 100; ++scene) {
    std::mt19937_64 rng(1000 + scene);
    const Sample s = testing::random_sample(rng, 1 + scene % kMaxNeighbors);
    Sample p = s;
    std::shuffle(p.neighbors.begin(), p.neighbors.end(), rng);
    const Eigen::MatrixXd a = to_matrix(predict(wr, s).target), b = to_matrix(predict(wr, p).target);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, "max abs diff " + fmt("%.2e", worst) + " over 100 scenes"};
}

Verdict gmm_recovery() {
  std::vector<FeaturePoint> pts;
  std::vector<DensityClass> truth;
  for (int i = 0; i < 1000; ++i) {
    const DensityClass d = kAllDensities[i % 3];
    pts.push_back(to_point(scenario_features(sample_scenario(episode_seed(2024, d, i), d))));
    truth.push_back(d);
  }
  const GmmFit fit = fit_gmm(pts);
  const auto classes = component_classes(fit.model);
  int correct = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Eigen::Index k;
    responsibilities(fit.model, pts[i]).maxCoeff(&k);
    correct += classes[k] == truth[i];
  }
  bool monotone = true;
  for (std::size_t i = 1; i < fit.log_likelihood_history.size(); ++i) {
    const double prev = fit.log_likelihood_history[i - 1];
    monotone = monotone && fit.log_likelihood_history[i] >= prev - 1e-9 * std::abs(prev);
  }
  const double acc = correct / 1000.0;
  return {acc >= 0.9 && monotone, "accuracy " + fmt("%.3f", acc) + ", EM monotone " + (monotone ? "yes" : "no") +
                                      " over " + std::to_string(fit.iterations) + " iterations"};
}

Verdict collision_oracle() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(-8.0, 8.0), ang(-M_PI, M_PI), len(2.0, 12.0), wid(1.0, 3.0);
  int compared = 0, agree = 0, skipped = 0, collisions = 0;
  while (compared < 10000) {
    VehicleState a, b;
    a.theta = ang(rng);
    a.length = len(rng);
    a.width = wid(rng);
    b.x = pos(rng);
    b.y = pos(rng);
    b.theta = ang(rng);
    b.length = len(rng);
    b.width = wid(rng);
    const auto ra = testing::rect_of(a), rb = testing::rect_of(b);
    if (testing::boundary_margin(ra, rb) < 0.01) {
      ++skipped;
      continue;
    }
    const bool sat = check_collision(a, b);
    agree += sat == testing::sampled_overlap(ra, rb, 200);
    collisions += sat;
    ++compared;
  }
  return {agree == compared, std::to_string(agree) + "/" + std::to_string(compared) + " agree (" +
                                 std::to_string(collisions) + " overlapping, " + std::to_string(skipped) +
                                 " near-contact skipped)"};
}

Verdict style_calibration() {
  const RuleBasedEnv env;
  double hw[3] = {}, off[3] = {};
  long nh[3] = {}, no[3] = {};
  for (int i = 0; i < 100; ++i) {
    const Scenario s = sample_scenario(episode_seed(7, DensityClass::HighlyDense, i), DensityClass::HighlyDense);
    GapAcceptancePlanner ego;
    SimConfig cfg;
    cfg.seed = 7;
    const EpisodeLog log = run_episode(s, ego, env, cfg);
    for (const SceneSnapshot& scene : log.snapshots) {
      for (const Agent& a : scene) {
        if (a.id == kEgoId) continue;
        const int l = static_cast<int>(a.state.label);
        if (const Agent* lead = find_leader(scene, a.id, 50.0)) {
          hw[l] += std::hypot(lead->state.x - a.state.x, lead->state.y - a.state.y);
          ++nh[l];
        }
        off[l] += std::abs(lane_offset(s.road, Lane::Main, {a.state.x, a.state.y}));
        ++no[l];
      }
    }
  }
  for (int l = 0; l < 3; ++l) {
    hw[l] /= std::max(1L, nh[l]);
    off[l] /= std::max(1L, no[l]);
  }
  const bool ok = hw[0] < hw[1] && hw[1] < hw[2] && off[0] > off[1];
  return {ok, "headway O/F/L " + fmt("%.2f", hw[0]) + " < " + fmt("%.2f", hw[1]) + " < " + fmt("%.2f", hw[2]) +
                  " m; |offset| O/F " + fmt("%.3f", off[0]) + " > " + fmt("%.3f", off[1]) + " m"};
}

Verdict determinism() {
  const fs::path root = scratch("determinism");
  RunOptions o;
  o.episodes = 10;
  o.seed = 31;
  o.densities = {DensityClass::HighlyDense};
  o.save_logs = true;
  o.out = root / "a";
  cmd_run(o);
  o.out = root / "b";
  o.workers = 2;
  cmd_run(o);
  int files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    ++files;
    same += fs::exists(other) && read_file(e.path()) == read_file(other);
  }
  fs::remove_all(root);
  return {files > 20 && same == files, std::to_string(same) + "/" + std::to_string(files) + " files identical"};
}

EpisodeMetrics reference_episode() {
  EpisodeMetrics m;
  m.total_time = 8.83;
  m.avg_speed = 4.53;
  m.merging_point_x = 124.87;
  m.avg_jerk = 0.01;
  m.max_jerk = 2.95;
  m.others_avg_speed = 4.41;
  m.min_gap = 6.0;
  m.avg_gap = 7.0;
  m.outcome.kind = OutcomeKind::Merged;
  m.drive_mode = DriveMode::Hurry;
  return m;
}

Verdict rubric_behavior() {
  const PriorKnowledge p;
  EpisodeMetrics faster = reference_episode();
  faster.total_time = 7.00;
  faster.avg_speed = 5.71;
  faster.merging_point_x = 110.0;
  const double s1 = evaluate_rubric(reference_episode(), p, DriveMode::Hurry).score;
  const double s2 = evaluate_rubric(faster, p, DriveMode::Hurry).score;
  const double s3 = evaluate_rubric(reference_episode(), p, DriveMode::Relax).score;
  const bool mode_dir = s3 > s1;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    EpisodeMetrics m;
    m.total_time = 30 * u(rng);
    m.avg_speed = 6 * u(rng);
    m.others_avg_speed = 6 * u(rng);
    m.avg_jerk = 4 * u(rng);
    m.max_jerk = m.avg_jerk + 8 * u(rng);
    m.min_gap = 6 * u(rng);
    m.avg_gap = m.min_gap + 3 * u(rng);
    m.outcome.kind = (rng() % 2) ? OutcomeKind::Merged : OutcomeKind::Timeout;
    EpisodeMetrics b = m;
    switch (i % 4) {
      case 0: b.min_gap += 2 * u(rng); break;
      case 1: b.total_time *= u(rng); break;
      case 2: b.avg_jerk *= u(rng); break;
      default: b.max_jerk = b.avg_jerk + (m.max_jerk - m.avg_jerk) * u(rng); break;
    }
    const DriveMode mode = static_cast<DriveMode>(i % 3);
    violations += evaluate_rubric(b, p, mode).score < evaluate_rubric(m, p, mode).score - 1e-12;
  }
  return {s2 > s1 && mode_dir && violations == 0,
          "reference hurry " + fmt("%.2f", s1) + " < faster " + fmt("%.2f", s2) + "; reference relax " + fmt("%.2f", s3) +
              "; monotonicity violations " + std::to_string(violations) + "/1000"};
}

Verdict end_to_end() {
  const fs::path root = scratch("e2e");
  RunOptions o;
  o.out = root;
  o.episodes = 100;
  o.densities = {DensityClass::HighlyDense};
  o.seed = 2025;
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = cmd_run(o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool scores_ok = true;
  for (const auto& e : r.report.episodes) scores_ok = scores_ok && e.eval && e.eval->score >= 0 && e.eval->score <= 10;
  const std::string table = read_file(root / "density_table.md");
  const bool schema = table.rfind("| Density | Episodes | Success Rate | Average Score |", 0) == 0 &&
                      table.find("| highly | 100 |") != std::string::npos;
  const double sr = r.report.total.success_rate(r.report.options);
  fs::remove_all(root);
  return {secs < 60 && sr > 0 && sr < 1 && scores_ok && schema && r.report.total.episodes == 100,
          "success " + fmt("%.2f", sr) + ", avg score " + fmt("%.2f", r.report.total.avg_score()) + ", " +
              fmt("%.1f", secs) + " s"};
}

Verdict llm_client() {
  MockLlmServer server(fs::path(MERGEBENCH_FIXTURE_DIR) / "llm");
  LlmEndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.timeout_s = 5;
  cfg.model = "score_6_7";
  const EvalResult ok = evaluate_llm(cfg, build_prompt(reference_episode(), {}, DriveMode::Hurry));
  const bool fixture = ok.score == 6.7 && ok.suggestions == std::vector<SuggestionId>{SuggestionId::SmoothAcceleration};
  cfg.model = "over_range";
  const EvalResult over = evaluate_llm(cfg, "p");
  bool parse_error = false;
  cfg.model = "malformed";
  try {
    evaluate_llm(cfg, "p");
  } catch (const ParseError& e) {
    parse_error = !e.raw().empty();
  }
  return {fixture && over.score == 10.0 && over.score_clamped && parse_error,
          "fixture score " + fmt("%.1f", ok.score) + ", over-range -> " + fmt("%.1f", over.score) +
              (parse_error ? ", malformed -> parse error" : ", malformed accepted")};
}

Verdict statistics() {
  const std::vector<double> x{1, 2, 3, 4}, y2{2, 4, 6, 8}, yr{4, 3, 2, 1};
  const double r = pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4});
  const bool ok = pearson(x, y2) == 1.0 && pearson(x, yr) == -1.0 && std::abs(r - 0.98198) < 1e-5 &&
                  mse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4}) == 1.0 / 3.0;
  return {ok, "rho([1,2,3],[1,2,4]) = " + fmt("%.6f", r)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"lambda weighting", lambda_weighting},
      {"loss correctness", loss_correctness},
      {"gradient check", gradient_check},
      {"overfit", overfit},
      {"permutation equivariance", permutation},
      {"gmm recovery", gmm_recovery},
      {"collision oracle", collision_oracle},
      {"closed-loop style calibration", style_calibration},
      {"determinism", determinism},
      {"rubric behavior", rubric_behavior},
      {"end-to-end run", end_to_end},
      {"llm client", llm_client},
      {"statistics", statistics},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
