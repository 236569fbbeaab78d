#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "mergebench/core/errors.h"
#include "mergebench/policy/dataset.h"
#include "mergebench/policy/idm.h"
#include "mergebench/policy/loss.h"
#include "mergebench/policy/model.h"
#include "mergebench/policy/rule_policy.h"
#include "mergebench/policy/trainer.h"
#include "mergebench/policy/weights_io.h"
#include "scenes.h"
#include "synthetic.h"

namespace mergebench {
namespace {

using testing::constant_velocity_log;
using testing::vehicle;

Sample sample_of(const std::vector<SceneSnapshot>& log, int id) {
  const RoadGeometry road = make_merge_road();
  const std::span<const SceneSnapshot> all(log);
  return build_sample(all.last(std::min<std::size_t>(kHistoryFrames, log.size())), id, road);
}

// Parameter-free layer norm, written out independently of the model.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mean = 0, var = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) mean += x(r, c);
    mean /= x.cols();
    for (Eigen::Index c = 0; c < x.cols(); ++c) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= x.cols();
    for (Eigen::Index c = 0; c < x.cols(); ++c) y(r, c) = (x(r, c) - mean) / std::sqrt(var + 1e-5);
  }
  return y;
}

// ---- lambda ---------------------------------------------------------------

TEST(Lambda, ReferenceValues) {
  EXPECT_EQ(lambda_weight(40), 2.0);
  EXPECT_NEAR(lambda_weight(20), 1.0 + std::exp(-1.0), 1e-15);
  EXPECT_NEAR(lambda_weight(20), 1.367879, 1e-6);
  EXPECT_NEAR(lambda_weight(1), 1.0, 1e-12);
}

TEST(Lambda, StrictlyIncreasingAndBounded) {
  for (int t = 1; t < 40; ++t) EXPECT_LT(lambda_weight(t), lambda_weight(t + 1));
  for (int t = 1; t <= 40; ++t) {
    EXPECT_GE(lambda_weight(t), 1.0);  // e^-39 vanishes next to 1 at t = 1
    EXPECT_LE(lambda_weight(t), 2.0);
  }
}

TEST(Lambda, RejectsOutOfDomain) {
  EXPECT_THROW(lambda_weight(0), ValidationError);
  EXPECT_THROW(lambda_weight(41), ValidationError);
}

// ---- IDM -------------------------------------------------------------------

TEST(Idm, FreeFlowAtDesiredSpeed) {
  const IdmParams p = idm_baseline_params();
  EXPECT_NEAR(idm_accel(p.v0, 0.0, INFINITY, p), 0.0, 1e-12);
}

TEST(Idm, FullLaunchOnOpenRoad) {
  IdmParams p = idm_baseline_params();
  p.a_max = 1.5;
  p.s0 = 1.0;
  EXPECT_DOUBLE_EQ(idm_accel(0.0, 0.0, INFINITY, p), 1.5);
}

TEST(Idm, EquilibriumGap) {
  IdmParams p{5.0, 1.0, 1.0, 1.5, 2.0, 4.0, 0.1, 0.0};
  // s* = 1 + 2.5 * 1 = 3.5; a = 0 where (s*/s)^2 = 1 - (1/2)^4.
  const double s = 3.5 / std::sqrt(1.0 - std::pow(0.5, 4));
  EXPECT_NEAR(s, 3.615, 1e-3);
  EXPECT_NEAR(idm_accel(2.5, 2.5, s, p), 0.0, 1e-12);
  EXPECT_NEAR(idm_accel(2.5, 2.5, 3.615, p), 0.0, 1e-3);
  EXPECT_LT(idm_accel(2.5, 2.5, 3.0, p), 0.0);
  EXPECT_GT(idm_accel(2.5, 2.5, 5.0, p), 0.0);
}

TEST(Idm, EmergencyAndClip) {
  const IdmParams p = idm_baseline_params();
  EXPECT_EQ(idm_accel(3.0, 0.0, 0.0, p), -8.0);
  EXPECT_EQ(idm_accel(3.0, 0.0, -1.0, p), -8.0);
  EXPECT_EQ(idm_accel(5.0, 0.0, 0.1, p), -8.0);
  EXPECT_LE(idm_accel(0.0, 10.0, 100.0, p), p.a_max);
}

TEST(Idm, StyleParamsValid) {
  for (StyleLabel l : {StyleLabel::Offensive, StyleLabel::Friendly, StyleLabel::Long}) EXPECT_NO_THROW(validate(style_params(l)));
  IdmParams bad = idm_baseline_params();
  bad.T = 0.0;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = idm_baseline_params();
  bad.offset_bias = -1.0;
  EXPECT_NO_THROW(validate(bad));
}

// ---- rule policy -------------------------------------------------------------

TEST(RulePolicy, PureLaneKeepingWithoutMergers) {
  const auto log = constant_velocity_log({vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 48, Lane::Main, 2.5)}, 10);
  const Sample s = sample_of(log, 1);
  std::mt19937_64 rng(3);
  for (StyleLabel l : {StyleLabel::Offensive, StyleLabel::Friendly}) {
    IdmParams p = style_params(l);
    p.offset_bias = 0.0;
    const PlannedTrajectory t = rule_policy_plan(s, p, rng);
    for (const PlannedFrame& f : t.frames) EXPECT_LT(std::abs(f.y), 1e-6);
  }
}

TEST(RulePolicy, OffensiveBlocksMoreThanFriendly) {
  const auto log = constant_velocity_log({vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 41, Lane::Merge, 2.0)}, 10);
  const Sample s = sample_of(log, 1);
  ASSERT_GT(merge_pressure(s), 0.0);
  RulePolicyConfig cfg;
  cfg.accel_noise = 0.0;
  std::mt19937_64 rng(1);
  auto mean_y = [&](StyleLabel l) {
    const PlannedTrajectory t = rule_policy_plan(s, style_params(l), rng, cfg);
    double sum = 0.0;
    for (const PlannedFrame& f : t.frames) sum += f.y;
    return sum / kFutureFrames;
  };
  // Negative y is toward the merge lane.
  const double offensive = mean_y(StyleLabel::Offensive);
  const double friendly = mean_y(StyleLabel::Friendly);
  EXPECT_LT(offensive, friendly);
  EXPECT_LT(offensive, 0.0);
}

TEST(RulePolicy, BrakesForStoppedLeader) {
  // Leader bumper 2 m ahead: centers 2 + 4.7 m apart.
  const auto log = constant_velocity_log({vehicle(1, 40, Lane::Main, 2.0), vehicle(2, 46.7, Lane::Main, 0.0)}, 1);
  const Sample s = sample_of(log, 1);
  RulePolicyConfig cfg;
  cfg.accel_noise = 0.0;
  std::mt19937_64 rng(1);
  const PlannedTrajectory t = rule_policy_plan(s, style_params(StyleLabel::Friendly), rng, cfg);
  double prev = 2.0;
  for (const PlannedFrame& f : t.frames) {
    EXPECT_LE(f.speed, prev + 1e-12);
    prev = f.speed;
  }
  EXPECT_LT(t.frames.back().speed, 2.0);
  EXPECT_LT(t.frames.back().x, 2.0);  // never reaches the leader's tail
}

TEST(RulePolicy, DeterministicGivenRng) {
  const auto log = constant_velocity_log({vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 41, Lane::Merge, 2.0)}, 10);
  const Sample s = sample_of(log, 1);
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(rule_policy_plan(s, style_params(StyleLabel::Long), a), rule_policy_plan(s, style_params(StyleLabel::Long), b));
}

// ---- embedding and attention ----------------------------------------------

TEST(Embed, ZeroWeightsGiveZeros) {
  std::mt19937_64 rng(1);
  const Sample s = testing::random_sample(rng, 4);
  const Embeddings e = embed(zero_weights(ModelConfig{}), s);
  EXPECT_EQ(e.vehicles.rows(), 5);
  EXPECT_EQ(e.road.rows(), kRoadPolylines);
  EXPECT_EQ(e.vehicles.norm(), 0.0);
  EXPECT_EQ(e.road.norm(), 0.0);
}

TEST(Embed, IdentityWeightsCopyInput) {
  ModelConfig cfg{kVehicleInputs, 1, 1, 1};
  ModelWeights w = zero_weights(cfg);
  w.vehicle_w = Eigen::MatrixXd::Identity(kVehicleInputs, kVehicleInputs);
  std::mt19937_64 rng(2);
  const Sample s = testing::random_sample(rng, 0);
  const Eigen::MatrixXd v = encode_vehicles(s);
  const Embeddings e = embed(w, v, encode_road(s));
  EXPECT_EQ(e.vehicles, v);
  // The flattening is frame-major: column t * 13 + c holds channel c of frame t.
  EXPECT_NEAR(v(0, 3 * kVehicleChannels + kChX), s.target_history[3][kChX] / vehicle_input_scale()[kChX], 1e-15);
}

TEST(Embed, LinearWithoutBias) {
  const ModelWeights w = init_weights(ModelConfig{16, 1, 1, 2}, 4);
  std::mt19937_64 rng(3);
  const Sample s = testing::random_sample(rng, 3);
  const Eigen::MatrixXd v = encode_vehicles(s), r = encode_road(s);
  const Embeddings one = embed(w, v, r), two = embed(w, 2.0 * v, 2.0 * r);
  EXPECT_LT((two.vehicles - 2.0 * one.vehicles).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((two.road - 2.0 * one.road).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Embed, ShapeErrorNamesDims) {
  const ModelWeights w = zero_weights(ModelConfig{8, 1, 1, 2});
  try {
    embed(w, Eigen::MatrixXd::Zero(2, 129), Eigen::MatrixXd::Zero(2, kRoadInputs));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("130"), std::string::npos) << msg;
    EXPECT_NE(msg.find("129"), std::string::npos) << msg;
  }
}

TEST(Attention, SingleTokenReducesToValuePath) {
  const ModelWeights w = init_weights(ModelConfig{8, 1, 1, 2}, 5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXd v(1, 8), r(1, 8);
  for (int c = 0; c < 8; ++c) {
    v(0, c) = g(rng);
    r(0, c) = g(rng);
  }
  AttentionTrace trace;
  const Eigen::MatrixXd out = attention_forward(w, v, r, &trace);
  for (const auto& layer : trace.self_attn)
    for (const auto& head : layer) EXPECT_EQ(head(0, 0), 1.0);
  for (const auto& layer : trace.cross_attn)
    for (const auto& head : layer) EXPECT_EQ(head(0, 0), 1.0);
  const AttentionBlock& sb = w.self_blocks[0];
  const AttentionBlock& cb = w.cross_blocks[0];
  const Eigen::MatrixXd h1 = layer_norm(v + v * sb.wv * sb.wo);
  const Eigen::MatrixXd expected = layer_norm(h1 + r * cb.wv * cb.wo);
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Attention, RowsSumToOne) {
  for (int draw = 0; draw < 100; ++draw) {
    std::mt19937_64 rng(draw);
    const ModelWeights w = init_weights(ModelConfig{16, 2, 2, 4}, draw);
    const Sample s = testing::random_sample(rng, 1 + draw % kMaxNeighbors);
    const Embeddings e = embed(w, s);
    AttentionTrace trace;
    attention_forward(w, e.vehicles, e.road, &trace);
    for (const auto* part : {&trace.self_attn, &trace.cross_attn}) {
      for (const auto& layer : *part) {
        for (const auto& head : layer) {
          for (Eigen::Index i = 0; i < head.rows(); ++i) ASSERT_NEAR(head.row(i).sum(), 1.0, 1e-6);
        }
      }
    }
  }
}

TEST(Attention, PermutationEquivariant) {
  const ModelWeights w = init_weights(ModelConfig{16, 2, 2, 4}, 7);
  std::mt19937_64 rng(7);
  const Sample s = testing::random_sample(rng, 6);
  Sample p = s;
  std::reverse(p.neighbors.begin(), p.neighbors.end());
  const Embeddings es = embed(w, s), ep = embed(w, p);
  const Eigen::MatrixXd a = attention_forward(w, es.vehicles, es.road);
  const Eigen::MatrixXd b = attention_forward(w, ep.vehicles, ep.road);
  EXPECT_LT((a.row(0) - b.row(0)).cwiseAbs().maxCoeff(), 1e-9);
  for (int i = 1; i <= 6; ++i) EXPECT_LT((a.row(i) - b.row(7 - i)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Predict, ZeroWeightsHoldPose) {
  std::mt19937_64 rng(8);
  const Prediction pr = predict(zero_weights(ModelConfig{}), testing::random_sample(rng, 3));
  for (const PlannedFrame& f : pr.target.frames) EXPECT_EQ(f, PlannedFrame{});
  EXPECT_EQ(pr.aux.size(), 4u);
}

TEST(Predict, ShapeIndependentOfNeighborCount) {
  const ModelWeights w = init_weights(ModelConfig{16, 1, 1, 2}, 1);
  for (int n = 0; n <= kMaxNeighbors; ++n) {
    std::mt19937_64 rng(n);
    const Sample s = testing::random_sample(rng, n);
    const ForwardPass fp(w, encode_vehicles(s), encode_road(s));
    EXPECT_EQ(fp.output().target.rows(), kFutureFrames);
    EXPECT_EQ(fp.output().target.cols(), kOutputChannels);
    EXPECT_EQ(fp.output().aux.size(), static_cast<std::size_t>(n + 1));
  }
}

// ---- loss and training ------------------------------------------------------

TEST(Loss, ExactValues) {
  const Eigen::MatrixXd gt = Eigen::MatrixXd::Random(kFutureFrames, kOutputChannels);
  LossBreakdown l = loss(gt, gt, {gt}, {gt}, 1.0, 0.5);
  EXPECT_EQ(l.l_tar, 0.0);
  EXPECT_EQ(l.l_aux, 0.0);
  EXPECT_EQ(l.total, 0.0);

  Eigen::MatrixXd pred = gt;
  pred(kFutureFrames - 1, 0) += 0.6;
  pred(kFutureFrames - 1, 1) -= 0.8;  // squared norm 1
  l = loss(pred, gt, {gt}, {gt}, 1.0, 0.0);
  EXPECT_NEAR(l.l_tar, 0.05, 1e-15);
  EXPECT_EQ(l.total, l.l_tar);
}

TEST(Loss, AuxIsUnweightedMeanOverValidRows) {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(kFutureFrames, kOutputChannels);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(kFutureFrames, kOutputChannels, 0.5);  // |err|^2 = 1
  LossBreakdown l = loss(z, z, {one, z}, {z, z}, 1.0, 0.5);
  EXPECT_NEAR(l.l_aux, 0.5, 1e-15);
  l = loss(z, z, {one, z}, {z, z}, 1.0, 0.5, {false, true});
  EXPECT_EQ(l.l_aux, 0.0);
  EXPECT_NEAR(l.total, l.gamma1 * l.l_tar + l.gamma2 * l.l_aux, 0.0);
}

TEST(Loss, NonNegativeAndShapeChecked) {
  for (int i = 0; i < 20; ++i) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(kFutureFrames, kOutputChannels);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Random(kFutureFrames, kOutputChannels);
    EXPECT_GT(loss(a, b, {a}, {b}, 1.0, 0.5).total, 0.0);
  }
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(kFutureFrames, kOutputChannels);
  EXPECT_THROW(loss(Eigen::MatrixXd::Zero(39, 4), z, {}, {}, 1, 0.5), ShapeError);
  EXPECT_THROW(loss(z, z, {z}, {}, 1, 0.5), ShapeError);
}

TEST(Training, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const ModelConfig cfg{8, 1, 1, 2};
  ModelWeights w = init_weights(cfg, 11);
  std::normal_distribution<double> g(0.0, 0.3);
  w.out_w = w.out_w.unaryExpr([&](double) { return g(rng); });
  w.aux_w = w.aux_w.unaryExpr([&](double) { return g(rng); });
  const std::vector<TrainingExample> data{testing::random_example(rng, 2), testing::random_example(rng, 1)};
  const std::vector<const TrainingExample*> batch{&data[0], &data[1]};
  ModelWeights grad = zero_weights(cfg);
  batch_gradient(w, batch, 1.0, 0.5, &grad);
  // Spot-check one entry per tensor.
  std::vector<Eigen::MatrixXd*> ws, gs;
  for_each_tensor(w, [&](const std::string&, Eigen::MatrixXd& m) { ws.push_back(&m); });
  for_each_tensor(grad, [&](const std::string&, Eigen::MatrixXd& m) { gs.push_back(&m); });
  const double h = 1e-5;
  for (std::size_t t = 0; t < ws.size(); ++t) {
    double& p = ws[t]->data()[ws[t]->size() / 2];
    const double orig = p;
    p = orig + h;
    const double lp = batch_gradient(w, batch, 1.0, 0.5, nullptr).total;
    p = orig - h;
    const double lm = batch_gradient(w, batch, 1.0, 0.5, nullptr).total;
    p = orig;
    const double num = (lp - lm) / (2 * h), an = gs[t]->data()[gs[t]->size() / 2];
    EXPECT_LT(std::abs(num - an) / std::max({std::abs(num), std::abs(an), 1e-4}), 1e-4) << "tensor " << t;
  }
}

TEST(Training, SingleSampleMemorized) {
  std::mt19937_64 rng(4);
  const std::vector<TrainingExample> data{testing::random_example(rng, 3)};
  TrainConfig cfg;
  cfg.model = ModelConfig{32, 1, 1, 4};
  cfg.batch = 1;
  cfg.epochs = 600;
  const TrainResult r = train(data, cfg);
  const Eigen::MatrixXd diff = to_matrix(predict(r.weights, data[0].sample).target) - to_matrix(data[0].future);
  EXPECT_LT(diff.squaredNorm() / diff.size(), 1e-3);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Training, DeterministicPerSeed) {
  std::mt19937_64 rng(5);
  std::vector<TrainingExample> data;
  for (int i = 0; i < 4; ++i) data.push_back(testing::random_example(rng, 1 + i));
  TrainConfig cfg;
  cfg.model = ModelConfig{8, 1, 1, 2};
  cfg.batch = 2;
  cfg.epochs = 5;
  cfg.seed = 42;
  const TrainResult a = train(data, cfg), b = train(data, cfg);
  EXPECT_EQ(weights_to_bytes(a.weights), weights_to_bytes(b.weights));
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Training, RejectsEmptyData) { EXPECT_THROW(train({}, TrainConfig{}), ValidationError); }

TEST(Training, DivergenceGuard) {
  std::mt19937_64 rng(6);
  std::vector<TrainingExample> data{testing::random_example(rng, 1)};
  data[0].future.frames[3].x = NAN;
  TrainConfig cfg;
  cfg.model = ModelConfig{8, 1, 1, 2};
  EXPECT_THROW(train(data, cfg), DivergenceError);
}

// ---- weights file -----------------------------------------------------------

TEST(WeightsIo, BinaryRoundTripIsF32Exact) {
  const ModelWeights w = init_weights(ModelConfig{8, 1, 2, 2}, 3);
  const std::string bytes = weights_to_bytes(w);
  ASSERT_EQ(bytes.substr(0, 4), "B4MW");
  const ModelWeights back = weights_from_bytes(bytes);
  EXPECT_EQ(back.cfg, w.cfg);
  EXPECT_EQ(weights_to_bytes(back), bytes);
  EXPECT_LT((back.vehicle_w - w.vehicle_w).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(WeightsIo, JsonTwinMatchesBinary) {
  const ModelWeights w = init_weights(ModelConfig{8, 1, 1, 2}, 4);
  const ModelWeights back = weights_from_json(weights_to_json(w));
  EXPECT_EQ(weights_to_bytes(back), weights_to_bytes(w));
}

TEST(WeightsIo, FileRoundTripBothFormats) {
  const auto dir = std::filesystem::temp_directory_path() / "mergebench_weights_test";
  std::filesystem::create_directories(dir);
  const ModelWeights w = init_weights(ModelConfig{8, 1, 1, 2}, 5);
  for (const char* name : {"w.bin", "w.json"}) {
    save_weights(dir / name, w);
    EXPECT_EQ(weights_to_bytes(load_weights(dir / name)), weights_to_bytes(w)) << name;
  }
  std::filesystem::remove_all(dir);
}

TEST(WeightsIo, RejectsCorruptInput) {
  std::string bytes = weights_to_bytes(init_weights(ModelConfig{8, 1, 1, 2}, 6));
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(weights_from_bytes(bad), ParseError);
  EXPECT_THROW(weights_from_bytes(bytes.substr(0, bytes.size() - 3)), ParseError);
  ModelWeights w = init_weights(ModelConfig{8, 1, 1, 2}, 6);
  w.out_w.resize(8, 10);
  EXPECT_THROW(validate(w), ShapeError);
}

// ---- dataset -------------------------------------------------------------------

TEST(Dataset, CompliantSceneYieldsAllWindows) {
  // Follower 5 m behind its leader's tail; a merger alongside the follower.
  const auto log = constant_velocity_log(
      {vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 49.7, Lane::Main, 2.5), vehicle(3, 41, Lane::Merge, 2.5)}, 100);
  WindowStats stats;
  const auto ex = extract_windows(log, make_merge_road(), {}, 1, &stats);
  EXPECT_EQ(ex.size(), 100u - kWindowFrames + 1);
  EXPECT_EQ(stats.kept, ex.size());
  for (const auto& e : ex) {
    EXPECT_EQ(e.sample.target_id, 1);
    const auto& f = e.sample.target_history.back();
    const double v = std::hypot(f[kChVx], f[kChVy]);
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 5.0);
    EXPECT_EQ(e.aux_future.size(), e.sample.neighbors.size() + 1);
  }
  EXPECT_NEAR(ex[0].future.frames.back().x, 2.5 * 4.0, 1e-9);
}

TEST(Dataset, FarLeaderRejected) {
  const auto log = constant_velocity_log(
      {vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 59.7, Lane::Main, 2.5), vehicle(3, 41, Lane::Merge, 2.5)}, 100);
  EXPECT_TRUE(extract_windows(log, make_merge_road()).empty());
}

TEST(Dataset, StrideAndSpeedBand) {
  const auto log = constant_velocity_log(
      {vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 49.7, Lane::Main, 2.5), vehicle(3, 41, Lane::Merge, 2.5)}, 100);
  EXPECT_EQ(extract_windows(log, make_merge_road(), {}, 10).size(), 6u);
  const auto slow = constant_velocity_log(
      {vehicle(1, 40, Lane::Main, 0.5), vehicle(2, 49.7, Lane::Main, 0.5), vehicle(3, 41, Lane::Merge, 0.5)}, 60);
  EXPECT_TRUE(extract_windows(slow, make_merge_road()).empty());
}

TEST(Dataset, GeneratedSamplesSatisfyFilters) {
  std::mt19937_64 rng(1);
  const Dataset d = generate_dataset(3, rng, DatasetOptions{{}, 5, 200});
  EXPECT_EQ(d.scenes, 3u);
  EXPECT_EQ(d.stats.kept, d.examples.size());
  for (const auto& e : d.examples) {
    const auto& f = e.sample.target_history.back();
    const double v = std::hypot(f[kChVx], f[kChVy]);
    EXPECT_GE(v, 1.0 - 1e-9);
    EXPECT_LE(v, 5.0 + 1e-9);
  }
  EXPECT_THROW(generate_dataset(0, rng), ValidationError);
}

TEST(Dataset, WithinFilterAgreesWithExtraction) {
  std::mt19937_64 rng(4);
  const Dataset d = generate_dataset(3, rng, DatasetOptions{{}, 5, 200});
  ASSERT_FALSE(d.examples.empty());
  for (const auto& e : d.examples) EXPECT_TRUE(within_filter(e.sample, {}));

  const auto log = constant_velocity_log(
      {vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 49.7, Lane::Main, 2.5), vehicle(3, 41, Lane::Merge, 2.5)}, 10);
  const RoadGeometry road = make_merge_road();
  EXPECT_TRUE(within_filter(build_sample(log, 1, road), {}));
  EXPECT_FALSE(within_filter(build_sample(log, 2, road), {}));  // no leader
  EXPECT_FALSE(within_filter(build_sample(log, 3, road), {}));  // merge lane
  WindowFilter no_merger;
  no_merger.require_interaction = false;
  const auto alone = constant_velocity_log({vehicle(1, 40, Lane::Main, 2.5), vehicle(2, 49.7, Lane::Main, 2.5)}, 10);
  EXPECT_FALSE(within_filter(build_sample(alone, 1, road), {}));
  EXPECT_TRUE(within_filter(build_sample(alone, 1, road), no_merger));
}

}  // namespace
}  // namespace mergebench
