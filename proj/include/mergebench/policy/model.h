#pragma once

#include <cstdint>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mergebench/core/sample.h"
#include "mergebench/policy/trajectory.h"

namespace mergebench {

inline constexpr int kVehicleInputs = kHistoryFrames * kVehicleChannels;  // 130
inline constexpr int kRoadInputs = kRoadPoints * 2;                       // 40
inline constexpr int kOutputs = kFutureFrames * kOutputChannels;          // 160

struct ModelConfig {
  int d_model = 64;
  int self_layers = 2;
  int cross_layers = 2;
  int heads = 4;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws ValidationError on non-positive sizes or d_model % heads != 0.
void validate(const ModelConfig& cfg);

struct AttentionBlock {
  Eigen::MatrixXd wq, wk, wv, wo;  // d_model x d_model, no bias
};

// Row-vector convention throughout: y = x W + b.
struct ModelWeights {
  ModelConfig cfg;
  Eigen::MatrixXd vehicle_w;  // kVehicleInputs x D
  Eigen::MatrixXd vehicle_b;  // 1 x D
  Eigen::MatrixXd road_w;     // kRoadInputs x D
  Eigen::MatrixXd road_b;     // 1 x D
  std::vector<AttentionBlock> self_blocks;
  std::vector<AttentionBlock> cross_blocks;
  Eigen::MatrixXd out_w;  // D x kOutputs
  Eigen::MatrixXd out_b;  // 1 x kOutputs
  Eigen::MatrixXd aux_w;  // D x kOutputs
  Eigen::MatrixXd aux_b;  // 1 x kOutputs
};

// All-zero weights of the right shapes.
ModelWeights zero_weights(const ModelConfig& cfg);

// Xavier-uniform embedding and attention matrices, reproducible from `seed`.
// Biases and both output heads start at zero, so an untrained model predicts
// the degenerate hold-pose trajectory.
ModelWeights init_weights(const ModelConfig& cfg, std::uint64_t seed);

// Visits every tensor in a fixed declaration order (the serialization order).
void for_each_tensor(ModelWeights& w, const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
void for_each_tensor(const ModelWeights& w,
                     const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn);

// Throws ShapeError naming the first tensor whose shape disagrees with cfg.
void validate(const ModelWeights& w);

std::size_t parameter_count(const ModelWeights& w);

// Fixed per-channel divisors applied to inputs before the embedding, and
// multipliers applied to head outputs. Not trained.
const std::array<double, kVehicleChannels>& vehicle_input_scale();
double road_input_scale();
const std::array<double, kOutputChannels>& output_scale();

// Row 0 is the target (all 13 channels); rows 1.. are neighbors in sample
// order with their 5 channels and zeros elsewhere. Values are pre-scaled.
Eigen::MatrixXd encode_vehicles(const Sample& s);
// One row per polyline: x0, y0, x1, y1, ... pre-scaled.
Eigen::MatrixXd encode_road(const Sample& s);

struct Embeddings {
  Eigen::MatrixXd vehicles;  // N_v x D
  Eigen::MatrixXd road;      // kRoadPolylines x D
};

// Linear projections of encoded inputs. Throws ShapeError naming the
// expected and actual dimensions.
Embeddings embed(const ModelWeights& w, const Eigen::MatrixXd& vehicle_inputs, const Eigen::MatrixXd& road_inputs);
Embeddings embed(const ModelWeights& w, const Sample& s);

// Per-layer, per-head attention probabilities (rows sum to 1).
struct AttentionTrace {
  std::vector<std::vector<Eigen::MatrixXd>> self_attn;
  std::vector<std::vector<Eigen::MatrixXd>> cross_attn;
};

// Multi-head self-attention over vehicles, then cross-attention with
// vehicles as queries and road tokens as keys/values. Each block is followed
// by a residual connection and a parameter-free layer normalization. There
// is no positional encoding, so rows are treated as a set.
Eigen::MatrixXd attention_forward(const ModelWeights& w, const Eigen::MatrixXd& vehicles,
                                  const Eigen::MatrixXd& road, AttentionTrace* trace = nullptr);

// 40 x 4 matrix (x, y, theta, speed) <-> trajectory.
Eigen::MatrixXd to_matrix(const PlannedTrajectory& t);
PlannedTrajectory from_matrix(const Eigen::MatrixXd& m);

struct Prediction {
  PlannedTrajectory target;              // local frame of the sample
  std::vector<PlannedTrajectory> aux;    // one per vehicle row, same frame
};

Prediction predict(const ModelWeights& w, const Sample& s);

// Raw forward pass used for training: physical-unit output matrices.
struct ForwardOutput {
  Eigen::MatrixXd target;           // 40 x 4
  std::vector<Eigen::MatrixXd> aux; // N_v of 40 x 4
};

struct ForwardCache;  // opaque, owned by ForwardPass

class ForwardPass {
 public:
  ForwardPass(const ModelWeights& w, const Eigen::MatrixXd& vehicle_inputs, const Eigen::MatrixXd& road_inputs);
  ~ForwardPass();
  ForwardPass(ForwardPass&&) noexcept;
  ForwardPass& operator=(ForwardPass&&) noexcept;

  const ForwardOutput& output() const;

  // Accumulates parameter gradients into `grads` (same shapes as the
  // weights) given gradients of the loss w.r.t. the output matrices.
  void backward(const Eigen::MatrixXd& d_target, const std::vector<Eigen::MatrixXd>& d_aux,
                ModelWeights& grads) const;

 private:
  const ModelWeights* w_;
  std::unique_ptr<ForwardCache> cache_;
};

}  // namespace mergebench
