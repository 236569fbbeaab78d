#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mergebench/policy/dataset.h"
#include "mergebench/policy/loss.h"
#include "mergebench/policy/model.h"

namespace mergebench {

struct TrainConfig {
  ModelConfig model;
  double lr = 3e-3;
  int batch = 16;
  int epochs = 10;
  // Stops after this many optimizer steps when > 0, regardless of epochs.
  int max_steps = 0;
  double gamma1 = 1.0;
  double gamma2 = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Cosine-anneal the step size from lr down to lr_floor * lr.
  bool cosine_decay = true;
  double lr_floor = 0.02;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ModelWeights weights;
  // Mean total / target loss over the batches of each epoch.
  std::vector<double> epoch_loss;
  std::vector<double> epoch_l_tar;
  int steps = 0;
};

// Adam moment state, one pair of tensors per weight tensor.
class Adam {
 public:
  Adam(const ModelWeights& like, double lr, double beta1, double beta2, double eps);
  void step(ModelWeights& w, const ModelWeights& grad);
  void set_lr(double lr) { lr_ = lr; }
  int steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  ModelWeights m_, v_;
};

// Mean loss over `batch`; parameter gradients of that mean are written to
// *grad when non-null (same shapes as w, overwritten).
LossBreakdown batch_gradient(const ModelWeights& w, std::span<const TrainingExample* const> batch, double gamma1,
                             double gamma2, ModelWeights* grad);

// Mini-batch Adam, reshuffling every epoch from `seed`. Deterministic for a
// given config. Throws ValidationError on an empty dataset and
// DivergenceError on a non-finite loss.
TrainResult train(const std::vector<TrainingExample>& data, const TrainConfig& cfg);

// Mean loss of `w` over `data`.
LossBreakdown evaluate_loss(const ModelWeights& w, const std::vector<TrainingExample>& data, double gamma1,
                            double gamma2);

}  // namespace mergebench
