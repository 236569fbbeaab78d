#include "mergebench/policy/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mergebench/core/errors.h"

namespace mergebench {

namespace {

void zero(ModelWeights& w) {
  for_each_tensor(w, [](const std::string&, Eigen::MatrixXd& m) { m.setZero(); });
}

std::vector<Eigen::MatrixXd*> tensors(ModelWeights& w) {
  std::vector<Eigen::MatrixXd*> out;
  for_each_tensor(w, [&](const std::string&, Eigen::MatrixXd& m) { out.push_back(&m); });
  return out;
}

std::vector<const Eigen::MatrixXd*> tensors(const ModelWeights& w) {
  std::vector<const Eigen::MatrixXd*> out;
  for_each_tensor(w, [&](const std::string&, const Eigen::MatrixXd& m) { out.push_back(&m); });
  return out;
}

}  // namespace

Adam::Adam(const ModelWeights& like, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zero_weights(like.cfg)), v_(zero_weights(like.cfg)) {}

void Adam::step(ModelWeights& w, const ModelWeights& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  auto pw = tensors(w);
  auto pm = tensors(m_);
  auto pv = tensors(v_);
  auto pg = tensors(grad);
  for (std::size_t i = 0; i < pw.size(); ++i) {
    Eigen::MatrixXd& m = *pm[i];
    Eigen::MatrixXd& v = *pv[i];
    const Eigen::MatrixXd& g = *pg[i];
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseAbs2();
    pw[i]->array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

LossBreakdown batch_gradient(const ModelWeights& w, std::span<const TrainingExample* const> batch, double gamma1,
                             double gamma2, ModelWeights* grad) {
  if (grad != nullptr) {
    if (grad->cfg != w.cfg || grad->self_blocks.size() != w.self_blocks.size()) *grad = zero_weights(w.cfg);
    zero(*grad);
  }
  LossBreakdown sum;
  sum.gamma1 = gamma1;
  sum.gamma2 = gamma2;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const TrainingExample* ex : batch) {
    ForwardPass fp(w, encode_vehicles(ex->sample), encode_road(ex->sample));
    const ForwardOutput& out = fp.output();
    std::vector<Eigen::MatrixXd> aux_gt;
    aux_gt.reserve(ex->aux_future.size());
    for (const PlannedTrajectory& t : ex->aux_future) aux_gt.push_back(to_matrix(t));
    LossGradients lg;
    const LossBreakdown l =
        loss(out.target, to_matrix(ex->future), out.aux, aux_gt, gamma1, gamma2, ex->aux_valid, grad ? &lg : nullptr);
    sum.l_tar += l.l_tar * scale;
    sum.l_aux += l.l_aux * scale;
    if (grad != nullptr) {
      lg.d_target *= scale;
      for (auto& d : lg.d_aux) d *= scale;
      fp.backward(lg.d_target, lg.d_aux, *grad);
    }
  }
  sum.total = gamma1 * sum.l_tar + gamma2 * sum.l_aux;
  return sum;
}

LossBreakdown evaluate_loss(const ModelWeights& w, const std::vector<TrainingExample>& data, double gamma1,
                            double gamma2) {
  std::vector<const TrainingExample*> ptrs;
  for (const auto& ex : data) ptrs.push_back(&ex);
  return batch_gradient(w, ptrs, gamma1, gamma2, nullptr);
}

TrainResult train(const std::vector<TrainingExample>& data, const TrainConfig& cfg) {
  if (data.empty()) throw ValidationError("train: empty dataset");
  if (cfg.batch < 1 || cfg.epochs < 1 || !(cfg.lr > 0)) throw ValidationError("train: batch, epochs and lr must be positive");

  TrainResult r;
  r.weights = init_weights(cfg.model, cfg.seed);
  Adam adam(r.weights, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
  ModelWeights grad = zero_weights(cfg.model);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const int batches_per_epoch = static_cast<int>((data.size() + cfg.batch - 1) / cfg.batch);
  int total_steps = cfg.epochs * batches_per_epoch;
  if (cfg.max_steps > 0) total_steps = std::min(total_steps, cfg.max_steps);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0, l_tar = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      if (cfg.max_steps > 0 && r.steps >= cfg.max_steps) break;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<const TrainingExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&data[order[i]]);
      const LossBreakdown l = batch_gradient(r.weights, batch, cfg.gamma1, cfg.gamma2, &grad);
      if (!std::isfinite(l.total)) {
        throw DivergenceError("training diverged at step " + std::to_string(r.steps) + ": loss is not finite");
      }
      if (cfg.cosine_decay) {
        const double progress = static_cast<double>(r.steps) / std::max(1, total_steps - 1);
        adam.set_lr(cfg.lr * (cfg.lr_floor + (1.0 - cfg.lr_floor) * 0.5 * (1.0 + std::cos(M_PI * progress))));
      }
      adam.step(r.weights, grad);
      ++r.steps;
      total += l.total;
      l_tar += l.l_tar;
      ++batches;
    }
    if (batches == 0) break;
    r.epoch_loss.push_back(total / batches);
    r.epoch_l_tar.push_back(l_tar / batches);
  }
  return r;
}

}  // namespace mergebench
