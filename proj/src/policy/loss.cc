#include "mergebench/policy/loss.h"

#include <cmath>
#include <string>

#include "mergebench/core/errors.h"
#include "mergebench/policy/trajectory.h"

namespace mergebench {

double lambda_weight(int t) {
  if (t < 1 || t > kFutureFrames) throw ValidationError("lambda_weight: t must be in 1..40, got " + std::to_string(t));
  return std::exp(static_cast<double>(t - kFutureFrames) / t) + 1.0;
}

namespace {

void check(const char* what, const Eigen::MatrixXd& m) {
  if (m.rows() != kFutureFrames || m.cols() != kOutputChannels) {
    throw ShapeError(std::string(what) + ": expected 40x4, got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
}

}  // namespace

LossBreakdown loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt, const std::vector<Eigen::MatrixXd>& aux_preds,
                   const std::vector<Eigen::MatrixXd>& aux_gts, double gamma1, double gamma2,
                   const std::vector<bool>& aux_valid, LossGradients* grads) {
  check("pred", pred);
  check("gt", gt);
  if (aux_preds.size() != aux_gts.size()) {
    throw ShapeError("aux: " + std::to_string(aux_preds.size()) + " predictions vs " + std::to_string(aux_gts.size()) +
                     " ground truths");
  }
  if (!aux_valid.empty() && aux_valid.size() != aux_preds.size()) throw ShapeError("aux_valid size mismatch");

  LossBreakdown out;
  out.gamma1 = gamma1;
  out.gamma2 = gamma2;
  const Eigen::MatrixXd err = pred - gt;
  if (grads != nullptr) grads->d_target.resize(kFutureFrames, kOutputChannels);
  for (int k = 0; k < kFutureFrames; ++k) {
    const double lam = lambda_weight(k + 1);
    out.l_tar += lam * err.row(k).squaredNorm();
    if (grads != nullptr) grads->d_target.row(k) = gamma1 * 2.0 * lam / kFutureFrames * err.row(k);
  }
  out.l_tar /= kFutureFrames;

  std::size_t valid = 0;
  for (std::size_t i = 0; i < aux_preds.size(); ++i) {
    check("aux pred", aux_preds[i]);
    check("aux gt", aux_gts[i]);
    if (aux_valid.empty() || aux_valid[i]) ++valid;
  }
  if (grads != nullptr) grads->d_aux.assign(aux_preds.size(), Eigen::MatrixXd::Zero(kFutureFrames, kOutputChannels));
  for (std::size_t i = 0; i < aux_preds.size(); ++i) {
    if (!aux_valid.empty() && !aux_valid[i]) continue;
    const Eigen::MatrixXd e = aux_preds[i] - aux_gts[i];
    out.l_aux += e.squaredNorm() / kFutureFrames;
    if (grads != nullptr) grads->d_aux[i] = gamma2 * 2.0 / (kFutureFrames * static_cast<double>(valid)) * e;
  }
  if (valid > 0) out.l_aux /= static_cast<double>(valid);
  out.total = gamma1 * out.l_tar + gamma2 * out.l_aux;
  return out;
}

}  // namespace mergebench
