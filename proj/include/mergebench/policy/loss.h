#pragma once

#include <vector>

#include <Eigen/Core>

namespace mergebench {

// Frame weight e^{(t - 40) / t} + 1 for t in 1..40; frame index k (0-based)
// corresponds to t = k + 1. Throws ValidationError outside 1..40.
double lambda_weight(int t);

struct LossBreakdown {
  double l_tar = 0.0;
  double l_aux = 0.0;
  double total = 0.0;
  double gamma1 = 1.0;
  double gamma2 = 0.5;
};

struct LossGradients {
  Eigen::MatrixXd d_target;
  std::vector<Eigen::MatrixXd> d_aux;
};

// l_tar = (1/40) sum_t lambda(t) |pred(t) - gt(t)|^2 over (x, y, theta, speed);
// l_aux = mean over valid vehicles of (1/40) sum_t |aux(t) - aux_gt(t)|^2;
// total = gamma1 l_tar + gamma2 l_aux. `aux_valid` (optional) excludes rows
// without ground truth. Throws ShapeError on mismatched shapes.
LossBreakdown loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt, const std::vector<Eigen::MatrixXd>& aux_preds,
                   const std::vector<Eigen::MatrixXd>& aux_gts, double gamma1, double gamma2,
                   const std::vector<bool>& aux_valid = {}, LossGradients* grads = nullptr);

}  // namespace mergebench
