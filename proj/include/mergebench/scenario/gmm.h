#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mergebench/scenario/scenario.h"

namespace mergebench {

// Feature point (average speed m/s, average gap m).
using FeaturePoint = Eigen::Vector2d;

FeaturePoint to_point(const ScenarioFeatures& f);

struct GmmModel {
  std::vector<double> weights;
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covariances;

  int k() const { return static_cast<int>(weights.size()); }
};

// Throws ValidationError unless weights sum to 1 +- 1e-9 and every
// covariance is symmetric with positive determinant.
void validate(const GmmModel& model);

struct GmmFitOptions {
  int k = 3;
  int max_iter = 200;
  // Stop when the mean per-point log-likelihood improves by less than this.
  double tol = 1e-8;
  // Added to the covariance diagonal after every M-step.
  double regularization = 1e-6;
  std::uint64_t seed = 0;
};

struct GmmFit {
  GmmModel model;
  // Total log-likelihood of the returned model.
  double log_likelihood = 0.0;
  // Total log-likelihood evaluated before each M-step, then the final value.
  std::vector<double> log_likelihood_history;
  // n x k, rows sum to one, for the returned model.
  Eigen::MatrixXd responsibilities;
  int iterations = 0;
  bool converged = false;
};

// Expectation-maximization with k-means++ seeding and full covariances.
// Throws ValidationError when k < 1 or k exceeds the number of points.
GmmFit fit_gmm(std::span<const FeaturePoint> points, const GmmFitOptions& options = {});

// Posterior component probabilities for one point.
Eigen::VectorXd responsibilities(const GmmModel& model, const FeaturePoint& x);

double log_likelihood(const GmmModel& model, std::span<const FeaturePoint> points);

// Component index -> density class, assigned by ascending mean gap.
// Throws ValidationError unless k == 3.
std::vector<DensityClass> component_classes(const GmmModel& model);

DensityClass classify(const GmmModel& model, const ScenarioFeatures& features);
DensityClass classify(const GmmModel& model, const Scenario& s);

// Built-in classifier: fitted once on scenarios drawn from the default
// sampler (100 per class, fixed seed).
const GmmModel& default_density_model();

std::string gmm_to_json(const GmmModel& model, double log_likelihood = 0.0);
GmmModel gmm_from_json(const std::string& text);
GmmModel load_gmm(const std::filesystem::path& path);

}  // namespace mergebench
