#include "mergebench/scenario/gmm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "mergebench/core/errors.h"

namespace mergebench {

FeaturePoint to_point(const ScenarioFeatures& f) { return {f.avg_speed, f.avg_gap}; }

void validate(const GmmModel& m) {
  const int k = m.k();
  if (k < 1 || static_cast<int>(m.means.size()) != k || static_cast<int>(m.covariances.size()) != k) {
    throw ValidationError("GMM component arrays have inconsistent sizes");
  }
  const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("GMM weights do not sum to one");
  for (int j = 0; j < k; ++j) {
    if (m.weights[j] < 0.0) throw ValidationError("GMM weight is negative");
    const Eigen::Matrix2d& c = m.covariances[j];
    if (std::abs(c(0, 1) - c(1, 0)) > 1e-12 * (1.0 + c.cwiseAbs().maxCoeff())) {
      throw ValidationError("GMM covariance is not symmetric");
    }
    if (!(c.determinant() > 0.0) || !(c(0, 0) > 0.0)) throw ValidationError("GMM covariance is not positive definite");
  }
}

namespace {

// log N(x; mean, cov) for a 2-D Gaussian.
double log_gaussian(const Eigen::Vector2d& x, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  const double det = cov.determinant();
  const Eigen::Vector2d d = x - mean;
  const double maha = d.dot(cov.inverse() * d);
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * maha;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Weighted log densities, one row per point.
Eigen::MatrixXd log_joint(const GmmModel& m, std::span<const FeaturePoint> points) {
  const int n = static_cast<int>(points.size());
  const int k = m.k();
  Eigen::MatrixXd lj(n, k);
  for (int j = 0; j < k; ++j) {
    const double lw = m.weights[j] > 0.0 ? std::log(m.weights[j]) : -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) lj(i, j) = lw + log_gaussian(points[i], m.means[j], m.covariances[j]);
  }
  return lj;
}

// E-step: fills responsibilities and returns the total log-likelihood.
double expectation(const GmmModel& m, std::span<const FeaturePoint> points, Eigen::MatrixXd& resp) {
  resp = log_joint(m, points);
  double ll = 0.0;
  for (int i = 0; i < resp.rows(); ++i) {
    const Eigen::VectorXd row = resp.row(i).transpose();
    const double lse = log_sum_exp(row);
    ll += lse;
    resp.row(i) = (row.array() - lse).exp().transpose();
  }
  return ll;
}

void maximization(std::span<const FeaturePoint> points, const Eigen::MatrixXd& resp, double reg, GmmModel& m) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(resp.cols());
  for (int j = 0; j < k; ++j) {
    double nk = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
      nk += resp(i, j);
      mean += resp(i, j) * points[i];
    }
    m.weights[j] = nk / n;
    if (nk <= 0.0) continue;  // empty component keeps its previous shape with zero weight
    mean /= nk;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d d = points[i] - mean;
      cov += resp(i, j) * d * d.transpose();
    }
    cov /= nk;
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    cov.diagonal().array() += reg;
    m.means[j] = mean;
    m.covariances[j] = cov;
  }
}

std::vector<int> kmeans_pp_seeds(std::span<const FeaturePoint> points, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(points.size());
  std::vector<int> seeds;
  seeds.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(seeds.size()) < k) {
    const FeaturePoint& last = points[seeds.back()];
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points[i] - last).squaredNorm());
      total += d2[i];
    }
    int pick = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2[pick];
        if (u < 0.0) break;
      }
    } else {
      // All points coincide with chosen seeds; any index works.
      pick = static_cast<int>(seeds.size()) % n;
    }
    seeds.push_back(pick);
  }
  return seeds;
}

}  // namespace

GmmFit fit_gmm(std::span<const FeaturePoint> points, const GmmFitOptions& options) {
  const int n = static_cast<int>(points.size());
  const int k = options.k;
  if (k < 1) throw ValidationError("fit_gmm: k must be at least 1");
  if (k > n) throw ValidationError("fit_gmm: k (" + std::to_string(k) + ") exceeds the number of points (" +
                                   std::to_string(n) + ")");

  std::mt19937_64 rng(options.seed);
  const std::vector<int> seeds = kmeans_pp_seeds(points, k, rng);

  // Hard assignment to the nearest seed gives the initial responsibilities.
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const double d = (points[i] - points[seeds[j]]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    resp(i, best) = 1.0;
  }

  GmmFit fit;
  GmmModel& m = fit.model;
  m.weights.assign(k, 0.0);
  m.means.assign(k, Eigen::Vector2d::Zero());
  m.covariances.assign(k, Eigen::Matrix2d::Identity());
  for (int j = 0; j < k; ++j) m.means[j] = points[seeds[j]];
  maximization(points, resp, options.regularization, m);

  double ll = expectation(m, points, resp);
  fit.log_likelihood_history.push_back(ll);
  for (int it = 0; it < options.max_iter; ++it) {
    maximization(points, resp, options.regularization, m);
    const double next = expectation(m, points, resp);
    fit.log_likelihood_history.push_back(next);
    fit.iterations = it + 1;
    const double gain = (next - ll) / n;
    ll = next;
    if (gain < options.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.log_likelihood = ll;
  fit.responsibilities = std::move(resp);
  return fit;
}

Eigen::VectorXd responsibilities(const GmmModel& model, const FeaturePoint& x) {
  Eigen::MatrixXd resp;
  const FeaturePoint pts[1] = {x};
  expectation(model, pts, resp);
  return resp.row(0).transpose();
}

double log_likelihood(const GmmModel& model, std::span<const FeaturePoint> points) {
  Eigen::MatrixXd resp;
  return expectation(model, points, resp);
}

std::vector<DensityClass> component_classes(const GmmModel& model) {
  if (model.k() != 3) throw ValidationError("classify requires a 3-component model, got k=" + std::to_string(model.k()));
  std::vector<int> order(3);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return model.means[a](1) < model.means[b](1); });
  std::vector<DensityClass> classes(3);
  for (int rank = 0; rank < 3; ++rank) classes[order[rank]] = kAllDensities[rank];
  return classes;
}

DensityClass classify(const GmmModel& model, const ScenarioFeatures& features) {
  const std::vector<DensityClass> classes = component_classes(model);
  const FeaturePoint pts[1] = {to_point(features)};
  const Eigen::MatrixXd lj = log_joint(model, pts);
  Eigen::Index best = 0;
  lj.row(0).maxCoeff(&best);
  return classes[best];
}

DensityClass classify(const GmmModel& model, const Scenario& s) { return classify(model, scenario_features(s)); }

const GmmModel& default_density_model() {
  static const GmmModel model = [] {
    std::vector<FeaturePoint> pts;
    for (DensityClass d : kAllDensities) {
      for (std::uint64_t i = 0; i < 100; ++i) pts.push_back(to_point(scenario_features(sample_scenario(9000 + i, d))));
    }
    GmmFitOptions opt;
    opt.seed = 17;
    return fit_gmm(pts, opt).model;
  }();
  return model;
}

std::string gmm_to_json(const GmmModel& m, double ll) {
  nlohmann::ordered_json j;
  j["k"] = m.k();
  j["features"] = {"avg_speed", "avg_gap"};
  j["weights"] = m.weights;
  auto means = nlohmann::ordered_json::array();
  auto covs = nlohmann::ordered_json::array();
  for (int c = 0; c < m.k(); ++c) {
    means.push_back({m.means[c](0), m.means[c](1)});
    const Eigen::Matrix2d& s = m.covariances[c];
    covs.push_back({{s(0, 0), s(0, 1)}, {s(1, 0), s(1, 1)}});
  }
  j["means"] = means;
  j["covariances"] = covs;
  j["log_likelihood"] = ll;
  return j.dump(2) + "\n";
}

GmmModel gmm_from_json(const std::string& text) {
  GmmModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const char* key : {"weights", "means", "covariances"}) {
      if (!j.contains(key)) throw ParseError(std::string("GMM file: missing key '") + key + "'");
    }
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& mu : j.at("means")) m.means.emplace_back(mu.at(0).get<double>(), mu.at(1).get<double>());
    for (const auto& c : j.at("covariances")) {
      Eigen::Matrix2d s;
      s << c.at(0).at(0).get<double>(), c.at(0).at(1).get<double>(), c.at(1).at(0).get<double>(),
          c.at(1).at(1).get<double>();
      m.covariances.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("GMM file: ") + e.what(), text);
  }
  validate(m);
  return m;
}

GmmModel load_gmm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open GMM file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return gmm_from_json(ss.str());
}

}  // namespace mergebench
