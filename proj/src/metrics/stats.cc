#include "mergebench/metrics/stats.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace mergebench {

namespace {

void check(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("series lengths differ: " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw ValidationError("need at least two observations");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check(xs, ys);
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw UndefinedCorrelation("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mse(std::span<const double> xs, std::span<const double> ys) {
  check(xs, ys);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  return s / static_cast<double>(xs.size());
}

}  // namespace mergebench
