#pragma once

#include <span>

#include "mergebench/core/errors.h"

namespace mergebench {

// Correlation requested for a series with zero variance.
class UndefinedCorrelation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Pearson correlation. Throws ValidationError unless both series have the
// same length >= 2, and UndefinedCorrelation when either variance is zero.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Mean squared difference. Same length requirements as pearson.
double mse(std::span<const double> xs, std::span<const double> ys);

}  // namespace mergebench
