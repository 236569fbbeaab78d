#include "mergebench/policy/idm.h"

#include <algorithm>
#include <cmath>

#include "mergebench/core/errors.h"

namespace mergebench {

void validate(const IdmParams& p) {
  if (!(p.v0 > 0 && p.T > 0 && p.s0 > 0 && p.a_max > 0 && p.b > 0 && p.delta > 0 && p.lateral_gain > 0)) {
    throw ValidationError("IDM parameters must be positive");
  }
  if (!std::isfinite(p.offset_bias)) throw ValidationError("IDM offset_bias must be finite");
}

IdmParams style_params(StyleLabel label) {
  switch (label) {
    case StyleLabel::Offensive:
      return {3.0, 0.6, 0.8, 2.0, 2.5, 4.0, 0.25, -0.2};
    case StyleLabel::Friendly:
      return {3.0, 1.2, 1.5, 1.2, 2.0, 4.0, 0.10, -0.1};
    case StyleLabel::Long:
      return {2.2, 1.5, 2.0, 0.8, 1.5, 4.0, 0.03, 0.0};
  }
  return {};
}

IdmParams idm_baseline_params() { return {3.0, 1.0, 1.5, 1.5, 2.0, 4.0, 0.01, 0.0}; }

double idm_accel(double v, double v_lead, double gap, const IdmParams& p) {
  if (gap <= 0.0) return -kMaxAccel;
  const double free_term = std::pow(v / p.v0, p.delta);
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    const double dv = v - v_lead;
    const double s_star = p.s0 + std::max(0.0, v * p.T + v * dv / (2.0 * std::sqrt(p.a_max * p.b)));
    interaction = (s_star / gap) * (s_star / gap);
  }
  return std::clamp(p.a_max * (1.0 - free_term - interaction), -kMaxAccel, p.a_max);
}

}  // namespace mergebench
