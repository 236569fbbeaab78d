#pragma once

#include "mergebench/core/types.h"

namespace mergebench {

struct IdmParams {
  double v0 = 3.0;       // desired speed, m/s
  double T = 1.2;        // time headway, s
  double s0 = 1.5;       // jam gap, m
  double a_max = 1.2;    // m/s^2
  double b = 2.0;        // comfortable deceleration, m/s^2
  double delta = 4.0;
  double lateral_gain = 0.1;
  double offset_bias = 0.0;  // m, negative toward the merge side

  friend bool operator==(const IdmParams&, const IdmParams&) = default;
};

// Throws ValidationError unless every field except offset_bias is positive.
void validate(const IdmParams& p);

// Calibrated per-style parameters for the rule-based environment.
IdmParams style_params(StyleLabel label);

// Uniform parameters of the plain IDM environment.
IdmParams idm_baseline_params();

// Intelligent Driver Model:
//   a = a_max [1 - (v/v0)^delta - (s*/gap)^2],
//   s* = s0 + max(0, v T + v dv / (2 sqrt(a_max b))),  dv = v - v_lead.
// A missing leader is gap = +inf. Result clipped to [-8, a_max]; gap <= 0
// returns the -8 m/s^2 emergency value.
double idm_accel(double v, double v_lead, double gap, const IdmParams& p);

}  // namespace mergebench
