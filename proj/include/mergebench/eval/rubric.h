#pragma once

#include "mergebench/eval/prompt.h"
#include "mergebench/eval/suggestions.h"

namespace mergebench {

// Component scores in [0, 1]; internal to the rubric but exposed for tests.
struct RubricComponents {
  double safety = 0.0;
  double efficiency = 0.0;
  double comfort = 0.0;
};

struct ModeWeights {
  double safety, efficiency, comfort;
};

// Hurry .4/.4/.2, Medium .4/.3/.3, Relax .4/.2/.4.
ModeWeights mode_weights(DriveMode mode);

// safety = min(1, min_gap / (avg_speed * safe_time_gap)), 1 when standing.
// efficiency = mean of a time term (1 at or below time_band_low, 0 at or above
// time_band_high, linear between) and a speed term (1 inside the band around
// others' speed, falling off linearly outside); 0 unless merged or collided.
// comfort = 0.5 min(1, 0.5 jmax / avg_jerk) + 0.5 min(1, jmax / max_jerk).
RubricComponents rubric_components(const EpisodeMetrics& m, const PriorKnowledge& p);

// 10 * weighted sum of the components. Collisions cap the score at 1.
double rubric_score(const RubricComponents& c, DriveMode mode, bool collision);

// Deterministic offline evaluator with the same result shape as the LLM.
EvalResult evaluate_rubric(const EpisodeMetrics& m, const PriorKnowledge& p, DriveMode mode);

}  // namespace mergebench
