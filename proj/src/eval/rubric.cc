#include "mergebench/eval/rubric.h"

#include <algorithm>
#include <cstdio>

namespace mergebench {

ModeWeights mode_weights(DriveMode mode) {
  switch (mode) {
    case DriveMode::Hurry:
      return {0.4, 0.4, 0.2};
    case DriveMode::Medium:
      return {0.4, 0.3, 0.3};
    case DriveMode::Relax:
      return {0.4, 0.2, 0.4};
  }
  return {0.4, 0.3, 0.3};
}

namespace {

double safe_gap(const EpisodeMetrics& m, const PriorKnowledge& p) { return m.avg_speed * p.safe_time_gap; }

double time_term(double t, const PriorKnowledge& p) {
  return std::clamp((p.time_band_high - t) / (p.time_band_high - p.time_band_low), 0.0, 1.0);
}

double speed_term(const EpisodeMetrics& m, const PriorKnowledge& p) {
  if (m.others_avg_speed <= 0.0) return 1.0;
  const double r = m.avg_speed / m.others_avg_speed;
  if (r < p.speed_band_low) return std::max(0.0, r / p.speed_band_low);
  if (r > p.speed_band_high) return std::max(0.0, 1.0 - (r - p.speed_band_high) / p.speed_band_high);
  return 1.0;
}

}  // namespace

RubricComponents rubric_components(const EpisodeMetrics& m, const PriorKnowledge& p) {
  RubricComponents c;
  const double gap = safe_gap(m, p);
  c.safety = gap > 1e-9 ? std::min(1.0, m.min_gap / gap) : 1.0;

  const OutcomeKind k = m.outcome.kind;
  if (k == OutcomeKind::Merged || k == OutcomeKind::Collision) {
    c.efficiency = 0.5 * time_term(m.total_time, p) + 0.5 * speed_term(m, p);
  }

  const double jmax = p.comfort_jerk_max;
  const double avg_part = m.avg_jerk > 0.0 ? std::min(1.0, 0.5 * jmax / m.avg_jerk) : 1.0;
  const double max_part = m.max_jerk > 0.0 ? std::min(1.0, jmax / m.max_jerk) : 1.0;
  c.comfort = 0.5 * avg_part + 0.5 * max_part;
  return c;
}

double rubric_score(const RubricComponents& c, DriveMode mode, bool collision) {
  const ModeWeights w = mode_weights(mode);
  const double s = 10.0 * (w.safety * c.safety + w.efficiency * c.efficiency + w.comfort * c.comfort);
  return std::clamp(collision ? std::min(s, 1.0) : s, 0.0, 10.0);
}

EvalResult evaluate_rubric(const EpisodeMetrics& m, const PriorKnowledge& p, DriveMode mode) {
  validate(p);
  const RubricComponents c = rubric_components(m, p);
  const OutcomeKind k = m.outcome.kind;
  EvalResult r;
  r.source = EvalSource::Rubric;
  r.score = rubric_score(c, mode, k == OutcomeKind::Collision);

  auto suggest = [&](SuggestionId id) {
    r.suggestions.push_back(id);
    r.suggestion_texts.emplace_back(to_string(id));
  };
  if (k == OutcomeKind::Collision) suggest(SuggestionId::MaintainSafeGap);
  if (m.min_gap < safe_gap(m, p)) suggest(SuggestionId::EnhanceAwareness);
  if (c.comfort < 0.5) suggest(SuggestionId::SmoothAcceleration);
  if (k == OutcomeKind::Timeout || k == OutcomeKind::Stagnation) suggest(SuggestionId::ImproveGapSeeking);

  char buf[256];
  std::snprintf(buf, sizeof buf, "Outcome %s after %.2f s at %.2f m/s average speed (traffic %.2f m/s), %s mode.",
                std::string(to_string(k)).c_str(), m.total_time, m.avg_speed, m.others_avg_speed,
                std::string(to_string(mode)).c_str());
  r.analysis = buf;
  return r;
}

}  // namespace mergebench
