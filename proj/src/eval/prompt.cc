#include "mergebench/eval/prompt.h"

#include <cstdio>

#include "mergebench/core/errors.h"

namespace mergebench {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string mode_clause(DriveMode mode) {
  switch (mode) {
    case DriveMode::Hurry:
      return "Drive mode: hurry. The occupant is in a hurry, so efficiency matters more than comfort.";
    case DriveMode::Medium:
      return "Drive mode: medium. The occupant has no particular preference between efficiency and comfort.";
    case DriveMode::Relax:
      return "Drive mode: relax. The occupant is relaxed, so comfort matters more than efficiency.";
  }
  return {};
}

}  // namespace

void validate(const PriorKnowledge& p) {
  const bool positive = p.comfort_accel_max > 0 && p.comfort_jerk_max > 0 && p.speed_band_low > 0 &&
                        p.speed_band_high > 0 && p.safe_time_gap > 0 && p.time_band_low > 0 && p.time_band_high > 0;
  if (!positive) throw ValidationError("prior knowledge values must be positive");
  if (!(p.speed_band_low < p.speed_band_high) || !(p.time_band_low < p.time_band_high)) {
    throw ValidationError("prior knowledge bands must be ordered low < high");
  }
}

const std::string& system_prompt() {
  static const std::string s =
      "You are an expert driving evaluator. You assess how an automated vehicle merged from an on-ramp into dense "
      "main-lane traffic and respond only in the requested format.";
  return s;
}

std::string build_prompt(const EpisodeMetrics& m, const PriorKnowledge& p, DriveMode mode) {
  std::string out;
  out += "Evaluate the following merging maneuver in dense traffic.\n\n";
  out += "Merging vehicle:\n";
  out += "- Outcome: " + std::string(to_string(m.outcome.kind)) + "\n";
  out += "- Total time: " + num(m.total_time) + " s\n";
  out += "- Average speed: " + num(m.avg_speed) + " m/s\n";
  out += "- Merging point: " + (m.merging_point_x ? num(*m.merging_point_x) + " m" : std::string("not reached")) + "\n";
  out += "- Average jerk: " + num(m.avg_jerk) + " m/s^3\n";
  out += "- Max jerk: " + num(m.max_jerk) + " m/s^3\n";
  out += "- Average distance to other vehicles: " + num(m.avg_gap) + " m\n";
  out += "- Minimum distance to other vehicles: " + num(m.min_gap) + " m\n\n";
  out += "Main-lane traffic:\n";
  out += "- Others average speed: " + num(m.others_avg_speed) + " m/s\n\n";
  out += "Reference values:\n";
  out += "- Comfortable acceleration range: |a| <= " + num(p.comfort_accel_max) + " m/s^2\n";
  out += "- Comfortable jerk: <= " + num(p.comfort_jerk_max) + " m/s^3\n";
  out += "- Efficient speed range: " + num(p.speed_band_low) + "x to " + num(p.speed_band_high) +
         "x the others average speed\n";
  out += "- Safe time gap to other vehicles: " + num(p.safe_time_gap) + " s\n";
  out += "- Efficient total merging time: " + num(p.time_band_low) + " s to " + num(p.time_band_high) + " s\n\n";
  out += mode_clause(mode) + "\n\n";
  out += "Analyze the maneuver from three perspectives: safety, comfort, and efficiency. "
         "Do not assign individual scores to each perspective; give one comprehensive overall score from 0 to 10. "
         "Then suggest potential improvements for the merging method.\n\n";
  out += "Reply with exactly one fenced JSON object:\n";
  out += "```json\n{\"score\": number, \"analysis\": string, \"suggestions\": [string]}\n```\n";
  return out;
}

}  // namespace mergebench
