#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace mergebench {

// Canonical improvement suggestions; Other collects unmatched free text.
enum class SuggestionId { EnhanceAwareness, SmoothAcceleration, ImproveGapSeeking, ReduceHesitation, MaintainSafeGap, Other };

inline constexpr std::array<SuggestionId, 6> kAllSuggestions = {
    SuggestionId::EnhanceAwareness, SuggestionId::SmoothAcceleration, SuggestionId::ImproveGapSeeking,
    SuggestionId::ReduceHesitation, SuggestionId::MaintainSafeGap,    SuggestionId::Other};

// Display phrase, e.g. "Smooth Acceleration".
std::string_view to_string(SuggestionId id);
// Accepts the display phrase (any case). Throws ParseError otherwise.
SuggestionId suggestion_from_string(std::string_view s);

// Maps free text onto the taxonomy: the first canonical phrase contained in
// the text (case-insensitive) wins; anything else is Other.
SuggestionId classify_suggestion(std::string_view text);

enum class EvalSource { Llm, Rubric };
std::string_view to_string(EvalSource s);
EvalSource eval_source_from_string(std::string_view s);

struct EvalResult {
  double score = 0.0;  // [0, 10]
  std::string analysis;
  std::vector<SuggestionId> suggestions;
  // Free text as produced, parallel to `suggestions`.
  std::vector<std::string> suggestion_texts;
  EvalSource source = EvalSource::Rubric;
  // Set when the evaluator's raw score was outside [0, 10] and was clamped.
  bool score_clamped = false;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

}  // namespace mergebench
