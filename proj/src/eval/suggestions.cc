#include "mergebench/eval/suggestions.h"

#include <algorithm>
#include <cctype>

#include "mergebench/core/errors.h"

namespace mergebench {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(SuggestionId id) {
  switch (id) {
    case SuggestionId::EnhanceAwareness:
      return "Enhance awareness";
    case SuggestionId::SmoothAcceleration:
      return "Smooth Acceleration";
    case SuggestionId::ImproveGapSeeking:
      return "Improve gap seeking";
    case SuggestionId::ReduceHesitation:
      return "Reduce hesitation";
    case SuggestionId::MaintainSafeGap:
      return "Maintain safe gap";
    case SuggestionId::Other:
      return "Other";
  }
  return "Other";
}

SuggestionId suggestion_from_string(std::string_view s) {
  const std::string l = lower(s);
  for (SuggestionId id : kAllSuggestions) {
    if (lower(to_string(id)) == l) return id;
  }
  throw ParseError("unknown suggestion '" + std::string(s) + "'");
}

SuggestionId classify_suggestion(std::string_view text) {
  const std::string l = lower(text);
  for (SuggestionId id : kAllSuggestions) {
    if (id == SuggestionId::Other) continue;
    if (l.find(lower(to_string(id))) != std::string::npos) return id;
  }
  return SuggestionId::Other;
}

std::string_view to_string(EvalSource s) { return s == EvalSource::Llm ? "llm" : "rubric"; }

EvalSource eval_source_from_string(std::string_view s) {
  if (s == "llm") return EvalSource::Llm;
  if (s == "rubric") return EvalSource::Rubric;
  throw ParseError("unknown evaluation source '" + std::string(s) + "'");
}

}  // namespace mergebench
