#pragma once

#include <string>

#include "mergebench/eval/suggestions.h"

namespace mergebench {

struct LlmEndpointConfig {
  // e.g. "http://127.0.0.1:8080/v1"; /chat/completions is appended.
  std::string base_url;
  std::string model;
  // Name of the environment variable holding the bearer token. When the
  // variable is unset no Authorization header is sent.
  std::string token_env = "MERGEBENCH_LLM_TOKEN";
  double timeout_s = 30.0;
  int max_retries = 2;
  // Sleep before retry i is initial_backoff_s * 2^i.
  double initial_backoff_s = 0.5;
};

// Throws ConfigError on a malformed URL, negative retries or timeout <= 0.
void validate(const LlmEndpointConfig& cfg);

// Request body for the chat completions endpoint.
std::string build_request_body(const LlmEndpointConfig& cfg, const std::string& prompt);

// Parses assistant text containing a fenced JSON verdict (a bare JSON object
// is also accepted). Throws ParseError carrying the raw text when no valid
// object with a numeric "score" is found. Scores outside [0, 10] are clamped
// and flagged.
EvalResult parse_llm_verdict(const std::string& content);

// POSTs the prompt, retrying transport failures and 5xx responses with
// exponential backoff. Throws TransportError once retries are exhausted (or
// on a 4xx), ParseError on an unusable response.
EvalResult evaluate_llm(const LlmEndpointConfig& cfg, const std::string& prompt);

}  // namespace mergebench
