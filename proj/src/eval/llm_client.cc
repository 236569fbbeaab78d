#include "mergebench/eval/llm_client.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

// Project headers (which pull in Eigen) must precede httplib: <resolv.h>
// defines a _res macro that collides with Eigen parameter names.
#include "mergebench/core/errors.h"
#include "mergebench/eval/prompt.h"

#include <httplib.h>
#include <json.hpp>

namespace mergebench {

using Json = nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // full request path
};

Endpoint split_url(const std::string& base) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base, m, re)) throw ConfigError("invalid LLM base URL '" + base + "'");
  std::string path = m[2].matched ? m[2].str() : std::string();
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path + "/chat/completions"};
}

}  // namespace

void validate(const LlmEndpointConfig& cfg) {
  split_url(cfg.base_url);
  if (cfg.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(cfg.timeout_s > 0)) throw ConfigError("timeout must be > 0");
  if (!(cfg.initial_backoff_s >= 0)) throw ConfigError("backoff must be >= 0");
}

std::string build_request_body(const LlmEndpointConfig& cfg, const std::string& prompt) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model;
  j["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", system_prompt()}}, {{"role", "user"}, {"content", prompt}}});
  j["temperature"] = 0;
  return j.dump();
}

EvalResult parse_llm_verdict(const std::string& content) {
  std::string body;
  static const std::regex fence(R"(```(?:json|JSON)?\s*\n?([\s\S]*?)```)");
  std::smatch m;
  if (std::regex_search(content, m, fence)) {
    body = m[1].str();
  } else {
    const auto open = content.find('{');
    const auto close = content.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw ParseError("evaluator response has no JSON object", content);
    }
    body = content.substr(open, close - open + 1);
  }
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("evaluator JSON is malformed: ") + e.what(), content);
  }
  if (!j.is_object() || !j.contains("score") || !j["score"].is_number()) {
    throw ParseError("evaluator JSON lacks a numeric score", content);
  }
  EvalResult r;
  r.source = EvalSource::Llm;
  const double raw = j["score"].get<double>();
  if (!std::isfinite(raw)) throw ParseError("evaluator score is not finite", content);
  r.score = std::clamp(raw, 0.0, 10.0);
  r.score_clamped = r.score != raw;
  if (j.contains("analysis") && j["analysis"].is_string()) r.analysis = j["analysis"].get<std::string>();
  if (j.contains("suggestions")) {
    if (!j["suggestions"].is_array()) throw ParseError("evaluator suggestions must be a list", content);
    for (const auto& s : j["suggestions"]) {
      if (!s.is_string()) throw ParseError("evaluator suggestions must be strings", content);
      r.suggestion_texts.push_back(s.get<std::string>());
      r.suggestions.push_back(classify_suggestion(r.suggestion_texts.back()));
    }
  }
  return r;
}

EvalResult evaluate_llm(const LlmEndpointConfig& cfg, const std::string& prompt) {
  validate(cfg);
  const Endpoint ep = split_url(cfg.base_url);
  httplib::Client cli(ep.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(cfg.timeout_s));
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char* token = std::getenv(cfg.token_env.c_str()); token != nullptr && *token != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = build_request_body(cfg, prompt);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(cfg.initial_backoff_s * std::pow(2.0, attempt - 1)));
    }
    auto res = cli.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw TransportError("evaluator returned HTTP " + std::to_string(res->status));
    std::string content;
    try {
      const Json j = Json::parse(res->body);
      content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      throw ParseError(std::string("evaluator response envelope is malformed: ") + e.what(), res->body);
    }
    return parse_llm_verdict(content);
  }
  throw TransportError("evaluator unreachable after " + std::to_string(cfg.max_retries + 1) + " attempts (" +
                       last_error + ")");
}

}  // namespace mergebench
