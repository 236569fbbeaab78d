#include <chrono>
#include <cstdlib>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "mergebench/core/errors.h"
#include "mergebench/eval/llm_client.h"
#include "mergebench/eval/mock_llm_server.h"
#include "mergebench/eval/prompt.h"
#include "mergebench/eval/rubric.h"

namespace mergebench {
namespace {

const std::filesystem::path kLlmFixtures = std::filesystem::path(MERGEBENCH_FIXTURE_DIR) / "llm";

// Reference episode: merged in hurry mode.
EpisodeMetrics reference_episode() {
  EpisodeMetrics m;
  m.ticks = 88;
  m.total_time = 8.83;
  m.avg_speed = 4.53;
  m.merging_point_x = 124.87;
  m.avg_jerk = 0.01;
  m.max_jerk = 2.95;
  m.others_avg_speed = 4.41;
  m.avg_gap = 7.0;
  m.min_gap = 6.0;
  m.outcome.kind = OutcomeKind::Merged;
  m.drive_mode = DriveMode::Hurry;
  return m;
}

LlmEndpointConfig mock_config(const MockLlmServer& server, const std::string& model) {
  LlmEndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = model;
  cfg.token_env = "MERGEBENCH_TEST_TOKEN";
  cfg.timeout_s = 5.0;
  cfg.max_retries = 2;
  cfg.initial_backoff_s = 0.01;
  return cfg;
}

// ---- suggestions -------------------------------------------------------------

TEST(Suggestions, CanonicalPhrasesRoundTrip) {
  for (SuggestionId id : kAllSuggestions) EXPECT_EQ(suggestion_from_string(to_string(id)), id);
  EXPECT_EQ(suggestion_from_string("smooth acceleration"), SuggestionId::SmoothAcceleration);
  EXPECT_THROW(suggestion_from_string("fly"), ParseError);
}

TEST(Suggestions, ClassifyByPhraseContainment) {
  EXPECT_EQ(classify_suggestion("Smooth Acceleration"), SuggestionId::SmoothAcceleration);
  EXPECT_EQ(classify_suggestion("Please enhance awareness of rear traffic"), SuggestionId::EnhanceAwareness);
  EXPECT_EQ(classify_suggestion("Drive faster"), SuggestionId::Other);
}

// ---- prompt --------------------------------------------------------------------

TEST(Prompt, ContainsMetricValuesWithUnits) {
  const std::string p = build_prompt(reference_episode(), PriorKnowledge{}, DriveMode::Hurry);
  for (const char* s : {"8.83 s", "4.53 m/s", "124.87 m", "0.01 m/s^3", "2.95 m/s^3", "4.41 m/s", "hurry", "safety",
                        "comfort", "efficiency", "```json", "\"score\""}) {
    EXPECT_NE(p.find(s), std::string::npos) << s;
  }
  EXPECT_NE(p.find("2.50 m/s^2"), std::string::npos);
  EXPECT_NE(p.find("1.00 s"), std::string::npos);
}

TEST(Prompt, ModesDifferOnlyInModeClause) {
  const std::string h = build_prompt(reference_episode(), PriorKnowledge{}, DriveMode::Hurry);
  const std::string r = build_prompt(reference_episode(), PriorKnowledge{}, DriveMode::Relax);
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() || s[i] == '\n') {
        out.push_back(s.substr(start, i - start));
        start = i + 1;
      }
    }
    return out;
  };
  const auto lh = lines(h), lr = lines(r);
  ASSERT_EQ(lh.size(), lr.size());
  int diffs = 0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    if (lh[i] != lr[i]) {
      ++diffs;
      EXPECT_EQ(lh[i].rfind("Drive mode:", 0), 0u);
    }
  }
  EXPECT_EQ(diffs, 1);
  EXPECT_EQ(h, build_prompt(reference_episode(), PriorKnowledge{}, DriveMode::Hurry));
}

TEST(Prompt, PriorValidation) {
  PriorKnowledge p;
  p.speed_band_low = 2.0;
  EXPECT_THROW(validate(p), ValidationError);
  p = PriorKnowledge{};
  p.safe_time_gap = 0.0;
  EXPECT_THROW(validate(p), ValidationError);
}

// ---- rubric ----------------------------------------------------------------------

TEST(Rubric, SaturatedComponentsScoreTen) {
  for (DriveMode mode : {DriveMode::Hurry, DriveMode::Medium, DriveMode::Relax}) {
    EXPECT_NEAR(rubric_score({1.0, 1.0, 1.0}, mode, false), 10.0, 1e-12);
    const ModeWeights w = mode_weights(mode);
    EXPECT_NEAR(w.safety + w.efficiency + w.comfort, 1.0, 1e-12);
  }
}

TEST(Rubric, FasterMergeScoresHigher) {
  EpisodeMetrics faster = reference_episode();
  faster.total_time = 7.00;
  const double s1 = evaluate_rubric(reference_episode(), {}, DriveMode::Hurry).score;
  EXPECT_GT(evaluate_rubric(faster, {}, DriveMode::Hurry).score, s1);
  faster.avg_speed = 5.71;
  faster.merging_point_x = 110.0;
  EXPECT_GT(evaluate_rubric(faster, {}, DriveMode::Hurry).score, s1);
  EXPECT_GT(rubric_components(faster, {}).efficiency, rubric_components(reference_episode(), {}).efficiency);
}

TEST(Rubric, ModeSwitchFollowsComponentDifference) {
  const EpisodeMetrics m = reference_episode();
  const RubricComponents c = rubric_components(m, {});
  const double hurry = evaluate_rubric(m, {}, DriveMode::Hurry).score;
  const double relax = evaluate_rubric(m, {}, DriveMode::Relax).score;
  EXPECT_GT(c.comfort, c.efficiency);
  EXPECT_GT(relax, hurry);  // low jerk: relax mode rates this merge higher
}

TEST(Rubric, MaxJerkPenaltyLargerInRelax) {
  EpisodeMetrics lo = reference_episode();
  lo.avg_jerk = 0.3;
  lo.max_jerk = 0.5;
  EpisodeMetrics hi = lo;
  hi.max_jerk = 5.0;
  double drop[3];
  int i = 0;
  for (DriveMode mode : {DriveMode::Hurry, DriveMode::Medium, DriveMode::Relax}) {
    drop[i] = evaluate_rubric(lo, {}, mode).score - evaluate_rubric(hi, {}, mode).score;
    EXPECT_GT(drop[i], 0.0);
    ++i;
  }
  EXPECT_GT(drop[2], drop[0]);
}

TEST(Rubric, CollisionCapsAndSuggestions) {
  EpisodeMetrics m = reference_episode();
  m.outcome.kind = OutcomeKind::Collision;
  m.min_gap = 0.0;
  const EvalResult r = evaluate_rubric(m, {}, DriveMode::Medium);
  EXPECT_LE(r.score, 1.0);
  EXPECT_EQ(r.source, EvalSource::Rubric);
  EXPECT_NE(std::find(r.suggestions.begin(), r.suggestions.end(), SuggestionId::EnhanceAwareness), r.suggestions.end());

  m = reference_episode();
  m.outcome.kind = OutcomeKind::Timeout;
  m.merging_point_x.reset();
  const EvalResult t = evaluate_rubric(m, {}, DriveMode::Medium);
  EXPECT_EQ(rubric_components(m, {}).efficiency, 0.0);
  EXPECT_NE(std::find(t.suggestions.begin(), t.suggestions.end(), SuggestionId::ImproveGapSeeking), t.suggestions.end());

  m = reference_episode();
  m.avg_jerk = 3.0;
  m.max_jerk = 9.0;
  const EvalResult j = evaluate_rubric(m, {}, DriveMode::Medium);
  EXPECT_EQ(j.suggestions, std::vector<SuggestionId>{SuggestionId::SmoothAcceleration});
  EXPECT_EQ(j.suggestion_texts, std::vector<std::string>{"Smooth Acceleration"});
}

TEST(Rubric, BoundedAndMonotoneOnRandomMetrics) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const OutcomeKind kinds[] = {OutcomeKind::Merged, OutcomeKind::Collision, OutcomeKind::Timeout,
                               OutcomeKind::Stagnation};
  for (int i = 0; i < 1000; ++i) {
    EpisodeMetrics m;
    m.total_time = 30.0 * u(rng);
    m.avg_speed = 6.0 * u(rng);
    m.others_avg_speed = 6.0 * u(rng);
    m.avg_jerk = 5.0 * u(rng);
    m.max_jerk = m.avg_jerk + 10.0 * u(rng);
    m.min_gap = 8.0 * u(rng);
    m.avg_gap = m.min_gap + 5.0 * u(rng);
    m.outcome.kind = kinds[rng() % 4];
    for (DriveMode mode : {DriveMode::Hurry, DriveMode::Medium, DriveMode::Relax}) {
      const double s = evaluate_rubric(m, {}, mode).score;
      ASSERT_GE(s, 0.0);
      ASSERT_LE(s, 10.0);
      if (m.outcome.kind == OutcomeKind::Collision) ASSERT_LE(s, 1.0);
      EpisodeMetrics better = m;
      switch (rng() % 4) {
        case 0: better.min_gap += u(rng); break;
        case 1: better.max_jerk = m.avg_jerk + (m.max_jerk - m.avg_jerk) * u(rng); break;
        case 2: better.total_time *= u(rng); break;
        default: better.avg_jerk *= u(rng); break;
      }
      ASSERT_GE(evaluate_rubric(better, {}, mode).score, s - 1e-12) << i;
      const RubricComponents c = rubric_components(m, {});
      const double diff = evaluate_rubric(m, {}, DriveMode::Hurry).score - evaluate_rubric(m, {}, DriveMode::Relax).score;
      if (m.outcome.kind != OutcomeKind::Collision && std::abs(c.efficiency - c.comfort) > 1e-9) {
        ASSERT_EQ(diff > 0, c.efficiency > c.comfort) << i;
      }
    }
  }
}

// ---- LLM client -------------------------------------------------------------------

TEST(LlmVerdict, ParsesFencedAndBareJson) {
  EvalResult r = parse_llm_verdict("x\n```json\n{\"score\": 3, \"analysis\": \"a\", \"suggestions\": []}\n```");
  EXPECT_EQ(r.score, 3.0);
  EXPECT_EQ(r.source, EvalSource::Llm);
  r = parse_llm_verdict("{\"score\": -2}");
  EXPECT_EQ(r.score, 0.0);
  EXPECT_TRUE(r.score_clamped);
  try {
    parse_llm_verdict("no json here");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.raw(), "no json here");
  }
  EXPECT_THROW(parse_llm_verdict("{\"score\": \"high\"}"), ParseError);
}

TEST(LlmClient, RecordedFixtureParses) {
  MockLlmServer server(kLlmFixtures);
  setenv("MERGEBENCH_TEST_TOKEN", "sekret", 1);
  const std::string prompt = build_prompt(reference_episode(), {}, DriveMode::Hurry);
  const EvalResult r = evaluate_llm(mock_config(server, "score_6_7"), prompt);
  unsetenv("MERGEBENCH_TEST_TOKEN");
  EXPECT_DOUBLE_EQ(r.score, 6.7);
  EXPECT_EQ(r.suggestions, std::vector<SuggestionId>{SuggestionId::SmoothAcceleration});
  EXPECT_EQ(r.source, EvalSource::Llm);
  EXPECT_FALSE(r.score_clamped);
  EXPECT_EQ(server.last_authorization(), "Bearer sekret");
  const auto body = nlohmann::json::parse(server.last_body());
  EXPECT_EQ(body["model"], "score_6_7");
  EXPECT_EQ(body["temperature"], 0);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["role"], "user");
  EXPECT_EQ(body["messages"][1]["content"], prompt);
}

TEST(LlmClient, OverRangeIsClamped) {
  MockLlmServer server(kLlmFixtures);
  const EvalResult r = evaluate_llm(mock_config(server, "over_range"), "p");
  EXPECT_EQ(r.score, 10.0);
  EXPECT_TRUE(r.score_clamped);
  EXPECT_EQ(r.suggestions, (std::vector<SuggestionId>{SuggestionId::EnhanceAwareness, SuggestionId::Other}));
  EXPECT_EQ(server.last_authorization(), "");
}

TEST(LlmClient, MalformedRaisesParseErrorWithRawText) {
  MockLlmServer server(kLlmFixtures);
  try {
    evaluate_llm(mock_config(server, "malformed"), "p");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.raw().find("Smooth Acc"), std::string::npos);
  }
}

TEST(LlmClient, RetriesServerErrors) {
  MockLlmServer server(kLlmFixtures, 2);
  const EvalResult r = evaluate_llm(mock_config(server, "score_6_7"), "p");
  EXPECT_DOUBLE_EQ(r.score, 6.7);
  EXPECT_EQ(server.requests(), 3);
}

TEST(LlmClient, ExhaustedRetriesRaiseTransportError) {
  MockLlmServer server(kLlmFixtures, 10);
  EXPECT_THROW(evaluate_llm(mock_config(server, "score_6_7"), "p"), TransportError);
  EXPECT_EQ(server.requests(), 3);
}

TEST(LlmClient, ClientErrorsAreNotRetried) {
  MockLlmServer server(kLlmFixtures);
  EXPECT_THROW(evaluate_llm(mock_config(server, "no_such_fixture"), "p"), TransportError);
  EXPECT_EQ(server.requests(), 1);
}

TEST(LlmClient, UnreachableEndpointHonorsBudget) {
  int port;
  {
    MockLlmServer server(kLlmFixtures);
    port = server.port();
  }
  LlmEndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.model = "score_6_7";
  cfg.timeout_s = 1.0;
  cfg.max_retries = 1;
  cfg.initial_backoff_s = 0.05;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(evaluate_llm(cfg, "p"), TransportError);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, cfg.timeout_s * (cfg.max_retries + 1) + 0.05 + 0.5);
}

TEST(LlmClient, ConfigValidation) {
  LlmEndpointConfig cfg;
  cfg.base_url = "ftp://x";
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.base_url = "http://localhost:1/v1";
  cfg.max_retries = -1;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.max_retries = 0;
  cfg.timeout_s = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

}  // namespace
}  // namespace mergebench
