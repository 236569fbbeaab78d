#include "mergebench/sim/env_policy.h"

#include "mergebench/core/errors.h"
#include "mergebench/policy/weights_io.h"

namespace mergebench {

std::string_view to_string(EnvPolicyKind k) {
  switch (k) {
    case EnvPolicyKind::RuleBased:
      return "rule";
    case EnvPolicyKind::Neural:
      return "neural";
    case EnvPolicyKind::IdmBaseline:
      return "idm";
  }
  return "rule";
}

EnvPolicyKind env_policy_from_string(std::string_view s) {
  if (s == "rule") return EnvPolicyKind::RuleBased;
  if (s == "neural") return EnvPolicyKind::Neural;
  if (s == "idm") return EnvPolicyKind::IdmBaseline;
  throw ConfigError("unknown env policy '" + std::string(s) + "' (expected rule|neural|idm)");
}

PlannedTrajectory RuleBasedEnv::plan(const Sample& sample, std::mt19937_64& rng) const {
  return rule_policy_plan(sample, style_params(sample.label), rng, cfg_);
}

PlannedTrajectory IdmBaselineEnv::plan(const Sample& sample, std::mt19937_64& rng) const {
  RulePolicyConfig cfg;
  cfg.accel_noise = 0.0;
  cfg.yield_to_mergers = false;
  cfg.lateral_behavior = false;
  return rule_policy_plan(sample, idm_baseline_params(), rng, cfg);
}

PlannedTrajectory NeuralEnv::plan(const Sample& sample, std::mt19937_64& rng) const {
  if (!uses_model(sample)) return fallback_.plan(sample, rng);
  return predict(*weights_, sample).target;
}

std::shared_ptr<const EnvPolicy> make_env_policy(const EnvPolicySpec& spec) {
  switch (spec.kind) {
    case EnvPolicyKind::RuleBased:
      return std::make_shared<RuleBasedEnv>(spec.rule);
    case EnvPolicyKind::IdmBaseline:
      return std::make_shared<IdmBaselineEnv>();
    case EnvPolicyKind::Neural:
      if (spec.weights_path.empty()) throw ConfigError("neural env policy requires a weights file");
      if (!std::filesystem::exists(spec.weights_path)) {
        throw ConfigError("weights file not found: " + spec.weights_path.string());
      }
      return std::make_shared<NeuralEnv>(std::make_shared<const ModelWeights>(load_weights(spec.weights_path)), WindowFilter{},
                                         spec.rule);
  }
  throw ConfigError("unknown env policy kind");
}

}  // namespace mergebench
