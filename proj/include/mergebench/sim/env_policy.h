#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <string_view>

#include "mergebench/core/sample.h"
#include "mergebench/policy/dataset.h"
#include "mergebench/policy/model.h"
#include "mergebench/policy/rule_policy.h"
#include "mergebench/policy/trajectory.h"

namespace mergebench {

enum class EnvPolicyKind { RuleBased, Neural, IdmBaseline };

// "rule" | "neural" | "idm"
std::string_view to_string(EnvPolicyKind k);
EnvPolicyKind env_policy_from_string(std::string_view s);

struct EnvPolicySpec {
  EnvPolicyKind kind = EnvPolicyKind::RuleBased;
  std::filesystem::path weights_path;  // Neural only
  RulePolicyConfig rule;
};

// Plans for one environment vehicle; output in the sample's local frame.
class EnvPolicy {
 public:
  virtual ~EnvPolicy() = default;
  virtual PlannedTrajectory plan(const Sample& sample, std::mt19937_64& rng) const = 0;
  virtual EnvPolicyKind kind() const = 0;
};

// Style-conditioned rule policy (style_params per label).
class RuleBasedEnv final : public EnvPolicy {
 public:
  explicit RuleBasedEnv(RulePolicyConfig cfg = {}) : cfg_(cfg) {}
  PlannedTrajectory plan(const Sample& sample, std::mt19937_64& rng) const override;
  EnvPolicyKind kind() const override { return EnvPolicyKind::RuleBased; }

 private:
  RulePolicyConfig cfg_;
};

// Uniform IDM car following with no lateral behavior and no yielding.
class IdmBaselineEnv final : public EnvPolicy {
 public:
  PlannedTrajectory plan(const Sample& sample, std::mt19937_64& rng) const override;
  EnvPolicyKind kind() const override { return EnvPolicyKind::IdmBaseline; }
};

// Trained attention policy; weights are shared and immutable.
// Learned policy for vehicles inside the training distribution (see
// within_filter); the rule policy drives the rest, e.g. platoon leaders with
// no vehicle ahead, which the model never saw.
class NeuralEnv final : public EnvPolicy {
 public:
  explicit NeuralEnv(std::shared_ptr<const ModelWeights> weights, WindowFilter filter = {}, RulePolicyConfig rule = {})
      : weights_(std::move(weights)), filter_(filter), fallback_(rule) {}
  PlannedTrajectory plan(const Sample& sample, std::mt19937_64& rng) const override;
  EnvPolicyKind kind() const override { return EnvPolicyKind::Neural; }
  bool uses_model(const Sample& sample) const { return within_filter(sample, filter_); }

 private:
  std::shared_ptr<const ModelWeights> weights_;
  WindowFilter filter_;
  RuleBasedEnv fallback_;
};

// Neural requires a loadable weights file (ConfigError when missing,
// ParseError/ShapeError when malformed).
std::shared_ptr<const EnvPolicy> make_env_policy(const EnvPolicySpec& spec);

}  // namespace mergebench
