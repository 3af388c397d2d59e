#pragma once

// Property suite behind `proact verify`: reward oracles, pairwise
// identities, finite-difference gradients, advantage laws, replay
// determinism and experience-base laws. Hooks allow fault injection.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "proact/trainer.hpp"

namespace proact {

using EnvFactory = std::function<std::unique_ptr<Environment>(const EnvConfig&)>;

struct VerifyOptions {
  EnvConfig env;
  RewardWeights reward;
  ExpbaseConfig expbase;
  std::uint64_t seed = 0;
  int reward_cases = 100000;
  int prop1_groups = 1000;
  int group_size = 8;
  int gradient_instances = 100;
  int replay_cases = 1000;
  int expbase_cases = 10000;
  int advantage_cases = 10000;
  ProcessRewardFn process_reward = &proact::process_reward;
  EnvFactory make_env;  // CombinationLock when empty
};

struct CheckResult {
  explicit CheckResult(std::string check_name = {}) : name(std::move(check_name)) {}

  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  double worst = 0.0;  // largest observed error, where meaningful
  std::vector<std::string> failures;  // first few, human readable

  void fail(std::string what);
  nlohmann::json to_json() const;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  nlohmann::json to_json() const;
};

/// G rollouts of one task from a fresh RNG stream, paired with their
/// branches and assembled into a group.
GroupBatch sample_group(const PolicyParams& params, const RolloutContext& ctx, const TaskInstance& task,
                        int group_size, std::uint64_t seed, const GoalLengthStats& stats, const RewardWeights& w,
                        ProcessRewardFn proc = &process_reward);

/// Policy with i.i.d. weights uniform in [-scale, scale].
PolicyParams random_policy(const ActionSpace& space, const EnvConfig& env, double scale, Rng& rng);

CheckResult check_reward_oracle(const VerifyOptions& o);
CheckResult check_process_table(const VerifyOptions& o);
CheckResult check_prop1(const VerifyOptions& o);
CheckResult check_gradients(const VerifyOptions& o);
CheckResult check_advantages(const VerifyOptions& o);
CheckResult check_replay(const VerifyOptions& o);
CheckResult check_expbase_laws(const VerifyOptions& o);

VerifyReport run_verify_suite(const VerifyOptions& o);

}  // namespace proact
