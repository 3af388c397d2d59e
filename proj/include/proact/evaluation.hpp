#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "proact/rollout.hpp"

namespace proact {

struct EvalSummary {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double mean_rounds = 0.0;      // agent steps, retrievals included
  double mean_retrievals = 0.0;  // per episode
  double mean_retrievals_per_success = 0.0;

  nlohmann::json to_json() const;
};

EvalSummary summarize(std::span<const Trajectory> episodes);

/// Runs the policy on each task with a frozen base. Episode k uses the RNG
/// stream derive_seed(seed, k).
std::vector<Trajectory> evaluate_policy(const PolicyParams& params, const RolloutContext& ctx,
                                        std::span<const TaskInstance> tasks, bool retrieval_enabled, bool greedy,
                                        std::uint64_t seed);

/// Scripted baseline that issues Retrieve("code for family g") before every
/// try, then plays the known symbol at the cursor or a uniform one.
std::vector<Trajectory> evaluate_retrieve_every_step(const RolloutContext& ctx, std::span<const TaskInstance> tasks,
                                                     std::uint64_t seed);

/// Replays oracle demonstrations through a fresh environment.
std::vector<Trajectory> evaluate_oracle_demo(const EnvConfig& env, std::span<const TaskInstance> tasks);

/// Exact success probability of a policy that draws uniformly from `n_actions`
/// actions of which `n_env` are tries, for the given code length, alphabet
/// and agent horizon, when retrieval never reveals anything.
double uniform_policy_success_probability(int code_length, int alphabet_size, int n_actions, int n_env, int horizon);

}  // namespace proact
