#pragma once

// Episode execution with retrieval actions and paired-branch construction:
// record a rollout, pick a branching retrieval step, restore the prefix, and
// continue with retrieval suppressed at that single step.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proact/env.hpp"
#include "proact/expbase.hpp"
#include "proact/policy.hpp"
#include "proact/rng.hpp"

namespace proact {

struct StepRecord {
  Observation observation;  // before the action
  Features features;
  int action = 0;
  bool retrieval_masked = false;
  std::vector<EntryId> retrieved;
  double env_reward = 0.0;
  Feedback feedback = Feedback::none;  // outcome of an env action

  bool operator==(const StepRecord&) const = default;
};

struct RetrievalMark {
  int step = 0;
  std::string query;

  bool operator==(const RetrievalMark&) const = default;
};

/// Environment snapshot plus agent history, taken just before a step.
struct BranchPoint {
  EnvState env;
  AgentContext context;
};

struct BranchOrigin {
  std::uint64_t parent_id = 0;
  int step = 0;
};

struct Trajectory {
  std::uint64_t id = 0;
  TaskInstance task;
  std::vector<EntryId> initial_context;
  std::vector<StepRecord> steps;
  std::vector<RetrievalMark> retrieval_steps;
  bool success = false;
  bool retrieval_enabled = true;
  std::optional<BranchOrigin> branch_of;
  std::map<int, BranchPoint> branch_points;  // keyed by retrieval step

  int length() const { return static_cast<int>(steps.size()); }
  double env_return() const;
  /// Sorted, de-duplicated ids of everything retrieved, initial context included.
  std::vector<EntryId> retrieved_ids() const;
  /// Index of the first environment action, or -1.
  int first_env_step(const ActionSpace& space) const;
};

struct BranchPair {
  Trajectory ret;
  Trajectory noret;
  int branch_step = 0;
};

/// Read-only view shared by rollout workers.
struct RolloutContext {
  const EnvConfig& env_config;
  const ActionSpace& space;
  const ExperienceBase& base;
  RetrievalBudget budget;
  double lambda_p = 0.05;
};

/// Runs one episode from env.reset(task). With retrieval enabled the initial
/// context is retrieved with the goal text and Retrieve actions are allowed;
/// otherwise both are suppressed.
Trajectory run_episode(const PolicyParams& params, Environment& env, const TaskInstance& task,
                       const RolloutContext& ctx, bool retrieval_enabled, Rng& rng, std::uint64_t id = 0,
                       bool greedy = false);

struct BranchSelection {
  int step = 0;
  bool fallback = false;  // fewer than three retrievals: first one taken
};

/// Uniform over interior retrieval steps when there are at least three;
/// otherwise the first retrieval; nullopt without retrievals.
std::optional<BranchSelection> select_branch_step(const Trajectory& traj, Rng& rng);

/// The no-retrieval continuation of `ret` at `branch_step`: shared prefix,
/// an env action sampled under the retrieval mask at the branch step, then
/// the ordinary policy with retrieval re-enabled.
Trajectory branch_continuation(const Trajectory& ret, int branch_step, const PolicyParams& params,
                               Environment& env, const RolloutContext& ctx, Rng& rng, std::uint64_t id);

std::optional<BranchPair> build_pair(const Trajectory& traj, Environment& env, const PolicyParams& params,
                                     const RolloutContext& ctx, Rng& rng, std::uint64_t noret_id);

/// Monte Carlo estimate of mean R_env when Retrieve(query_action) is forced
/// at the branch point minus mean R_env when retrieval is masked there.
double estimate_marginal_utility(const BranchPoint& point, const TaskInstance& task, int query_action,
                                 const PolicyParams& params, Environment& env, const RolloutContext& ctx,
                                 int n_samples, Rng& rng);

/// Oracle demonstration: Retrieve(code for family g), then the code.
/// Requires the true code; for cold start and tests only.
Trajectory scripted_demo(const TaskInstance& task, const std::vector<int>& code, const ActionSpace& space,
                         const EnvConfig& config, std::uint64_t id = 0);

}  // namespace proact
