#pragma once

// Group-relative policy optimization with paired-branch rewards, behavior
// cloning cold start, the retrieval annealing schedule, and the online loop
// that interleaves rollouts, policy updates and experience-base updates.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "proact/env.hpp"
#include "proact/expbase.hpp"
#include "proact/extract.hpp"
#include "proact/policy.hpp"
#include "proact/reward.hpp"
#include "proact/rollout.hpp"

namespace proact {

struct AnnealPhase {
  std::string name;
  double no_ret_fraction = 0.0;
  double warmup_ratio = 0.0;
  int span = 0;  // iterations
};

/// calibration (0.5, 0.2), transition (0.25, 0.3), refinement (0.0, 0.5),
/// the iteration budget split as evenly as possible.
std::vector<AnnealPhase> default_anneal_phases(int iterations);

struct TrainerConfig {
  int group_size = 8;
  double learning_rate = 0.01;
  double clip_eps = 0.2;
  double kl_beta = 0.01;
  int iterations = 300;
  int batch_tasks = 4;
  std::vector<AnnealPhase> anneal_phases = default_anneal_phases(300);
  std::uint64_t seed = 0;
  double max_grad_norm = 0.0;  // 0 disables clipping
  int cold_start_epochs = 1000;
  double cold_start_lr = 2.0;
  int cold_start_demos = 0;  // 0 selects one per family
  int ref_refresh_interval = 0;  // 0 keeps the cold-start reference forever
  bool retrieval_disabled = false;  // ablation: no initial context, no Retrieve
  bool paired_branches = true;
  bool verify_prop1 = false;  // check the pairwise identities on every group
  int checkpoint_every = 0;
  int workers = 1;

  void validate() const;
  /// Phase index of an iteration.
  std::size_t phase_at(int iteration) const;
  /// Learning rate after linear warmup over warmup_ratio of the phase span.
  double lr_at(int iteration) const;
};

/// A_i = (R_i - mean) / (population std + eps).
std::vector<double> normalized_advantages(std::span<const double> rewards, double eps_std);
double population_std(std::span<const double> values);

struct PairLink {
  std::size_t ret = 0;    // member index of the retrieval trajectory
  std::size_t noret = 0;  // member index of its branch
  int branch_step = 0;
};

/// Rollouts of one task: primaries first, then their no-retrieval branches.
/// Normalization runs over every member.
struct GroupBatch {
  TaskInstance task;
  std::vector<Trajectory> members;
  std::size_t n_primary = 0;
  std::vector<PairLink> pairs;
  std::vector<RewardBreakdown> rewards;
  std::vector<double> advantages;
};

struct GroupOutcome {
  Trajectory primary;
  std::optional<Trajectory> branch;
  int branch_step = -1;
};

GroupBatch assemble_group(const TaskInstance& task, std::vector<GroupOutcome> outcomes, const ActionSpace& space,
                          const GoalLengthStats& stats, const RewardWeights& w,
                          ProcessRewardFn proc = &process_reward);

struct SurrogateResult {
  double objective = 0.0;
  std::vector<double> gradient;  // d objective / d theta
  double kl = 0.0;
  double clipped_fraction = 0.0;
};

/// (1/N) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) - beta KL(pi_theta || pi_ref),
/// rho_i = pi_theta(tau_i) / pi_old(tau_i), KL averaged over visited states.
SurrogateResult surrogate_objective(const PolicyParams& params, const PolicyParams& old_params,
                                    const PolicyParams& ref_params, const GroupBatch& batch,
                                    const ActionSpace& space, double clip_eps, double kl_beta);

/// Mean log-likelihood of demo actions and its gradient.
double demo_log_likelihood(const PolicyParams& params, std::span<const Trajectory> demos, const ActionSpace& space,
                           std::vector<double>* gradient = nullptr);

/// Full-batch gradient ascent on the demo log-likelihood. `loss_trace`
/// receives the negative mean log-likelihood before each epoch and after
/// the last one.
PolicyParams cold_start(std::span<const Trajectory> demos, const ActionSpace& space, PolicyParams init, int epochs,
                        double lr, std::vector<double>* loss_trace = nullptr);

struct Prop1Violation {
  std::size_t group = 0;
  std::size_t pair = 0;
  std::string check;
  double error = 0.0;
};

struct Prop1Report {
  std::size_t pairs_checked = 0;
  std::vector<Prop1Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks, per branch pair, the margin and process-reward values, the
/// mean-cancellation identity, its reward-expanded form (1e-10) and the
/// branching-step gradient split (1e-9).
Prop1Report verify_prop1(std::span<const GroupBatch> groups, const PolicyParams& params, const ActionSpace& space,
                         const RewardWeights& w);

struct IterationMetrics {
  int iteration = 0;
  std::string phase;
  double success_rate = 0.0;
  double mean_T = 0.0;
  double mean_retrievals = 0.0;
  double mean_R_traj = 0.0;
  double kl = 0.0;
  std::array<std::size_t, kNumEntryTypes> base_counts{};
  double lr = 0.0;
  double disabled_fraction = 0.0;
  std::size_t rollouts = 0;
  std::size_t disabled_rollouts = 0;
  std::size_t pairs = 0;
  std::size_t branch_fallbacks = 0;
  UpdateReport extraction;

  nlohmann::json to_json() const;
};

struct EvolutionSinks {
  std::function<void(const IterationMetrics&)> on_metrics;
  std::function<void(int iteration, const Trajectory&, const RewardBreakdown&)> on_trajectory;
  std::function<void(int iteration, const PolicyParams&, const ExperienceBase&, const GoalLengthStats&)>
      on_checkpoint;
};

struct EvolutionSetup {
  EnvConfig env;
  TrainerConfig trainer;
  RewardWeights reward;
  ExpbaseConfig expbase;
  ExtractionConfig extraction;
};

struct EvolutionResult {
  PolicyParams policy;
  PolicyParams reference;
  ExperienceBase base;
  GoalLengthStats stats;
  std::vector<IterationMetrics> metrics;
  std::size_t next_task = 0;  // first stream index not used for training
};

/// Demonstrations for the cold start: tasks [0, n) of the stream.
std::vector<Trajectory> cold_start_demos(const EnvConfig& env, int n);

/// Cold start followed by the online evolution loop.
EvolutionResult run_evolution(const EvolutionSetup& setup, const EvolutionSinks& sinks = {});

}  // namespace proact
