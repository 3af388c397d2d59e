#pragma once

// Trajectory-level reward: environment return, paired-branch process reward
// driven by the rollout margin, and the efficiency term.

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include <json.hpp>

#include "proact/rollout.hpp"

namespace proact {

struct RewardWeights {
  double alpha = 0.5;
  double lambda_T = 0.5;
  double w_q = 0.5;
  double w_t = 0.25;
  double eps_std = 1e-6;

  void validate() const;
};

struct RewardBreakdown {
  double R_env = 0.0;
  std::optional<double> delta;
  double r_proc = 0.0;
  double r_eff = 0.0;
  double R_traj = 0.0;
};

/// Per-family running mean of successful episode lengths.
class GoalLengthStats {
 public:
  void update(const Trajectory& traj);
  void add_success(int family, int length);
  std::optional<double> mean(int family) const;
  std::uint64_t count(int family) const;

  nlohmann::json to_json() const;
  static GoalLengthStats from_json(const nlohmann::json& j);

 private:
  struct Acc {
    double sum = 0.0;
    std::uint64_t count = 0;
  };
  std::map<int, Acc> by_family_;
};

double env_return(const Trajectory& traj);

double rollout_margin(double R_ret, int T_ret, double R_noret, int T_noret, double lambda_T);
double rollout_margin(const BranchPair& pair, const RewardWeights& w);

double process_reward(bool retrieved_at_branch, double delta, const RewardWeights& w);

/// True when some query string occurs at least twice in the trajectory.
bool has_repeated_query(const Trajectory& traj);

double efficiency_reward(bool repeat, int length, std::optional<double> mean_success_length,
                         const RewardWeights& w);
double efficiency_reward(const Trajectory& traj, const GoalLengthStats& stats, const RewardWeights& w);

/// Reward of a trajectory that is not the retrieval member of a pair
/// (unpaired rollouts and no-retrieval branches): r_proc = 0.
RewardBreakdown trajectory_reward(const Trajectory& traj, const GoalLengthStats& stats, const RewardWeights& w);

using ProcessRewardFn = double (*)(bool, double, const RewardWeights&);

/// Rewards of (ret, noret). Only the retrieval member receives the
/// process reward. `proc` exists so verification can inject faults.
std::pair<RewardBreakdown, RewardBreakdown> pair_rewards(const Trajectory& ret, const Trajectory& noret,
                                                         int branch_step, const ActionSpace& space,
                                                         const GoalLengthStats& stats, const RewardWeights& w,
                                                         ProcessRewardFn proc = &process_reward);
std::pair<RewardBreakdown, RewardBreakdown> pair_rewards(const BranchPair& pair, const ActionSpace& space,
                                                         const GoalLengthStats& stats, const RewardWeights& w);

}  // namespace proact
