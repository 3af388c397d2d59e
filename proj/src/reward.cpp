#include "proact/reward.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "proact/errors.hpp"

namespace proact {

void RewardWeights::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("reward.alpha must be >= 0");
  if (!(eps_std > 0.0)) throw ConfigError("reward.eps_std must be > 0");
  if (!std::isfinite(lambda_T) || !std::isfinite(w_q) || !std::isfinite(w_t)) {
    throw ConfigError("reward weights must be finite");
  }
}

void GoalLengthStats::update(const Trajectory& traj) {
  if (traj.success) add_success(traj.task.goal.family, traj.length());
}

void GoalLengthStats::add_success(int family, int length) {
  Acc& a = by_family_[family];
  a.sum += length;
  ++a.count;
}

std::optional<double> GoalLengthStats::mean(int family) const {
  auto it = by_family_.find(family);
  if (it == by_family_.end() || it->second.count == 0) return std::nullopt;
  return it->second.sum / static_cast<double>(it->second.count);
}

std::uint64_t GoalLengthStats::count(int family) const {
  auto it = by_family_.find(family);
  return it == by_family_.end() ? 0 : it->second.count;
}

nlohmann::json GoalLengthStats::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [f, a] : by_family_) j.push_back({{"family", f}, {"sum", a.sum}, {"count", a.count}});
  return j;
}

GoalLengthStats GoalLengthStats::from_json(const nlohmann::json& j) {
  GoalLengthStats s;
  for (const auto& r : j) {
    s.by_family_[r.at("family").get<int>()] = Acc{r.at("sum").get<double>(), r.at("count").get<std::uint64_t>()};
  }
  return s;
}

double env_return(const Trajectory& traj) { return traj.env_return(); }

double rollout_margin(double R_ret, int T_ret, double R_noret, int T_noret, double lambda_T) {
  return (R_ret - R_noret) + lambda_T * static_cast<double>(T_noret - T_ret) / std::max(T_noret, 1);
}

double rollout_margin(const BranchPair& pair, const RewardWeights& w) {
  return rollout_margin(pair.ret.env_return(), pair.ret.length(), pair.noret.env_return(), pair.noret.length(),
                        w.lambda_T);
}

double process_reward(bool retrieved_at_branch, double delta, const RewardWeights& w) {
  if (!retrieved_at_branch) return 0.0;
  if (delta > 0.0) return w.alpha;
  if (delta < 0.0) return -w.alpha;
  return 0.0;
}

bool has_repeated_query(const Trajectory& traj) {
  std::set<std::string_view> seen;
  for (const auto& m : traj.retrieval_steps) {
    if (!seen.insert(m.query).second) return true;
  }
  return false;
}

double efficiency_reward(bool repeat, int length, std::optional<double> mean_success_length,
                         const RewardWeights& w) {
  double r = repeat ? -w.w_q : 0.0;
  if (mean_success_length) {
    const double bar = *mean_success_length;
    const double bound = std::abs(w.w_t);
    r += std::clamp(w.w_t * (bar - length) / std::max(bar, 1.0), -bound, bound);
  }
  return r;
}

double efficiency_reward(const Trajectory& traj, const GoalLengthStats& stats, const RewardWeights& w) {
  return efficiency_reward(has_repeated_query(traj), traj.length(), stats.mean(traj.task.goal.family), w);
}

RewardBreakdown trajectory_reward(const Trajectory& traj, const GoalLengthStats& stats, const RewardWeights& w) {
  RewardBreakdown b;
  b.R_env = traj.env_return();
  b.r_eff = efficiency_reward(traj, stats, w);
  b.R_traj = b.R_env + b.r_proc + b.r_eff;
  return b;
}

std::pair<RewardBreakdown, RewardBreakdown> pair_rewards(const Trajectory& ret, const Trajectory& noret,
                                                         int branch_step, const ActionSpace& space,
                                                         const GoalLengthStats& stats, const RewardWeights& w,
                                                         ProcessRewardFn proc) {
  RewardBreakdown bi;
  bi.R_env = ret.env_return();
  const double delta = rollout_margin(bi.R_env, ret.length(), noret.env_return(), noret.length(), w.lambda_T);
  bi.delta = delta;
  const bool z = branch_step >= 0 && branch_step < ret.length() &&
                 space.is_retrieval(ret.steps[static_cast<std::size_t>(branch_step)].action);
  bi.r_proc = proc(z, delta, w);
  bi.r_eff = efficiency_reward(ret, stats, w);
  bi.R_traj = bi.R_env + bi.r_proc + bi.r_eff;
  return {bi, trajectory_reward(noret, stats, w)};
}

std::pair<RewardBreakdown, RewardBreakdown> pair_rewards(const BranchPair& pair, const ActionSpace& space,
                                                         const GoalLengthStats& stats, const RewardWeights& w) {
  return pair_rewards(pair.ret, pair.noret, pair.branch_step, space, stats, w);
}

}  // namespace proact
