#include "proact/records.hpp"

#include <istream>
#include <sstream>

namespace proact {

nlohmann::json to_json(const RewardBreakdown& b) {
  nlohmann::json j = {{"R_env", b.R_env}, {"r_proc", b.r_proc}, {"r_eff", b.r_eff}, {"R_traj", b.R_traj}};
  j["delta"] = b.delta ? nlohmann::json(*b.delta) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json trajectory_record(const Trajectory& traj, const std::string& run_id, int iteration,
                                 const std::optional<RewardBreakdown>& reward) {
  nlohmann::json marks = nlohmann::json::array();
  for (const auto& m : traj.retrieval_steps) marks.push_back({{"step", m.step}, {"query", m.query}});
  nlohmann::json actions = nlohmann::json::array();
  nlohmann::json rewards = nlohmann::json::array();
  nlohmann::json feedback = nlohmann::json::array();
  for (const auto& s : traj.steps) {
    actions.push_back(s.action);
    rewards.push_back(s.env_reward);
    feedback.push_back(to_string(s.feedback));
  }
  nlohmann::json j = {{"run_id", run_id},
                      {"iteration", iteration},
                      {"id", traj.id},
                      {"task_id", traj.task.task_id},
                      {"family", traj.task.goal.family},
                      {"T", traj.length()},
                      {"success", traj.success},
                      {"R_env", traj.env_return()},
                      {"retrieval_enabled", traj.retrieval_enabled},
                      {"retrieval_steps", marks},
                      {"actions", actions},
                      {"rewards", rewards},
                      {"feedback", feedback}};
  j["branch_of"] = traj.branch_of ? nlohmann::json{{"parent", traj.branch_of->parent_id}, {"step", traj.branch_of->step}}
                                  : nlohmann::json(nullptr);
  j["reward"] = reward ? to_json(*reward) : nlohmann::json(nullptr);
  return j;
}

std::optional<nlohmann::json> find_trajectory_record(std::istream& log, std::uint64_t id) {
  std::string line;
  while (std::getline(log, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.at("id").get<std::uint64_t>() == id) return j;
  }
  return std::nullopt;
}

ReplayResult replay_record(const nlohmann::json& record, const EnvConfig& env_config) {
  ReplayResult out;
  const ActionSpace space(env_config);
  CombinationLock env(env_config);
  TaskInstance task;
  task.task_id = record.at("task_id").get<std::uint64_t>();
  task.goal.family = record.at("family").get<int>();
  task.horizon = env_config.effective_horizon();
  env.reset(task);
  const auto actions = record.at("actions").get<std::vector<int>>();
  const auto rewards = record.at("rewards").get<std::vector<double>>();
  const auto feedback = record.at("feedback").get<std::vector<std::string>>();
  if (actions.size() != rewards.size() || actions.size() != feedback.size()) {
    out.mismatch = "record arrays have different lengths";
    return out;
  }
  bool success = false;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const int a = actions[t];
    if (a < 0 || a >= static_cast<int>(space.size())) {
      out.mismatch = "step " + std::to_string(t) + ": action outside the action space";
      return out;
    }
    std::ostringstream line;
    line << "t=" << t << " " << space.describe(a);
    double r = 0.0;
    std::string fb = "none";
    if (space.is_env(a)) {
      const StepResult res = env.step(space.symbol(a));
      r = res.reward;
      fb = to_string(res.observation.last_feedback);
      success = res.success;
      line << " cursor=" << res.observation.cursor;
    }
    line << " feedback=" << fb << " reward=" << r;
    out.dump.push_back(line.str());
    if (r != rewards[t] || fb != feedback[t]) {
      out.mismatch = "step " + std::to_string(t) + ": logged reward/feedback differ from replay";
      return out;
    }
  }
  if (success != record.at("success").get<bool>()) {
    out.mismatch = "final outcome differs from replay";
    return out;
  }
  out.identical = true;
  return out;
}

}  // namespace proact
