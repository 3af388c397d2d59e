#pragma once

// Line-delimited JSON records for the trajectory log, and replay of a
// logged trajectory against a fresh environment.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proact/reward.hpp"
#include "proact/rollout.hpp"

namespace proact {

nlohmann::json trajectory_record(const Trajectory& traj, const std::string& run_id, int iteration,
                                 const std::optional<RewardBreakdown>& reward);

nlohmann::json to_json(const RewardBreakdown& b);

/// Finds the record with the given trajectory id in a trajectory log.
std::optional<nlohmann::json> find_trajectory_record(std::istream& log, std::uint64_t id);

struct ReplayResult {
  bool identical = false;
  std::vector<std::string> dump;  // one line per step
  std::string mismatch;
};

/// Re-executes the logged actions in a fresh environment and compares
/// per-step rewards, feedback and the final outcome.
ReplayResult replay_record(const nlohmann::json& record, const EnvConfig& env);

}  // namespace proact
