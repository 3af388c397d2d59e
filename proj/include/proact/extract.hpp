#pragma once

// Rule-based experience distillation. Each rule produces entries with the
// same schema an LLM extractor would (when_to_use key + content), drawn from
// a fixed catalogue so that encoder and retrieval behavior stay enumerable.

#include <array>
#include <span>
#include <vector>

#include "proact/expbase.hpp"
#include "proact/reward.hpp"
#include "proact/rollout.hpp"

namespace proact {

struct ExtractionConfig {
  std::size_t max_factual_per_traj = 2;
  std::size_t max_episodic_per_traj = 2;
  std::size_t max_skills_per_group = 3;

  void validate() const;
};

namespace rules {
inline constexpr const char* kSuccessKey = "before the first try on a lock";
inline constexpr const char* kSuccessRule = "retrieve family code before first try";
inline constexpr const char* kRepeatKey = "after issuing a query";
inline constexpr const char* kRepeatRule = "do not repeat an identical query";
inline constexpr const char* kResetKey = "when feedback resets repeatedly";
inline constexpr const char* kResetRule = "retrieve when feedback resets repeatedly";
}  // namespace rules

std::string factual_key(int family);
std::string episodic_key(int family);
std::string comparative_key(int family);

/// Code prefix confirmed by advance feedback, longest first.
std::vector<int> confirmed_prefix(const Trajectory& traj, const ActionSpace& space);

std::vector<Entry> extract_factual(const Trajectory& traj, const ActionSpace& space, const ExtractionConfig& cfg);
std::vector<Entry> extract_episodic(const Trajectory& traj, const ExtractionConfig& cfg);
std::vector<Entry> distill_success(std::span<const Trajectory> group, const ActionSpace& space,
                                   const ExtractionConfig& cfg);
std::vector<Entry> distill_failure(std::span<const Trajectory> group, const ExtractionConfig& cfg);

/// Retrieval member, no-retrieval member and margin of one branch pair.
struct ScoredPair {
  const Trajectory* ret = nullptr;
  const Trajectory* noret = nullptr;
  int branch_step = 0;
  double delta = 0.0;
};

/// One entry per pair with nonzero margin. Without pairs, each group
/// contributes one best-versus-worst contrast ranked by (success, -T) when
/// the two differ.
std::vector<Entry> distill_comparative(std::span<const ScoredPair> pairs,
                                       std::span<const std::vector<const Trajectory*>> fallback_groups,
                                       const ExtractionConfig& cfg);

struct UpdateReport {
  std::array<std::size_t, kNumEntryTypes> inserted{};
  std::array<std::size_t, kNumEntryTypes> deduped{};
  std::size_t upgraded = 0;
  std::size_t bumped = 0;

  std::size_t total_inserted() const;
  nlohmann::json to_json() const;
};

/// Inserts entries (factual collisions may upgrade the stored prefix), then
/// bumps each entry once per successful trajectory that retrieved it.
UpdateReport update_base(ExperienceBase& base, std::span<const Entry> new_entries,
                         std::span<const Trajectory* const> successful);

}  // namespace proact
