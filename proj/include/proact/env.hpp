#pragma once

// Replayable goal-conditioned combination-lock environment.
//
// Every goal family owns a hidden code of length L over an alphabet of A
// symbols. The code is a pure function of (seed, family), so knowledge
// gathered in one episode stays valid for every later episode of the same
// family. The agent sees only its cursor and the feedback of the last try.

#include <cstdint>
#include <string>
#include <vector>

namespace proact {

enum class Feedback : std::uint8_t { none = 0, advance = 1, reset = 2 };

const char* to_string(Feedback f);

struct EnvConfig {
  int code_length = 3;
  int alphabet_size = 5;
  int n_families = 30;
  int horizon = 0;  // 0 selects 4 * code_length * alphabet_size
  double gamma = 0.99;  // kept for the formalism; returns are undiscounted
  std::uint64_t seed = 0;

  int effective_horizon() const {
    return horizon > 0 ? horizon : 4 * code_length * alphabet_size;
  }
  void validate() const;
  std::uint64_t fingerprint() const;
};

struct Observation {
  int cursor = 0;
  Feedback last_feedback = Feedback::none;
  int step_index = 0;

  bool operator==(const Observation&) const = default;
};

struct Goal {
  int family = 0;
  std::string descriptor;
};

struct TaskInstance {
  std::uint64_t task_id = 0;
  Goal goal;
  Observation initial_observation;
  int horizon = 1;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool success = false;

  bool operator==(const StepResult&) const = default;
};

/// Full latent state. Plain value, safe to copy across workers.
struct EnvState {
  std::uint64_t config_fingerprint = 0;
  int family = -1;
  std::vector<int> code;
  Observation observation;
  bool done = false;
  bool success = false;

  bool operator==(const EnvState&) const = default;
};

/// Interface used by rollout code so that tests can substitute
/// instrumented environments.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Observation reset(const TaskInstance& task) = 0;
  /// Tries one symbol. Throws ProtocolError after done or before reset.
  virtual StepResult step(int symbol) = 0;
  virtual EnvState snapshot() const = 0;
  virtual void restore(const EnvState& state) = 0;
  virtual const EnvConfig& config() const = 0;
};

class CombinationLock final : public Environment {
 public:
  explicit CombinationLock(EnvConfig config);

  Observation reset(const TaskInstance& task) override;
  StepResult step(int symbol) override;
  EnvState snapshot() const override { return state_; }
  void restore(const EnvState& state) override;
  const EnvConfig& config() const override { return config_; }

 private:
  EnvConfig config_;
  std::uint64_t fingerprint_;
  EnvState state_;
};

/// Hidden code of a family; pure function of (config.seed, family).
std::vector<int> family_code(const EnvConfig& config, int family);

/// Text of a goal as seen by the agent; used as the initial retrieval query.
std::string goal_text(const Goal& goal);

/// Tasks [first, first + n) of the infinite stream defined by the config.
/// Families are visited round-robin, each round in a freshly seeded order.
std::vector<TaskInstance> task_stream(const EnvConfig& config, std::size_t n,
                                      std::size_t first = 0);

}  // namespace proact
