#include "proact/env.hpp"

#include <numeric>
#include <string>

#include "proact/errors.hpp"
#include "proact/rng.hpp"

namespace proact {

namespace {

constexpr std::uint64_t kCodeStream = 0xC0DEULL;
constexpr std::uint64_t kOrderStream = 0x0EDEULL;

}  // namespace

const char* to_string(Feedback f) {
  switch (f) {
    case Feedback::none: return "none";
    case Feedback::advance: return "advance";
    case Feedback::reset: return "reset";
  }
  return "?";
}

void EnvConfig::validate() const {
  if (code_length < 1) throw ConfigError("env.code_length must be >= 1");
  if (alphabet_size < 2) throw ConfigError("env.alphabet_size must be >= 2");
  if (n_families < 1) throw ConfigError("env.n_families must be >= 1");
  if (horizon < 0) throw ConfigError("env.horizon must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("env.gamma must lie in [0, 1)");
}

std::uint64_t EnvConfig::fingerprint() const {
  return derive_seed(seed, code_length, alphabet_size, n_families, effective_horizon());
}

std::vector<int> family_code(const EnvConfig& config, int family) {
  if (family < 0 || family >= config.n_families) {
    throw ConfigError("unknown goal family " + std::to_string(family));
  }
  Rng rng(derive_seed(config.seed, kCodeStream, family));
  std::vector<int> code(static_cast<std::size_t>(config.code_length));
  for (int& s : code) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.alphabet_size)));
  return code;
}

std::string goal_text(const Goal& goal) { return goal.descriptor; }

std::vector<TaskInstance> task_stream(const EnvConfig& config, std::size_t n, std::size_t first) {
  config.validate();
  const auto nf = static_cast<std::size_t>(config.n_families);
  std::vector<TaskInstance> out;
  out.reserve(n);
  std::vector<int> order(nf);
  std::size_t cached_round = SIZE_MAX;
  for (std::size_t k = first; k < first + n; ++k) {
    const std::size_t round = k / nf;
    if (round != cached_round) {
      std::iota(order.begin(), order.end(), 0);
      Rng rng(derive_seed(config.seed, kOrderStream, round));
      for (std::size_t i = nf; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
      }
      cached_round = round;
    }
    TaskInstance t;
    t.task_id = k;
    t.goal.family = order[k % nf];
    t.goal.descriptor = "open the lock";
    t.horizon = config.effective_horizon();
    out.push_back(std::move(t));
  }
  return out;
}

CombinationLock::CombinationLock(EnvConfig config)
    : config_(std::move(config)), fingerprint_(config_.fingerprint()) {
  config_.validate();
  state_.config_fingerprint = fingerprint_;
}

Observation CombinationLock::reset(const TaskInstance& task) {
  state_ = EnvState{};
  state_.config_fingerprint = fingerprint_;
  state_.family = task.goal.family;
  state_.code = family_code(config_, task.goal.family);
  return state_.observation;
}

StepResult CombinationLock::step(int symbol) {
  if (state_.family < 0) throw ProtocolError("step before reset");
  if (state_.done) throw ProtocolError("step after episode is done");
  if (symbol < 0 || symbol >= config_.alphabet_size) {
    throw std::invalid_argument("symbol outside alphabet: " + std::to_string(symbol));
  }
  Observation& obs = state_.observation;
  StepResult r;
  if (symbol == state_.code[static_cast<std::size_t>(obs.cursor)]) {
    ++obs.cursor;
    obs.last_feedback = Feedback::advance;
  } else {
    obs.cursor = 0;
    obs.last_feedback = Feedback::reset;
  }
  ++obs.step_index;
  if (obs.cursor == config_.code_length) {
    state_.success = true;
    r.reward = 1.0;
  }
  state_.done = state_.success || obs.step_index >= config_.effective_horizon();
  r.observation = obs;
  r.done = state_.done;
  r.success = state_.success;
  return r;
}

void CombinationLock::restore(const EnvState& state) {
  if (state.config_fingerprint != fingerprint_) {
    throw ProtocolError("snapshot belongs to a different environment config");
  }
  state_ = state;
}

}  // namespace proact
