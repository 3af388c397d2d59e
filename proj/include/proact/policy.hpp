#pragma once

// Linear softmax policy over the augmented action space
//   [ try(0) .. try(A-1) | Retrieve("code for family f") for each f | Retrieve(generic) ]
// with an exact log-probability, score-function gradient and per-state KL.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proact/env.hpp"
#include "proact/expbase.hpp"
#include "proact/rng.hpp"

namespace proact {

class ActionSpace {
 public:
  ActionSpace(int alphabet_size, int n_families);
  explicit ActionSpace(const EnvConfig& c) : ActionSpace(c.alphabet_size, c.n_families) {}

  std::size_t size() const { return static_cast<std::size_t>(alphabet_ + families_ + 1); }
  int n_env_actions() const { return alphabet_; }
  int alphabet_size() const { return alphabet_; }
  int n_families() const { return families_; }

  bool is_env(int a) const { return a >= 0 && a < alphabet_; }
  bool is_retrieval(int a) const { return a >= alphabet_ && a < static_cast<int>(size()); }
  int symbol(int a) const;
  /// Family addressed by a retrieval action; nullopt for the generic query.
  std::optional<int> retrieval_family(int a) const;

  int env_action(int symbol) const;
  int retrieve_family(int family) const;
  int generic_retrieval() const { return alphabet_ + families_; }

  const std::string& query_text(int a) const;
  const Embedding& query_embedding(int a) const;
  std::string describe(int a) const;

 private:
  int alphabet_;
  int families_;
  std::vector<std::string> queries_;
  std::vector<Embedding> query_embeddings_;
};

std::string family_query_text(int family);
inline constexpr const char* kGenericQueryText = "hints for current goal";

/// Agent-side interaction history h_t, including what retrieval revealed.
struct AgentContext {
  int family = 0;
  Observation observation;
  int step = 0;        // agent steps taken, retrievals included
  int retrievals = 0;  // retrieval actions issued (initial context excluded)
  std::vector<int> known_code;  // -1 marks an unknown slot

  static AgentContext start(const TaskInstance& task, const EnvConfig& config);

  /// Factual entries of the current family fill code slots with their
  /// prefix; everything else leaves the context unchanged.
  void absorb(std::span<const Entry* const> entries);
  void absorb(std::span<const Entry> entries);

  /// Known symbol at the cursor, or -1.
  int next_known_symbol() const;

  bool operator==(const AgentContext&) const = default;
};

using Features = std::vector<double>;

/// Layout: cursor one-hot (L+1) | feedback (3) | family (n_f) |
/// code slots L x (A+1) | known symbol at cursor (A+1) | step fraction (1) |
/// retrieval count clipped to 3 (4).
std::size_t feature_dim(const EnvConfig& config);
Features featurize(const AgentContext& ctx, const EnvConfig& config);
Features featurize(const AgentContext& ctx, std::span<const Entry> retrieved, const EnvConfig& config);

struct PolicyParams {
  std::size_t n_actions = 0;
  std::size_t n_features = 0;
  double temperature = 1.0;
  std::vector<double> weights;  // row-major n_actions x n_features

  static PolicyParams zeros(std::size_t n_actions, std::size_t n_features);
  double& at(std::size_t a, std::size_t i) { return weights[a * n_features + i]; }
  double at(std::size_t a, std::size_t i) const { return weights[a * n_features + i]; }
  bool operator==(const PolicyParams&) const = default;
};

/// Softmax over logits / temperature. With mask_retrieval the retrieval
/// actions get probability zero and the rest are renormalized.
std::vector<double> action_distribution(const PolicyParams& params, std::span<const double> features,
                                        const ActionSpace& space, bool mask_retrieval);

/// Throws std::invalid_argument for a masked action.
double log_prob(const PolicyParams& params, std::span<const double> features, const ActionSpace& space,
                int action, bool mask_retrieval);

/// grad += scale * d log pi(action) / d theta = scale * (1{a} - pi) (x) features / temperature
void accumulate_grad_log_prob(const PolicyParams& params, std::span<const double> features,
                              const ActionSpace& space, int action, bool mask_retrieval, double scale,
                              std::span<double> grad);
std::vector<double> grad_log_prob(const PolicyParams& params, std::span<const double> features,
                                  const ActionSpace& space, int action, bool mask_retrieval);

struct VisitedState {
  std::span<const double> features;
  bool mask_retrieval = false;
};

/// Exact KL(pi_theta || pi_ref) at one state.
double kl_divergence(const PolicyParams& params, const PolicyParams& ref, std::span<const double> features,
                     const ActionSpace& space, bool mask_retrieval);
/// grad += scale * d KL / d theta at one state.
double accumulate_grad_kl(const PolicyParams& params, const PolicyParams& ref, std::span<const double> features,
                          const ActionSpace& space, bool mask_retrieval, double scale, std::span<double> grad);
/// Mean per-state KL over a batch of visited states; 0 for an empty batch.
double kl_estimate(const PolicyParams& params, const PolicyParams& ref, std::span<const VisitedState> batch,
                   const ActionSpace& space);

/// Samples an action, or takes the argmax (lowest index on ties) when greedy.
int select_action(const PolicyParams& params, std::span<const double> features, const ActionSpace& space,
                  bool mask_retrieval, Rng& rng, bool greedy = false);

/// Checkpoint: u64 |A|, u64 F, f64 temperature, then |A|*F f64 weights,
/// row-major, all little-endian.
void save_checkpoint(std::ostream& out, const PolicyParams& params);
PolicyParams load_checkpoint(std::istream& in);

}  // namespace proact
