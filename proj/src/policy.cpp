#include "proact/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace proact {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::string family_query_text(int family) { return "code for family " + std::to_string(family); }

ActionSpace::ActionSpace(int alphabet_size, int n_families) : alphabet_(alphabet_size), families_(n_families) {
  if (alphabet_size < 1 || n_families < 1) throw std::invalid_argument("empty action space");
  queries_.resize(size());
  query_embeddings_.resize(size());
  for (int f = 0; f < families_; ++f) {
    const auto a = static_cast<std::size_t>(retrieve_family(f));
    queries_[a] = family_query_text(f);
    query_embeddings_[a] = encode(queries_[a]);
  }
  const auto g = static_cast<std::size_t>(generic_retrieval());
  queries_[g] = kGenericQueryText;
  query_embeddings_[g] = encode(queries_[g]);
}

int ActionSpace::symbol(int a) const {
  if (!is_env(a)) throw std::invalid_argument("not an environment action");
  return a;
}

std::optional<int> ActionSpace::retrieval_family(int a) const {
  if (!is_retrieval(a)) throw std::invalid_argument("not a retrieval action");
  if (a == generic_retrieval()) return std::nullopt;
  return a - alphabet_;
}

int ActionSpace::env_action(int s) const {
  if (s < 0 || s >= alphabet_) throw std::invalid_argument("symbol outside alphabet");
  return s;
}

int ActionSpace::retrieve_family(int family) const {
  if (family < 0 || family >= families_) throw std::invalid_argument("family outside action space");
  return alphabet_ + family;
}

const std::string& ActionSpace::query_text(int a) const {
  if (!is_retrieval(a)) throw std::invalid_argument("not a retrieval action");
  return queries_[static_cast<std::size_t>(a)];
}

const Embedding& ActionSpace::query_embedding(int a) const {
  if (!is_retrieval(a)) throw std::invalid_argument("not a retrieval action");
  return query_embeddings_[static_cast<std::size_t>(a)];
}

std::string ActionSpace::describe(int a) const {
  if (is_env(a)) return "try(" + std::to_string(a) + ")";
  return "Retrieve(\"" + query_text(a) + "\")";
}

AgentContext AgentContext::start(const TaskInstance& task, const EnvConfig& config) {
  AgentContext c;
  c.family = task.goal.family;
  c.observation = task.initial_observation;
  c.known_code.assign(static_cast<std::size_t>(config.code_length), -1);
  return c;
}

void AgentContext::absorb(std::span<const Entry* const> entries) {
  for (const Entry* e : entries) {
    if (e->type != EntryType::factual || e->family != family) continue;
    const std::size_t n = std::min(e->code_prefix.size(), known_code.size());
    for (std::size_t i = 0; i < n; ++i) known_code[i] = e->code_prefix[i];
  }
}

void AgentContext::absorb(std::span<const Entry> entries) {
  std::vector<const Entry*> ptrs;
  ptrs.reserve(entries.size());
  for (const auto& e : entries) ptrs.push_back(&e);
  absorb(std::span<const Entry* const>(ptrs));
}

int AgentContext::next_known_symbol() const {
  const auto c = static_cast<std::size_t>(observation.cursor);
  return c < known_code.size() ? known_code[c] : -1;
}

std::size_t feature_dim(const EnvConfig& c) {
  const auto L = static_cast<std::size_t>(c.code_length);
  const auto A = static_cast<std::size_t>(c.alphabet_size);
  return (L + 1) + 3 + static_cast<std::size_t>(c.n_families) + L * (A + 1) + (A + 1) + 1 + 4;
}

Features featurize(const AgentContext& ctx, const EnvConfig& c) {
  const auto L = static_cast<std::size_t>(c.code_length);
  const auto A = static_cast<std::size_t>(c.alphabet_size);
  Features f(feature_dim(c), 0.0);
  std::size_t off = 0;
  f[off + std::min(static_cast<std::size_t>(ctx.observation.cursor), L)] = 1.0;
  off += L + 1;
  f[off + static_cast<std::size_t>(ctx.observation.last_feedback)] = 1.0;
  off += 3;
  f[off + static_cast<std::size_t>(ctx.family)] = 1.0;
  off += static_cast<std::size_t>(c.n_families);
  for (std::size_t p = 0; p < L; ++p) {
    const int s = ctx.known_code[p];
    f[off + p * (A + 1) + (s < 0 ? A : static_cast<std::size_t>(s))] = 1.0;
  }
  off += L * (A + 1);
  const int next = ctx.next_known_symbol();
  f[off + (next < 0 ? A : static_cast<std::size_t>(next))] = 1.0;
  off += A + 1;
  f[off] = std::clamp(static_cast<double>(ctx.step) / c.effective_horizon(), 0.0, 1.0);
  off += 1;
  f[off + static_cast<std::size_t>(std::min(ctx.retrievals, 3))] = 1.0;
  return f;
}

Features featurize(const AgentContext& ctx, std::span<const Entry> retrieved, const EnvConfig& c) {
  AgentContext copy = ctx;
  copy.absorb(retrieved);
  return featurize(copy, c);
}

PolicyParams PolicyParams::zeros(std::size_t n_actions, std::size_t n_features) {
  PolicyParams p;
  p.n_actions = n_actions;
  p.n_features = n_features;
  p.weights.assign(n_actions * n_features, 0.0);
  return p;
}

namespace {

void check_shapes(const PolicyParams& params, std::span<const double> features, const ActionSpace& space) {
  if (features.size() != params.n_features) throw std::invalid_argument("feature dimension mismatch");
  if (space.size() != params.n_actions) throw std::invalid_argument("action space size mismatch");
}

// Log-probabilities; masked entries hold -inf.
std::vector<double> log_distribution(const PolicyParams& params, std::span<const double> features,
                                     const ActionSpace& space, bool mask_retrieval) {
  check_shapes(params, features, space);
  const std::size_t n = mask_retrieval ? static_cast<std::size_t>(space.n_env_actions()) : params.n_actions;
  std::vector<double> out(params.n_actions, -std::numeric_limits<double>::infinity());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    const double* row = &params.weights[a * params.n_features];
    double z = 0.0;
    for (std::size_t i = 0; i < params.n_features; ++i) z += row[i] * features[i];
    out[a] = z / params.temperature;
    mx = std::max(mx, out[a]);
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) sum += std::exp(out[a] - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t a = 0; a < n; ++a) out[a] -= lse;
  return out;
}

bool is_masked(const ActionSpace& space, int action, bool mask_retrieval) {
  return action < 0 || action >= static_cast<int>(space.size()) || (mask_retrieval && space.is_retrieval(action));
}

}  // namespace

std::vector<double> action_distribution(const PolicyParams& params, std::span<const double> features,
                                        const ActionSpace& space, bool mask_retrieval) {
  auto lp = log_distribution(params, features, space, mask_retrieval);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

double log_prob(const PolicyParams& params, std::span<const double> features, const ActionSpace& space,
                int action, bool mask_retrieval) {
  if (is_masked(space, action, mask_retrieval)) throw std::invalid_argument("log_prob of a masked action");
  return log_distribution(params, features, space, mask_retrieval)[static_cast<std::size_t>(action)];
}

void accumulate_grad_log_prob(const PolicyParams& params, std::span<const double> features,
                              const ActionSpace& space, int action, bool mask_retrieval, double scale,
                              std::span<double> grad) {
  if (is_masked(space, action, mask_retrieval)) throw std::invalid_argument("gradient of a masked action");
  const auto pi = action_distribution(params, features, space, mask_retrieval);
  const double s = scale / params.temperature;
  for (std::size_t a = 0; a < params.n_actions; ++a) {
    const double coef = s * ((static_cast<int>(a) == action ? 1.0 : 0.0) - pi[a]);
    if (coef == 0.0) continue;
    double* row = &grad[a * params.n_features];
    for (std::size_t i = 0; i < params.n_features; ++i) row[i] += coef * features[i];
  }
}

std::vector<double> grad_log_prob(const PolicyParams& params, std::span<const double> features,
                                  const ActionSpace& space, int action, bool mask_retrieval) {
  std::vector<double> g(params.weights.size(), 0.0);
  accumulate_grad_log_prob(params, features, space, action, mask_retrieval, 1.0, g);
  return g;
}

double kl_divergence(const PolicyParams& params, const PolicyParams& ref, std::span<const double> features,
                     const ActionSpace& space, bool mask_retrieval) {
  const auto lp = log_distribution(params, features, space, mask_retrieval);
  const auto lq = log_distribution(ref, features, space, mask_retrieval);
  double kl = 0.0;
  for (std::size_t a = 0; a < lp.size(); ++a) {
    if (std::isinf(lp[a])) continue;
    kl += std::exp(lp[a]) * (lp[a] - lq[a]);
  }
  return std::max(kl, 0.0);
}

double accumulate_grad_kl(const PolicyParams& params, const PolicyParams& ref, std::span<const double> features,
                          const ActionSpace& space, bool mask_retrieval, double scale, std::span<double> grad) {
  const auto lp = log_distribution(params, features, space, mask_retrieval);
  const auto lq = log_distribution(ref, features, space, mask_retrieval);
  double kl = 0.0;
  for (std::size_t a = 0; a < lp.size(); ++a) {
    if (!std::isinf(lp[a])) kl += std::exp(lp[a]) * (lp[a] - lq[a]);
  }
  // dKL/dz_a = p_a (log p_a - log q_a - KL)
  const double s = scale / params.temperature;
  for (std::size_t a = 0; a < lp.size(); ++a) {
    if (std::isinf(lp[a])) continue;
    const double coef = s * std::exp(lp[a]) * (lp[a] - lq[a] - kl);
    double* row = &grad[a * params.n_features];
    for (std::size_t i = 0; i < params.n_features; ++i) row[i] += coef * features[i];
  }
  return kl;
}

double kl_estimate(const PolicyParams& params, const PolicyParams& ref, std::span<const VisitedState> batch,
                   const ActionSpace& space) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : batch) total += kl_divergence(params, ref, s.features, space, s.mask_retrieval);
  return total / static_cast<double>(batch.size());
}

int select_action(const PolicyParams& params, std::span<const double> features, const ActionSpace& space,
                  bool mask_retrieval, Rng& rng, bool greedy) {
  const auto pi = action_distribution(params, features, space, mask_retrieval);
  if (greedy) {
    return static_cast<int>(std::max_element(pi.begin(), pi.end()) - pi.begin());
  }
  return static_cast<int>(rng.categorical(pi));
}

namespace {

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(std::ostream& out, const PolicyParams& params) {
  write_u64(out, params.n_actions);
  write_u64(out, params.n_features);
  write_f64(out, params.temperature);
  for (double w : params.weights) write_f64(out, w);
}

PolicyParams load_checkpoint(std::istream& in) {
  const auto na = read_raw<std::uint64_t>(in);
  const auto nf = read_raw<std::uint64_t>(in);
  if (na == 0 || nf == 0 || na > (1u << 20) || nf > (1u << 20)) throw std::runtime_error("bad checkpoint header");
  auto p = PolicyParams::zeros(na, nf);
  p.temperature = read_raw<double>(in);
  if (!(p.temperature > 0.0)) throw std::runtime_error("bad checkpoint temperature");
  for (double& w : p.weights) w = read_raw<double>(in);
  return p;
}

}  // namespace proact
