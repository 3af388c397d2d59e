#include "proact/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "proact/errors.hpp"
#include "proact/kernels.hpp"

namespace proact {

std::vector<AnnealPhase> default_anneal_phases(int iterations) {
  const int base = iterations / 3;
  const int extra = iterations % 3;
  return {
      {"calibration", 0.5, 0.2, base + (extra > 0 ? 1 : 0)},
      {"transition", 0.25, 0.3, base + (extra > 1 ? 1 : 0)},
      {"refinement", 0.0, 0.5, base},
  };
}

void TrainerConfig::validate() const {
  if (group_size < 2) throw ConfigError("trainer.group_size must be >= 2");
  if (!(learning_rate > 0.0)) throw ConfigError("trainer.learning_rate must be > 0");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("trainer.clip_eps must lie in (0, 1)");
  if (!(kl_beta >= 0.0)) throw ConfigError("trainer.kl_beta must be >= 0");
  if (iterations < 0) throw ConfigError("trainer.iterations must be >= 0");
  if (batch_tasks < 1) throw ConfigError("trainer.batch_tasks must be >= 1");
  if (cold_start_epochs < 0) throw ConfigError("trainer.cold_start_epochs must be >= 0");
  if (!(cold_start_lr > 0.0)) throw ConfigError("trainer.cold_start_lr must be > 0");
  if (cold_start_demos < 0) throw ConfigError("trainer.cold_start_demos must be >= 0");
  if (max_grad_norm < 0.0) throw ConfigError("trainer.max_grad_norm must be >= 0");
  if (anneal_phases.empty()) throw ConfigError("trainer.anneal_phases must not be empty");
  int total = 0;
  for (const auto& p : anneal_phases) {
    if (!(p.no_ret_fraction >= 0.0 && p.no_ret_fraction <= 1.0)) {
      throw ConfigError("anneal no_ret_fraction must lie in [0, 1]");
    }
    if (!(p.warmup_ratio >= 0.0 && p.warmup_ratio <= 1.0)) throw ConfigError("anneal warmup_ratio must lie in [0, 1]");
    if (p.span < 0) throw ConfigError("anneal span must be >= 0");
    total += p.span;
  }
  if (total != iterations) {
    throw ConfigError("trainer.anneal_phases spans sum to " + std::to_string(total) + " but iterations is " +
                      std::to_string(iterations));
  }
}

std::size_t TrainerConfig::phase_at(int iteration) const {
  int start = 0;
  for (std::size_t k = 0; k < anneal_phases.size(); ++k) {
    start += anneal_phases[k].span;
    if (iteration < start) return k;
  }
  return anneal_phases.size() - 1;
}

double TrainerConfig::lr_at(int iteration) const {
  int start = 0;
  for (const auto& p : anneal_phases) {
    if (iteration < start + p.span) {
      const double warm = p.warmup_ratio * p.span;
      const double k = iteration - start + 1;
      return warm > 0.0 ? learning_rate * std::min(1.0, k / warm) : learning_rate;
    }
    start += p.span;
  }
  return learning_rate;
}

double population_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> normalized_advantages(std::span<const double> rewards, double eps_std) {
  if (rewards.size() < 2) throw std::invalid_argument("advantages need a group of at least two");
  // Rounding in the mean would otherwise leave tiny nonzero values.
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) {
    return std::vector<double>(rewards.size(), 0.0);
  }
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  const double denom = population_std(rewards) + eps_std;
  std::vector<double> a(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) a[i] = (rewards[i] - mean) / denom;
  return a;
}

GroupBatch assemble_group(const TaskInstance& task, std::vector<GroupOutcome> outcomes, const ActionSpace& space,
                          const GoalLengthStats& stats, const RewardWeights& w, ProcessRewardFn proc) {
  GroupBatch g;
  g.task = task;
  g.n_primary = outcomes.size();
  g.members.reserve(outcomes.size() * 2);
  for (auto& o : outcomes) g.members.push_back(std::move(o.primary));
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].branch) continue;
    g.pairs.push_back({i, g.members.size(), outcomes[i].branch_step});
    g.members.push_back(std::move(*outcomes[i].branch));
  }
  g.rewards.resize(g.members.size());
  std::vector<bool> done(g.members.size(), false);
  for (const auto& p : g.pairs) {
    auto [ri, rj] = pair_rewards(g.members[p.ret], g.members[p.noret], p.branch_step, space, stats, w, proc);
    g.rewards[p.ret] = ri;
    g.rewards[p.noret] = rj;
    done[p.ret] = done[p.noret] = true;
  }
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    if (!done[k]) g.rewards[k] = trajectory_reward(g.members[k], stats, w);
  }
  std::vector<double> r(g.members.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = g.rewards[k].R_traj;
  if (r.size() >= 2) {
    g.advantages = normalized_advantages(r, w.eps_std);
  } else {
    g.advantages.assign(r.size(), 0.0);
  }
  return g;
}

SurrogateResult surrogate_objective(const PolicyParams& params, const PolicyParams& old_params,
                                    const PolicyParams& ref_params, const GroupBatch& batch,
                                    const ActionSpace& space, double clip_eps, double kl_beta) {
  SurrogateResult out;
  out.gradient.assign(params.weights.size(), 0.0);
  const std::size_t n = batch.members.size();
  if (n == 0) return out;
  std::size_t n_states = 0;
  for (const auto& m : batch.members) n_states += m.steps.size();

  std::size_t clipped = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Trajectory& traj = batch.members[k];
    const double A = batch.advantages[k];
    double log_ratio = 0.0;
    for (const auto& s : traj.steps) {
      log_ratio += log_prob(params, s.features, space, s.action, s.retrieval_masked) -
                   log_prob(old_params, s.features, space, s.action, s.retrieval_masked);
    }
    const double rho = std::exp(log_ratio);
    const double unclipped = rho * A;
    const double clipped_term = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps) * A;
    out.objective += std::min(unclipped, clipped_term) / static_cast<double>(n);
    if (clipped_term < unclipped) {
      ++clipped;  // clip active, no gradient
      continue;
    }
    const double scale = A * rho / static_cast<double>(n);
    if (scale == 0.0) continue;
    for (const auto& s : traj.steps) {
      accumulate_grad_log_prob(params, s.features, space, s.action, s.retrieval_masked, scale, out.gradient);
    }
  }
  out.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(n);

  if (n_states > 0) {
    double kl = 0.0;
    const double scale = -kl_beta / static_cast<double>(n_states);
    for (const auto& m : batch.members) {
      for (const auto& s : m.steps) {
        kl += accumulate_grad_kl(params, ref_params, s.features, space, s.retrieval_masked, scale, out.gradient);
      }
    }
    out.kl = kl / static_cast<double>(n_states);
    out.objective -= kl_beta * out.kl;
  }
  return out;
}

double demo_log_likelihood(const PolicyParams& params, std::span<const Trajectory> demos, const ActionSpace& space,
                           std::vector<double>* gradient) {
  std::size_t n = 0;
  for (const auto& d : demos) n += d.steps.size();
  if (n == 0) throw std::invalid_argument("demonstrations contain no steps");
  if (gradient) gradient->assign(params.weights.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(n);
  double ll = 0.0;
  for (const auto& d : demos) {
    for (const auto& s : d.steps) {
      ll += log_prob(params, s.features, space, s.action, s.retrieval_masked);
      if (gradient) accumulate_grad_log_prob(params, s.features, space, s.action, s.retrieval_masked, inv, *gradient);
    }
  }
  return ll * inv;
}

PolicyParams cold_start(std::span<const Trajectory> demos, const ActionSpace& space, PolicyParams init, int epochs,
                        double lr, std::vector<double>* loss_trace) {
  if (demos.empty()) throw std::invalid_argument("cold start needs at least one demonstration");
  std::vector<double> grad;
  for (int e = 0; e < epochs; ++e) {
    const double ll = demo_log_likelihood(init, demos, space, &grad);
    if (loss_trace) loss_trace->push_back(-ll);
    for (std::size_t i = 0; i < grad.size(); ++i) init.weights[i] += lr * grad[i];
  }
  if (loss_trace) loss_trace->push_back(-demo_log_likelihood(init, demos, space));
  return init;
}

Prop1Report verify_prop1(std::span<const GroupBatch> groups, const PolicyParams& params, const ActionSpace& space,
                         const RewardWeights& w) {
  Prop1Report report;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const GroupBatch& g = groups[gi];
    std::vector<double> r(g.members.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = g.rewards[k].R_traj;
    const double denom = population_std(r) + w.eps_std;
    for (std::size_t pi = 0; pi < g.pairs.size(); ++pi) {
      const PairLink& p = g.pairs[pi];
      const Trajectory& ti = g.members[p.ret];
      const Trajectory& tj = g.members[p.noret];
      const RewardBreakdown& bi = g.rewards[p.ret];
      const RewardBreakdown& bj = g.rewards[p.noret];
      const double Ai = g.advantages[p.ret];
      const double Aj = g.advantages[p.noret];
      auto fail = [&](const char* check, double err) { report.violations.push_back({gi, pi, check, err}); };
      ++report.pairs_checked;

      const double Ti = ti.length();
      const double Tj = tj.length();
      const double len_term = w.lambda_T * (Tj - Ti) / std::max(Tj, 1.0);
      const double delta = (bi.R_env - bj.R_env) + len_term;
      if (!bi.delta || std::abs(*bi.delta - delta) > 1e-12) {
        fail("rollout_margin", bi.delta ? std::abs(*bi.delta - delta) : INFINITY);
      }
      const double expected_proc = delta > 0.0 ? w.alpha : (delta < 0.0 ? -w.alpha : 0.0);
      if (bi.r_proc != expected_proc) fail("process_reward", std::abs(bi.r_proc - expected_proc));
      if (bj.r_proc != 0.0) fail("noret_process_reward", std::abs(bj.r_proc));

      const double e1 = std::abs((Ai - Aj) * denom - (bi.R_traj - bj.R_traj));
      if (!(e1 <= 1e-10)) fail("mean_cancellation", e1);
      const double expanded = (delta - len_term + bi.r_proc + (bi.r_eff - bj.r_eff)) / denom;
      const double e2 = std::abs((Ai - Aj) - expanded);
      if (!(e2 <= 1e-10)) fail("reward_expansion", e2);

      // Branching-step gradient: direct sum versus the log-product /
      // log-ratio split, the latter from closed-form score functions.
      const auto b = static_cast<std::size_t>(p.branch_step);
      const StepRecord& si = ti.steps[b];
      const StepRecord& sj = tj.steps[b];
      std::vector<double> direct(params.weights.size(), 0.0);
      accumulate_grad_log_prob(params, si.features, space, si.action, si.retrieval_masked, Ai, direct);
      accumulate_grad_log_prob(params, sj.features, space, sj.action, sj.retrieval_masked, Aj, direct);
      const auto pi_i = action_distribution(params, si.features, space, si.retrieval_masked);
      const auto pi_j = action_distribution(params, sj.features, space, sj.retrieval_masked);
      double e3 = 0.0;
      for (std::size_t a = 0; a < params.n_actions; ++a) {
        const double ei = static_cast<int>(a) == si.action ? 1.0 : 0.0;
        const double ej = static_cast<int>(a) == sj.action ? 1.0 : 0.0;
        const double sum_coef = ei + ej - pi_i[a] - pi_j[a];
        const double diff_coef = ei - ej - pi_i[a] + pi_j[a];
        for (std::size_t f = 0; f < params.n_features; ++f) {
          const double split = ((Ai + Aj) / 2.0) * sum_coef * si.features[f] / params.temperature +
                               ((Ai - Aj) / 2.0) * diff_coef * si.features[f] / params.temperature;
          e3 = std::max(e3, std::abs(split - direct[a * params.n_features + f]));
        }
      }
      if (si.features != sj.features) fail("shared_branch_state", 1.0);
      if (!(e3 <= 1e-9)) fail("branch_gradient_split", e3);
    }
  }
  return report;
}

nlohmann::json IterationMetrics::to_json() const {
  nlohmann::json counts;
  for (std::size_t t = 0; t < kNumEntryTypes; ++t) counts[std::string(to_string(kEntryTypes[t]))] = base_counts[t];
  return {{"iteration", iteration},
          {"phase", phase},
          {"success_rate", success_rate},
          {"mean_T", mean_T},
          {"mean_retrievals", mean_retrievals},
          {"mean_R_traj", mean_R_traj},
          {"kl", kl},
          {"base_counts", counts},
          {"lr", lr},
          {"disabled_fraction", disabled_fraction},
          {"rollouts", rollouts},
          {"disabled_rollouts", disabled_rollouts},
          {"pairs", pairs},
          {"branch_fallbacks", branch_fallbacks},
          {"extraction", extraction.to_json()}};
}

std::vector<Trajectory> cold_start_demos(const EnvConfig& env, int n) {
  const ActionSpace space(env);
  std::vector<Trajectory> demos;
  for (const auto& task : task_stream(env, static_cast<std::size_t>(n))) {
    demos.push_back(scripted_demo(task, family_code(env, task.goal.family), space, env, task.task_id));
  }
  return demos;
}

namespace {

constexpr std::uint64_t kAnnealStream = 0xA22EA1ULL;
constexpr std::uint64_t kRolloutStream = 0x2011ULL;

std::uint64_t trajectory_id(int iteration, std::size_t slot, bool branch) {
  return (static_cast<std::uint64_t>(iteration + 1) << 24) + slot * 2 + (branch ? 1 : 0);
}

}  // namespace

EvolutionResult run_evolution(const EvolutionSetup& setup, const EvolutionSinks& sinks) {
  const EnvConfig& env = setup.env;
  const TrainerConfig& tc = setup.trainer;
  env.validate();
  tc.validate();
  setup.reward.validate();
  setup.expbase.validate();
  setup.extraction.validate();

  const ActionSpace space(env);
  EvolutionResult res{PolicyParams::zeros(space.size(), feature_dim(env)), {}, ExperienceBase(setup.expbase.dim),
                      {}, {}, 0};

  const int n_demos = tc.cold_start_demos > 0 ? tc.cold_start_demos : env.n_families;
  const auto demos = cold_start_demos(env, n_demos);
  res.policy = cold_start(demos, space, res.policy, tc.cold_start_epochs, tc.cold_start_lr);
  res.reference = res.policy;
  res.next_task = static_cast<std::size_t>(n_demos);

  Rng anneal_rng(derive_seed(tc.seed, kAnnealStream));
  const auto G = static_cast<std::size_t>(tc.group_size);
  const auto B = static_cast<std::size_t>(tc.batch_tasks);

  for (int it = 0; it < tc.iterations; ++it) {
    const AnnealPhase& phase = tc.anneal_phases[tc.phase_at(it)];
    const double lr = tc.lr_at(it);
    const auto tasks = task_stream(env, B, res.next_task);
    res.next_task += B;

    std::vector<RolloutJob> jobs;
    jobs.reserve(B * G);
    std::size_t disabled = 0;
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t g = 0; g < G; ++g) {
        const bool off = tc.retrieval_disabled || anneal_rng.bernoulli(phase.no_ret_fraction);
        disabled += off ? 1 : 0;
        const std::size_t slot = b * G + g;
        jobs.push_back({tasks[b], !off, tc.paired_branches, derive_seed(tc.seed, kRolloutStream, it, slot),
                        trajectory_id(it, slot, false), trajectory_id(it, slot, true)});
      }
    }

    const RolloutContext ctx{env, space, res.base, setup.expbase.budget, setup.expbase.lambda_p};
    auto outcomes = tc.workers > 1 ? collect_rollouts_parallel(jobs, res.policy, ctx, tc.workers)
                                   : collect_rollouts_serial(jobs, res.policy, ctx);

    IterationMetrics m;
    m.iteration = it;
    m.phase = phase.name;
    m.lr = lr;
    m.rollouts = jobs.size();
    m.disabled_rollouts = disabled;
    m.disabled_fraction = static_cast<double>(disabled) / static_cast<double>(jobs.size());

    std::vector<GroupBatch> groups;
    groups.reserve(B);
    for (std::size_t b = 0; b < B; ++b) {
      std::vector<GroupOutcome> go;
      for (std::size_t g = 0; g < G; ++g) {
        auto& o = outcomes[b * G + g];
        m.branch_fallbacks += o.branch_fallback ? 1 : 0;
        go.push_back({std::move(o.primary), std::move(o.branch), o.branch_step});
      }
      groups.push_back(assemble_group(tasks[b], std::move(go), space, res.stats, setup.reward));
    }

    if (tc.verify_prop1) {
      const auto report = verify_prop1(groups, res.policy, space, setup.reward);
      if (!report.ok()) {
        const auto& v = report.violations.front();
        throw std::logic_error("pairwise identity violated at iteration " + std::to_string(it) + ": " + v.check);
      }
    }

    const PolicyParams old = res.policy;
    double kl_sum = 0.0;
    for (const auto& g : groups) {
      auto sr = surrogate_objective(res.policy, old, res.reference, g, space, tc.clip_eps, tc.kl_beta);
      if (tc.max_grad_norm > 0.0) {
        double n2 = 0.0;
        for (double v : sr.gradient) n2 += v * v;
        const double norm = std::sqrt(n2);
        if (norm > tc.max_grad_norm) {
          for (double& v : sr.gradient) v *= tc.max_grad_norm / norm;
        }
      }
      for (std::size_t i = 0; i < sr.gradient.size(); ++i) res.policy.weights[i] += lr * sr.gradient[i];
      kl_sum += sr.kl;
    }
    m.kl = kl_sum / static_cast<double>(groups.size());

    double succ = 0.0, len = 0.0, rets = 0.0, rtraj = 0.0;
    std::size_t n_primary = 0;
    std::vector<Entry> entries;
    std::vector<const Trajectory*> successful;
    bool batch_has_pairs = false;
    for (const auto& g : groups) batch_has_pairs = batch_has_pairs || !g.pairs.empty();
    for (const auto& g : groups) {
      for (std::size_t k = 0; k < g.members.size(); ++k) {
        const Trajectory& t = g.members[k];
        if (k < g.n_primary) {
          succ += t.success ? 1.0 : 0.0;
          len += t.length();
          rets += static_cast<double>(t.retrieval_steps.size());
          rtraj += g.rewards[k].R_traj;
          ++n_primary;
        }
        res.stats.update(t);
        if (t.success) successful.push_back(&t);
        for (auto& e : extract_factual(t, space, setup.extraction)) entries.push_back(std::move(e));
        for (auto& e : extract_episodic(t, setup.extraction)) entries.push_back(std::move(e));
        if (sinks.on_trajectory) sinks.on_trajectory(it, t, g.rewards[k]);
      }
      for (auto& e : distill_success(g.members, space, setup.extraction)) entries.push_back(std::move(e));
      for (auto& e : distill_failure(g.members, setup.extraction)) entries.push_back(std::move(e));
      std::vector<ScoredPair> scored;
      for (const auto& p : g.pairs) {
        scored.push_back({&g.members[p.ret], &g.members[p.noret], p.branch_step, g.rewards[p.ret].delta.value_or(0.0)});
      }
      std::vector<std::vector<const Trajectory*>> fallback;
      if (!batch_has_pairs) {
        fallback.emplace_back();
        for (const auto& t : g.members) fallback.back().push_back(&t);
      }
      for (auto& e : distill_comparative(scored, fallback, setup.extraction)) entries.push_back(std::move(e));
      m.pairs += g.pairs.size();
    }
    m.success_rate = succ / static_cast<double>(n_primary);
    m.mean_T = len / static_cast<double>(n_primary);
    m.mean_retrievals = rets / static_cast<double>(n_primary);
    m.mean_R_traj = rtraj / static_cast<double>(n_primary);
    m.extraction = update_base(res.base, entries, successful);
    m.base_counts = res.base.stats().counts;

    if (sinks.on_metrics) sinks.on_metrics(m);
    res.metrics.push_back(std::move(m));

    if (tc.ref_refresh_interval > 0 && (it + 1) % tc.ref_refresh_interval == 0) res.reference = res.policy;
    if (tc.checkpoint_every > 0 && (it + 1) % tc.checkpoint_every == 0 && sinks.on_checkpoint) {
      sinks.on_checkpoint(it + 1, res.policy, res.base, res.stats);
    }
  }
  return res;
}

}  // namespace proact
