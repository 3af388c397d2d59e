#include "proact/evaluation.hpp"

#include <stdexcept>

namespace proact {

nlohmann::json EvalSummary::to_json() const {
  return {{"episodes", episodes},
          {"success_rate", success_rate},
          {"mean_rounds", mean_rounds},
          {"mean_retrievals", mean_retrievals},
          {"mean_retrievals_per_success", mean_retrievals_per_success}};
}

EvalSummary summarize(std::span<const Trajectory> episodes) {
  EvalSummary s;
  s.episodes = episodes.size();
  if (episodes.empty()) return s;
  double succ = 0.0, rounds = 0.0, rets = 0.0, rets_succ = 0.0;
  for (const auto& t : episodes) {
    const auto r = static_cast<double>(t.retrieval_steps.size());
    rounds += t.length();
    rets += r;
    if (t.success) {
      succ += 1.0;
      rets_succ += r;
    }
  }
  const auto n = static_cast<double>(episodes.size());
  s.success_rate = succ / n;
  s.mean_rounds = rounds / n;
  s.mean_retrievals = rets / n;
  s.mean_retrievals_per_success = succ > 0.0 ? rets_succ / succ : 0.0;
  return s;
}

std::vector<Trajectory> evaluate_policy(const PolicyParams& params, const RolloutContext& ctx,
                                        std::span<const TaskInstance> tasks, bool retrieval_enabled, bool greedy,
                                        std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(tasks.size());
  CombinationLock env(ctx.env_config);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    Rng rng(derive_seed(seed, k));
    out.push_back(run_episode(params, env, tasks[k], ctx, retrieval_enabled, rng, k, greedy));
  }
  return out;
}

std::vector<Trajectory> evaluate_retrieve_every_step(const RolloutContext& ctx, std::span<const TaskInstance> tasks,
                                                     std::uint64_t seed) {
  std::vector<Trajectory> out;
  CombinationLock env(ctx.env_config);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const TaskInstance& task = tasks[k];
    Rng rng(derive_seed(seed, k));
    Trajectory traj;
    traj.id = k;
    traj.task = task;
    AgentContext agent = AgentContext::start(task, ctx.env_config);
    agent.observation = env.reset(task);
    const int query = ctx.space.retrieve_family(task.goal.family);
    bool done = false;
    bool retrieve_next = true;
    while (!done && agent.step < task.horizon) {
      StepRecord rec;
      rec.observation = agent.observation;
      rec.features = featurize(agent, ctx.env_config);
      if (retrieve_next) {
        rec.action = query;
        Query q{ctx.space.query_text(query), ctx.space.query_embedding(query)};
        const auto found = ctx.base.retrieve(q, ctx.budget, ctx.lambda_p);
        for (const Entry* e : found) rec.retrieved.push_back(e->id);
        agent.absorb(found);
        ++agent.retrievals;
        traj.retrieval_steps.push_back({agent.step, q.text});
      } else {
        const int known = agent.next_known_symbol();
        rec.action = known >= 0 ? known : static_cast<int>(rng.below(static_cast<std::uint64_t>(ctx.space.alphabet_size())));
        const StepResult r = env.step(rec.action);
        agent.observation = r.observation;
        rec.env_reward = r.reward;
        rec.feedback = r.observation.last_feedback;
        done = r.done;
        traj.success = r.success;
      }
      retrieve_next = !retrieve_next;
      ++agent.step;
      traj.steps.push_back(std::move(rec));
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> evaluate_oracle_demo(const EnvConfig& env_config, std::span<const TaskInstance> tasks) {
  const ActionSpace space(env_config);
  CombinationLock env(env_config);
  std::vector<Trajectory> out;
  for (const auto& task : tasks) {
    Trajectory demo = scripted_demo(task, family_code(env_config, task.goal.family), space, env_config, task.task_id);
    env.reset(task);
    bool success = false;
    for (auto& s : demo.steps) {
      if (!space.is_env(s.action)) continue;
      const StepResult r = env.step(space.symbol(s.action));
      s.env_reward = r.reward;
      success = r.success;
    }
    demo.success = success;
    out.push_back(std::move(demo));
  }
  return out;
}

double uniform_policy_success_probability(int code_length, int alphabet_size, int n_actions, int n_env,
                                          int horizon) {
  if (code_length < 1 || alphabet_size < 2 || n_env < 1 || n_actions < n_env) {
    throw std::invalid_argument("bad uniform-policy parameters");
  }
  // dist[c]: probability of cursor c with the episode still running.
  std::vector<double> dist(static_cast<std::size_t>(code_length), 0.0);
  dist[0] = 1.0;
  const double p_try = static_cast<double>(n_env) / n_actions;
  const double p_right = 1.0 / alphabet_size;
  double success = 0.0;
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> next(dist.size(), 0.0);
    for (std::size_t c = 0; c < dist.size(); ++c) {
      const double p = dist[c];
      next[c] += p * (1.0 - p_try);
      const double adv = p * p_try * p_right;
      if (c + 1 == dist.size()) {
        success += adv;
      } else {
        next[c + 1] += adv;
      }
      next[0] += p * p_try * (1.0 - p_right);
    }
    dist = std::move(next);
  }
  return success;
}

}  // namespace proact
