#include "proact/rollout.hpp"

#include <algorithm>
#include <stdexcept>

namespace proact {

double Trajectory::env_return() const {
  double r = 0.0;
  for (const auto& s : steps) r += s.env_reward;
  return r;
}

std::vector<EntryId> Trajectory::retrieved_ids() const {
  std::vector<EntryId> ids = initial_context;
  for (const auto& s : steps) ids.insert(ids.end(), s.retrieved.begin(), s.retrieved.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

int Trajectory::first_env_step(const ActionSpace& space) const {
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (space.is_env(steps[t].action)) return static_cast<int>(t);
  }
  return -1;
}

namespace {

enum class FirstStep { sample, masked, forced };

struct EpisodeState {
  AgentContext agent;
  bool done = false;
};

// Advances `traj` from the given agent state until the episode ends.
void continue_episode(Trajectory& traj, EpisodeState state, Environment& env, const PolicyParams& params,
                      const RolloutContext& ctx, Rng& rng, FirstStep first, int forced_action, bool greedy) {
  const int horizon = traj.task.horizon;
  const bool mask_default = !traj.retrieval_enabled;
  bool first_step = true;
  while (!state.done && state.agent.step < horizon) {
    StepRecord rec;
    rec.observation = state.agent.observation;
    rec.features = featurize(state.agent, ctx.env_config);
    rec.retrieval_masked = mask_default;
    if (first_step && first == FirstStep::masked) rec.retrieval_masked = true;
    if (first_step && first == FirstStep::forced) {
      rec.action = forced_action;
    } else {
      rec.action = select_action(params, rec.features, ctx.space, rec.retrieval_masked, rng, greedy);
    }
    first_step = false;

    const int t = state.agent.step;
    if (ctx.space.is_retrieval(rec.action)) {
      traj.branch_points.emplace(t, BranchPoint{env.snapshot(), state.agent});
      Query q{ctx.space.query_text(rec.action), ctx.space.query_embedding(rec.action)};
      const auto found = ctx.base.retrieve(q, ctx.budget, ctx.lambda_p);
      for (const Entry* e : found) rec.retrieved.push_back(e->id);
      state.agent.absorb(found);
      ++state.agent.retrievals;
      traj.retrieval_steps.push_back({t, q.text});
    } else {
      const StepResult r = env.step(ctx.space.symbol(rec.action));
      state.agent.observation = r.observation;
      rec.env_reward = r.reward;
      rec.feedback = r.observation.last_feedback;
      if (r.done) {
        state.done = true;
        traj.success = r.success;
      }
    }
    ++state.agent.step;
    traj.steps.push_back(std::move(rec));
  }
}

}  // namespace

Trajectory run_episode(const PolicyParams& params, Environment& env, const TaskInstance& task,
                       const RolloutContext& ctx, bool retrieval_enabled, Rng& rng, std::uint64_t id,
                       bool greedy) {
  Trajectory traj;
  traj.id = id;
  traj.task = task;
  traj.retrieval_enabled = retrieval_enabled;
  EpisodeState state;
  state.agent = AgentContext::start(task, ctx.env_config);
  state.agent.observation = env.reset(task);
  if (retrieval_enabled) {
    const auto q = Query::from_text(goal_text(task.goal), ctx.base.dim());
    const auto found = ctx.base.retrieve(q, ctx.budget, ctx.lambda_p);
    for (const Entry* e : found) traj.initial_context.push_back(e->id);
    state.agent.absorb(found);
  }
  continue_episode(traj, std::move(state), env, params, ctx, rng, FirstStep::sample, 0, greedy);
  return traj;
}

std::optional<BranchSelection> select_branch_step(const Trajectory& traj, Rng& rng) {
  const auto& marks = traj.retrieval_steps;
  if (marks.empty()) return std::nullopt;
  if (marks.size() < 3) return BranchSelection{marks.front().step, true};
  const std::size_t k = 1 + rng.below(marks.size() - 2);
  return BranchSelection{marks[k].step, false};
}

Trajectory branch_continuation(const Trajectory& ret, int branch_step, const PolicyParams& params,
                               Environment& env, const RolloutContext& ctx, Rng& rng, std::uint64_t id) {
  auto it = ret.branch_points.find(branch_step);
  if (it == ret.branch_points.end()) {
    throw std::logic_error("no snapshot recorded at branch step " + std::to_string(branch_step));
  }
  Trajectory noret;
  noret.id = id;
  noret.task = ret.task;
  noret.retrieval_enabled = true;
  noret.branch_of = BranchOrigin{ret.id, branch_step};
  noret.initial_context = ret.initial_context;
  noret.steps.assign(ret.steps.begin(), ret.steps.begin() + branch_step);
  for (const auto& m : ret.retrieval_steps) {
    if (m.step < branch_step) noret.retrieval_steps.push_back(m);
  }
  for (const auto& [t, bp] : ret.branch_points) {
    if (t < branch_step) noret.branch_points.emplace(t, bp);
  }
  env.restore(it->second.env);
  EpisodeState state{it->second.context, false};
  continue_episode(noret, std::move(state), env, params, ctx, rng, FirstStep::masked, 0, false);
  return noret;
}

std::optional<BranchPair> build_pair(const Trajectory& traj, Environment& env, const PolicyParams& params,
                                     const RolloutContext& ctx, Rng& rng, std::uint64_t noret_id) {
  if (!traj.retrieval_enabled) return std::nullopt;
  const auto sel = select_branch_step(traj, rng);
  if (!sel) return std::nullopt;
  BranchPair pair;
  pair.noret = branch_continuation(traj, sel->step, params, env, ctx, rng, noret_id);
  pair.ret = traj;
  pair.branch_step = sel->step;
  return pair;
}

double estimate_marginal_utility(const BranchPoint& point, const TaskInstance& task, int query_action,
                                 const PolicyParams& params, Environment& env, const RolloutContext& ctx,
                                 int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (!ctx.space.is_retrieval(query_action)) throw std::invalid_argument("query_action must be a retrieval");
  auto mean_return = [&](FirstStep mode) {
    double total = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      Trajectory t;
      t.task = task;
      t.retrieval_enabled = true;
      env.restore(point.env);
      continue_episode(t, EpisodeState{point.context, false}, env, params, ctx, rng, mode, query_action, false);
      total += t.env_return();
    }
    return total / n_samples;
  };
  const double with = mean_return(FirstStep::forced);
  const double without = mean_return(FirstStep::masked);
  return with - without;
}

Trajectory scripted_demo(const TaskInstance& task, const std::vector<int>& code, const ActionSpace& space,
                         const EnvConfig& config, std::uint64_t id) {
  if (code.size() != static_cast<std::size_t>(config.code_length)) {
    throw std::invalid_argument("demo code has wrong length");
  }
  Trajectory traj;
  traj.id = id;
  traj.task = task;
  traj.retrieval_enabled = true;
  AgentContext agent = AgentContext::start(task, config);

  StepRecord ret;
  ret.observation = agent.observation;
  ret.features = featurize(agent, config);
  ret.action = space.retrieve_family(task.goal.family);
  traj.retrieval_steps.push_back({0, space.query_text(ret.action)});
  traj.steps.push_back(std::move(ret));
  Entry known;
  known.type = EntryType::factual;
  known.family = task.goal.family;
  known.code_prefix = code;
  agent.absorb(std::span<const Entry>(&known, 1));
  ++agent.retrievals;
  ++agent.step;

  for (std::size_t i = 0; i < code.size(); ++i) {
    StepRecord s;
    s.observation = agent.observation;
    s.features = featurize(agent, config);
    s.action = space.env_action(code[i]);
    agent.observation.cursor = static_cast<int>(i) + 1;
    agent.observation.last_feedback = Feedback::advance;
    ++agent.observation.step_index;
    ++agent.step;
    s.env_reward = i + 1 == code.size() ? 1.0 : 0.0;
    s.feedback = Feedback::advance;
    traj.steps.push_back(std::move(s));
  }
  traj.success = true;
  return traj;
}

}  // namespace proact
