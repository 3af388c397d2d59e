#include "proact/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "proact/config.hpp"
#include "proact/errors.hpp"
#include "proact/evaluation.hpp"
#include "proact/records.hpp"
#include "proact/verify.hpp"

namespace proact {

namespace fs = std::filesystem;

namespace {

// Stream index where evaluation tasks start, far past any training run.
constexpr std::uint64_t kEvalTaskOffset = 1'000'000;

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(p, mode);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(p, mode);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  return f;
}

void write_checkpoint(const fs::path& dir, const PolicyParams& policy, const ExperienceBase& base,
                      const GoalLengthStats& stats) {
  fs::create_directories(dir);
  auto p = open_out(dir / "policy.bin", std::ios::out | std::ios::binary);
  save_checkpoint(p, policy);
  auto b = open_out(dir / "base.jsonl");
  base.save(b);
  auto s = open_out(dir / "stats.json");
  s << stats.to_json().dump() << "\n";
}

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_run_config(path);
}

std::string checkpoint_dir_name(int iteration) {
  std::ostringstream s;
  s << "iter_" << std::setw(6) << std::setfill('0') << iteration;
  return s.str();
}

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = load_run_config(a.config);
  if (a.seed) {
    cfg.env.seed = *a.seed;
    cfg.trainer.seed = *a.seed;
  }
  if (a.workers) cfg.trainer.workers = *a.workers;
  if (!a.out.empty()) cfg.out_dir = a.out;
  cfg.validate();

  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  {
    auto snap = open_out(dir / "config.cfg");
    snap << to_text(cfg);
  }
  auto metrics = open_out(dir / "metrics.jsonl");
  auto trajectories = open_out(dir / "trajectories.jsonl");
  auto extraction = open_out(dir / "extraction.jsonl");

  EvolutionSinks sinks;
  sinks.on_metrics = [&](const IterationMetrics& m) {
    metrics << m.to_json().dump() << "\n";
    extraction << nlohmann::json{{"iteration", m.iteration}, {"report", m.extraction.to_json()}}.dump() << "\n";
  };
  sinks.on_trajectory = [&](int it, const Trajectory& t, const RewardBreakdown& b) {
    trajectories << trajectory_record(t, cfg.run_id, it, b).dump() << "\n";
  };
  sinks.on_checkpoint = [&](int it, const PolicyParams& p, const ExperienceBase& base, const GoalLengthStats& s) {
    write_checkpoint(dir / "checkpoints" / checkpoint_dir_name(it), p, base, s);
  };
  const EvolutionResult res = run_evolution(cfg.setup(), sinks);
  write_checkpoint(dir / "final", res.policy, res.base, res.stats);
  {
    auto ref = open_out(dir / "final" / "reference.bin", std::ios::out | std::ios::binary);
    save_checkpoint(ref, res.reference);
  }

  nlohmann::json summary = {{"run_id", cfg.run_id}, {"iterations", cfg.trainer.iterations},
                            {"next_task", res.next_task}, {"base_size", res.base.size()}};
  if (!res.metrics.empty()) summary["last"] = res.metrics.back().to_json();
  {
    auto s = open_out(dir / "final" / "summary.json");
    s << summary.dump() << "\n";
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string config;
  std::string checkpoint;
  std::string base;
  std::string policy = "checkpoint";
  int episodes = 100;
  bool greedy = false;
  bool no_retrieval = false;
  std::uint64_t seed = 0;
  std::uint64_t first_task = kEvalTaskOffset;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_default(a.config);
  const ActionSpace space(cfg.env);
  const auto tasks = task_stream(cfg.env, static_cast<std::size_t>(a.episodes), a.first_task);

  ExperienceBase base(cfg.expbase.dim);
  std::string base_path = a.base;
  if (base_path.empty() && !a.checkpoint.empty()) {
    const fs::path sibling = fs::path(a.checkpoint).parent_path() / "base.jsonl";
    if (fs::exists(sibling)) base_path = sibling.string();
  }
  if (!base_path.empty()) {
    auto in = open_in(base_path);
    base = ExperienceBase::load(in, cfg.expbase.dim);
  }
  const RolloutContext ctx{cfg.env, space, base, cfg.expbase.budget, cfg.expbase.lambda_p};

  std::vector<Trajectory> episodes;
  nlohmann::json extra;
  if (a.policy == "checkpoint" || a.policy == "uniform") {
    PolicyParams params = PolicyParams::zeros(space.size(), feature_dim(cfg.env));
    if (a.policy == "checkpoint") {
      if (a.checkpoint.empty()) throw ConfigError("eval --policy checkpoint needs --checkpoint");
      auto in = open_in(a.checkpoint, std::ios::in | std::ios::binary);
      params = load_checkpoint(in);
      if (params.n_actions != space.size() || params.n_features != feature_dim(cfg.env)) {
        throw std::runtime_error("checkpoint shape " + std::to_string(params.n_actions) + "x" +
                                 std::to_string(params.n_features) + " does not match the configured " +
                                 std::to_string(space.size()) + "x" + std::to_string(feature_dim(cfg.env)));
      }
    } else {
      const int n_actions = a.no_retrieval ? space.n_env_actions() : static_cast<int>(space.size());
      extra["analytic_chance"] = uniform_policy_success_probability(
          cfg.env.code_length, cfg.env.alphabet_size, n_actions, space.n_env_actions(), cfg.env.effective_horizon());
    }
    episodes = evaluate_policy(params, ctx, tasks, !a.no_retrieval, a.greedy, a.seed);
  } else if (a.policy == "oracle") {
    episodes = evaluate_oracle_demo(cfg.env, tasks);
  } else if (a.policy == "retrieve-every-step") {
    episodes = evaluate_retrieve_every_step(ctx, tasks, a.seed);
  } else {
    throw ConfigError("unknown policy: " + a.policy);
  }
  nlohmann::json j = summarize(episodes).to_json();
  j["policy"] = a.policy;
  j["greedy"] = a.greedy;
  j["retrieval"] = !a.no_retrieval;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& config, std::optional<std::uint64_t> seed, bool quick, std::ostream& out) {
  const RunConfig cfg = config_or_default(config);
  VerifyOptions o;
  o.env = cfg.env;
  o.reward = cfg.reward;
  o.expbase = cfg.expbase;
  o.seed = seed.value_or(cfg.trainer.seed);
  if (quick) {
    o.reward_cases = 2000;
    o.prop1_groups = 50;
    o.gradient_instances = 10;
    o.replay_cases = 100;
    o.expbase_cases = 500;
    o.advantage_cases = 500;
  }
  const VerifyReport rep = run_verify_suite(o);
  out << rep.to_json().dump() << "\n";
  return rep.ok() ? kExitOk : kExitRuntime;
}

int cmd_inspect(const std::string& base_path, const std::string& config, const std::optional<std::string>& query,
                std::optional<double> lambda_p, std::ostream& out) {
  const RunConfig cfg = config_or_default(config);
  auto in = open_in(base_path);
  const ExperienceBase base = ExperienceBase::load(in, cfg.expbase.dim);
  const double lp = lambda_p.value_or(cfg.expbase.lambda_p);
  std::optional<Query> q;
  if (query) q = Query::from_text(*query, cfg.expbase.dim);
  for (EntryType t : kEntryTypes) {
    std::vector<std::pair<double, const Entry*>> rows;
    if (q) {
      // Full ranking: a quota as large as the store.
      RetrievalBudget all;
      all.quotas.fill(0);
      all.quotas[static_cast<std::size_t>(t)] = base.store(t).size();
      for (const Entry* e : base.retrieve(*q, all, lp)) rows.emplace_back(retrieval_score(q->embedding, *e, lp), e);
    } else {
      for (const auto& e : base.store(t)) rows.emplace_back(0.0, &e);
    }
    for (const auto& [score, e] : rows) {
      nlohmann::json j = {{"type", to_string(e->type)}, {"id", e->id}, {"priority", e->priority},
                          {"when_to_use", e->when_to_use}, {"content", e->content}};
      if (q) j["score"] = score;
      out << j.dump() << "\n";
    }
  }
  return kExitOk;
}

int cmd_replay(const std::string& log, std::uint64_t id, const std::string& config, std::ostream& out) {
  std::string cfg_path = config;
  if (cfg_path.empty()) {
    const fs::path sibling = fs::path(log).parent_path() / "config.cfg";
    if (fs::exists(sibling)) cfg_path = sibling.string();
  }
  const RunConfig cfg = config_or_default(cfg_path);
  auto in = open_in(log);
  const auto record = find_trajectory_record(in, id);
  if (!record) throw std::runtime_error("trajectory " + std::to_string(id) + " not found in " + log);
  const ReplayResult res = replay_record(*record, cfg.env);
  for (const auto& line : res.dump) out << line << "\n";
  if (!res.identical) throw std::runtime_error("replay mismatch: " + res.mismatch);
  out << "replay identical: " << res.dump.size() << " steps\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"proact: retrieval-aware policy training on a combination-lock environment"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "cold start followed by online evolution");
  c_train->add_option("--config", train.config, "run configuration")->required();
  c_train->add_option("--seed", train.seed, "overrides env.seed and trainer.seed");
  c_train->add_option("--out", train.out, "run directory (overrides run.out_dir)");
  c_train->add_option("--workers", train.workers, "rollout threads");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "success rate, rounds and retrievals on held-out tasks");
  c_eval->add_option("--config", ev.config, "run configuration");
  c_eval->add_option("--checkpoint", ev.checkpoint, "policy.bin");
  c_eval->add_option("--base", ev.base, "experience base (defaults to base.jsonl next to the checkpoint)");
  c_eval->add_option("--policy", ev.policy, "checkpoint | uniform | oracle | retrieve-every-step");
  c_eval->add_option("--episodes", ev.episodes, "number of tasks")->check(CLI::PositiveNumber);
  c_eval->add_option("--seed", ev.seed, "sampling seed");
  c_eval->add_option("--first-task", ev.first_task, "stream index of the first task");
  c_eval->add_flag("--greedy", ev.greedy, "argmax instead of sampling");
  c_eval->add_flag("--no-retrieval", ev.no_retrieval, "disable initial context and Retrieve actions");

  std::string v_config;
  std::optional<std::uint64_t> v_seed;
  bool v_quick = false;
  auto* c_verify = app.add_subcommand("verify", "property suite; nonzero exit on any failure");
  c_verify->add_option("--config", v_config, "run configuration");
  c_verify->add_option("--seed", v_seed, "suite seed");
  c_verify->add_flag("--quick", v_quick, "fewer cases per check");

  std::string i_base, i_config;
  std::optional<std::string> i_query;
  std::optional<double> i_lambda;
  auto* c_inspect = app.add_subcommand("inspect-base", "list entries, optionally ranked against a query");
  c_inspect->add_option("--base", i_base, "base.jsonl")->required();
  c_inspect->add_option("--config", i_config, "run configuration");
  c_inspect->add_option("--query", i_query, "query text");
  c_inspect->add_option("--lambda-p", i_lambda, "priority weight (defaults to expbase.lambda_p)");

  std::string r_log, r_config;
  std::uint64_t r_id = 0;
  auto* c_replay = app.add_subcommand("replay", "re-execute a logged trajectory");
  c_replay->add_option("--log", r_log, "trajectories.jsonl")->required();
  c_replay->add_option("--id", r_id, "trajectory id")->required();
  c_replay->add_option("--config", r_config, "run configuration (defaults to config.cfg next to the log)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*c_train) return cmd_train(train, out);
    if (*c_eval) return cmd_eval(ev, out);
    if (*c_verify) return cmd_verify(v_config, v_seed, v_quick, out);
    if (*c_inspect) return cmd_inspect(i_base, i_config, i_query, i_lambda, out);
    if (*c_replay) return cmd_replay(r_log, r_id, r_config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace proact
