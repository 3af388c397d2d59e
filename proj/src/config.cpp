#include "proact/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "proact/errors.hpp"

namespace proact {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad value for " + key + ": '" + v + "'");
}

std::string phase_name(std::size_t k, std::size_t n) {
  static const char* names[] = {"calibration", "transition", "refinement"};
  return n == 3 ? names[k] : "phase" + std::to_string(k + 1);
}

std::vector<AnnealPhase> parse_phases(const std::string& key, const std::string& v) {
  std::vector<AnnealPhase> phases;
  const auto parts = split(v, ',');
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto f = split(parts[k], ':');
    if (f.size() != 3) throw ConfigError("bad value for " + key + ": expected fraction:warmup:span entries");
    phases.push_back({phase_name(k, parts.size()), parse_number<double>(key, f[0]), parse_number<double>(key, f[1]),
                      parse_number<int>(key, f[2])});
  }
  return phases;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <typename T, typename Obj>
Setter num(T Obj::*field, Obj RunConfig::*block) {
  return [=](RunConfig& c, const std::string& k, const std::string& v) { (c.*block).*field = parse_number<T>(k, v); };
}

template <typename Obj>
Setter flag(bool Obj::*field, Obj RunConfig::*block) {
  return [=](RunConfig& c, const std::string& k, const std::string& v) { (c.*block).*field = parse_bool(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"env.code_length", num(&EnvConfig::code_length, &RunConfig::env)},
      {"env.alphabet_size", num(&EnvConfig::alphabet_size, &RunConfig::env)},
      {"env.n_families", num(&EnvConfig::n_families, &RunConfig::env)},
      {"env.horizon", num(&EnvConfig::horizon, &RunConfig::env)},
      {"env.gamma", num(&EnvConfig::gamma, &RunConfig::env)},
      {"env.seed", num(&EnvConfig::seed, &RunConfig::env)},
      {"trainer.group_size", num(&TrainerConfig::group_size, &RunConfig::trainer)},
      {"trainer.learning_rate", num(&TrainerConfig::learning_rate, &RunConfig::trainer)},
      {"trainer.clip_eps", num(&TrainerConfig::clip_eps, &RunConfig::trainer)},
      {"trainer.kl_beta", num(&TrainerConfig::kl_beta, &RunConfig::trainer)},
      {"trainer.iterations", num(&TrainerConfig::iterations, &RunConfig::trainer)},
      {"trainer.batch_tasks", num(&TrainerConfig::batch_tasks, &RunConfig::trainer)},
      {"trainer.anneal_phases",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.trainer.anneal_phases = parse_phases(k, v); }},
      {"trainer.seed", num(&TrainerConfig::seed, &RunConfig::trainer)},
      {"trainer.max_grad_norm", num(&TrainerConfig::max_grad_norm, &RunConfig::trainer)},
      {"trainer.cold_start_epochs", num(&TrainerConfig::cold_start_epochs, &RunConfig::trainer)},
      {"trainer.cold_start_lr", num(&TrainerConfig::cold_start_lr, &RunConfig::trainer)},
      {"trainer.cold_start_demos", num(&TrainerConfig::cold_start_demos, &RunConfig::trainer)},
      {"trainer.ref_refresh_interval", num(&TrainerConfig::ref_refresh_interval, &RunConfig::trainer)},
      {"trainer.retrieval_disabled", flag(&TrainerConfig::retrieval_disabled, &RunConfig::trainer)},
      {"trainer.paired_branches", flag(&TrainerConfig::paired_branches, &RunConfig::trainer)},
      {"trainer.verify_prop1", flag(&TrainerConfig::verify_prop1, &RunConfig::trainer)},
      {"trainer.checkpoint_every", num(&TrainerConfig::checkpoint_every, &RunConfig::trainer)},
      {"trainer.workers", num(&TrainerConfig::workers, &RunConfig::trainer)},
      {"reward.alpha", num(&RewardWeights::alpha, &RunConfig::reward)},
      {"reward.lambda_T", num(&RewardWeights::lambda_T, &RunConfig::reward)},
      {"reward.w_q", num(&RewardWeights::w_q, &RunConfig::reward)},
      {"reward.w_t", num(&RewardWeights::w_t, &RunConfig::reward)},
      {"reward.eps_std", num(&RewardWeights::eps_std, &RunConfig::reward)},
      {"expbase.dim", num(&ExpbaseConfig::dim, &RunConfig::expbase)},
      {"expbase.quotas",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto parts = split(v, ',');
         if (parts.size() != kNumEntryTypes) throw ConfigError("bad value for " + k + ": expected 5 counts");
         for (std::size_t t = 0; t < kNumEntryTypes; ++t) {
           c.expbase.budget.quotas[t] = parse_number<std::size_t>(k, parts[t]);
         }
       }},
      {"expbase.lambda_p", num(&ExpbaseConfig::lambda_p, &RunConfig::expbase)},
      {"extraction.max_factual_per_traj", num(&ExtractionConfig::max_factual_per_traj, &RunConfig::extraction)},
      {"extraction.max_episodic_per_traj", num(&ExtractionConfig::max_episodic_per_traj, &RunConfig::extraction)},
      {"extraction.max_skills_per_group", num(&ExtractionConfig::max_skills_per_group, &RunConfig::extraction)},
      {"run.out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"run.run_id", [](RunConfig& c, const std::string&, const std::string& v) { c.run_id = v; }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  trainer.validate();
  reward.validate();
  expbase.validate();
  extraction.validate();
  if (run_id.empty()) throw ConfigError("run.run_id must not be empty");
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig c;
  std::string section;
  std::string line;
  bool phases_given = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string s = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      static const std::set<std::string> known = {"env", "trainer", "reward", "expbase", "extraction", "run"};
      if (!known.contains(section)) throw ConfigError("unknown section: " + section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
    const std::string key = section + "." + trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key: " + key);
    it->second(c, key, value);
    phases_given = phases_given || key == "trainer.anneal_phases";
  }
  if (!phases_given) c.trainer.anneal_phases = default_anneal_phases(c.trainer.iterations);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_run_config(in);
}

namespace {

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "[env]\n"
    << "code_length = " << c.env.code_length << "\n"
    << "alphabet_size = " << c.env.alphabet_size << "\n"
    << "n_families = " << c.env.n_families << "\n"
    << "horizon = " << c.env.horizon << "\n"
    << "gamma = " << num(c.env.gamma) << "\n"
    << "seed = " << c.env.seed << "\n\n";
  o << "[trainer]\n"
    << "group_size = " << c.trainer.group_size << "\n"
    << "learning_rate = " << num(c.trainer.learning_rate) << "\n"
    << "clip_eps = " << num(c.trainer.clip_eps) << "\n"
    << "kl_beta = " << num(c.trainer.kl_beta) << "\n"
    << "iterations = " << c.trainer.iterations << "\n"
    << "batch_tasks = " << c.trainer.batch_tasks << "\n"
    << "anneal_phases = ";
  for (std::size_t k = 0; k < c.trainer.anneal_phases.size(); ++k) {
    const auto& p = c.trainer.anneal_phases[k];
    o << (k ? ", " : "") << num(p.no_ret_fraction) << ":" << num(p.warmup_ratio) << ":" << p.span;
  }
  o << "\n"
    << "seed = " << c.trainer.seed << "\n"
    << "max_grad_norm = " << num(c.trainer.max_grad_norm) << "\n"
    << "cold_start_epochs = " << c.trainer.cold_start_epochs << "\n"
    << "cold_start_lr = " << num(c.trainer.cold_start_lr) << "\n"
    << "cold_start_demos = " << c.trainer.cold_start_demos << "\n"
    << "ref_refresh_interval = " << c.trainer.ref_refresh_interval << "\n"
    << "retrieval_disabled = " << (c.trainer.retrieval_disabled ? "true" : "false") << "\n"
    << "paired_branches = " << (c.trainer.paired_branches ? "true" : "false") << "\n"
    << "verify_prop1 = " << (c.trainer.verify_prop1 ? "true" : "false") << "\n"
    << "checkpoint_every = " << c.trainer.checkpoint_every << "\n"
    << "workers = " << c.trainer.workers << "\n\n";
  o << "[reward]\n"
    << "alpha = " << num(c.reward.alpha) << "\n"
    << "lambda_T = " << num(c.reward.lambda_T) << "\n"
    << "w_q = " << num(c.reward.w_q) << "\n"
    << "w_t = " << num(c.reward.w_t) << "\n"
    << "eps_std = " << num(c.reward.eps_std) << "\n\n";
  o << "[expbase]\n"
    << "dim = " << c.expbase.dim << "\n"
    << "quotas = ";
  for (std::size_t t = 0; t < kNumEntryTypes; ++t) o << (t ? "," : "") << c.expbase.budget.quotas[t];
  o << "\n"
    << "lambda_p = " << num(c.expbase.lambda_p) << "\n\n";
  o << "[extraction]\n"
    << "max_factual_per_traj = " << c.extraction.max_factual_per_traj << "\n"
    << "max_episodic_per_traj = " << c.extraction.max_episodic_per_traj << "\n"
    << "max_skills_per_group = " << c.extraction.max_skills_per_group << "\n\n";
  o << "[run]\n"
    << "out_dir = " << c.out_dir << "\n"
    << "run_id = " << c.run_id << "\n";
  return o.str();
}

}  // namespace proact
