#include "proact/extract.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "proact/errors.hpp"

namespace proact {

void ExtractionConfig::validate() const {
  if (max_factual_per_traj == 0 || max_episodic_per_traj == 0 || max_skills_per_group == 0) {
    throw ConfigError("extraction caps must be positive");
  }
}

std::string factual_key(int family) { return family_query_text(family); }
std::string episodic_key(int family) { return "recent attempt on family " + std::to_string(family); }
std::string comparative_key(int family) { return "deciding whether to retrieve on family " + std::to_string(family); }

namespace {

Entry make_entry(EntryType type, std::string key, std::string content) {
  Entry e;
  e.type = type;
  e.when_to_use = std::move(key);
  e.content = std::move(content);
  return e;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

bool retrieved_before_first_try(const Trajectory& t, const ActionSpace& space) {
  const int first_env = t.first_env_step(space);
  return !t.retrieval_steps.empty() && (first_env < 0 || t.retrieval_steps.front().step < first_env);
}

}  // namespace

std::vector<int> confirmed_prefix(const Trajectory& traj, const ActionSpace& space) {
  std::vector<int> known;
  std::size_t longest = 0;
  for (const auto& s : traj.steps) {
    if (!space.is_env(s.action) || s.feedback != Feedback::advance) continue;
    const auto cursor = static_cast<std::size_t>(s.observation.cursor);
    if (known.size() <= cursor) known.resize(cursor + 1, -1);
    known[cursor] = space.symbol(s.action);
    longest = std::max(longest, cursor + 1);
  }
  known.resize(longest);
  return known;
}

std::vector<Entry> extract_factual(const Trajectory& traj, const ActionSpace& space, const ExtractionConfig& cfg) {
  std::vector<Entry> out;
  auto prefix = confirmed_prefix(traj, space);
  if (prefix.empty() || cfg.max_factual_per_traj == 0) return out;
  const int g = traj.task.goal.family;
  Entry e = make_entry(EntryType::factual, factual_key(g),
                       "family " + std::to_string(g) + " code starts " + join(prefix));
  e.family = g;
  e.code_prefix = std::move(prefix);
  out.push_back(std::move(e));
  return out;
}

std::vector<Entry> extract_episodic(const Trajectory& traj, const ExtractionConfig& cfg) {
  std::vector<Entry> out;
  if (cfg.max_episodic_per_traj == 0) return out;
  const int g = traj.task.goal.family;
  std::string content = "family=" + std::to_string(g) + " T=" + std::to_string(traj.length()) +
                        " success=" + (traj.success ? "true" : "false") +
                        " retrievals=" + std::to_string(traj.retrieval_steps.size());
  out.push_back(make_entry(EntryType::episodic, episodic_key(g), std::move(content)));
  return out;
}

std::vector<Entry> distill_success(std::span<const Trajectory> group, const ActionSpace& space,
                                   const ExtractionConfig& cfg) {
  std::vector<Entry> out;
  const bool pattern = std::any_of(group.begin(), group.end(), [&](const Trajectory& t) {
    return t.success && retrieved_before_first_try(t, space);
  });
  if (pattern && out.size() < cfg.max_skills_per_group) {
    out.push_back(make_entry(EntryType::success_skill, rules::kSuccessKey, rules::kSuccessRule));
  }
  return out;
}

std::vector<Entry> distill_failure(std::span<const Trajectory> group, const ExtractionConfig& cfg) {
  std::vector<Entry> out;
  bool repeat = false;
  bool blind = false;
  for (const auto& t : group) {
    if (t.success) continue;
    repeat = repeat || has_repeated_query(t);
    blind = blind || (t.retrieval_steps.empty() && t.length() >= t.task.horizon);
  }
  if (repeat && out.size() < cfg.max_skills_per_group) {
    out.push_back(make_entry(EntryType::failure_skill, rules::kRepeatKey, rules::kRepeatRule));
  }
  if (blind && out.size() < cfg.max_skills_per_group) {
    out.push_back(make_entry(EntryType::failure_skill, rules::kResetKey, rules::kResetRule));
  }
  return out;
}

std::vector<Entry> distill_comparative(std::span<const ScoredPair> pairs,
                                       std::span<const std::vector<const Trajectory*>> fallback_groups,
                                       const ExtractionConfig& cfg) {
  std::vector<Entry> out;
  if (!pairs.empty()) {
    for (const auto& p : pairs) {
      if (p.delta == 0.0 || out.size() >= cfg.max_skills_per_group) continue;
      const int g = p.ret->task.goal.family;
      const bool helped = p.delta > 0.0;
      std::string content = std::string("retrieval at step ") + std::to_string(p.branch_step) +
                            (helped ? " helped" : " hurt") + " (cursor " +
                            std::to_string(p.ret->steps[static_cast<std::size_t>(p.branch_step)].observation.cursor) +
                            ")";
      out.push_back(make_entry(EntryType::comparative_skill, comparative_key(g), std::move(content)));
    }
    return out;
  }
  auto rank = [](const Trajectory* t) { return std::make_tuple(t->success ? 1 : 0, -t->length()); };
  for (const auto& group : fallback_groups) {
    if (group.size() < 2 || out.size() >= cfg.max_skills_per_group) continue;
    const auto [worst, best] = std::minmax_element(group.begin(), group.end(), [&](const Trajectory* a, const Trajectory* b) {
      return rank(a) < rank(b);
    });
    if (rank(*best) == rank(*worst)) continue;
    const Trajectory& b = **best;
    const Trajectory& w = **worst;
    std::string content = "better: success=" + std::string(b.success ? "true" : "false") +
                          " T=" + std::to_string(b.length()) +
                          " retrievals=" + std::to_string(b.retrieval_steps.size()) +
                          "; worse: success=" + std::string(w.success ? "true" : "false") +
                          " T=" + std::to_string(w.length()) +
                          " retrievals=" + std::to_string(w.retrieval_steps.size());
    out.push_back(make_entry(EntryType::comparative_skill, comparative_key(b.task.goal.family), std::move(content)));
  }
  return out;
}

std::size_t UpdateReport::total_inserted() const {
  std::size_t n = 0;
  for (auto v : inserted) n += v;
  return n;
}

nlohmann::json UpdateReport::to_json() const {
  nlohmann::json ins, dup;
  for (std::size_t t = 0; t < kNumEntryTypes; ++t) {
    const std::string name(to_string(static_cast<EntryType>(t)));
    ins[name] = inserted[t];
    dup[name] = deduped[t];
  }
  return {{"inserted", ins}, {"deduped", dup}, {"upgraded", upgraded}, {"bumped", bumped}};
}

UpdateReport update_base(ExperienceBase& base, std::span<const Entry> new_entries,
                         std::span<const Trajectory* const> successful) {
  UpdateReport report;
  for (const auto& e : new_entries) {
    const auto t = static_cast<std::size_t>(e.type);
    if (base.insert(e)) {
      ++report.inserted[t];
    } else {
      ++report.deduped[t];
      if (base.upgrade_factual(e)) ++report.upgraded;
    }
  }
  std::vector<EntryId> bumps;
  for (const Trajectory* t : successful) {
    const auto ids = t->retrieved_ids();
    bumps.insert(bumps.end(), ids.begin(), ids.end());
  }
  base.bump_priority(bumps);
  report.bumped = bumps.size();
  return report;
}

}  // namespace proact
