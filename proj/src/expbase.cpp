#include "proact/expbase.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "proact/kernels.hpp"

namespace proact {

namespace {

constexpr std::array<std::string_view, kNumEntryTypes> kTypeNames = {
    "factual", "episodic", "success_skill", "failure_skill", "comparative_skill"};

void check_entry(const Entry& e, std::size_t dim) {
  if (e.when_to_use.empty()) throw std::invalid_argument("entry has empty when_to_use");
  if (e.embedding.size() != dim) throw std::invalid_argument("entry embedding has wrong dimension");
  double n2 = 0.0;
  for (double v : e.embedding) {
    if (!std::isfinite(v)) throw std::invalid_argument("entry embedding is not finite");
    n2 += v * v;
  }
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw std::invalid_argument("entry embedding is not unit norm");
  if (e.type == EntryType::factual && !e.family) {
    throw std::invalid_argument("factual entry without family");
  }
}

}  // namespace

std::string_view to_string(EntryType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

EntryType entry_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNumEntryTypes; ++i) {
    if (kTypeNames[i] == s) return static_cast<EntryType>(i);
  }
  throw std::invalid_argument("unknown entry type: " + std::string(s));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Embedding encode(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw std::invalid_argument("cannot encode text without tokens");
  Embedding v(dim, 0.0);
  for (const auto& tok : tokens) v[fnv1a64(tok) % dim] += 1.0;
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Query Query::from_text(std::string text, std::size_t dim) {
  Query q;
  q.embedding = encode(text, dim);
  q.text = std::move(text);
  return q;
}

std::size_t RetrievalBudget::total() const {
  return std::accumulate(quotas.begin(), quotas.end(), std::size_t{0});
}

ExperienceBase::ExperienceBase(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::string ExperienceBase::key_of(EntryType t, std::string_view when_to_use) {
  std::string k(to_string(t));
  k.push_back('\x1f');
  k.append(when_to_use);
  return k;
}

bool ExperienceBase::insert(Entry entry) {
  if (entry.embedding.empty() && !entry.when_to_use.empty()) {
    entry.embedding = encode(entry.when_to_use, dim_);
  }
  check_entry(entry, dim_);
  auto key = key_of(entry.type, entry.when_to_use);
  if (by_key_.contains(key)) return false;
  if (entry.id == 0) entry.id = next_id_;
  if (by_id_.contains(entry.id)) throw std::invalid_argument("duplicate entry id");
  next_id_ = std::max(next_id_, entry.id + 1);
  const auto t = static_cast<std::size_t>(entry.type);
  by_id_.emplace(entry.id, Location{t, stores_[t].size()});
  by_key_.emplace(std::move(key), entry.id);
  stores_[t].push_back(std::move(entry));
  return true;
}

bool ExperienceBase::upgrade_factual(const Entry& candidate) {
  if (candidate.type != EntryType::factual) return false;
  auto it = by_key_.find(key_of(candidate.type, candidate.when_to_use));
  if (it == by_key_.end()) return false;
  const Location loc = by_id_.at(it->second);
  Entry& stored = stores_[loc.type][loc.index];
  if (candidate.family != stored.family) return false;
  if (candidate.code_prefix.size() <= stored.code_prefix.size()) return false;
  stored.code_prefix = candidate.code_prefix;
  stored.content = candidate.content;
  return true;
}

std::vector<const Entry*> ExperienceBase::retrieve(const Query& query, const RetrievalBudget& budget,
                                                   double lambda_p) const {
  std::vector<const Entry*> out;
  std::vector<double> scores;
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < kNumEntryTypes; ++t) {
    const auto& entries = stores_[t];
    const std::size_t k = std::min(budget.quotas[t], entries.size());
    if (k == 0) continue;
    scores.resize(entries.size());
    score_entries(entries, query.embedding, lambda_p, scores);
    order.resize(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return entries[a].id < entries[b].id;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    for (std::size_t i = 0; i < k; ++i) out.push_back(&entries[order[i]]);
  }
  return out;
}

std::vector<Entry> ExperienceBase::retrieve_copies(const Query& query, const RetrievalBudget& budget,
                                                   double lambda_p) const {
  std::vector<Entry> out;
  for (const Entry* e : retrieve(query, budget, lambda_p)) out.push_back(*e);
  return out;
}

void ExperienceBase::bump_priority(std::span<const EntryId> ids) {
  for (EntryId id : ids) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
      ++unknown_bumps_;
      continue;
    }
    ++stores_[it->second.type][it->second.index].priority;
  }
}

BaseStats ExperienceBase::stats() const {
  BaseStats s;
  for (std::size_t t = 0; t < kNumEntryTypes; ++t) {
    s.counts[t] = stores_[t].size();
    s.total += stores_[t].size();
    for (const auto& e : stores_[t]) ++s.priority_histogram[e.priority];
  }
  return s;
}

const Entry* ExperienceBase::find(EntryId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return nullptr;
  return &stores_[it->second.type][it->second.index];
}

const Entry* ExperienceBase::find(EntryType type, std::string_view when_to_use) const {
  auto it = by_key_.find(key_of(type, when_to_use));
  return it == by_key_.end() ? nullptr : find(it->second);
}

void ExperienceBase::save(std::ostream& out) const {
  // Entries in id order so that files are stable across insertion paths.
  std::vector<const Entry*> all;
  all.reserve(size());
  for (const auto& store : stores_) {
    for (const auto& e : store) all.push_back(&e);
  }
  std::sort(all.begin(), all.end(), [](const Entry* a, const Entry* b) { return a->id < b->id; });
  for (const Entry* e : all) {
    nlohmann::json j;
    j["id"] = e->id;
    j["type_label"] = to_string(e->type);
    j["when_to_use"] = e->when_to_use;
    j["content"] = e->content;
    if (e->family) j["family"] = *e->family;
    if (!e->code_prefix.empty()) j["code_prefix"] = e->code_prefix;
    j["priority"] = e->priority;
    out << j.dump() << '\n';
  }
}

ExperienceBase ExperienceBase::load(std::istream& in, std::size_t dim) {
  ExperienceBase base(dim);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Entry e;
      e.id = j.at("id").get<EntryId>();
      e.type = entry_type_from_string(j.at("type_label").get<std::string>());
      e.when_to_use = j.at("when_to_use").get<std::string>();
      e.content = j.at("content").get<std::string>();
      if (j.contains("family")) e.family = j.at("family").get<int>();
      if (j.contains("code_prefix")) e.code_prefix = j.at("code_prefix").get<std::vector<int>>();
      e.priority = j.at("priority").get<std::uint64_t>();
      if (e.id == 0) throw std::invalid_argument("entry id must be positive");
      if (!base.insert(std::move(e))) throw std::invalid_argument("duplicate (type_label, when_to_use)");
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("base file line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const std::invalid_argument& ex) {
      throw std::invalid_argument("base file line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return base;
}

}  // namespace proact

#include "proact/errors.hpp"

namespace proact {

void ExpbaseConfig::validate() const {
  if (dim == 0) throw ConfigError("expbase.dim must be positive");
  if (budget.total() == 0) throw ConfigError("expbase quotas must sum to a positive K");
  if (!(lambda_p >= 0.0) || !std::isfinite(lambda_p)) throw ConfigError("expbase.lambda_p must be >= 0");
}

}  // namespace proact
