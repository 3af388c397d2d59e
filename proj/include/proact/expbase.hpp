#pragma once

// Typed experience base: five stores (factual, episodic, success / failure /
// comparative skills), hashed bag-of-tokens embeddings, and type-balanced
// top-k retrieval ranked by cosine similarity plus a priority bonus.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace proact {

enum class EntryType : std::uint8_t {
  factual = 0,
  episodic = 1,
  success_skill = 2,
  failure_skill = 3,
  comparative_skill = 4,
};

inline constexpr std::size_t kNumEntryTypes = 5;
inline constexpr std::array<EntryType, kNumEntryTypes> kEntryTypes = {
    EntryType::factual, EntryType::episodic, EntryType::success_skill,
    EntryType::failure_skill, EntryType::comparative_skill};

std::string_view to_string(EntryType t);
EntryType entry_type_from_string(std::string_view s);

inline constexpr std::size_t kDefaultEmbeddingDim = 64;

using EntryId = std::uint64_t;
using Embedding = std::vector<double>;

/// Lower-cased alphanumeric runs; every other character separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);

/// Deterministic unit-norm text embedding. Throws std::invalid_argument on
/// text with no tokens.
Embedding encode(std::string_view text, std::size_t dim = kDefaultEmbeddingDim);

double dot(std::span<const double> a, std::span<const double> b);

struct Entry {
  EntryId id = 0;  // assigned by ExperienceBase::insert when zero
  EntryType type = EntryType::factual;
  std::string when_to_use;
  std::string content;
  // Structured payload of factual entries.
  std::optional<int> family;
  std::vector<int> code_prefix;
  Embedding embedding;  // computed from when_to_use when empty
  std::uint64_t priority = 0;
};

struct Query {
  std::string text;
  Embedding embedding;

  static Query from_text(std::string text, std::size_t dim = kDefaultEmbeddingDim);
};

struct RetrievalBudget {
  std::array<std::size_t, kNumEntryTypes> quotas{1, 1, 1, 1, 1};

  std::size_t total() const;
  std::size_t quota(EntryType t) const { return quotas[static_cast<std::size_t>(t)]; }
};

struct BaseStats {
  std::array<std::size_t, kNumEntryTypes> counts{};
  std::map<std::uint64_t, std::size_t> priority_histogram;
  std::size_t total = 0;
};

/// Score of an entry for a query: cosine + lambda_p * priority.
inline double retrieval_score(const Embedding& query, const Entry& e, double lambda_p) {
  return dot(query, e.embedding) + lambda_p * static_cast<double>(e.priority);
}

class ExperienceBase {
 public:
  explicit ExperienceBase(std::size_t dim = kDefaultEmbeddingDim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return by_id_.size(); }

  /// Stores the entry unless (type, when_to_use) is already present.
  /// Throws std::invalid_argument on malformed entries.
  bool insert(Entry entry);

  /// Replaces the payload of the factual entry stored under the same key
  /// when the candidate carries a strictly longer code prefix. Priority and
  /// id are kept. Returns true when content changed.
  bool upgrade_factual(const Entry& candidate);

  /// Per type, the quota-many best entries by retrieval_score, ties broken
  /// by ascending id. Pointers stay valid until the next mutation.
  std::vector<const Entry*> retrieve(const Query& query, const RetrievalBudget& budget,
                                     double lambda_p) const;

  /// Owning variant of retrieve().
  std::vector<Entry> retrieve_copies(const Query& query, const RetrievalBudget& budget,
                                     double lambda_p) const;

  /// +1 priority per listed id. Unknown ids bump the warning counter.
  void bump_priority(std::span<const EntryId> ids);
  std::size_t unknown_bump_count() const { return unknown_bumps_; }

  BaseStats stats() const;

  const Entry* find(EntryId id) const;
  const Entry* find(EntryType type, std::string_view when_to_use) const;
  std::span<const Entry> store(EntryType type) const {
    return stores_[static_cast<std::size_t>(type)];
  }

  /// One JSON record per line: id, type_label, when_to_use, content,
  /// family, code_prefix, priority. Embeddings are recomputed on load.
  void save(std::ostream& out) const;
  static ExperienceBase load(std::istream& in, std::size_t dim = kDefaultEmbeddingDim);

 private:
  struct Location {
    std::size_t type;
    std::size_t index;
  };
  static std::string key_of(EntryType t, std::string_view when_to_use);

  std::size_t dim_;
  std::array<std::vector<Entry>, kNumEntryTypes> stores_;
  std::unordered_map<EntryId, Location> by_id_;
  std::unordered_map<std::string, EntryId> by_key_;
  EntryId next_id_ = 1;
  std::size_t unknown_bumps_ = 0;
};

}  // namespace proact

namespace proact {

/// Retrieval settings of a run.
struct ExpbaseConfig {
  std::size_t dim = kDefaultEmbeddingDim;
  RetrievalBudget budget;
  double lambda_p = 0.05;

  void validate() const;
};

}  // namespace proact
