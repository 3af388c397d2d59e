#pragma once

// Data-parallel kernels. Each has a serial reference implementation that
// the tests compare against; the parallel versions must be bit-identical.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "proact/expbase.hpp"
#include "proact/rollout.hpp"

namespace proact {

/// out[i] = cosine(query, entries[i]) + lambda_p * priority.
void score_entries_serial(std::span<const Entry> entries, std::span<const double> query, double lambda_p,
                          std::span<double> out);
void score_entries_parallel(std::span<const Entry> entries, std::span<const double> query, double lambda_p,
                            std::span<double> out);
/// Dispatches to the parallel kernel for large stores outside parallel regions.
void score_entries(std::span<const Entry> entries, std::span<const double> query, double lambda_p,
                   std::span<double> out);

inline constexpr std::size_t kParallelScoreThreshold = 4096;

struct RolloutJob {
  TaskInstance task;
  bool retrieval_enabled = true;
  bool build_pair = true;
  std::uint64_t seed = 0;
  std::uint64_t id = 0;         // primary trajectory id
  std::uint64_t branch_id = 0;  // id given to the no-retrieval branch
};

struct RolloutOutcome {
  Trajectory primary;
  std::optional<Trajectory> branch;
  int branch_step = -1;
  bool branch_fallback = false;
};

/// Runs one job on a private environment and RNG stream.
RolloutOutcome run_job(const RolloutJob& job, const PolicyParams& params, const RolloutContext& ctx);

std::vector<RolloutOutcome> collect_rollouts_serial(std::span<const RolloutJob> jobs, const PolicyParams& params,
                                                    const RolloutContext& ctx);
/// OpenMP over jobs; `workers` <= 0 leaves the runtime default.
std::vector<RolloutOutcome> collect_rollouts_parallel(std::span<const RolloutJob> jobs, const PolicyParams& params,
                                                      const RolloutContext& ctx, int workers);

}  // namespace proact
