#include "proact/kernels.hpp"

#include <exception>
#include <mutex>

#include <omp.h>

namespace proact {

void score_entries_serial(std::span<const Entry> entries, std::span<const double> query, double lambda_p,
                          std::span<double> out) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out[i] = dot(query, entries[i].embedding) + lambda_p * static_cast<double>(entries[i].priority);
  }
}

void score_entries_parallel(std::span<const Entry> entries, std::span<const double> query, double lambda_p,
                            std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = dot(query, entries[k].embedding) + lambda_p * static_cast<double>(entries[k].priority);
  }
}

void score_entries(std::span<const Entry> entries, std::span<const double> query, double lambda_p,
                   std::span<double> out) {
  if (entries.size() >= kParallelScoreThreshold && !omp_in_parallel()) {
    score_entries_parallel(entries, query, lambda_p, out);
  } else {
    score_entries_serial(entries, query, lambda_p, out);
  }
}

RolloutOutcome run_job(const RolloutJob& job, const PolicyParams& params, const RolloutContext& ctx) {
  CombinationLock env(ctx.env_config);
  Rng rng(job.seed);
  RolloutOutcome out;
  out.primary = run_episode(params, env, job.task, ctx, job.retrieval_enabled, rng, job.id);
  if (job.build_pair && job.retrieval_enabled) {
    if (auto sel = select_branch_step(out.primary, rng)) {
      out.branch = branch_continuation(out.primary, sel->step, params, env, ctx, rng, job.branch_id);
      out.branch_step = sel->step;
      out.branch_fallback = sel->fallback;
    }
  }
  return out;
}

std::vector<RolloutOutcome> collect_rollouts_serial(std::span<const RolloutJob> jobs, const PolicyParams& params,
                                                    const RolloutContext& ctx) {
  std::vector<RolloutOutcome> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(run_job(job, params, ctx));
  return out;
}

std::vector<RolloutOutcome> collect_rollouts_parallel(std::span<const RolloutJob> jobs, const PolicyParams& params,
                                                      const RolloutContext& ctx, int workers) {
  std::vector<RolloutOutcome> out(jobs.size());
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_job(jobs[static_cast<std::size_t>(i)], params, ctx);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace proact
