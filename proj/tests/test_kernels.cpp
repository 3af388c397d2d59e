#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include "proact/kernels.hpp"
#include "support.hpp"

using namespace proact;

namespace {

std::vector<Entry> random_entries(std::size_t n, Rng& rng) {
  std::vector<Entry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = i + 1;
    out[i].when_to_use = "key " + std::to_string(rng.below(100000));
    out[i].embedding = encode(out[i].when_to_use);
    out[i].priority = rng.below(50);
  }
  return out;
}

bool same_traj(const Trajectory& a, const Trajectory& b) {
  return a.id == b.id && a.steps == b.steps && a.retrieval_steps == b.retrieval_steps &&
         a.initial_context == b.initial_context && a.success == b.success;
}

}  // namespace

TEST_CASE("score_entries: parallel equals serial and the plain formula") {
  Rng rng(1);
  for (std::size_t n : {0u, 1u, 17u, 5000u, 20000u}) {
    const auto es = random_entries(n, rng);
    const Embedding q = encode("code for family 3");
    std::vector<double> a(n), b(n), c(n);
    score_entries_serial(es, q, 0.05, a);
    score_entries_parallel(es, q, 0.05, b);
    score_entries(es, q, 0.05, c);
    CHECK(a == b);
    CHECK(a == c);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k) dot += q[k] * es[i].embedding[k];
      CHECK(a[i] == doctest::Approx(dot + 0.05 * static_cast<double>(es[i].priority)).epsilon(1e-12));
    }
  }
}

TEST_CASE("collect_rollouts: parallel is bit-identical to serial") {
  EnvConfig c;
  c.code_length = 3;
  c.alphabet_size = 4;
  c.n_families = 5;
  c.seed = 2;
  const ActionSpace s(c);
  ExperienceBase base;
  for (int f = 0; f < c.n_families; f += 2) {
    Entry e;
    e.type = EntryType::factual;
    e.when_to_use = family_query_text(f);
    e.content = "c";
    e.family = f;
    e.code_prefix = family_code(c, f);
    base.insert(e);
  }
  const RolloutContext ctx{c, s, base, {}, 0.05};
  Rng rng(3);
  auto p = proact::testing::hand_built_policy(c, 1.0);
  for (double& w : p.weights) w += rng.uniform01() - 0.5;
  std::vector<RolloutJob> jobs;
  const auto tasks = task_stream(c, 64);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    jobs.push_back({tasks[i], i % 3 != 0, true, 1000 + i, 2 * i + 1, 2 * i + 2});
  }
  const auto ser = collect_rollouts_serial(jobs, p, ctx);
  for (int workers : {1, 2, 4, 0}) {
    const auto par = collect_rollouts_parallel(jobs, p, ctx, workers);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < ser.size(); ++i) {
      CHECK(same_traj(ser[i].primary, par[i].primary));
      CHECK(ser[i].branch.has_value() == par[i].branch.has_value());
      if (ser[i].branch) CHECK(same_traj(*ser[i].branch, *par[i].branch));
      CHECK(ser[i].branch_step == par[i].branch_step);
      CHECK(ser[i].branch_fallback == par[i].branch_fallback);
    }
  }
  // Each job's result depends only on the job.
  const auto one = run_job(jobs[7], p, ctx);
  CHECK(same_traj(one.primary, ser[7].primary));
  CHECK(omp_get_max_threads() >= 1);
}
