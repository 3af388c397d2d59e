// Serial versus OpenMP kernels: entry scoring and rollout collection.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "proact/kernels.hpp"

using namespace proact;

namespace {

std::vector<Entry> make_entries(std::size_t n) {
  Rng rng(1);
  std::vector<Entry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = i + 1;
    out[i].when_to_use = "key " + std::to_string(rng.below(1000000));
    out[i].embedding = encode(out[i].when_to_use);
    out[i].priority = rng.below(100);
  }
  return out;
}

template <bool Parallel>
void BM_ScoreEntries(benchmark::State& state) {
  const auto entries = make_entries(static_cast<std::size_t>(state.range(0)));
  const Embedding q = encode("code for family 7");
  std::vector<double> out(entries.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      score_entries_parallel(entries, q, 0.05, out);
    } else {
      score_entries_serial(entries, q, 0.05, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct RolloutFixture {
  EnvConfig env;
  ActionSpace space;
  ExperienceBase base;
  PolicyParams params;
  std::vector<RolloutJob> jobs;

  explicit RolloutFixture(std::size_t n_jobs) : env(make_env()), space(env) {
    for (int f = 0; f < env.n_families; ++f) {
      Entry e;
      e.type = EntryType::factual;
      e.when_to_use = family_query_text(f);
      e.content = "code";
      e.family = f;
      e.code_prefix = family_code(env, f);
      base.insert(e);
    }
    params = PolicyParams::zeros(space.size(), feature_dim(env));
    Rng rng(2);
    for (double& w : params.weights) w = rng.uniform01() - 0.5;
    const auto tasks = task_stream(env, n_jobs);
    for (std::size_t i = 0; i < n_jobs; ++i) jobs.push_back({tasks[i], true, true, 100 + i, 2 * i + 1, 2 * i + 2});
  }

  static EnvConfig make_env() {
    EnvConfig c;
    c.code_length = 3;
    c.alphabet_size = 5;
    c.n_families = 30;
    return c;
  }
};

template <bool Parallel>
void BM_CollectRollouts(benchmark::State& state) {
  const RolloutFixture fx(static_cast<std::size_t>(state.range(0)));
  const RolloutContext ctx{fx.env, fx.space, fx.base, {}, 1e-5};
  for (auto _ : state) {
    auto out = Parallel ? collect_rollouts_parallel(fx.jobs, fx.params, ctx, 0)
                        : collect_rollouts_serial(fx.jobs, fx.params, ctx);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ScoreEntries<false>)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_ScoreEntries<true>)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_CollectRollouts<false>)->Arg(32)->Arg(256);
BENCHMARK(BM_CollectRollouts<true>)->Arg(32)->Arg(256);

BENCHMARK_MAIN();
