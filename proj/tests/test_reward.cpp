#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "proact/reward.hpp"

using namespace proact;

namespace {

// Synthetic trajectory: `length` steps, success on the last one, retrieval
// actions at the given steps with the given queries.
Trajectory synth(int family, int length, bool success, const std::vector<std::pair<int, std::string>>& retrievals,
                 const ActionSpace& space) {
  Trajectory t;
  t.task.goal.family = family;
  t.steps.resize(static_cast<std::size_t>(length));
  for (auto& s : t.steps) s.action = space.env_action(0);
  for (const auto& [step, q] : retrievals) {
    t.steps[static_cast<std::size_t>(step)].action = space.generic_retrieval();
    t.retrieval_steps.push_back({step, q});
  }
  if (success && length > 0) t.steps.back().env_reward = 1.0;
  t.success = success;
  return t;
}

double sgn(double x) { return (x > 0) - (x < 0); }

}  // namespace

TEST_CASE("rollout margin examples") {
  CHECK(rollout_margin(1.0, 10, 0.0, 20, 0.5) == 1.25);
  CHECK(rollout_margin(1.0, 7, 1.0, 7, 0.5) == 0.0);
  CHECK(rollout_margin(0.0, 5, 1.0, 5, 0.5) == -1.0);
  CHECK(rollout_margin(0.0, 0, 0.0, 0, 0.5) == 0.0);
}

TEST_CASE("swapping unequal lengths is not an exact negation") {
  // 1 + 0.5*(20-10)/20 = 1.25 versus -1 + 0.5*(10-20)/10 = -1.5
  CHECK(rollout_margin(1.0, 10, 0.0, 20, 0.5) == 1.25);
  CHECK(rollout_margin(0.0, 20, 1.0, 10, 0.5) == -1.5);
}

TEST_CASE("process reward examples") {
  RewardWeights w;
  CHECK(process_reward(true, 1.25, w) == 0.5);
  CHECK(process_reward(true, -0.01, w) == -0.5);
  CHECK(process_reward(true, 0.0, w) == 0.0);
  CHECK(process_reward(false, 1.25, w) == 0.0);
  CHECK(process_reward(false, -1.0, w) == 0.0);
}

TEST_CASE("process reward over the z x delta grid") {
  RewardWeights w;
  w.alpha = 0.7;
  for (bool z : {false, true}) {
    for (double d : {-2.0, -1e-12, 0.0, 1e-12, 3.0}) {
      const double expect = z ? w.alpha * sgn(d) : 0.0;
      CHECK(process_reward(z, d, w) == expect);
    }
  }
}

TEST_CASE("efficiency reward examples") {
  const ActionSpace s(4, 5);
  RewardWeights w;
  GoalLengthStats empty;
  const Trajectory rep = synth(3, 6, false, {{0, "code for family 3"}, {2, "code for family 3"}}, s);
  CHECK(has_repeated_query(rep));
  CHECK(efficiency_reward(rep, empty, w) == -0.5);

  GoalLengthStats st;
  st.add_success(1, 10);
  CHECK(efficiency_reward(synth(1, 10, true, {}, s), st, w) == 0.0);
  GoalLengthStats st20;
  st20.add_success(1, 20);
  CHECK(efficiency_reward(synth(1, 10, true, {}, s), st20, w) == 0.125);
  CHECK(efficiency_reward(false, 10, std::nullopt, w) == 0.0);
}

TEST_CASE("clip bound holds for extreme lengths") {
  RewardWeights w;
  for (int T : {0, 1, 5, 50, 1000}) {
    for (double m : {1.0, 3.0, 40.0, 999.0}) {
      const double r = efficiency_reward(false, T, m, w);
      CHECK(std::abs(r) <= std::abs(w.w_t));
      const double oracle = std::clamp(w.w_t * (m - T) / std::max(m, 1.0), -w.w_t, w.w_t);
      CHECK(r == doctest::Approx(oracle).epsilon(1e-15));
    }
  }
  w.w_t = -0.3;
  CHECK(std::abs(efficiency_reward(false, 1000, 2.0, w)) <= 0.3);
}

TEST_CASE("repeat detection ignores actions between the queries") {
  const ActionSpace s(4, 5);
  const Trajectory a = synth(0, 3, false, {{0, "q"}, {1, "q"}}, s);
  const Trajectory b = synth(0, 12, false, {{0, "q"}, {11, "q"}}, s);
  const Trajectory c = synth(0, 12, false, {{0, "q"}, {5, "r"}, {11, "q"}}, s);
  const Trajectory d = synth(0, 12, false, {{0, "q"}, {5, "r"}}, s);
  CHECK(has_repeated_query(a));
  CHECK(has_repeated_query(b));
  CHECK(has_repeated_query(c));
  CHECK_FALSE(has_repeated_query(d));
  CHECK_FALSE(has_repeated_query(synth(0, 4, true, {}, s)));
}

TEST_CASE("composite reward of a pair: 1 + 0.5 + 0.125") {
  const ActionSpace s(4, 5);
  RewardWeights w;
  GoalLengthStats st;
  st.add_success(2, 20);
  const Trajectory ret = synth(2, 10, true, {{4, "code for family 2"}}, s);
  const Trajectory noret = synth(2, 20, false, {}, s);
  const auto [bi, bj] = pair_rewards(ret, noret, 4, s, st, w);
  REQUIRE(bi.delta);
  CHECK(*bi.delta == 1.25);
  CHECK(bi.r_proc == 0.5);
  CHECK(bi.r_eff == 0.125);
  CHECK(bi.R_traj == 1.625);
  CHECK(bj.r_proc == 0.0);
  CHECK(bj.R_traj == bj.R_env + bj.r_proc + bj.r_eff);

  // Reversed outcome: the noret branch still gets nothing.
  const Trajectory ret_bad = synth(2, 20, false, {{4, "x"}}, s);
  const Trajectory noret_good = synth(2, 10, true, {}, s);
  const auto [ci, cj] = pair_rewards(ret_bad, noret_good, 4, s, st, w);
  CHECK(ci.r_proc == -0.5);
  CHECK(cj.r_proc == 0.0);
}

TEST_CASE("unbranched trajectories") {
  const ActionSpace s(4, 5);
  RewardWeights w;
  GoalLengthStats st;
  const auto b = trajectory_reward(synth(0, 7, false, {}, s), st, w);
  CHECK(b.R_traj == 0.0);
  CHECK_FALSE(b.delta);
  const auto c = trajectory_reward(synth(0, 7, true, {{1, "a"}}, s), st, w);
  CHECK(c.R_env == 1.0);
  CHECK(c.r_proc == 0.0);
}

TEST_CASE("length stats") {
  const ActionSpace s(4, 5);
  GoalLengthStats st;
  CHECK_FALSE(st.mean(3));
  st.update(synth(3, 10, true, {}, s));
  CHECK(*st.mean(3) == 10.0);
  st.update(synth(3, 20, true, {}, s));
  CHECK(*st.mean(3) == 15.0);
  st.update(synth(3, 99, false, {}, s));
  CHECK(*st.mean(3) == 15.0);
  CHECK(st.count(3) == 2);
  CHECK_FALSE(st.mean(4));
  const auto back = GoalLengthStats::from_json(st.to_json());
  CHECK(*back.mean(3) == 15.0);
  CHECK(back.count(3) == 2);
}

TEST_CASE("env return matches the step sum") {
  Trajectory t;
  t.steps.resize(4);
  t.steps[3].env_reward = 1.0;
  CHECK(env_return(t) == 1.0);
  t.steps[3].env_reward = 0.0;
  CHECK(env_return(t) == 0.0);
}

TEST_CASE("property: antisymmetry, gating, exact composition") {
  const ActionSpace s(4, 5);
  Rng rng(77);
  RewardWeights w;
  for (int i = 0; i < 20000; ++i) {
    const double Ri = static_cast<double>(rng.below(2)), Rj = static_cast<double>(rng.below(2));
    const int Ti = static_cast<int>(rng.below(30)), Tj = static_cast<int>(rng.below(30));
    const double lt = rng.uniform01();
    // The length term divides by T_j, so swapping is exact only for equal lengths or lambda_T = 0.
    CHECK(rollout_margin(Ri, Ti, Rj, Ti, lt) == -rollout_margin(Rj, Ti, Ri, Ti, lt));
    CHECK(rollout_margin(Ri, Ti, Rj, Tj, 0.0) == -rollout_margin(Rj, Tj, Ri, Ti, 0.0));

    const int Ti1 = Ti + 1, Tj1 = Tj + 1;
    const int bstep = static_cast<int>(rng.below(static_cast<std::uint64_t>(Ti1)));
    const bool z = rng.below(2) == 1;
    std::vector<std::pair<int, std::string>> rets;
    if (z) rets.push_back({bstep, "q" + std::to_string(rng.below(3))});
    if (rng.below(3) == 0) rets.push_back({(bstep + 1) % Ti1, "q" + std::to_string(rng.below(3))});
    std::sort(rets.begin(), rets.end());
    rets.erase(std::unique(rets.begin(), rets.end(),
                           [](const auto& a, const auto& b) { return a.first == b.first; }),
               rets.end());
    const Trajectory ret = synth(1, Ti1, Ri > 0, rets, s);
    const Trajectory noret = synth(1, Tj1, Rj > 0, {}, s);
    GoalLengthStats st;
    if (rng.below(2)) st.add_success(1, static_cast<int>(1 + rng.below(30)));
    const auto [bi, bj] = pair_rewards(ret, noret, bstep, s, st, w);
    CHECK(bi.R_traj - (bi.R_env + bi.r_proc + bi.r_eff) == 0.0);
    CHECK(bj.R_traj - (bj.R_env + bj.r_proc + bj.r_eff) == 0.0);
    const bool zi = s.is_retrieval(ret.steps[static_cast<std::size_t>(bstep)].action);
    if (bi.r_proc != 0.0) {
      CHECK(zi);
      CHECK(*bi.delta != 0.0);
    }
    CHECK(bj.r_proc == 0.0);
  }
}

TEST_CASE("weight validation") {
  RewardWeights w;
  CHECK_NOTHROW(w.validate());
  w.alpha = -1;
  CHECK_THROWS(w.validate());
  w = {};
  w.eps_std = 0;
  CHECK_THROWS(w.validate());
}
