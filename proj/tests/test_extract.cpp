#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "proact/extract.hpp"

using namespace proact;

namespace {

// Hand-written trace step: env action `sym` at `cursor` with the given feedback.
StepRecord env_step(const ActionSpace& s, int cursor, int sym, Feedback fb) {
  StepRecord r;
  r.observation.cursor = cursor;
  r.action = s.env_action(sym);
  r.feedback = fb;
  return r;
}

StepRecord ret_step(const ActionSpace& s, int cursor, int family, std::vector<EntryId> got = {}) {
  StepRecord r;
  r.observation.cursor = cursor;
  r.action = s.retrieve_family(family);
  r.retrieved = std::move(got);
  return r;
}

// Plays `actions` on a real environment and records the trace.
Trajectory play(const EnvConfig& c, const TaskInstance& task, const std::vector<int>& actions) {
  const ActionSpace s(c);
  CombinationLock env(c);
  Trajectory t;
  t.task = task;
  Observation obs = env.reset(task);
  for (int a : actions) {
    StepRecord r;
    r.observation = obs;
    r.action = a;
    if (s.is_retrieval(a)) {
      t.retrieval_steps.push_back({t.length(), s.query_text(a)});
      obs.step_index += 1;
    } else {
      const StepResult res = env.step(s.symbol(a));
      r.env_reward = res.reward;
      r.feedback = res.observation.last_feedback;
      obs = res.observation;
      t.success = t.success || res.success;
    }
    t.steps.push_back(r);
    if (t.success) break;
  }
  return t;
}

EnvConfig cfg(int L, int A, int nf) {
  EnvConfig c;
  c.code_length = L;
  c.alphabet_size = A;
  c.n_families = nf;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("factual: confirmed symbols (2,4) for family 3") {
  const ActionSpace s(6, 5);
  Trajectory t;
  t.task.goal.family = 3;
  t.steps = {env_step(s, 0, 1, Feedback::reset), env_step(s, 0, 2, Feedback::advance),
             env_step(s, 1, 4, Feedback::advance), env_step(s, 2, 0, Feedback::reset)};
  CHECK(confirmed_prefix(t, s) == std::vector<int>{2, 4});
  const auto es = extract_factual(t, s, {});
  REQUIRE(es.size() == 1);
  CHECK(es[0].type == EntryType::factual);
  CHECK(es[0].when_to_use == "code for family 3");
  CHECK(es[0].family == 3);
  CHECK(es[0].code_prefix == std::vector<int>{2, 4});
}

TEST_CASE("factual: no advances, no entry") {
  const ActionSpace s(6, 5);
  Trajectory t;
  t.steps = {env_step(s, 0, 1, Feedback::reset), ret_step(s, 0, 2), env_step(s, 0, 3, Feedback::reset)};
  CHECK(confirmed_prefix(t, s).empty());
  CHECK(extract_factual(t, s, {}).empty());
  CHECK(extract_factual(Trajectory{}, s, {}).empty());
}

TEST_CASE("factual: a longer prefix upgrades the stored entry") {
  const ActionSpace s(6, 5);
  Trajectory a;
  a.task.goal.family = 1;
  a.steps = {env_step(s, 0, 5, Feedback::advance), env_step(s, 1, 0, Feedback::reset)};
  Trajectory b = a;
  b.steps = {env_step(s, 0, 5, Feedback::advance), env_step(s, 1, 2, Feedback::advance)};

  ExperienceBase base;
  const auto ea = extract_factual(a, s, {});
  auto r1 = update_base(base, ea, {});
  CHECK(r1.inserted[0] == 1);
  const EntryId id = base.find(EntryType::factual, "code for family 1")->id;
  base.bump_priority(std::vector<EntryId>{id});

  const auto ea2 = extract_factual(a, s, {});
  auto r2 = update_base(base, ea2, {});
  CHECK(r2.total_inserted() == 0);
  CHECK(r2.deduped[0] == 1);
  CHECK(r2.upgraded == 0);

  const auto eb = extract_factual(b, s, {});
  auto r3 = update_base(base, eb, {});
  CHECK(r3.upgraded == 1);
  const Entry* e = base.find(EntryType::factual, "code for family 1");
  CHECK(e->id == id);
  CHECK(e->priority == 1);
  CHECK(e->code_prefix == std::vector<int>{5, 2});
  CHECK(base.size() == 1);

  // A shorter prefix never downgrades.
  update_base(base, ea, {});
  CHECK(base.find(EntryType::factual, "code for family 1")->code_prefix == std::vector<int>{5, 2});
}

TEST_CASE("episodic entries and dedup") {
  Trajectory ok;
  ok.task.goal.family = 4;
  ok.steps.resize(3);
  ok.success = true;
  ok.retrieval_steps = {{0, "q"}};
  const auto e = extract_episodic(ok, {});
  REQUIRE(e.size() == 1);
  CHECK(e[0].when_to_use == "recent attempt on family 4");
  CHECK(e[0].content.find("success=true") != std::string::npos);
  CHECK(e[0].content.find("retrievals=1") != std::string::npos);
  Trajectory bad = ok;
  bad.success = false;
  CHECK(extract_episodic(bad, {})[0].content.find("success=false") != std::string::npos);

  ExperienceBase base;
  std::vector<Entry> both = e;
  both.push_back(extract_episodic(bad, {})[0]);
  const auto r = update_base(base, both, {});
  CHECK(r.inserted[static_cast<std::size_t>(EntryType::episodic)] == 1);
  CHECK(r.deduped[static_cast<std::size_t>(EntryType::episodic)] == 1);
}

TEST_CASE("success and failure skills") {
  const ActionSpace s(4, 3);
  Trajectory win;
  win.task.horizon = 10;
  win.success = true;
  win.steps = {ret_step(s, 0, 1), env_step(s, 0, 1, Feedback::advance)};
  win.retrieval_steps = {{0, s.query_text(s.retrieve_family(1))}};
  const std::vector<Trajectory> g1{win, win};
  const auto sk = distill_success(g1, s, {});
  REQUIRE(sk.size() == 1);
  CHECK(sk[0].type == EntryType::success_skill);
  CHECK(sk[0].content == rules::kSuccessRule);

  Trajectory lucky = win;
  lucky.steps = {env_step(s, 0, 1, Feedback::advance), ret_step(s, 1, 1)};
  lucky.retrieval_steps = {{1, "q"}};
  CHECK(distill_success(std::vector<Trajectory>{lucky}, s, {}).empty());
  CHECK(distill_success(std::vector<Trajectory>{}, s, {}).empty());

  Trajectory rep;
  rep.task.horizon = 10;
  rep.steps.resize(3);
  rep.retrieval_steps = {{0, "code for family 2"}, {2, "code for family 2"}};
  const auto f1 = distill_failure(std::vector<Trajectory>{rep}, {});
  REQUIRE(f1.size() == 1);
  CHECK(f1[0].content == rules::kRepeatRule);

  Trajectory blind;
  blind.task.horizon = 3;
  blind.steps.resize(3);
  const auto f2 = distill_failure(std::vector<Trajectory>{rep, blind, blind}, {});
  REQUIRE(f2.size() == 2);
  CHECK(f2[1].content == rules::kResetRule);

  ExtractionConfig one;
  one.max_skills_per_group = 1;
  CHECK(distill_failure(std::vector<Trajectory>{rep, blind}, one).size() == 1);
  CHECK(distill_failure(std::vector<Trajectory>{win}, {}).empty());
}

TEST_CASE("comparative entries from pairs") {
  const ActionSpace s(4, 3);
  Trajectory ret, noret;
  ret.task.goal.family = 2;
  ret.steps = {env_step(s, 0, 0, Feedback::advance), ret_step(s, 1, 2)};
  std::vector<ScoredPair> pairs{{&ret, &noret, 1, 1.25}, {&ret, &noret, 1, 0.0}, {&ret, &noret, 1, -1.0}};
  const auto c = distill_comparative(pairs, {}, {});
  REQUIRE(c.size() == 2);
  CHECK(c[0].when_to_use == "deciding whether to retrieve on family 2");
  CHECK(c[0].content.find("helped") != std::string::npos);
  CHECK(c[1].content.find("hurt") != std::string::npos);

  std::vector<ScoredPair> zero{{&ret, &noret, 1, 0.0}};
  CHECK(distill_comparative(zero, {}, {}).empty());
}

TEST_CASE("comparative fallback without pairs") {
  Trajectory a, b;
  a.task.goal.family = b.task.goal.family = 1;
  a.steps.resize(4);
  b.steps.resize(4);
  const std::vector<std::vector<const Trajectory*>> same{{&a, &b}};
  CHECK(distill_comparative({}, same, {}).empty());
  b.success = true;
  const auto c = distill_comparative({}, same, {});
  REQUIRE(c.size() == 1);
  CHECK(c[0].content.rfind("better: success=true", 0) == 0);
  const std::vector<std::vector<const Trajectory*>> single{{&a}};
  CHECK(distill_comparative({}, single, {}).empty());
}

TEST_CASE("priority: +3 for an entry retrieved in three successes") {
  ExperienceBase base;
  Entry e;
  e.type = EntryType::factual;
  e.when_to_use = "code for family 0";
  e.content = "x";
  e.family = 0;
  e.code_prefix = {1};
  base.insert(e);
  Entry f = e;
  f.when_to_use = "code for family 1";
  f.family = 1;
  base.insert(f);
  const EntryId id0 = base.find(EntryType::factual, "code for family 0")->id;
  const EntryId id1 = base.find(EntryType::factual, "code for family 1")->id;

  const ActionSpace s(4, 3);
  std::vector<Trajectory> ts(3);
  for (auto& t : ts) {
    t.success = true;
    t.steps = {ret_step(s, 0, 0, {id0})};
  }
  ts[0].initial_context = {id0};  // counted once per trajectory
  std::vector<const Trajectory*> ok{&ts[0], &ts[1], &ts[2]};
  const auto r = update_base(base, std::vector<Entry>{e, f}, ok);
  CHECK(r.total_inserted() == 0);
  CHECK(base.find(id0)->priority == 3);
  CHECK(base.find(id1)->priority == 0);
}

TEST_CASE("property: factual soundness and caps on real traces") {
  const auto c = cfg(4, 4, 6);
  const ActionSpace s(c);
  Rng rng(31);
  ExtractionConfig caps;
  for (const auto& task : task_stream(c, 300)) {
    std::vector<int> actions;
    for (int i = 0; i < task.horizon; ++i) actions.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(s.size()))));
    const Trajectory t = play(c, task, actions);
    const auto truth = family_code(c, task.goal.family);
    const auto es = extract_factual(t, s, caps);
    CHECK(es.size() <= caps.max_factual_per_traj);
    CHECK(extract_episodic(t, caps).size() <= caps.max_episodic_per_traj);
    for (const auto& e : es) {
      REQUIRE(e.code_prefix.size() <= truth.size());
      CHECK(std::equal(e.code_prefix.begin(), e.code_prefix.end(), truth.begin()));
    }
    // Purity: same input, same output.
    const auto again = extract_factual(t, s, caps);
    REQUIRE(again.size() == es.size());
    for (std::size_t i = 0; i < es.size(); ++i) CHECK(again[i].content == es[i].content);
  }
}

TEST_CASE("caps must be positive") {
  ExtractionConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_skills_per_group = 0;
  CHECK_THROWS(c.validate());
}
