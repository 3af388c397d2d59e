#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "proact/verify.hpp"

using namespace proact;

namespace {

VerifyOptions small() {
  VerifyOptions o;
  o.env.code_length = 3;
  o.env.alphabet_size = 4;
  o.env.n_families = 4;
  o.reward_cases = 2000;
  o.prop1_groups = 60;
  o.gradient_instances = 4;
  o.replay_cases = 60;
  o.expbase_cases = 300;
  o.advantage_cases = 300;
  return o;
}

const CheckResult& find(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

// Process reward with the sign flipped.
double flipped(bool z, double delta, const RewardWeights& w) { return -process_reward(z, delta, w); }

// Restores drop the cursor back to the start of the code.
class ForgetfulLock final : public Environment {
 public:
  explicit ForgetfulLock(const EnvConfig& c) : inner_(c) {}
  Observation reset(const TaskInstance& t) override { return inner_.reset(t); }
  StepResult step(int s) override { return inner_.step(s); }
  EnvState snapshot() const override { return inner_.snapshot(); }
  void restore(const EnvState& st) override {
    EnvState bad = st;
    bad.observation.cursor = 0;
    inner_.restore(bad);
  }
  const EnvConfig& config() const override { return inner_.config(); }

 private:
  CombinationLock inner_;
};

}  // namespace

TEST_CASE("pristine implementation passes every check") {
  const auto rep = run_verify_suite(small());
  for (const auto& c : rep.checks) {
    INFO(c.name << ": " << c.to_json().dump());
    CHECK(c.passed);
    CHECK(c.cases > 0);
  }
  CHECK(rep.ok());
  CHECK(rep.checks.size() >= 7);
  CHECK(rep.to_json()["ok"] == true);
}

TEST_CASE("a sign-flipped process reward is caught") {
  auto o = small();
  o.process_reward = &flipped;
  const auto c = check_prop1(o);
  CHECK_FALSE(c.passed);
  CHECK_FALSE(c.failures.empty());
  CHECK_FALSE(run_verify_suite(o).ok());
}

TEST_CASE("a restore that loses progress is caught") {
  auto o = small();
  o.make_env = [](const EnvConfig& c) { return std::make_unique<ForgetfulLock>(c); };
  const auto c = check_replay(o);
  CHECK_FALSE(c.passed);
  CHECK_FALSE(c.failures.empty());
}

TEST_CASE("individual checks report their sizes") {
  const auto o = small();
  CHECK(check_reward_oracle(o).cases == 2000);
  CHECK(check_process_table(o).passed);
  const auto g = check_gradients(o);
  CHECK(g.passed);
  CHECK(g.worst < 1e-4);
  CHECK(check_advantages(o).passed);
  CHECK(check_expbase_laws(o).passed);
}

TEST_CASE("check result bookkeeping") {
  CheckResult r("x");
  CHECK(r.passed);
  for (int i = 0; i < 50; ++i) r.fail("f" + std::to_string(i));
  CHECK_FALSE(r.passed);
  CHECK(r.failures.size() <= 20);
  CHECK(r.to_json()["check"] == "x");
}
