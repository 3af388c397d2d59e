#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "proact/policy.hpp"
#include "support.hpp"

using namespace proact;
using proact::testing::Layout;

namespace {

EnvConfig cfg() {
  EnvConfig c;
  c.code_length = 3;
  c.alphabet_size = 5;
  c.n_families = 6;
  return c;
}

PolicyParams random_params(const ActionSpace& s, std::size_t F, double scale, Rng& rng) {
  PolicyParams p = PolicyParams::zeros(s.size(), F);
  for (double& w : p.weights) w = scale * (2.0 * rng.uniform01() - 1.0);
  return p;
}

Features random_features(std::size_t F, Rng& rng) {
  Features f(F);
  for (double& x : f) x = rng.uniform01();
  return f;
}

// Softmax written out directly from the logits.
std::vector<double> brute_softmax(const PolicyParams& p, const Features& f, std::size_t n) {
  std::vector<double> z(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t i = 0; i < f.size(); ++i) z[a] += p.at(a, i) * f[i];
  }
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double s = 0.0;
  for (double& v : z) s += (v = std::exp(v - mx));
  for (double& v : z) v /= s;
  return z;
}

Entry factual(int family, std::vector<int> prefix) {
  Entry e;
  e.type = EntryType::factual;
  e.when_to_use = family_query_text(family);
  e.family = family;
  e.code_prefix = std::move(prefix);
  return e;
}

}  // namespace

TEST_CASE("action space layout") {
  const ActionSpace s(5, 6);
  CHECK(s.size() == 12);
  CHECK(s.is_env(4));
  CHECK(s.is_retrieval(5));
  CHECK(s.symbol(s.env_action(3)) == 3);
  CHECK(s.retrieval_family(s.retrieve_family(2)) == 2);
  CHECK_FALSE(s.retrieval_family(s.generic_retrieval()).has_value());
  CHECK(s.query_text(s.retrieve_family(2)) == "code for family 2");
  CHECK(s.query_text(s.generic_retrieval()) == kGenericQueryText);
}

TEST_CASE("featurize: layout, code slots, and family matching") {
  const EnvConfig c = cfg();
  const Layout l(c);
  CHECK(feature_dim(c) == l.dim);
  TaskInstance t;
  t.goal.family = 3;
  t.horizon = c.effective_horizon();
  AgentContext ctx = AgentContext::start(t, c);
  Features f = featurize(ctx, c);
  for (std::size_t p = 0; p < 3; ++p) CHECK(f[l.slots + p * 6 + 5] == 1.0);  // unknown
  CHECK(f[l.family + 3] == 1.0);
  CHECK(f[l.cursor] == 1.0);
  CHECK(f[l.feedback] == 1.0);
  CHECK(f[l.known + 5] == 1.0);
  CHECK(f[l.count] == 1.0);

  const std::vector<Entry> other = {factual(4, {1, 1, 1})};
  CHECK(featurize(ctx, other, c) == f);

  const std::vector<Entry> mine = {factual(3, {2, 4})};
  const Features g = featurize(ctx, mine, c);
  CHECK(g[l.slots + 0 * 6 + 2] == 1.0);
  CHECK(g[l.slots + 1 * 6 + 4] == 1.0);
  CHECK(g[l.slots + 2 * 6 + 5] == 1.0);
  CHECK(g[l.known + 2] == 1.0);

  ctx.retrievals = 9;
  ctx.step = 1000;
  const Features h = featurize(ctx, c);
  CHECK(h[l.count + 3] == 1.0);
  CHECK(h[l.step] == 1.0);
}

TEST_CASE("zero weights give the uniform distribution") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  const auto p = PolicyParams::zeros(s.size(), feature_dim(c));
  Rng rng(1);
  const Features f = random_features(feature_dim(c), rng);
  for (double v : action_distribution(p, f, s, false)) CHECK(v == doctest::Approx(1.0 / 12));
  const auto m = action_distribution(p, f, s, true);
  for (int a = 0; a < 12; ++a) CHECK(m[static_cast<std::size_t>(a)] == doctest::Approx(s.is_env(a) ? 0.2 : 0.0));
  CHECK(log_prob(p, f, s, 7, false) == doctest::Approx(-std::log(12.0)));
  CHECK(log_prob(p, f, s, 1, true) == doctest::Approx(-std::log(5.0)));
  CHECK_THROWS_AS(log_prob(p, f, s, 7, true), std::invalid_argument);
}

TEST_CASE("distribution sums to one and matches the direct softmax") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_params(s, feature_dim(c), 3.0, rng);
    const Features f = random_features(feature_dim(c), rng);
    const auto d = action_distribution(p, f, s, false);
    double sum = 0.0;
    for (double v : d) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    const auto want = brute_softmax(p, f, s.size());
    for (std::size_t a = 0; a < d.size(); ++a) CHECK(d[a] == doctest::Approx(want[a]).epsilon(1e-12));
  }
}

TEST_CASE("masking equals conditioning on environment actions") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_params(s, feature_dim(c), 2.0, rng);
    const Features f = random_features(feature_dim(c), rng);
    const auto full = action_distribution(p, f, s, false);
    const auto masked = action_distribution(p, f, s, true);
    double env_mass = 0.0;
    for (int a = 0; a < s.n_env_actions(); ++a) env_mass += full[static_cast<std::size_t>(a)];
    for (int a = 0; a < static_cast<int>(s.size()); ++a) {
      const double want = s.is_env(a) ? full[static_cast<std::size_t>(a)] / env_mass : 0.0;
      CHECK(masked[static_cast<std::size_t>(a)] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("score function has zero mean") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(4);
  for (bool mask : {false, true}) {
    const auto p = random_params(s, feature_dim(c), 1.0, rng);
    const Features f = random_features(feature_dim(c), rng);
    const auto d = action_distribution(p, f, s, mask);
    std::vector<double> acc(p.weights.size(), 0.0);
    for (int a = 0; a < static_cast<int>(s.size()); ++a) {
      if (d[static_cast<std::size_t>(a)] == 0.0) continue;
      accumulate_grad_log_prob(p, f, s, a, mask, d[static_cast<std::size_t>(a)], acc);
    }
    for (double v : acc) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("log_prob gradient matches central differences") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(5);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto p = random_params(s, feature_dim(c), 1.0, rng);
    const Features f = random_features(feature_dim(c), rng);
    const bool mask = k % 2 == 1;
    const int a = static_cast<int>(rng.below(mask ? 5 : s.size()));
    const auto g = grad_log_prob(p, f, s, a, mask);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      const double w = p.weights[i];
      p.weights[i] = w + 1e-5;
      const double up = log_prob(p, f, s, a, mask);
      p.weights[i] = w - 1e-5;
      const double down = log_prob(p, f, s, a, mask);
      p.weights[i] = w;
      const double fd = (up - down) / 2e-5;
      num += (fd - g[i]) * (fd - g[i]);
      den += fd * fd;
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("temperature scales the logits") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(6);
  auto p = random_params(s, feature_dim(c), 1.0, rng);
  const Features f = random_features(feature_dim(c), rng);
  auto q = p;
  q.temperature = 2.0;
  for (double& w : p.weights) w /= 2.0;
  const auto a = action_distribution(p, f, s, false);
  const auto b = action_distribution(q, f, s, false);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("KL: zero at equality, nonnegative, equals the enumeration") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_params(s, feature_dim(c), 1.5, rng);
    const auto q = random_params(s, feature_dim(c), 1.5, rng);
    const Features f = random_features(feature_dim(c), rng);
    const bool mask = k % 3 == 0;
    CHECK(kl_divergence(p, p, f, s, mask) == doctest::Approx(0.0).epsilon(1e-15));
    const double kl = kl_divergence(p, q, f, s, mask);
    CHECK(kl >= 0.0);
    const auto dp = action_distribution(p, f, s, mask);
    const auto dq = action_distribution(q, f, s, mask);
    double want = 0.0;
    for (std::size_t a = 0; a < dp.size(); ++a) {
      if (dp[a] > 0.0) want += dp[a] * (std::log(dp[a]) - std::log(dq[a]));
    }
    CHECK(kl == doctest::Approx(want).epsilon(1e-10));
  }
  const std::vector<VisitedState> none;
  const auto p = random_params(s, feature_dim(c), 1.0, rng);
  CHECK(kl_estimate(p, p, none, s) == 0.0);
}

TEST_CASE("KL gradient matches central differences") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    auto p = random_params(s, feature_dim(c), 1.0, rng);
    const auto q = random_params(s, feature_dim(c), 1.0, rng);
    const Features f = random_features(feature_dim(c), rng);
    const bool mask = k % 2 == 0;
    std::vector<double> g(p.weights.size(), 0.0);
    accumulate_grad_kl(p, q, f, s, mask, 1.0, g);
    for (std::size_t i = 0; i < p.weights.size(); i += 7) {
      const double w = p.weights[i];
      p.weights[i] = w + 1e-5;
      const double up = kl_divergence(p, q, f, s, mask);
      p.weights[i] = w - 1e-5;
      const double down = kl_divergence(p, q, f, s, mask);
      p.weights[i] = w;
      CHECK(g[i] == doctest::Approx((up - down) / 2e-5).epsilon(1e-6));
    }
  }
}

TEST_CASE("select_action: greedy is the argmax, sampling follows the distribution") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(9);
  const auto p = random_params(s, feature_dim(c), 1.0, rng);
  const Features f = random_features(feature_dim(c), rng);
  const auto d = action_distribution(p, f, s, false);
  const auto best = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
  CHECK(select_action(p, f, s, false, rng, true) == best);
  std::vector<int> hits(s.size(), 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(select_action(p, f, s, false, rng))];
  for (std::size_t a = 0; a < s.size(); ++a) {
    const double se = std::sqrt(d[a] * (1 - d[a]) / n);
    CHECK(std::abs(hits[a] / static_cast<double>(n) - d[a]) < 5 * se + 1e-9);
  }
  for (int i = 0; i < 200; ++i) CHECK(s.is_env(select_action(p, f, s, true, rng)));
}

TEST_CASE("checkpoint round trip and shape errors") {
  const EnvConfig c = cfg();
  const ActionSpace s(c);
  Rng rng(10);
  auto p = random_params(s, feature_dim(c), 1.0, rng);
  p.temperature = 0.7;
  std::stringstream ss;
  save_checkpoint(ss, p);
  const auto q = load_checkpoint(ss);
  CHECK(q == p);
  std::stringstream truncated(ss.str().substr(0, 20));
  CHECK_THROWS(load_checkpoint(truncated));
}
