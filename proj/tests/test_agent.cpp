#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "fsrl/agent.hpp"

using namespace fsrl;

namespace {

AgentConfig vx_config() {
  AgentConfig c;
  c.nActions = 16;
  c.actionMin = 0.0;
  c.actionMax = 120.0;
  return c;
}

// One-dimensional grid whose compact kernels see exactly one center per
// integer state: an indicator basis.
StateSpace chain_space(int nStates) {
  return StateSpace({DimensionGrid(0.0, nStates - 1.0, nStates, 0.5, 1.0)});
}

SparseFeatures indicator(const StateSpace& sp, int s) {
  const double x[] = {static_cast<double>(s)};
  return features(sp, KernelKind::Triangular, x);
}

// Textbook tabular Sarsa(lambda) with replacing traces, written without the
// library's approximator: per-(s,a) tables, trace set to 1 on the visited
// pair, full-table update, then decay.
struct TabularSarsa {
  int nS, nA;
  double alpha, gamma, lambda;
  std::vector<double> Q, E;
  TabularSarsa(int s, int a, double al, double g, double l)
      : nS(s), nA(a), alpha(al), gamma(g), lambda(l), Q(s * a, 0.0), E(s * a, 0.0) {}
  void episode_start() { std::fill(E.begin(), E.end(), 0.0); }
  void step(int s, int a, double r, int sNext, int aNext, bool terminal) {
    const double target = terminal ? r : r + gamma * Q[sNext * nA + aNext];
    const double delta = target - Q[s * nA + a];
    E[s * nA + a] = std::max(E[s * nA + a], 1.0);
    const double step = alpha * delta;
    for (int i = 0; i < nS * nA; ++i)
      if (E[i] != 0.0) Q[i] = Q[i] + step * E[i];
    for (double& e : E) e *= gamma * lambda;
  }
};

// Deterministic script: 4-state chain, right moves toward the rewarding end.
struct ChainScript {
  std::uint32_t lcg = 12345;
  int next_action() {
    lcg = lcg * 1664525u + 1013904223u;
    return (lcg >> 16) % 3 == 0 ? 0 : 1;  // biased to the right
  }
  static int move(int s, int a) { return std::clamp(s + (a == 1 ? 1 : -1), 0, 3); }
  static double reward(int sNext) { return sNext == 3 ? 1.0 : -0.05; }
};

}  // namespace

TEST_CASE("action values") {
  auto vx = vx_config();
  CHECK(action_value(vx, 0) == 0.0);
  CHECK(action_value(vx, 1) == doctest::Approx(8.0));
  CHECK(action_value(vx, 15) == 120.0);
  AgentConfig vth;
  vth.nActions = 17;
  vth.actionMin = -30.0;
  vth.actionMax = 30.0;
  CHECK(action_value(vth, 8) == doctest::Approx(0.0));
  CHECK(action_value(vth, 0) == -30.0);
  CHECK_THROWS_AS(action_value(vx, 16), ParameterError);
  CHECK_THROWS_AS(action_value(vx, -1), ParameterError);
}

TEST_CASE("epsilon schedule") {
  AgentConfig c;
  CHECK(epsilon(c, 0) == 1.0);
  CHECK(epsilon(c, 1500) == doctest::Approx(3.059023205018258e-7).epsilon(1e-12));
  CHECK(epsilon(c, 750) == doctest::Approx(5.530843701478336e-4).epsilon(1e-12));
  double prev = 2.0;
  for (int ep = 0; ep <= 1500; ep += 10) {
    CHECK(epsilon(c, ep) < prev);
    prev = epsilon(c, ep);
  }
  c.decay = 0.0;
  CHECK(epsilon(c, 1500) == 1.0);
}

TEST_CASE("config validation") {
  AgentConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [&](auto mutate) {
    AgentConfig d;
    mutate(d);
    CHECK_THROWS_AS(d.validate(), ParameterError);
  };
  bad([](AgentConfig& d) { d.alpha = 0.0; });
  bad([](AgentConfig& d) { d.alpha = 1.5; });
  bad([](AgentConfig& d) { d.gamma = -0.1; });
  bad([](AgentConfig& d) { d.lambda = 1.1; });
  bad([](AgentConfig& d) { d.decay = -1.0; });
  bad([](AgentConfig& d) { d.nActions = 1; });
  bad([](AgentConfig& d) { d.maxEpisodes = 0; });
  bad([](AgentConfig& d) { d.actionMax = d.actionMin; });
  AgentConfig d;
  d.nActions = 1;
  CHECK_THROWS_AS(SarsaLearner(d, 10), ParameterError);
}

TEST_CASE("action selection") {
  Rng rng(1);
  const double q1[] = {0.0, 3.0, 1.0};
  CHECK(select_action(q1, 0.0, rng) == 1);
  const double q2[] = {2.0, 2.0, 2.0};
  CHECK(select_action(q2, 0.0, rng) == 0);
  const double q3[] = {-1.0, 5.0, 5.0};
  CHECK(greedy_action(q3) == 1);
  CHECK_THROWS_AS(select_action(std::span<const double>{}, 0.5, rng), ParameterError);

  SUBCASE("eps = 1 is uniform within 3 sigma") {
    const int n = 100000, k = 7;
    std::vector<double> q(k, 0.0);
    q[3] = 100.0;
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[select_action(q, 1.0, rng)];
    const double p = 1.0 / k, mean = n * p, sd = std::sqrt(n * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - mean) <= 3 * sd);
  }
  SUBCASE("same seed, same choices") {
    Rng a(42), b(42);
    std::vector<double> q = {0.1, 0.2, 0.3, 0.0};
    for (int i = 0; i < 1000; ++i) CHECK(select_action(q, 0.3, a) == select_action(q, 0.3, b));
  }
}

TEST_CASE("eligibility trace bookkeeping") {
  EligibilityTraces t(10, 3);
  t.mark(4, 1, 0.5, TraceMode::Replacing);
  t.mark(4, 1, 0.3, TraceMode::Replacing);
  CHECK(t.at(4, 1) == 0.5);
  t.mark(4, 1, 0.3, TraceMode::Accumulating);
  CHECK(t.at(4, 1) == doctest::Approx(0.8));
  CHECK(t.active_slots().size() == 1);
  t.decay(0.5, 1e-8);
  CHECK(t.at(4, 1) == doctest::Approx(0.4));
  t.decay(1e-9, 1e-8);
  CHECK(t.at(4, 1) == 0.0);
  CHECK(t.active_slots().empty());
  t.mark(2, 0, 1.0, TraceMode::Replacing);
  t.clear();
  CHECK(t.at(2, 0) == 0.0);
  CHECK(t.active_slots().empty());
}

TEST_CASE("lambda = 0 reduces to one-step Sarsa") {
  auto sp = chain_space(4);
  AgentConfig c;
  c.lambda = 0.0;
  c.nActions = 2;
  BasicSarsaLearner<double> L(c, sp.total_features());
  L.weights().at(2, 0) = 0.7;
  L.weights().at(1, 1) = -0.2;
  const auto f = indicator(sp, 1), g = indicator(sp, 2);
  const double r = 0.3;
  const double expected = -0.2 + 0.1 * (r + 0.99 * 0.7 - (-0.2));
  L.update(f, 1, r, &g, 0);
  CHECK(L.weights().at(1, 1) == expected);
  CHECK(L.weights().at(2, 0) == 0.7);
  CHECK(L.weights().at(1, 0) == 0.0);
}

TEST_CASE("matches an independent tabular Sarsa(lambda) bit for bit") {
  const int nS = 4, nA = 2;
  auto sp = chain_space(nS);
  AgentConfig c;
  c.alpha = 0.1;
  c.gamma = 0.9;
  c.lambda = 0.8;
  c.nActions = nA;
  BasicSarsaLearner<double> L(c, sp.total_features());
  TabularSarsa oracle(nS, nA, c.alpha, c.gamma, c.lambda);

  ChainScript script;
  int s = 0, a = script.next_action();
  L.begin_episode();
  oracle.episode_start();
  int episodes = 1;
  for (int t = 0; t < 50; ++t) {
    const int sNext = ChainScript::move(s, a);
    const double r = ChainScript::reward(sNext);
    const bool terminal = sNext == nS - 1;
    const int aNext = script.next_action();
    const auto f = indicator(sp, s);
    if (terminal) {
      L.update(f, a, r, nullptr, std::nullopt);
      oracle.step(s, a, r, 0, 0, true);
      L.begin_episode();
      oracle.episode_start();
      ++episodes;
      s = 0;
    } else {
      const auto g = indicator(sp, sNext);
      L.update(f, a, r, &g, aNext);
      oracle.step(s, a, r, sNext, aNext, false);
      s = sNext;
    }
    a = aNext;
    for (int i = 0; i < nS; ++i)
      for (int j = 0; j < nA; ++j) {
        const double x = L.weights().at(i, j), y = oracle.Q[i * nA + j];
        REQUIRE(std::memcmp(&x, &y, sizeof x) == 0);
      }
  }
  CHECK(episodes > 2);
  bool nonzero = false;
  for (double q : oracle.Q) nonzero = nonzero || q != 0.0;
  CHECK(nonzero);
}

TEST_CASE("zero reward from zero weights is a fixed point") {
  auto sp = chain_space(4);
  AgentConfig c;
  SarsaLearner L(c, sp.total_features());
  for (int t = 0; t < 30; ++t) {
    const auto f = indicator(sp, t % 4), g = indicator(sp, (t + 1) % 4);
    L.update(f, t % 2, 0.0, &g, (t + 1) % 2);
  }
  for (float w : L.weights().data()) CHECK(w == 0.0f);
}

TEST_CASE("a fresh update touches only the chosen column") {
  StateSpace sp({DimensionGrid(0.0, 10.0, 11), DimensionGrid(-1.0, 1.0, 5)});
  AgentConfig c;
  c.nActions = 4;
  for (int a = 0; a < 4; ++a) {
    SarsaLearner L(c, sp.total_features());
    const std::vector<double> s1 = {3.3, 0.2}, s2 = {3.9, -0.1};
    const auto f = features(sp, KernelKind::Cosine, s1);
    const auto g = features(sp, KernelKind::Cosine, s2);
    L.update(f, a, 1.0, &g, (a + 1) % 4);
    for (std::size_t j = 0; j < sp.total_features(); ++j)
      for (int b = 0; b < 4; ++b) {
        if (b != a) REQUIRE(L.weights().at(j, b) == 0.0f);
      }
    for (const auto& e : f.entries) CHECK(L.weights().at(e.index, a) != 0.0f);
  }
}

TEST_CASE("update invariants on a continuous grid") {
  StateSpace sp({DimensionGrid(0.0, 10.0, 11), DimensionGrid(-1.0, 1.0, 5)});
  AgentConfig c;
  c.nActions = 4;
  SarsaLearner L(c, sp.total_features());
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> ux(0.0, 10.0), uy(-1.0, 1.0), ur(-1.0, 1.0);
  auto state = [&] { return std::vector<double>{ux(gen), uy(gen)}; };
  auto f = features(sp, KernelKind::Epanechnikov, state());
  int a = 0;
  for (int t = 1; t <= 40; ++t) {
    auto g = features(sp, KernelKind::Epanechnikov, state());
    const int aNext = static_cast<int>(gen() % 4);
    auto before = L.weights();
    // Columns with a live trace slot before or after this step.
    std::vector<bool> live(4, false);
    for (std::size_t slot : L.traces().active_slots()) live[slot % 4] = true;
    L.update(f, a, ur(gen), &g, aNext);
    live[a] = true;
    for (std::size_t j = 0; j < sp.total_features(); ++j)
      for (int b = 0; b < 4; ++b)
        if (!live[b]) REQUIRE(L.weights().at(j, b) == before.at(j, b));
    const auto& tr = L.traces();
    REQUIRE(tr.active_slots().size() <= static_cast<std::size_t>(t) * sp.max_active_entries());
    for (std::size_t slot : tr.active_slots()) {
      REQUIRE(tr.slot_value(slot) > 0.0);
      REQUIRE(tr.slot_value(slot) <= 1.0);
    }
    f = g;
    a = aNext;
  }
}

TEST_CASE("terminal transitions and protocol errors") {
  auto sp = chain_space(4);
  AgentConfig c;
  SarsaLearner L(c, sp.total_features());
  const auto f = indicator(sp, 2);
  const double delta = L.update(f, 1, 2.0, nullptr, std::nullopt);
  CHECK(delta == 2.0);
  CHECK(L.weights().at(2, 1) == doctest::Approx(0.2f));
  CHECK_THROWS_AS(L.update(f, 1, 0.0, &f, std::nullopt), ProtocolError);
  CHECK_THROWS_AS(L.update(f, 1, 0.0, nullptr, 0), ProtocolError);
}

TEST_CASE("accumulating traces differ from replacing traces on revisits") {
  auto sp = chain_space(4);
  AgentConfig rep;
  AgentConfig acc;
  acc.traceMode = TraceMode::Accumulating;
  BasicSarsaLearner<double> A(rep, 4), B(acc, 4);
  const auto f = indicator(sp, 1);
  for (int i = 0; i < 3; ++i) {
    A.update(f, 0, 1.0, &f, 0);
    B.update(f, 0, 1.0, &f, 0);
  }
  CHECK(A.traces().at(1, 0) == 1.0);
  CHECK(B.traces().at(1, 0) > 1.0);
  CHECK(A.weights().at(1, 0) != B.weights().at(1, 0));
}
