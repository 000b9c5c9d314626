#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fsrl/approx.hpp"
#include "fsrl/kicksim.hpp"

using namespace fsrl;

namespace {

StateSpace table1_space() { return make_state_space(StateModel::Proposed); }

std::vector<double> random_state(const StateSpace& sp, std::mt19937_64& gen) {
  std::vector<double> s;
  for (const auto& g : sp.dims()) {
    if (g.is_binary()) {
      s.push_back(static_cast<double>(gen() & 1u));
    } else {
      s.push_back(std::uniform_real_distribution<double>(g.min(), g.max())(gen));
    }
  }
  return s;
}

template <typename T>
void fill_uniform(BasicWeightTable<T>& w, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (T& x : w.data()) x = static_cast<T>(u(gen));
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("state space indexing") {
  auto sp = table1_space();
  CHECK(sp.n_dims() == 4);
  CHECK(sp.total_features() == 4290);
  CHECK(sp.stride(3) == 1);
  CHECK(sp.stride(2) == 2);
  CHECK(sp.stride(0) == 11 * 13 * 2);
  CHECK(sp.max_active_entries() == 27);

  for (std::size_t j = 0; j < sp.total_features(); ++j) {
    auto c = sp.decode(j);
    REQUIRE(sp.flat_index(c) == j);
  }
  const int bad[] = {15, 0, 0, 0};
  CHECK_THROWS_AS(sp.flat_index(bad), ParameterError);
  const int shortCoords[] = {0, 0};
  CHECK_THROWS_AS(sp.flat_index(shortCoords), ShapeError);
  CHECK_THROWS_AS(sp.decode(4290), ParameterError);
  CHECK_THROWS_AS(StateSpace({}), ShapeError);
}

TEST_CASE("feature vectors: sizes, ordering, normalization") {
  auto sp = table1_space();
  std::mt19937_64 gen(7);
  for (KernelKind k : kAllKernels) {
    CAPTURE(kernel_name(k));
    FeatureBuilder fb(sp, k);
    SparseFeatures f;
    for (int i = 0; i < 2000; ++i) {
      auto s = random_state(sp, gen);
      fb.build(s, f);
      if (k == KernelKind::GaussianFull) {
        REQUIRE(f.entries.size() == 4290);
      } else {
        REQUIRE(f.entries.size() <= 27);
        REQUIRE(!f.entries.empty());
      }
      double sum = 0.0;
      for (std::size_t e = 0; e < f.entries.size(); ++e) {
        if (e) REQUIRE(f.entries[e - 1].index < f.entries[e].index);
        REQUIRE(f.entries[e].value >= 0.0);
        if (has_finite_support(k)) REQUIRE(f.entries[e].value > 0.0);
        sum += f.entries[e].value;
      }
      REQUIRE(f.normSum == doctest::Approx(sum).epsilon(1e-12));
      double normalized = 0.0;
      for (const auto& e : f.entries) normalized += e.value / f.normSum;
      REQUIRE(normalized == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const double wrong[] = {1.0, 2.0};
  CHECK_THROWS_AS(features(sp, KernelKind::Cosine, wrong), ShapeError);
}

TEST_CASE("feature values are products of per-dimension kernels") {
  auto sp = table1_space();
  const double s[] = {400.0, 0.0, 0.0, 1.0};  // all on centers
  auto f = features(sp, KernelKind::Triangular, s);
  // Centers: rho 7, gamma 5, phi 6, phase 1 -> three active per continuous dim.
  CHECK(f.entries.size() == 27);
  const int peak[] = {7, 5, 6, 1};
  const std::size_t jPeak = sp.flat_index(peak);
  bool found = false;
  for (const auto& e : f.entries) {
    if (e.index == jPeak) {
      CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
      found = true;
    }
  }
  CHECK(found);
  const int corner[] = {6, 4, 5, 1};
  const std::size_t jCorner = sp.flat_index(corner);
  for (const auto& e : f.entries)
    if (e.index == jCorner) CHECK(e.value == doctest::Approx(1.0 / 27.0));
}

TEST_CASE("normalized approximation identities") {
  auto sp = table1_space();
  std::mt19937_64 gen(11);
  WeightTable w(sp.total_features(), 16);

  SUBCASE("single active entry returns its weight") {
    SparseFeatures f;
    f.entries = {{123, 0.37}};
    f.normSum = 0.37;
    w.at(123, 5) = 2.5f;
    CHECK(q_value(f, w, 5) == 2.5);
  }
  SUBCASE("equal weights give that constant for any state") {
    for (float& x : w.data()) x = 0.625f;
    for (KernelKind k : kAllKernels) {
      auto f = features(sp, k, random_state(sp, gen));
      for (double q : q_values_all(f, w)) CHECK(q == doctest::Approx(0.625).epsilon(1e-12));
    }
  }
  SUBCASE("zero weights give zero") {
    auto f = features(sp, KernelKind::Epanechnikov, random_state(sp, gen));
    for (double q : q_values_all(f, w)) CHECK(q == 0.0);
  }
  SUBCASE("scale invariance of the feature vector") {
    fill_uniform(w, gen);
    for (int i = 0; i < 100; ++i) {
      auto f = features(sp, KernelKind::Cosine, random_state(sp, gen));
      auto g = f;
      for (auto& e : g.entries) e.value *= 3.75;
      g.normSum *= 3.75;
      for (std::size_t a = 0; a < 16; ++a)
        REQUIRE(rel_err(q_value(f, w, a), q_value(g, w, a)) <= 1e-12);
    }
  }
  SUBCASE("all-action evaluation agrees with single-action evaluation") {
    fill_uniform(w, gen);
    for (KernelKind k : kAllKernels) {
      for (int i = 0; i < 50; ++i) {
        auto f = features(sp, k, random_state(sp, gen));
        auto all = q_values_all(f, w);
        for (std::size_t a = 0; a < 16; ++a) REQUIRE(rel_err(all[a], q_value(f, w, a)) <= 1e-12);
      }
    }
  }
  SUBCASE("errors") {
    SparseFeatures empty;
    CHECK_THROWS_AS(q_value(empty, w, 0), ParameterError);
    auto f = features(sp, KernelKind::Cosine, random_state(sp, gen));
    CHECK_THROWS_AS(q_value(f, w, 16), ParameterError);
    std::vector<double> small(3);
    CHECK_THROWS_AS(q_values_all(f, w, std::span<double>(small)), ShapeError);
    CHECK_THROWS_AS(WeightTable(0, 3), ShapeError);
  }
}

TEST_CASE("counters record one multiply-add per entry and action") {
  auto sp = table1_space();
  std::mt19937_64 gen(3);
  WeightTable w(sp.total_features(), 17);
  OpCounters c;
  FeatureBuilder fb(sp, KernelKind::Epanechnikov);
  SparseFeatures f;
  fb.build(random_state(sp, gen), f, &c);
  CHECK(c.activeEntries == f.entries.size());
  CHECK(c.kernelEvals <= 3 * 3 + 1);
  std::vector<double> q(17);
  q_values_all(f, w, std::span<double>(q), &c);
  CHECK(c.multiplyAdds == f.entries.size() * 17);
}

TEST_CASE("sparse evaluation matches the dense oracle for compact kernels") {
  auto sp = table1_space();
  std::mt19937_64 gen(99);
  BasicWeightTable<double> wd(sp.total_features(), 4);
  WeightTable wf(sp.total_features(), 4);
  for (KernelKind k : {KernelKind::Epanechnikov, KernelKind::Cosine, KernelKind::Triangular}) {
    CAPTURE(kernel_name(k));
    for (int i = 0; i < 200; ++i) {
      fill_uniform(wd, gen);
      auto s = random_state(sp, gen);
      auto f = features(sp, k, s);
      for (std::size_t a = 0; a < 4; ++a)
        REQUIRE(rel_err(q_value(f, wd, a), dense_q_oracle(sp, k, s, wd, a)) <= 1e-12);
    }
    fill_uniform(wf, gen);
    auto s = random_state(sp, gen);
    CHECK(rel_err(q_value(features(sp, k, s), wf, 1), dense_q_oracle(sp, k, s, wf, 1)) <= 1e-12);
  }
}

TEST_CASE("full Gaussian stays dense where products underflow") {
  auto sp = table1_space();
  const double corner[] = {0.0, -70.0, -90.0, 0.0};
  auto f = features(sp, KernelKind::GaussianFull, corner);
  CHECK(f.entries.size() == 4290);
  CHECK(f.entries.back().value == 0.0);
  CHECK(f.normSum > 0.0);
}

TEST_CASE("factorized Gaussian features equal the joint multivariate exponent") {
  auto sp = table1_space();
  std::mt19937_64 gen(5);
  BasicWeightTable<double> w(sp.total_features(), 2);
  fill_uniform(w, gen);
  for (int i = 0; i < 100; ++i) {
    auto s = random_state(sp, gen);
    auto f = features(sp, KernelKind::GaussianFull, s);
    REQUIRE(rel_err(q_value(f, w, 0), dense_q_oracle(sp, KernelKind::GaussianFull, s, w, 0)) <=
            1e-9);
  }
}

TEST_CASE("3-sigma truncation changes Q by at most 0.05") {
  auto sp = table1_space();
  std::mt19937_64 gen(6);
  WeightTable w(sp.total_features(), 3);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    fill_uniform(w, gen);
    auto s = random_state(sp, gen);
    auto full = q_values_all(features(sp, KernelKind::GaussianFull, s), w);
    auto trunc = q_values_all(features(sp, KernelKind::GaussianTruncated3Sigma, s), w);
    for (std::size_t a = 0; a < 3; ++a) worst = std::max(worst, std::abs(full[a] - trunc[a]));
  }
  MESSAGE("max |Q_full - Q_3sigma| = " << worst);
  CHECK(worst <= 0.05);
  CHECK(worst > 0.0);
}

TEST_CASE("weight files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fsrl_test_approx";
  fs::remove_all(dir);
  std::mt19937_64 gen(8);
  WeightTable w(4290, 16);
  fill_uniform(w, gen);
  const fs::path p = dir / "w.bin";
  save_weights(p, w);
  CHECK(fs::file_size(p) == kWeightHeaderBytes + 4290ull * 16 * 4);
  CHECK(fs::file_size(p) - kWeightHeaderBytes == w.size_bytes());
  CHECK(load_weights(p) == w);

  SUBCASE("corrupt magic") {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
    f.close();
    CHECK_THROWS_AS(load_weights(p), IoError);
  }
  SUBCASE("truncated body") {
    fs::resize_file(p, fs::file_size(p) - 4);
    CHECK_THROWS_AS(load_weights(p), IoError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_weights(dir / "none.bin"), IoError); }

  auto sp = table1_space();
  auto meta = weight_metadata_json(sp, KernelKind::Epanechnikov, R"({"table":"agent_vx"})");
  CHECK(meta.find("epanechnikov") != std::string::npos);
  CHECK(meta.find("agent_vx") != std::string::npos);
  fs::remove_all(dir);
}
