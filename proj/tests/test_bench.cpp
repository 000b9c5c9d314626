#include <filesystem>

#include "doctest.h"
#include "fsrl/bench.hpp"
#include "fsrl/kicksim.hpp"
#include "json.hpp"

using namespace fsrl;

TEST_CASE("state speedup") {
  const int cores[] = {15, 11, 13}, widths[] = {3, 3, 3};
  const auto r = state_speedup(cores, widths);
  CHECK(r == Rational{715, 9});
  CHECK(r.value() == doctest::Approx(79.444444));
  CHECK(r.str() == "715/9");
  const int n[] = {7}, w[] = {7};
  CHECK(state_speedup(n, w) == Rational{1, 1});
  const int tens[] = {10, 10}, twos[] = {2, 2};
  CHECK(state_speedup(tens, twos) == Rational{25, 1});
  const int two[] = {3, 3};
  CHECK_THROWS_AS(state_speedup(cores, two), ShapeError);
  const int zero[] = {3, 0, 3};
  CHECK_THROWS_AS(state_speedup(cores, zero), ParameterError);
  CHECK_THROWS_AS(state_speedup(std::span<const int>{}, std::span<const int>{}), ShapeError);
}

TEST_CASE("model sizes") {
  const auto sp = make_state_space(StateModel::Proposed);
  CHECK(model_size_bytes(sp, 16 + 15 + 17) == 823680);
  CHECK(model_size_bytes(sp, 16) + model_size_bytes(sp, 15) + model_size_bytes(sp, 17) == 823680);
  CHECK(model_size_bytes(sp, 4080) == 70012800);
  CHECK(model_size_bytes(StateSpace({DimensionGrid(0, 1, 2)}), 1) == 8);
  CHECK(model_size_bytes(sp, 1, 8) == 4290 * 8);

  // One feature, one action: 4 bytes.
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "fsrl_test_bench_w.bin";
  WeightTable one(1, 1);
  save_weights(p, one);
  CHECK(fs::file_size(p) - kWeightHeaderBytes == 4);
  WeightTable vx(sp.total_features(), 16);
  save_weights(p, vx);
  CHECK(fs::file_size(p) - kWeightHeaderBytes == model_size_bytes(sp, 16));
  fs::remove(p);
}

TEST_CASE("state stream") {
  const auto sp = make_state_space(StateModel::Proposed);
  auto a = make_state_stream(sp, 500, 3);
  auto b = make_state_stream(sp, 500, 3);
  CHECK(a == b);
  CHECK(a != make_state_stream(sp, 500, 4));
  for (const auto& s : a) {
    REQUIRE(s.size() == 4);
    for (std::size_t d = 0; d < 3; ++d) {
      REQUIRE(s[d] >= sp.dims()[d].min());
      REQUIRE(s[d] <= sp.dims()[d].max());
    }
    REQUIRE((s[3] == 0.0 || s[3] == 1.0));
  }
}

TEST_CASE("benchmark suite counters") {
  const auto sp = make_state_space(StateModel::Proposed);
  const auto cont = make_state_space(StateModel::Legacy);
  const auto dims = default_action_dimensions();
  BenchOptions opts;
  opts.streamLength = 40;
  opts.trials = 1;
  auto report = run_bench_suite(sp, cont, dims, opts);
  REQUIRE(report.entries.size() == 4);
  CHECK(report.entries[0].setting.label() == "CRL+Gaussian");
  CHECK(report.entries[1].setting.label() == "CRL+FSBF");
  CHECK(report.entries[2].setting.label() == "DRL+Gaussian");
  CHECK(report.entries[3].setting.label() == "DRL+FSBF");
  for (const auto& e : report.entries) {
    CHECK(e.counters.decisions == 40);
    CHECK(e.trialSecondsPerDecision.size() == 1);
    CHECK(e.wallTimePerDecision > 0.0);
  }
  CHECK(report.theoreticalDrlSpeedup == Rational{85, 1});
  CHECK(report.theoreticalStateSpeedup == Rational{715, 9});
  CHECK(report.measuredDrlMacRatioGaussian == Rational{85, 1});
  CHECK(report.measuredDrlMacRatioFsbf == Rational{85, 1});
  CHECK(report.memoryRatio == Rational{85, 1});
  CHECK(report.entries[0].active_entries_per_decision() == 4290.0);
  CHECK(report.entries[3].active_entries_per_decision() <= 27.0);
  CHECK(report.entries[0].modelSizeBytes == 70012800);
  CHECK(report.entries[3].modelSizeBytes == 823680);
  CHECK(report.stateTerms.denseTermsPerState == 2145);
  CHECK(report.stateTerms.maxActiveTerms <= 27);

  // DRL+FSBF vs CRL+Gaussian multiply-add ratio.
  const double ratio = static_cast<double>(report.entries[0].counters.multiplyAdds) /
                       static_cast<double>(report.entries[3].counters.multiplyAdds);
  CHECK(ratio >= 6000.0);

  auto j = nlohmann::json::parse(bench_report_json(report));
  CHECK(j["settings"].size() == 4);
  CHECK(j["theoretical_drl_speedup"]["value"].get<double>() == 85.0);
  auto t = nlohmann::json::parse(bench_timing_json(report));
  CHECK(t["settings"].size() == 4);

  // Counters do not depend on timing: a second run reproduces them exactly.
  auto again = run_bench_suite(sp, cont, dims, opts);
  CHECK(bench_report_json(again) == bench_report_json(report));
}
