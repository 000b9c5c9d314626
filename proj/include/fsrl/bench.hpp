#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsrl/approx.hpp"
#include "fsrl/counters.hpp"
#include "fsrl/drl.hpp"
#include "fsrl/rational.hpp"

namespace fsrl {

/// prod(n_i) / prod(width_i), widths in units of the center spacing.
/// Throws ShapeError on a length mismatch and ParameterError on a zero entry.
Rational state_speedup(std::span<const int> nCores, std::span<const int> widths);

std::uint64_t model_size_bytes(const StateSpace& space, std::uint64_t nActions,
                               std::uint64_t bytesPerWeight = 4);

struct BenchSetting {
  Scheme scheme;
  KernelKind kind;

  /// "DRL+FSBF", "CRL+Gaussian", ...
  std::string label() const;
};

struct BenchOptions {
  std::size_t streamLength = 300;
  int trials = 5;
  std::uint64_t seed = 1;
  KernelKind fsbfKind = KernelKind::GaussianTruncated3Sigma;
};

struct BenchEntry {
  BenchSetting setting;
  OpCounters counters;  // one untimed pass over the stream
  std::uint64_t modelSizeBytes = 0;
  std::vector<double> trialSecondsPerDecision;
  double wallTimePerDecision = 0.0;  // median over trials
  double checksum = 0.0;             // sum of all Q-values of the timed trials

  double multiply_adds_per_decision() const noexcept;
  double active_entries_per_decision() const noexcept;
};

/// Feature-term counts on the continuous dimensions only.
struct StateTermAudit {
  std::uint64_t denseTermsPerState = 0;
  std::uint64_t maxActiveTerms = 0;
  std::uint64_t totalDenseTerms = 0;
  std::uint64_t totalActiveTerms = 0;
  Rational measuredRatio;
};

struct BenchReport {
  std::vector<ActionDimension> actionDims;
  std::size_t totalFeatures = 0;
  std::size_t streamLength = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<BenchEntry> entries;  // CRL+Gaussian, CRL+FSBF, DRL+Gaussian, DRL+FSBF
  Rational theoreticalDrlSpeedup;
  Rational theoreticalStateSpeedup;
  Rational measuredDrlMacRatioGaussian;  // CRL / DRL multiply-adds
  Rational measuredDrlMacRatioFsbf;
  Rational memoryRatio;                  // CRL / DRL model bytes
  StateTermAudit stateTerms;
  KernelKind fsbfKind = KernelKind::GaussianTruncated3Sigma;
};

/// Uniform random in-box states; binary dimensions draw 0 or 1.
std::vector<std::vector<double>> make_state_stream(const StateSpace& space, std::size_t n,
                                                   std::uint64_t seed);

/// Random-policy decision loop (featurize, Q for every action, epsilon = 1)
/// for one setting over `stream`.
BenchEntry run_benchmark(const BenchSetting& setting, const StateSpace& space,
                         std::span<const ActionDimension> dims,
                         std::span<const std::vector<double>> stream, const BenchOptions& opts);

StateTermAudit audit_state_terms(const StateSpace& continuousSpace, KernelKind fsbf,
                                 std::span<const std::vector<double>> stream);

/// All four settings on one shared stream plus the theoretical values.
BenchReport run_bench_suite(const StateSpace& space, const StateSpace& continuousSpace,
                            std::span<const ActionDimension> dims, const BenchOptions& opts);

/// Deterministic part of the report (counters, sizes, theory).
std::string bench_report_json(const BenchReport& report);

/// Wall-clock part of the report.
std::string bench_timing_json(const BenchReport& report);

}  // namespace fsrl
