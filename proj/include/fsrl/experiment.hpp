#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fsrl/config.hpp"
#include "fsrl/drl.hpp"
#include "fsrl/kicksim.hpp"

namespace fsrl {

// Seed derivation. Every random stream descends from RunConfig::seed:
//   trial seed        = derive_seed(seed, kTrialStream, trial)
//   episode reset rng = derive_seed(trialSeed, kResetStream, episode)
//   exploration       = derive_seed(trialSeed, kExploreStream), split per agent
//   eval episode rng  = derive_seed(seed, kEvalStream, episode)
// Reset streams do not depend on the kernel or the learner, so runs that
// differ only in kernel choice see identical episode initializations.
inline constexpr std::uint64_t kTrialStream = 0x7121A1;
inline constexpr std::uint64_t kResetStream = 0xE4E5E7;
inline constexpr std::uint64_t kExploreStream = 0xE8B0;
inline constexpr std::uint64_t kEvalStream = 0xE7A1;

std::uint64_t trial_seed(std::uint64_t master, int trial) noexcept;

/// Per-episode performance record. Episodes without ball contact score
/// distance_error = angle_error = 1.
struct EpisodeRecord {
  int episode = 0;
  double distanceError = 1.0;
  double angleError = 1.0;
  double ret = 0.0;
  double epsilon = 0.0;
  int steps = 0;
  bool touched = false;
  bool goal = false;
  Termination reason = Termination::None;
};

struct TrialResult {
  int trial = 0;
  std::vector<EpisodeRecord> curve;
  std::unique_ptr<Controller> controller;
  std::string trace;  // empty unless tracing
};

std::unique_ptr<Controller> make_controller(const RunConfig& cfg, std::uint64_t explorationSeed);

/// Runs one episode from a fresh reset. With `learn` false the weights are
/// left untouched. Appends trace records when `trace` is non-null.
EpisodeRecord run_episode(Controller& ctrl, KickWorld& world, Rng& resetRng, double eps, bool learn,
                          int episodeIndex, std::string* trace = nullptr);

std::string trace_header();

TrialResult run_trial(const RunConfig& cfg, int trial);

/// All trials, in parallel where threads allow; results ordered by trial.
std::vector<TrialResult> run_trials(const RunConfig& cfg);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Sample mean and standard error (sample stddev / sqrt(n)); stderr is 0 for n < 2.
MeanStderr mean_stderr(const std::vector<double>& values);

struct AggregateRow {
  int episode = 0;
  MeanStderr distanceError;
  MeanStderr angleError;
  MeanStderr ret;
  double stepsMean = 0.0;
  double goalRate = 0.0;
  double distanceErrorSmoothed = 0.0;
  double angleErrorSmoothed = 0.0;
  double retSmoothed = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials, int smoothingWindow);

/// Trailing moving average (window shrinks at the start).
std::vector<double> moving_average(const std::vector<double>& xs, int window);

/// Per-trial mean of a metric over episodes [first, last), then mean/stderr
/// across trials.
MeanStderr window_mean(const std::vector<TrialResult>& trials, int first, int last,
                       double EpisodeRecord::*metric);

std::string curve_csv(const TrialResult& t);
std::string aggregate_csv(const std::vector<AggregateRow>& rows, int nTrials, int window);

/// Writes config.json, per-trial curves, aggregate.csv, weights (+ metadata)
/// and optional traces under cfg.outDir.
void write_training_outputs(const RunConfig& cfg, const std::vector<TrialResult>& trials);

struct EvalSummary {
  int episodes = 0;
  MeanStderr distanceError;
  double distanceErrorStd = 0.0;
  MeanStderr angleError;
  double angleErrorStd = 0.0;
  double successRate = 0.0;
  double touchRate = 0.0;
  double meanLength = 0.0;
};

/// Greedy (epsilon = 0) rollouts on the shared evaluation start states.
EvalSummary evaluate(const RunConfig& cfg, Controller& ctrl, int nEpisodes);

std::string eval_json(const EvalSummary& s);

/// Loads "<prefix>_<table>.bin" for each table of a controller built from cfg.
/// Throws ShapeError when a file does not match the configured shapes.
std::unique_ptr<Controller> load_controller(const RunConfig& cfg, const std::string& prefix);

/// Trains once per kernel kind into <out>/<kernel>/ with shared seeds and
/// writes the merged compare_basis.csv and compare_summary.csv.
void compare_basis(const RunConfig& cfg);

}  // namespace fsrl
