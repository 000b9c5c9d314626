// fsrl: train, evaluate and benchmark decentralized Sarsa(lambda) in-walk kick
// controllers. Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fsrl/bench.hpp"
#include "fsrl/config.hpp"
#include "fsrl/experiment.hpp"
#include "fsrl/io.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> trials;
  std::optional<int> episodes;
  std::optional<std::string> kernel;
  std::optional<std::string> scheme;
  std::optional<std::string> stateModel;
  bool trace = false;
  std::string weights;
  std::optional<int> streamLength;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--kernel", o.kernel, "gaussian | gaussian3s | epanechnikov | cosine | triangular");
  cmd->add_option("--scheme", o.scheme, "drl | crl");
  cmd->add_option("--state-model", o.stateModel, "proposed | legacy");
}

fsrl::RunConfig resolve(const Overrides& o) {
  fsrl::RunConfig cfg = o.config.empty() ? fsrl::RunConfig{} : fsrl::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.outDir = *o.out;
  if (o.trials) cfg.trials = *o.trials;
  if (o.episodes) cfg.episodes = *o.episodes;
  if (o.kernel) cfg.kernel = fsrl::parse_kernel(*o.kernel);
  if (o.scheme) cfg.scheme = fsrl::parse_scheme(*o.scheme);
  if (o.stateModel) cfg.stateModel = fsrl::parse_state_model(*o.stateModel);
  if (o.trace) cfg.trace = true;
  return cfg;
}

int cmd_train(const Overrides& o) {
  const fsrl::RunConfig cfg = resolve(o);
  cfg.validate();
  const auto trials = fsrl::run_trials(cfg);
  fsrl::write_training_outputs(cfg, trials);
  const int window = std::min(100, cfg.episodes);
  const auto de = fsrl::window_mean(trials, cfg.episodes - window, cfg.episodes,
                                    &fsrl::EpisodeRecord::distanceError);
  const auto ae = fsrl::window_mean(trials, cfg.episodes - window, cfg.episodes,
                                    &fsrl::EpisodeRecord::angleError);
  std::printf("trained %d trial(s) x %d episode(s) -> %s\n", cfg.trials, cfg.episodes, cfg.outDir.c_str());
  std::printf("final %d episodes: distance_error %.4f +- %.4f, angle_error %.4f +- %.4f\n", window,
              de.mean, de.stderr_, ae.mean, ae.stderr_);
  return 0;
}

int cmd_eval(const Overrides& o) {
  fsrl::RunConfig cfg = resolve(o);
  const int episodes = o.episodes.value_or(cfg.evalEpisodes);
  cfg.validate();
  std::unique_ptr<fsrl::Controller> ctrl;
  if (o.weights.empty()) {
    ctrl = fsrl::make_controller(cfg, 0);  // zero weights: reproducible baseline
  } else {
    ctrl = fsrl::load_controller(cfg, o.weights);
  }
  const auto summary = fsrl::evaluate(cfg, *ctrl, episodes);
  const std::string text = fsrl::eval_json(summary);
  fsrl::write_file_atomic(std::filesystem::path(cfg.outDir) / "eval_summary.json", text);
  std::cout << text;
  return 0;
}

int cmd_bench(const Overrides& o) {
  fsrl::RunConfig cfg = resolve(o);
  if (o.trials) cfg.bench.trials = *o.trials;
  if (o.streamLength) cfg.bench.streamLength = static_cast<std::size_t>(*o.streamLength);
  if (o.seed) cfg.bench.seed = *o.seed;
  cfg.validate();
  const auto space = fsrl::make_state_space(fsrl::StateModel::Proposed, cfg.env);
  const auto continuous = fsrl::make_state_space(fsrl::StateModel::Legacy, cfg.env);
  const auto dims = fsrl::default_action_dimensions();
  const auto report = fsrl::run_bench_suite(space, continuous, dims, cfg.bench);
  const std::filesystem::path out(cfg.outDir);
  fsrl::write_file_atomic(out / "bench_report.json", fsrl::bench_report_json(report));
  fsrl::write_file_atomic(out / "bench_timing.json", fsrl::bench_timing_json(report));
  std::printf("%-14s %14s %16s %12s\n", "setting", "ms/decision", "MACs/decision", "model MB");
  for (const auto& e : report.entries) {
    std::printf("%-14s %14.4f %16.1f %12.3f\n", e.setting.label().c_str(), e.wallTimePerDecision * 1e3,
                e.multiply_adds_per_decision(), static_cast<double>(e.modelSizeBytes) / 1e6);
  }
  std::printf("theoretical D-RL speedup %s, state speedup %s (%.2f)\n",
              report.theoreticalDrlSpeedup.str().c_str(), report.theoreticalStateSpeedup.str().c_str(),
              report.theoreticalStateSpeedup.value());
  return 0;
}

int cmd_compare_basis(const Overrides& o) {
  const fsrl::RunConfig cfg = resolve(o);
  cfg.validate();
  fsrl::compare_basis(cfg);
  std::printf("kernel comparison written to %s\n", cfg.outDir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized Sarsa(lambda) with finite-support basis functions"};
  app.require_subcommand(1);
  Overrides o;

  auto* train = app.add_subcommand("train", "Train over trials x episodes and write curves and weights");
  add_common(train, o);
  train->add_option("--trials", o.trials, "Independent trials");
  train->add_option("--episodes", o.episodes, "Training episodes per trial");
  train->add_flag("--trace", o.trace, "Export per-step episode traces");

  auto* eval = app.add_subcommand("eval", "Greedy rollouts of stored weights");
  add_common(eval, o);
  eval->add_option("--weights", o.weights, "Weight file prefix, e.g. out/weights/trial_00 (omit for zero weights)");
  eval->add_option("--episodes", o.episodes, "Evaluation episodes");

  auto* bench = app.add_subcommand("bench", "Time the four scheme x basis settings on one state stream");
  add_common(bench, o);
  bench->add_option("--trials", o.trials, "Timed passes per setting");
  bench->add_option("--stream-length", o.streamLength, "States in the shared stream");

  auto* compare = app.add_subcommand("compare-basis", "Train once per kernel with shared seeds");
  add_common(compare, o);
  compare->add_option("--trials", o.trials, "Independent trials per kernel");
  compare->add_option("--episodes", o.episodes, "Training episodes per trial");
  compare->add_flag("--trace", o.trace, "Export per-step episode traces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*bench) return cmd_bench(o);
    if (*compare) return cmd_compare_basis(o);
  } catch (const fsrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const fsrl::ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const fsrl::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
