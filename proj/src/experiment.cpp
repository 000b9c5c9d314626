#include "fsrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "fsrl/io.hpp"

namespace fsrl {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string trial_tag(int trial) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "trial_%02d", trial);
  return buf;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, int trial) noexcept {
  return derive_seed(master, kTrialStream, static_cast<std::uint64_t>(trial));
}

std::unique_ptr<Controller> make_controller(const RunConfig& cfg, std::uint64_t explorationSeed) {
  StateSpace space = make_state_space(cfg.stateModel, cfg.env);
  if (cfg.scheme == Scheme::Decentralized) {
    return std::make_unique<DecentralizedScheme>(std::move(space), cfg.kernel,
                                                 default_action_dimensions(), cfg.agent_config(),
                                                 explorationSeed);
  }
  return std::make_unique<CentralizedScheme>(std::move(space), cfg.kernel,
                                             default_action_dimensions(), cfg.agent_config(),
                                             explorationSeed);
}

std::string trace_header() {
  return "# fsrl-episode-trace/1: one record per control step; mm, deg, s\n"
         "episode,step,time_s,robot_x,robot_y,robot_heading_deg,ball_x,ball_y,ball_vx,ball_vy,"
         "rho,gamma_deg,phi_deg,phase_type,cmd_vx,cmd_vy,cmd_vtheta_deg,reward,termination\n";
}

namespace {

void append_trace(std::string& out, int episode, int step, const KickWorld& w,
                  const Observation& obs, const VelocityCommand& cmd, double reward,
                  Termination reason) {
  const auto& r = w.robot();
  const auto& b = w.ball();
  out += std::to_string(episode) + "," + std::to_string(step) + "," + num(w.elapsed_seconds()) + "," +
         num(r.position.x) + "," + num(r.position.y) + "," + num(r.heading * 180.0 / std::numbers::pi) + "," +
         num(b.position.x) + "," + num(b.position.y) + "," + num(b.velocity.x) + "," +
         num(b.velocity.y) + "," + num(obs.rho) + "," + num(obs.gammaDeg) + "," + num(obs.phiDeg) +
         "," + std::to_string(obs.phaseType) + "," + num(cmd.vx) + "," + num(cmd.vy) + "," +
         num(cmd.vthetaDeg) + "," + num(reward) + "," + std::string(termination_name(reason)) + "\n";
}

}  // namespace

EpisodeRecord run_episode(Controller& ctrl, KickWorld& world, Rng& resetRng, double eps, bool learn,
                          int episodeIndex, std::string* trace) {
  EpisodeRecord rec;
  rec.episode = episodeIndex;
  rec.epsilon = eps;
  ctrl.begin_episode();
  const StateModel model = world.model();
  Observation obs = world.reset(resetRng);
  if (trace) append_trace(*trace, episodeIndex, 0, world, obs, {}, 0.0, Termination::None);

  SparseFeatures f = ctrl.featurize(state_vector(obs, model));
  SparseFeatures fNext;
  JointAction a = ctrl.choose(f, eps);
  for (;;) {
    const StepResult r = world.step(a.command);
    rec.ret += r.reward;
    ++rec.steps;
    if (trace) append_trace(*trace, episodeIndex, rec.steps, world, r.obs, a.command, r.reward, r.reason);
    if (r.terminal) {
      if (learn) ctrl.learn(f, a, r.reward, nullptr, nullptr);
      rec.reason = r.reason;
      if (r.kick) {
        rec.touched = true;
        rec.goal = r.kick->goal;
        rec.distanceError = r.kick->distanceError;
        rec.angleError = r.kick->angleError;
      }
      break;
    }
    fNext = ctrl.featurize(state_vector(r.obs, model));
    JointAction aNext = ctrl.choose(fNext, eps);
    if (learn) ctrl.learn(f, a, r.reward, &fNext, &aNext);
    std::swap(f, fNext);
    a = std::move(aNext);
  }
  return rec;
}

TrialResult run_trial(const RunConfig& cfg, int trial) {
  TrialResult result;
  result.trial = trial;
  const std::uint64_t seed = trial_seed(cfg.seed, trial);
  result.controller = make_controller(cfg, derive_seed(seed, kExploreStream));
  KickWorld world(cfg.env, cfg.stateModel);
  const AgentConfig agentCfg = cfg.agent_config();
  if (cfg.trace) result.trace = trace_header();
  result.curve.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Rng resetRng(derive_seed(seed, kResetStream, static_cast<std::uint64_t>(ep)));
    result.curve.push_back(run_episode(*result.controller, world, resetRng, epsilon(agentCfg, ep), true,
                                       ep, cfg.trace ? &result.trace : nullptr));
  }
  return result;
}

std::vector<TrialResult> run_trials(const RunConfig& cfg) {
  cfg.validate();
  std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.trials));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto work = [&] {
    for (int t; (t = next.fetch_add(1)) < cfg.trials;) {
      try {
        results[static_cast<std::size_t>(t)] = run_trial(cfg, t);
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

MeanStderr mean_stderr(const std::vector<double>& values) {
  MeanStderr out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::vector<double> moving_average(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size());
  double running = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    running += xs[i];
    if (i >= static_cast<std::size_t>(window)) running -= xs[i - static_cast<std::size_t>(window)];
    const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = running / static_cast<double>(n);
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials, int smoothingWindow) {
  std::vector<AggregateRow> rows;
  if (trials.empty()) return rows;
  std::size_t episodes = trials.front().curve.size();
  for (const auto& t : trials) episodes = std::min(episodes, t.curve.size());
  rows.resize(episodes);
  std::vector<double> de(trials.size()), ae(trials.size()), ret(trials.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    double steps = 0.0;
    double goals = 0.0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const EpisodeRecord& r = trials[t].curve[e];
      de[t] = r.distanceError;
      ae[t] = r.angleError;
      ret[t] = r.ret;
      steps += r.steps;
      goals += r.goal ? 1.0 : 0.0;
    }
    AggregateRow& row = rows[e];
    row.episode = trials.front().curve[e].episode;
    row.distanceError = mean_stderr(de);
    row.angleError = mean_stderr(ae);
    row.ret = mean_stderr(ret);
    row.stepsMean = steps / static_cast<double>(trials.size());
    row.goalRate = goals / static_cast<double>(trials.size());
  }
  auto smooth = [&](auto member, auto target) {
    std::vector<double> xs(episodes);
    for (std::size_t e = 0; e < episodes; ++e) xs[e] = (rows[e].*member).mean;
    const auto ma = moving_average(xs, smoothingWindow);
    for (std::size_t e = 0; e < episodes; ++e) rows[e].*target = ma[e];
  };
  smooth(&AggregateRow::distanceError, &AggregateRow::distanceErrorSmoothed);
  smooth(&AggregateRow::angleError, &AggregateRow::angleErrorSmoothed);
  smooth(&AggregateRow::ret, &AggregateRow::retSmoothed);
  return rows;
}

MeanStderr window_mean(const std::vector<TrialResult>& trials, int first, int last,
                       double EpisodeRecord::*metric) {
  std::vector<double> perTrial;
  for (const auto& t : trials) {
    const int hi = std::min<int>(last, static_cast<int>(t.curve.size()));
    const int lo = std::max(0, first);
    if (hi <= lo) continue;
    double sum = 0.0;
    for (int e = lo; e < hi; ++e) sum += t.curve[static_cast<std::size_t>(e)].*metric;
    perTrial.push_back(sum / (hi - lo));
  }
  return mean_stderr(perTrial);
}

std::string curve_csv(const TrialResult& t) {
  std::string out = "episode,distance_error,angle_error,return,epsilon,steps,touched,goal,termination\n";
  for (const auto& r : t.curve) {
    out += std::to_string(r.episode) + "," + num(r.distanceError) + "," + num(r.angleError) + "," +
           num(r.ret) + "," + num(r.epsilon) + "," + std::to_string(r.steps) + "," +
           (r.touched ? "1" : "0") + "," + (r.goal ? "1" : "0") + "," +
           std::string(termination_name(r.reason)) + "\n";
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows, int nTrials, int window) {
  std::string out = "# mean over " + std::to_string(nTrials) +
                    " trials; *_stderr = sample stddev / sqrt(trials); *_ma" + std::to_string(window) +
                    " = trailing " + std::to_string(window) +
                    "-episode moving average of the mean; episodes without ball contact count "
                    "distance_error = angle_error = 1\n";
  const std::string w = std::to_string(window);
  out += "episode,distance_error_mean,distance_error_stderr,angle_error_mean,angle_error_stderr,"
         "return_mean,return_stderr,steps_mean,goal_rate,distance_error_ma" + w +
         ",angle_error_ma" + w + ",return_ma" + w + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.episode) + "," + num(r.distanceError.mean) + "," +
           num(r.distanceError.stderr_) + "," + num(r.angleError.mean) + "," +
           num(r.angleError.stderr_) + "," + num(r.ret.mean) + "," + num(r.ret.stderr_) + "," +
           num(r.stepsMean) + "," + num(r.goalRate) + "," + num(r.distanceErrorSmoothed) + "," +
           num(r.angleErrorSmoothed) + "," + num(r.retSmoothed) + "\n";
  }
  return out;
}

void write_training_outputs(const RunConfig& cfg, const std::vector<TrialResult>& trials) {
  const std::filesystem::path out(cfg.outDir);
  write_file_atomic(out / "config.json", config_to_json(cfg, false));
  for (const auto& t : trials) {
    const std::string tag = trial_tag(t.trial);
    write_file_atomic(out / "curves" / (tag + ".csv"), curve_csv(t));
    if (!t.trace.empty()) write_file_atomic(out / "traces" / (tag + ".csv"), t.trace);
    const auto tables = t.controller->tables();
    const auto names = t.controller->table_names();
    for (std::size_t m = 0; m < tables.size(); ++m) {
      const auto path = out / "weights" / (tag + "_" + names[m] + ".bin");
      save_weights(path, *tables[m]);
      nlohmann::ordered_json extra;
      extra["table"] = names[m];
      extra["scheme"] = std::string(scheme_name(cfg.scheme));
      extra["state_model"] = std::string(state_model_name(cfg.stateModel));
      extra["n_actions"] = tables[m]->n_actions();
      auto meta = weight_metadata_json(t.controller->space(), cfg.kernel, extra.dump());
      auto metaPath = path;
      metaPath += ".meta.json";
      write_file_atomic(metaPath, meta);
    }
  }
  write_file_atomic(out / "aggregate.csv",
                    aggregate_csv(aggregate(trials, cfg.smoothingWindow), static_cast<int>(trials.size()),
                                  cfg.smoothingWindow));
}

EvalSummary evaluate(const RunConfig& cfg, Controller& ctrl, int nEpisodes) {
  EvalSummary s;
  s.episodes = std::max(0, nEpisodes);
  if (s.episodes == 0) return s;
  KickWorld world(cfg.env, cfg.stateModel);
  std::vector<double> de, ae;
  double goals = 0.0;
  double touches = 0.0;
  double length = 0.0;
  for (int ep = 0; ep < s.episodes; ++ep) {
    Rng resetRng(derive_seed(cfg.seed, kEvalStream, static_cast<std::uint64_t>(ep)));
    const EpisodeRecord r = run_episode(ctrl, world, resetRng, 0.0, false, ep);
    de.push_back(r.distanceError);
    ae.push_back(r.angleError);
    goals += r.goal ? 1.0 : 0.0;
    touches += r.touched ? 1.0 : 0.0;
    length += r.steps;
  }
  auto stddev = [](const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
  };
  s.distanceError = mean_stderr(de);
  s.angleError = mean_stderr(ae);
  s.distanceErrorStd = stddev(de, s.distanceError.mean);
  s.angleErrorStd = stddev(ae, s.angleError.mean);
  s.successRate = goals / s.episodes;
  s.touchRate = touches / s.episodes;
  s.meanLength = length / s.episodes;
  return s;
}

std::string eval_json(const EvalSummary& s) {
  nlohmann::ordered_json j;
  j["schema"] = "fsrl-eval/1";
  j["episodes"] = s.episodes;
  if (s.episodes == 0) {
    j["status"] = "no episodes";
    return j.dump(2) + "\n";
  }
  j["status"] = "ok";
  j["distance_error_mean"] = s.distanceError.mean;
  j["distance_error_std"] = s.distanceErrorStd;
  j["angle_error_mean"] = s.angleError.mean;
  j["angle_error_std"] = s.angleErrorStd;
  j["success_rate"] = s.successRate;
  j["touch_rate"] = s.touchRate;
  j["mean_episode_length"] = s.meanLength;
  return j.dump(2) + "\n";
}

std::unique_ptr<Controller> load_controller(const RunConfig& cfg, const std::string& prefix) {
  auto ctrl = make_controller(cfg, derive_seed(cfg.seed, kExploreStream));
  const auto names = ctrl->table_names();
  auto tables = ctrl->tables();
  for (std::size_t m = 0; m < tables.size(); ++m) {
    const std::filesystem::path path = prefix + "_" + names[m] + ".bin";
    WeightTable loaded = load_weights(path);
    if (loaded.n_features() != tables[m]->n_features() || loaded.n_actions() != tables[m]->n_actions()) {
      throw ShapeError(path.string() + ": weights are " + std::to_string(loaded.n_features()) + "x" +
                       std::to_string(loaded.n_actions()) + " but the config expects " +
                       std::to_string(tables[m]->n_features()) + "x" +
                       std::to_string(tables[m]->n_actions()));
    }
    *tables[m] = std::move(loaded);
  }
  return ctrl;
}

void compare_basis(const RunConfig& cfg) {
  struct KernelRun {
    KernelKind kind;
    std::vector<AggregateRow> rows;
    MeanStderr firstDe, firstAe, lastDe, lastAe;
  };
  std::vector<KernelRun> runs;
  const std::filesystem::path out(cfg.outDir);
  const int window = std::min(100, cfg.episodes);
  for (KernelKind kind : kAllKernels) {
    RunConfig k = cfg;
    k.kernel = kind;
    k.outDir = (out / std::string(kernel_name(kind))).string();
    const auto trials = run_trials(k);
    write_training_outputs(k, trials);
    KernelRun run{kind, aggregate(trials, cfg.smoothingWindow), {}, {}, {}, {}};
    run.firstDe = window_mean(trials, 0, window, &EpisodeRecord::distanceError);
    run.firstAe = window_mean(trials, 0, window, &EpisodeRecord::angleError);
    run.lastDe = window_mean(trials, cfg.episodes - window, cfg.episodes, &EpisodeRecord::distanceError);
    run.lastAe = window_mean(trials, cfg.episodes - window, cfg.episodes, &EpisodeRecord::angleError);
    runs.push_back(std::move(run));
  }

  std::string csv = "# per-episode mean over " + std::to_string(cfg.trials) +
                    " trials per kernel, shared seeds; *_ma columns use a trailing " +
                    std::to_string(cfg.smoothingWindow) + "-episode window\n";
  csv += "episode";
  for (const char* metric : {"distance_error", "distance_error_stderr", "angle_error",
                             "angle_error_stderr", "distance_error_ma", "angle_error_ma"}) {
    for (const auto& r : runs) csv += std::string(",") + metric + "_" + std::string(kernel_name(r.kind));
  }
  csv += "\n";
  const std::size_t episodes = runs.empty() ? 0 : runs.front().rows.size();
  for (std::size_t e = 0; e < episodes; ++e) {
    csv += std::to_string(runs.front().rows[e].episode);
    for (const auto& r : runs) csv += "," + num(r.rows[e].distanceError.mean);
    for (const auto& r : runs) csv += "," + num(r.rows[e].distanceError.stderr_);
    for (const auto& r : runs) csv += "," + num(r.rows[e].angleError.mean);
    for (const auto& r : runs) csv += "," + num(r.rows[e].angleError.stderr_);
    for (const auto& r : runs) csv += "," + num(r.rows[e].distanceErrorSmoothed);
    for (const auto& r : runs) csv += "," + num(r.rows[e].angleErrorSmoothed);
    csv += "\n";
  }
  write_file_atomic(out / "compare_basis.csv", csv);

  std::string summary =
      "# first/final " + std::to_string(window) +
      "-episode window means; stderr across trials of per-trial window means\n"
      "kernel,first_distance_error,first_distance_error_stderr,first_angle_error,"
      "first_angle_error_stderr,final_distance_error,final_distance_error_stderr,"
      "final_angle_error,final_angle_error_stderr\n";
  for (const auto& r : runs) {
    summary += std::string(kernel_name(r.kind)) + "," + num(r.firstDe.mean) + "," +
               num(r.firstDe.stderr_) + "," + num(r.firstAe.mean) + "," + num(r.firstAe.stderr_) +
               "," + num(r.lastDe.mean) + "," + num(r.lastDe.stderr_) + "," + num(r.lastAe.mean) +
               "," + num(r.lastAe.stderr_) + "\n";
  }
  write_file_atomic(out / "compare_summary.csv", summary);
}

}  // namespace fsrl
