#include "fsrl/config.hpp"

#include <set>

#include <json.hpp>

#include "fsrl/io.hpp"

namespace fsrl {

using json = nlohmann::ordered_json;

std::string_view trace_mode_name(TraceMode m) noexcept {
  return m == TraceMode::Replacing ? "replacing" : "accumulating";
}

TraceMode parse_trace_mode(std::string_view name) {
  if (name == "replacing") return TraceMode::Replacing;
  if (name == "accumulating") return TraceMode::Accumulating;
  throw ConfigError("unknown trace mode '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (episodes < 0) throw ConfigError("episodes must be non-negative");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (evalEpisodes < 0) throw ConfigError("eval_episodes must be non-negative");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (smoothingWindow < 1) throw ConfigError("smoothing_window must be positive");
  if (bench.trials < 1 || bench.streamLength < 1) throw ConfigError("bench trials and stream length must be positive");
  if (!has_finite_support(bench.fsbfKind)) throw ConfigError("bench fsbf_kernel must have finite support");
  env.validate();
  try {
    agent_config().validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("agent: ") + e.what());
  }
}

AgentConfig RunConfig::agent_config() const {
  AgentConfig cfg = agent;
  cfg.maxEpisodes = std::max(1, episodes);
  cfg.nActions = std::max(cfg.nActions, 2);
  return cfg;
}

std::string config_to_json(const RunConfig& c, bool includeOutDir) {
  json j;
  j["kernel"] = std::string(kernel_name(c.kernel));
  j["scheme"] = std::string(scheme_name(c.scheme));
  j["state_model"] = std::string(state_model_name(c.stateModel));
  j["episodes"] = c.episodes;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  if (includeOutDir) j["out"] = c.outDir;
  j["trace"] = c.trace;
  j["eval_episodes"] = c.evalEpisodes;
  j["threads"] = c.threads;
  j["smoothing_window"] = c.smoothingWindow;
  j["agent"] = {{"alpha", c.agent.alpha},
                {"gamma", c.agent.gamma},
                {"lambda", c.agent.lambda},
                {"decay", c.agent.decay},
                {"traces", std::string(trace_mode_name(c.agent.traceMode))},
                {"trace_prune", c.agent.tracePrune}};
  const auto& e = c.env;
  j["env"] = {{"field_length", e.field.length},
              {"field_width", e.field.width},
              {"goal_width", e.field.goalWidth},
              {"ball_start_distance", e.field.ballStartDistance},
              {"robot_start_distance", e.field.robotStartDistance},
              {"phase_duration", e.phaseDuration},
              {"legacy_control_period", e.legacyControlPeriod},
              {"timeout", e.timeout},
              {"kappa", e.kappa},
              {"friction_decel", e.frictionDecel},
              {"robot_radius", e.robotRadius},
              {"ball_radius", e.ballRadius},
              {"foot_offset", e.footOffset},
              {"vx_min", e.vxMin},
              {"vx_max", e.vxMax},
              {"vy_max", e.vyMax},
              {"vtheta_max_deg", e.vthetaMaxDeg},
              {"rho_max", e.rhoMax},
              {"gamma_max_deg", e.gammaMaxDeg},
              {"phi_max_deg", e.phiMaxDeg},
              {"rho_cores", e.rhoCores},
              {"gamma_cores", e.gammaCores},
              {"phi_cores", e.phiCores},
              {"reward_k", e.rewardK},
              {"psi0", e.psi0},
              {"alpha0_deg", e.alpha0Deg}};
  j["bench"] = {{"stream_length", c.bench.streamLength},
                {"trials", c.bench.trials},
                {"seed", c.bench.seed},
                {"fsbf_kernel", std::string(kernel_name(c.bench.fsbfKind))}};
  return j.dump(2) + "\n";
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"kernel", "scheme", "state_model", "episodes", "trials", "seed", "out", "trace",
              "eval_episodes", "threads", "smoothing_window", "agent", "env", "bench"},
             "");
  RunConfig c;
  std::string name;
  if (j.contains("kernel")) {
    read(j, "kernel", name);
    c.kernel = parse_kernel(name);
  }
  if (j.contains("scheme")) {
    read(j, "scheme", name);
    c.scheme = parse_scheme(name);
  }
  if (j.contains("state_model")) {
    read(j, "state_model", name);
    c.stateModel = parse_state_model(name);
  }
  read(j, "episodes", c.episodes);
  read(j, "trials", c.trials);
  read(j, "seed", c.seed);
  read(j, "out", c.outDir);
  read(j, "trace", c.trace);
  read(j, "eval_episodes", c.evalEpisodes);
  read(j, "threads", c.threads);
  read(j, "smoothing_window", c.smoothingWindow);
  if (j.contains("agent")) {
    const json& a = j["agent"];
    check_keys(a, {"alpha", "gamma", "lambda", "decay", "traces", "trace_prune"}, "agent.");
    read(a, "alpha", c.agent.alpha);
    read(a, "gamma", c.agent.gamma);
    read(a, "lambda", c.agent.lambda);
    read(a, "decay", c.agent.decay);
    read(a, "trace_prune", c.agent.tracePrune);
    if (a.contains("traces")) {
      read(a, "traces", name);
      c.agent.traceMode = parse_trace_mode(name);
    }
  }
  if (j.contains("env")) {
    const json& e = j["env"];
    auto& v = c.env;
    check_keys(e,
               {"field_length", "field_width", "goal_width", "ball_start_distance",
                "robot_start_distance", "phase_duration", "legacy_control_period", "timeout",
                "kappa", "friction_decel", "robot_radius", "ball_radius", "foot_offset", "vx_min",
                "vx_max", "vy_max", "vtheta_max_deg", "rho_max", "gamma_max_deg", "phi_max_deg",
                "rho_cores", "gamma_cores", "phi_cores", "reward_k", "psi0", "alpha0_deg"},
               "env.");
    read(e, "field_length", v.field.length);
    read(e, "field_width", v.field.width);
    read(e, "goal_width", v.field.goalWidth);
    read(e, "ball_start_distance", v.field.ballStartDistance);
    read(e, "robot_start_distance", v.field.robotStartDistance);
    read(e, "phase_duration", v.phaseDuration);
    read(e, "legacy_control_period", v.legacyControlPeriod);
    read(e, "timeout", v.timeout);
    read(e, "kappa", v.kappa);
    read(e, "friction_decel", v.frictionDecel);
    read(e, "robot_radius", v.robotRadius);
    read(e, "ball_radius", v.ballRadius);
    read(e, "foot_offset", v.footOffset);
    read(e, "vx_min", v.vxMin);
    read(e, "vx_max", v.vxMax);
    read(e, "vy_max", v.vyMax);
    read(e, "vtheta_max_deg", v.vthetaMaxDeg);
    read(e, "rho_max", v.rhoMax);
    read(e, "gamma_max_deg", v.gammaMaxDeg);
    read(e, "phi_max_deg", v.phiMaxDeg);
    read(e, "rho_cores", v.rhoCores);
    read(e, "gamma_cores", v.gammaCores);
    read(e, "phi_cores", v.phiCores);
    read(e, "reward_k", v.rewardK);
    read(e, "psi0", v.psi0);
    read(e, "alpha0_deg", v.alpha0Deg);
  }
  if (j.contains("bench")) {
    const json& b = j["bench"];
    check_keys(b, {"stream_length", "trials", "seed", "fsbf_kernel"}, "bench.");
    read(b, "stream_length", c.bench.streamLength);
    read(b, "trials", c.bench.trials);
    read(b, "seed", c.bench.seed);
    if (b.contains("fsbf_kernel")) {
      read(b, "fsbf_kernel", name);
      c.bench.fsbfKind = parse_kernel(name);
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(text);
}

}  // namespace fsrl
