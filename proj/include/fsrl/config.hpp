#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fsrl/agent.hpp"
#include "fsrl/basis.hpp"
#include "fsrl/bench.hpp"
#include "fsrl/drl.hpp"
#include "fsrl/kicksim.hpp"

namespace fsrl {

/// Everything a train / eval / bench run depends on. Defaults reproduce the
/// reference experiment settings.
struct RunConfig {
  KernelKind kernel = KernelKind::Epanechnikov;
  Scheme scheme = Scheme::Decentralized;
  StateModel stateModel = StateModel::Proposed;
  AgentConfig agent;  // nActions/actionMin/actionMax come from the action dimensions
  KickSimConfig env;
  int episodes = 1500;
  int trials = 15;
  std::uint64_t seed = 1;
  std::string outDir = "out";
  bool trace = false;
  int evalEpisodes = 100;
  int threads = 0;  // 0: one per hardware thread
  int smoothingWindow = 50;
  BenchOptions bench;

  /// Throws ConfigError on any invalid field.
  void validate() const;

  /// Agent parameters with maxEpisodes tied to `episodes`.
  AgentConfig agent_config() const;
};

/// JSON text. `includeOutDir = false` drops the output directory so that
/// artifacts written under different directories compare equal.
std::string config_to_json(const RunConfig& cfg, bool includeOutDir = true);

/// Missing keys keep their defaults; unknown keys are rejected and the
/// result is validated.
RunConfig config_from_json(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);

std::string_view trace_mode_name(TraceMode m) noexcept;
TraceMode parse_trace_mode(std::string_view name);

}  // namespace fsrl
