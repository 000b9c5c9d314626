#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fsrl/config.hpp"

using namespace fsrl;

TEST_CASE("defaults") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.kernel == KernelKind::Epanechnikov);
  CHECK(c.scheme == Scheme::Decentralized);
  CHECK(c.stateModel == StateModel::Proposed);
  CHECK(c.episodes == 1500);
  CHECK(c.agent.alpha == 0.1);
  CHECK(c.agent.gamma == 0.99);
  CHECK(c.agent.lambda == 0.9);
  CHECK(c.agent.decay == 15.0);
  CHECK(c.bench.fsbfKind == KernelKind::GaussianTruncated3Sigma);
  c.episodes = 300;
  CHECK(c.agent_config().maxEpisodes == 300);
}

TEST_CASE("JSON round trip") {
  RunConfig c;
  c.kernel = KernelKind::Cosine;
  c.scheme = Scheme::Centralized;
  c.stateModel = StateModel::Legacy;
  c.episodes = 77;
  c.trials = 3;
  c.seed = 0xFFFFFFFFFFFFull;
  c.outDir = "some/dir";
  c.trace = true;
  c.agent.alpha = 0.25;
  c.agent.traceMode = TraceMode::Accumulating;
  c.env.kappa = 5.5;
  c.env.phiCores = 9;
  c.bench.streamLength = 12;
  c.bench.fsbfKind = KernelKind::Triangular;
  const auto text = config_to_json(c);
  const auto back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.kernel == KernelKind::Cosine);
  CHECK(back.seed == c.seed);
  CHECK(back.agent.traceMode == TraceMode::Accumulating);
  CHECK(back.env.phiCores == 9);
  CHECK(config_to_json(c, false).find("some/dir") == std::string::npos);
}

TEST_CASE("partial documents keep defaults") {
  auto c = config_from_json(R"({"episodes": 10, "agent": {"lambda": 0.5}})");
  CHECK(c.episodes == 10);
  CHECK(c.agent.lambda == 0.5);
  CHECK(c.agent.alpha == 0.1);
  CHECK(c.trials == 15);
}

TEST_CASE("invalid documents") {
  CHECK_THROWS_AS(config_from_json(R"({"epsiodes": 10})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"agent": {"alfa": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"env": {"kapa": 1}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"kernel": "box"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"episodes": "many"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"trials": 0})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"agent": {"alpha": 2.0}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"env": {"phase_duration": 0}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"bench": {"fsbf_kernel": "gaussian"}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("config files") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "fsrl_test_config.json";
  {
    std::ofstream f(p);
    f << R"({"seed": 42, "kernel": "triangular"})";
  }
  auto c = load_config(p);
  CHECK(c.seed == 42);
  CHECK(c.kernel == KernelKind::Triangular);
  fs::remove(p);
  CHECK_THROWS_AS(load_config(p), ConfigError);
}

TEST_CASE("trace mode names") {
  CHECK(parse_trace_mode(trace_mode_name(TraceMode::Replacing)) == TraceMode::Replacing);
  CHECK(parse_trace_mode("accumulating") == TraceMode::Accumulating);
  CHECK_THROWS_AS(parse_trace_mode("dutch"), ConfigError);
}
