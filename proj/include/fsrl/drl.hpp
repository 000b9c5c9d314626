#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsrl/agent.hpp"
#include "fsrl/approx.hpp"
#include "fsrl/rational.hpp"

namespace fsrl {

/// One discretized action dimension (one decentralized agent).
struct ActionDimension {
  std::string name;
  double min;
  double max;
  int count;
};

/// v_x [0,120] mm/s x16, v_y [-70,70] mm/s x15, v_theta [-30,30] deg/s x17.
std::vector<ActionDimension> default_action_dimensions();

/// prod(A^m) / sum(A^m), exact. Throws ParameterError on an empty list or a
/// count below 1.
Rational drl_speedup(std::span<const int> actionCounts);

enum class Scheme { Decentralized, Centralized };

std::string_view scheme_name(Scheme s) noexcept;  // "drl" | "crl"
Scheme parse_scheme(std::string_view name);

/// Walk command in robot frame.
struct VelocityCommand {
  double vx = 0.0;         // mm/s
  double vy = 0.0;         // mm/s
  double vthetaDeg = 0.0;  // deg/s
};

struct JointAction {
  std::vector<int> indices;  // one per action dimension
  VelocityCommand command;
};

/// Row-major mixed-radix codec between a joint index and per-dimension
/// indices (last dimension fastest).
class JointActionCodec {
 public:
  explicit JointActionCodec(std::vector<int> counts);

  std::size_t size() const noexcept { return size_; }
  std::span<const int> counts() const noexcept { return counts_; }
  std::size_t encode(std::span<const int> indices) const;
  std::vector<int> decode(std::size_t joint) const;

 private:
  std::vector<int> counts_;
  std::size_t size_ = 1;
};

VelocityCommand command_for(std::span<const ActionDimension> dims, std::span<const int> indices);

/// Common interface of the decentralized and centralized learners.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual Scheme scheme() const noexcept = 0;
  virtual const StateSpace& space() const noexcept = 0;
  virtual KernelKind kernel() const noexcept = 0;

  virtual void begin_episode() = 0;

  /// Features shared by every agent for state s (computed once per decision).
  virtual const SparseFeatures& featurize(std::span<const double> s) = 0;

  virtual JointAction choose(const SparseFeatures& f, double eps) = 0;

  /// Sarsa(lambda) on every agent with the shared (s, r, s') and each agent's
  /// own action component. fNext/aNext are null on a terminal transition.
  virtual void learn(const SparseFeatures& f, const JointAction& a, double r,
                     const SparseFeatures* fNext, const JointAction* aNext) = 0;

  virtual std::vector<const WeightTable*> tables() const = 0;
  virtual std::vector<WeightTable*> tables() = 0;
  virtual std::vector<std::string> table_names() const = 0;

  virtual std::uint64_t model_size_bytes() const = 0;
  /// Work done by featurize/choose since construction or reset_counters().
  const OpCounters& counters() const noexcept { return counters_; }
  void reset_counters() noexcept { counters_.reset(); }

 protected:
  OpCounters counters_;
};

/// M independent Sarsa(lambda) agents over the same state space, one per
/// action dimension, each with a private exploration stream.
class DecentralizedScheme final : public Controller {
 public:
  DecentralizedScheme(StateSpace space, KernelKind kind, std::vector<ActionDimension> dims,
                      const AgentConfig& base, std::uint64_t explorationSeed);

  Scheme scheme() const noexcept override { return Scheme::Decentralized; }
  const StateSpace& space() const noexcept override { return *space_; }
  KernelKind kernel() const noexcept override { return builder_.kind(); }

  void begin_episode() override;
  const SparseFeatures& featurize(std::span<const double> s) override;
  JointAction choose(const SparseFeatures& f, double eps) override;
  void learn(const SparseFeatures& f, const JointAction& a, double r, const SparseFeatures* fNext,
             const JointAction* aNext) override;

  std::vector<const WeightTable*> tables() const override;
  std::vector<WeightTable*> tables() override;
  std::vector<std::string> table_names() const override;
  std::uint64_t model_size_bytes() const override;

  /// Featurize s and choose with epsilon(episode).
  JointAction joint_step(std::span<const double> s, int episode);

  std::span<const ActionDimension> dimensions() const noexcept { return dims_; }
  std::vector<SarsaLearner>& agents() noexcept { return agents_; }
  const std::vector<SarsaLearner>& agents() const noexcept { return agents_; }

 private:
  std::unique_ptr<StateSpace> space_;
  FeatureBuilder builder_;
  SparseFeatures scratch_;
  std::vector<ActionDimension> dims_;
  std::vector<SarsaLearner> agents_;
  std::vector<Rng> explorers_;
  std::vector<double> q_;
};

/// One Sarsa(lambda) agent over the Cartesian product of all action
/// dimensions (benchmark baseline).
class CentralizedScheme final : public Controller {
 public:
  CentralizedScheme(StateSpace space, KernelKind kind, std::vector<ActionDimension> dims,
                    const AgentConfig& base, std::uint64_t explorationSeed);

  Scheme scheme() const noexcept override { return Scheme::Centralized; }
  const StateSpace& space() const noexcept override { return *space_; }
  KernelKind kernel() const noexcept override { return builder_.kind(); }

  void begin_episode() override;
  const SparseFeatures& featurize(std::span<const double> s) override;
  JointAction choose(const SparseFeatures& f, double eps) override;
  void learn(const SparseFeatures& f, const JointAction& a, double r, const SparseFeatures* fNext,
             const JointAction* aNext) override;

  std::vector<const WeightTable*> tables() const override;
  std::vector<WeightTable*> tables() override;
  std::vector<std::string> table_names() const override;
  std::uint64_t model_size_bytes() const override;

  const JointActionCodec& codec() const noexcept { return codec_; }
  SarsaLearner& agent() noexcept { return agent_; }

 private:
  std::unique_ptr<StateSpace> space_;
  FeatureBuilder builder_;
  SparseFeatures scratch_;
  std::vector<ActionDimension> dims_;
  JointActionCodec codec_;
  SarsaLearner agent_;
  Rng explorer_;
  std::vector<double> q_;
};

}  // namespace fsrl
