#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fsrl/approx.hpp"
#include "fsrl/random.hpp"

namespace fsrl {

enum class TraceMode { Replacing, Accumulating };

struct AgentConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  double lambda = 0.9;
  double decay = 15.0;
  int maxEpisodes = 1500;
  int nActions = 2;
  double actionMin = 0.0;
  double actionMax = 1.0;
  TraceMode traceMode = TraceMode::Replacing;
  /// Traces below this magnitude are dropped after each decay.
  double tracePrune = 1e-8;

  /// Throws ParameterError when any field is outside its valid range.
  void validate() const;
};

/// Command value of discrete action `idx`: evenly spaced, endpoints included.
double action_value(const AgentConfig& cfg, int idx);

/// Exploration rate exp(-decay * episode / maxEpisodes).
double epsilon(const AgentConfig& cfg, int episode);

/// epsilon-greedy. Always consumes one coin draw; ties go to the lowest index.
int select_action(std::span<const double> q, double eps, Rng& rng);

int greedy_action(std::span<const double> q);

/// Sparse eligibility traces over (feature, action) slots. Only slots in the
/// active list are non-zero.
class EligibilityTraces {
 public:
  EligibilityTraces(std::size_t nFeatures, std::size_t nActions);

  void clear() noexcept;
  void decay(double factor, double pruneBelow);
  void mark(std::size_t feature, std::size_t action, double value, TraceMode mode);

  double at(std::size_t feature, std::size_t action) const noexcept {
    return values_[feature * n_actions_ + action];
  }
  double slot_value(std::size_t slot) const noexcept { return values_[slot]; }
  std::span<const std::size_t> active_slots() const noexcept { return active_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

 private:
  std::size_t n_actions_;
  std::vector<double> values_;
  std::vector<std::size_t> active_;
};

/// One Sarsa(lambda) step on a normalized linear approximator:
///   delta = r + gamma Q(s',a') - Q(s,a)     (terminal: r - Q(s,a))
///   e <- gamma lambda e;  e[j,a] <- max(e[j,a], phi_j / sum phi)
///   theta <- theta + alpha delta e           (over non-zero traces only)
/// Returns delta.
template <typename T>
double sarsa_update(BasicWeightTable<T>& w, EligibilityTraces& traces, const SparseFeatures& f,
                    int action, double reward, const SparseFeatures* fNext,
                    std::optional<int> actionNext, const AgentConfig& cfg);

/// Single-dimension learner: a weight table, its traces and its config.
template <typename T>
class BasicSarsaLearner {
 public:
  BasicSarsaLearner(AgentConfig cfg, std::size_t nFeatures);

  const AgentConfig& config() const noexcept { return cfg_; }
  BasicWeightTable<T>& weights() noexcept { return weights_; }
  const BasicWeightTable<T>& weights() const noexcept { return weights_; }
  const EligibilityTraces& traces() const noexcept { return traces_; }

  void begin_episode() noexcept { traces_.clear(); }

  void q_values(const SparseFeatures& f, std::span<double> out,
                OpCounters* counters = nullptr) const {
    q_values_all(f, weights_, out, counters);
  }

  double update(const SparseFeatures& f, int action, double reward, const SparseFeatures* fNext,
                std::optional<int> actionNext) {
    return sarsa_update(weights_, traces_, f, action, reward, fNext, actionNext, cfg_);
  }

 private:
  AgentConfig cfg_;
  BasicWeightTable<T> weights_;
  EligibilityTraces traces_;
};

using SarsaLearner = BasicSarsaLearner<float>;

extern template class BasicSarsaLearner<float>;
extern template class BasicSarsaLearner<double>;

}  // namespace fsrl
