#include "fsrl/agent.hpp"

#include <cmath>
#include <string>

namespace fsrl {

void AgentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must be in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must be in [0, 1]");
  if (!(decay >= 0.0)) throw ParameterError("decay must be non-negative");
  if (maxEpisodes < 1) throw ParameterError("maxEpisodes must be positive");
  if (nActions < 2) throw ParameterError("nActions must be at least 2");
  if (!(actionMax > actionMin)) throw ParameterError("actionMax must exceed actionMin");
  if (!(tracePrune >= 0.0)) throw ParameterError("tracePrune must be non-negative");
}

double action_value(const AgentConfig& cfg, int idx) {
  if (idx < 0 || idx >= cfg.nActions) {
    throw ParameterError("action index " + std::to_string(idx) + " out of range");
  }
  if (idx == cfg.nActions - 1) return cfg.actionMax;
  return cfg.actionMin + idx * (cfg.actionMax - cfg.actionMin) / (cfg.nActions - 1);
}

double epsilon(const AgentConfig& cfg, int episode) {
  return std::exp(-cfg.decay * static_cast<double>(episode) / cfg.maxEpisodes);
}

int greedy_action(std::span<const double> q) {
  if (q.empty()) throw ParameterError("greedy_action: empty Q vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return static_cast<int>(best);
}

int select_action(std::span<const double> q, double eps, Rng& rng) {
  if (q.empty()) throw ParameterError("select_action: empty Q vector");
  if (rng.uniform01() < eps) return static_cast<int>(rng.uniform_index(q.size()));
  return greedy_action(q);
}

EligibilityTraces::EligibilityTraces(std::size_t nFeatures, std::size_t nActions)
    : n_actions_(nActions), values_(nFeatures * nActions, 0.0) {}

void EligibilityTraces::clear() noexcept {
  for (std::size_t slot : active_) values_[slot] = 0.0;
  active_.clear();
}

void EligibilityTraces::decay(double factor, double pruneBelow) {
  std::size_t kept = 0;
  for (std::size_t slot : active_) {
    double& e = values_[slot];
    e *= factor;
    if (std::abs(e) < pruneBelow || e == 0.0) {
      e = 0.0;
    } else {
      active_[kept++] = slot;
    }
  }
  active_.resize(kept);
}

void EligibilityTraces::mark(std::size_t feature, std::size_t action, double value,
                             TraceMode mode) {
  const std::size_t slot = feature * n_actions_ + action;
  double& e = values_[slot];
  if (e == 0.0) {
    if (value == 0.0) return;
    active_.push_back(slot);
  }
  e = mode == TraceMode::Replacing ? std::max(e, value) : e + value;
}

template <typename T>
double sarsa_update(BasicWeightTable<T>& w, EligibilityTraces& traces, const SparseFeatures& f,
                    int action, double reward, const SparseFeatures* fNext,
                    std::optional<int> actionNext, const AgentConfig& cfg) {
  if ((fNext == nullptr) != !actionNext.has_value()) {
    throw ProtocolError("sarsa_update: next features and next action must be given together");
  }
  if (traces.n_actions() != w.n_actions()) throw ShapeError("sarsa_update: trace shape");
  const double q = q_value(f, w, static_cast<std::size_t>(action));
  double delta = reward - q;
  if (fNext) {
    delta = reward + cfg.gamma * q_value(*fNext, w, static_cast<std::size_t>(*actionNext)) - q;
  }

  traces.decay(cfg.gamma * cfg.lambda, cfg.tracePrune);
  for (const FeatureEntry& e : f.entries) {
    traces.mark(e.index, static_cast<std::size_t>(action), e.value / f.normSum, cfg.traceMode);
  }

  const double step = cfg.alpha * delta;
  auto data = w.data();
  for (std::size_t slot : traces.active_slots()) {
    data[slot] = static_cast<T>(static_cast<double>(data[slot]) + step * traces.slot_value(slot));
  }
  return delta;
}

template double sarsa_update<float>(BasicWeightTable<float>&, EligibilityTraces&,
                                    const SparseFeatures&, int, double, const SparseFeatures*,
                                    std::optional<int>, const AgentConfig&);
template double sarsa_update<double>(BasicWeightTable<double>&, EligibilityTraces&,
                                     const SparseFeatures&, int, double, const SparseFeatures*,
                                     std::optional<int>, const AgentConfig&);

template <typename T>
BasicSarsaLearner<T>::BasicSarsaLearner(AgentConfig cfg, std::size_t nFeatures)
    : cfg_((cfg.validate(), cfg)),
      weights_(nFeatures, static_cast<std::size_t>(cfg.nActions)),
      traces_(nFeatures, static_cast<std::size_t>(cfg.nActions)) {}

template class BasicSarsaLearner<float>;
template class BasicSarsaLearner<double>;

}  // namespace fsrl
