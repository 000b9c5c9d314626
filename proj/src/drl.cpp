#include "fsrl/drl.hpp"

#include <string>

#include "fsrl/random.hpp"

namespace fsrl {

std::vector<ActionDimension> default_action_dimensions() {
  return {{"vx", 0.0, 120.0, 16}, {"vy", -70.0, 70.0, 15}, {"vtheta", -30.0, 30.0, 17}};
}

Rational drl_speedup(std::span<const int> actionCounts) {
  if (actionCounts.empty()) throw ParameterError("drl_speedup: empty action-count list");
  std::uint64_t product = 1;
  std::uint64_t sum = 0;
  for (int a : actionCounts) {
    if (a < 1) throw ParameterError("drl_speedup: action counts must be >= 1");
    product *= static_cast<std::uint64_t>(a);
    sum += static_cast<std::uint64_t>(a);
  }
  return Rational::make(product, sum);
}

std::string_view scheme_name(Scheme s) noexcept {
  return s == Scheme::Decentralized ? "drl" : "crl";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "drl") return Scheme::Decentralized;
  if (name == "crl") return Scheme::Centralized;
  throw ConfigError("unknown scheme '" + std::string(name) + "' (expected drl or crl)");
}

JointActionCodec::JointActionCodec(std::vector<int> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw ParameterError("JointActionCodec: no dimensions");
  for (int c : counts_) {
    if (c < 1) throw ParameterError("JointActionCodec: counts must be >= 1");
    size_ *= static_cast<std::size_t>(c);
  }
}

std::size_t JointActionCodec::encode(std::span<const int> indices) const {
  if (indices.size() != counts_.size()) throw ShapeError("JointActionCodec: index count mismatch");
  std::size_t joint = 0;
  for (std::size_t m = 0; m < counts_.size(); ++m) {
    if (indices[m] < 0 || indices[m] >= counts_[m]) {
      throw ParameterError("JointActionCodec: component index out of range");
    }
    joint = joint * static_cast<std::size_t>(counts_[m]) + static_cast<std::size_t>(indices[m]);
  }
  return joint;
}

std::vector<int> JointActionCodec::decode(std::size_t joint) const {
  if (joint >= size_) throw ParameterError("JointActionCodec: joint index out of range");
  std::vector<int> indices(counts_.size());
  for (std::size_t m = counts_.size(); m-- > 0;) {
    indices[m] = static_cast<int>(joint % static_cast<std::size_t>(counts_[m]));
    joint /= static_cast<std::size_t>(counts_[m]);
  }
  return indices;
}

namespace {

AgentConfig config_for(const AgentConfig& base, const ActionDimension& d) {
  AgentConfig cfg = base;
  cfg.nActions = d.count;
  cfg.actionMin = d.min;
  cfg.actionMax = d.max;
  return cfg;
}

}  // namespace

VelocityCommand command_for(std::span<const ActionDimension> dims, std::span<const int> indices) {
  if (dims.size() != 3 || indices.size() != 3) {
    throw ShapeError("command_for: expected three action dimensions (vx, vy, vtheta)");
  }
  VelocityCommand cmd;
  double* out[3] = {&cmd.vx, &cmd.vy, &cmd.vthetaDeg};
  for (std::size_t m = 0; m < 3; ++m) {
    AgentConfig cfg;
    cfg.nActions = dims[m].count;
    cfg.actionMin = dims[m].min;
    cfg.actionMax = dims[m].max;
    *out[m] = action_value(cfg, indices[m]);
  }
  return cmd;
}

DecentralizedScheme::DecentralizedScheme(StateSpace space, KernelKind kind,
                                         std::vector<ActionDimension> dims,
                                         const AgentConfig& base, std::uint64_t explorationSeed)
    : space_(std::make_unique<StateSpace>(std::move(space))),
      builder_(*space_, kind),
      dims_(std::move(dims)) {
  if (dims_.empty()) throw ParameterError("DecentralizedScheme: no action dimensions");
  agents_.reserve(dims_.size());
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    agents_.emplace_back(config_for(base, dims_[m]), space_->total_features());
    explorers_.emplace_back(derive_seed(explorationSeed, 0xA6E47ULL, m));
  }
}

void DecentralizedScheme::begin_episode() {
  for (auto& a : agents_) a.begin_episode();
}

const SparseFeatures& DecentralizedScheme::featurize(std::span<const double> s) {
  builder_.build(s, scratch_, &counters_);
  return scratch_;
}

JointAction DecentralizedScheme::choose(const SparseFeatures& f, double eps) {
  ++counters_.decisions;
  JointAction ja;
  ja.indices.resize(agents_.size());
  for (std::size_t m = 0; m < agents_.size(); ++m) {
    q_.resize(agents_[m].weights().n_actions());
    agents_[m].q_values(f, q_, &counters_);
    ja.indices[m] = select_action(q_, eps, explorers_[m]);
  }
  if (dims_.size() == 3) ja.command = command_for(dims_, ja.indices);
  return ja;
}

JointAction DecentralizedScheme::joint_step(std::span<const double> s, int episode) {
  const double eps = epsilon(agents_.front().config(), episode);
  return choose(featurize(s), eps);
}

void DecentralizedScheme::learn(const SparseFeatures& f, const JointAction& a, double r,
                                const SparseFeatures* fNext, const JointAction* aNext) {
  if ((fNext == nullptr) != (aNext == nullptr)) {
    throw ProtocolError("learn: next features and next action must be given together");
  }
  for (std::size_t m = 0; m < agents_.size(); ++m) {
    std::optional<int> next;
    if (aNext) next = aNext->indices[m];
    agents_[m].update(f, a.indices[m], r, fNext, next);
  }
}

std::vector<const WeightTable*> DecentralizedScheme::tables() const {
  std::vector<const WeightTable*> out;
  for (const auto& a : agents_) out.push_back(&a.weights());
  return out;
}

std::vector<WeightTable*> DecentralizedScheme::tables() {
  std::vector<WeightTable*> out;
  for (auto& a : agents_) out.push_back(&a.weights());
  return out;
}

std::vector<std::string> DecentralizedScheme::table_names() const {
  std::vector<std::string> names;
  for (const auto& d : dims_) names.push_back("agent_" + d.name);
  return names;
}

std::uint64_t DecentralizedScheme::model_size_bytes() const {
  std::uint64_t total = 0;
  for (const auto& a : agents_) total += a.weights().size_bytes();
  return total;
}

namespace {

std::vector<int> counts_of(const std::vector<ActionDimension>& dims) {
  std::vector<int> counts;
  for (const auto& d : dims) counts.push_back(d.count);
  return counts;
}

AgentConfig joint_config(const AgentConfig& base, std::size_t jointSize) {
  AgentConfig cfg = base;
  cfg.nActions = static_cast<int>(jointSize);
  cfg.actionMin = 0.0;
  cfg.actionMax = static_cast<double>(jointSize - 1);
  return cfg;
}

}  // namespace

CentralizedScheme::CentralizedScheme(StateSpace space, KernelKind kind,
                                     std::vector<ActionDimension> dims, const AgentConfig& base,
                                     std::uint64_t explorationSeed)
    : space_(std::make_unique<StateSpace>(std::move(space))),
      builder_(*space_, kind),
      dims_(std::move(dims)),
      codec_(counts_of(dims_)),
      agent_(joint_config(base, codec_.size()), space_->total_features()),
      explorer_(derive_seed(explorationSeed, 0xC3E47ULL)) {}

void CentralizedScheme::begin_episode() { agent_.begin_episode(); }

const SparseFeatures& CentralizedScheme::featurize(std::span<const double> s) {
  builder_.build(s, scratch_, &counters_);
  return scratch_;
}

JointAction CentralizedScheme::choose(const SparseFeatures& f, double eps) {
  ++counters_.decisions;
  q_.resize(codec_.size());
  agent_.q_values(f, q_, &counters_);
  const int joint = select_action(q_, eps, explorer_);
  JointAction ja;
  ja.indices = codec_.decode(static_cast<std::size_t>(joint));
  if (dims_.size() == 3) ja.command = command_for(dims_, ja.indices);
  return ja;
}

void CentralizedScheme::learn(const SparseFeatures& f, const JointAction& a, double r,
                              const SparseFeatures* fNext, const JointAction* aNext) {
  if ((fNext == nullptr) != (aNext == nullptr)) {
    throw ProtocolError("learn: next features and next action must be given together");
  }
  std::optional<int> next;
  if (aNext) next = static_cast<int>(codec_.encode(aNext->indices));
  agent_.update(f, static_cast<int>(codec_.encode(a.indices)), r, fNext, next);
}

std::vector<const WeightTable*> CentralizedScheme::tables() const { return {&agent_.weights()}; }
std::vector<WeightTable*> CentralizedScheme::tables() { return {&agent_.weights()}; }
std::vector<std::string> CentralizedScheme::table_names() const { return {"agent_joint"}; }
std::uint64_t CentralizedScheme::model_size_bytes() const { return agent_.weights().size_bytes(); }

}  // namespace fsrl
