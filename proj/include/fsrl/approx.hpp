#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fsrl/basis.hpp"
#include "fsrl/counters.hpp"
#include "fsrl/errors.hpp"

namespace fsrl {

/// Tensor product of per-dimension grids. Flat feature indices are row-major
/// mixed radix with the last dimension varying fastest.
class StateSpace {
 public:
  explicit StateSpace(std::vector<DimensionGrid> dims);

  std::span<const DimensionGrid> dims() const noexcept { return dims_; }
  std::size_t n_dims() const noexcept { return dims_.size(); }
  std::size_t total_features() const noexcept { return total_; }
  std::size_t stride(std::size_t dim) const noexcept { return strides_[dim]; }

  std::size_t flat_index(std::span<const int> coords) const;
  std::vector<int> decode(std::size_t flat) const;

  /// Product of per-dimension max_active(): bound on sparse entry count.
  std::size_t max_active_entries() const noexcept;

 private:
  std::vector<DimensionGrid> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

struct FeatureEntry {
  std::size_t index;
  double value;
};

/// Non-zero multivariate features, sorted by flat index. The full Gaussian
/// keeps all M entries, including products that underflow to zero.
struct SparseFeatures {
  std::vector<FeatureEntry> entries;
  double normSum = 0.0;
};

/// Reusable scratch for featurization; one per thread.
class FeatureBuilder {
 public:
  FeatureBuilder(const StateSpace& space, KernelKind kind);

  const StateSpace& space() const noexcept { return *space_; }
  KernelKind kind() const noexcept { return kind_; }

  /// Product-of-1D-kernels features for state `s`. Throws ShapeError when
  /// s.size() differs from the number of dimensions.
  void build(std::span<const double> s, SparseFeatures& out, OpCounters* counters = nullptr);

 private:
  const StateSpace* space_;
  KernelKind kind_;
  std::vector<std::vector<ActiveCenter>> perDim_;
  std::vector<std::size_t> cursor_;
  std::vector<double> prefix_;
  std::vector<std::size_t> offset_;
};

SparseFeatures features(const StateSpace& space, KernelKind kind, std::span<const double> s);

/// Per-action linear weights, stored [totalFeatures x nActions] row-major.
template <typename T>
class BasicWeightTable {
 public:
  using value_type = T;

  BasicWeightTable() = default;
  BasicWeightTable(std::size_t nFeatures, std::size_t nActions)
      : n_features_(nFeatures), n_actions_(nActions), data_(nFeatures * nActions, T{0}) {
    if (nActions == 0 || nFeatures == 0) throw ShapeError("WeightTable: empty shape");
  }

  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  T& at(std::size_t feature, std::size_t action) noexcept {
    return data_[feature * n_actions_ + action];
  }
  T at(std::size_t feature, std::size_t action) const noexcept {
    return data_[feature * n_actions_ + action];
  }

  std::span<const T> row(std::size_t feature) const noexcept {
    return {data_.data() + feature * n_actions_, n_actions_};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::uint64_t size_bytes() const noexcept { return data_.size() * sizeof(T); }

  bool operator==(const BasicWeightTable&) const = default;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<T> data_;
};

using WeightTable = BasicWeightTable<float>;

/// Normalized Q-values for every action in one pass over the active entries.
template <typename T>
void q_values_all(const SparseFeatures& f, const BasicWeightTable<T>& w, std::span<double> out,
                  OpCounters* counters = nullptr) {
  const std::size_t nA = w.n_actions();
  if (out.size() != nA) throw ShapeError("q_values_all: output size differs from action count");
  if (!(f.normSum > 0.0)) throw ParameterError("q_values_all: degenerate state (zero feature sum)");
  std::fill(out.begin(), out.end(), 0.0);
  const T* base = w.data().data();
  const FeatureEntry* e = f.entries.data();
  const std::size_t n = f.entries.size();
  double* acc = out.data();
  std::size_t i = 0;
  // Four rows per sweep: the accumulator stays in a register across four
  // products. Per-action summation order is still entry order.
  for (; i + 4 <= n; i += 4) {
    const T* r0 = base + e[i].index * nA;
    const T* r1 = base + e[i + 1].index * nA;
    const T* r2 = base + e[i + 2].index * nA;
    const T* r3 = base + e[i + 3].index * nA;
    const double v0 = e[i].value, v1 = e[i + 1].value, v2 = e[i + 2].value, v3 = e[i + 3].value;
    for (std::size_t a = 0; a < nA; ++a) {
      double s = acc[a];
      s += v0 * static_cast<double>(r0[a]);
      s += v1 * static_cast<double>(r1[a]);
      s += v2 * static_cast<double>(r2[a]);
      s += v3 * static_cast<double>(r3[a]);
      acc[a] = s;
    }
  }
  for (; i < n; ++i) {
    const T* row = base + e[i].index * nA;
    const double v = e[i].value;
    for (std::size_t a = 0; a < nA; ++a) acc[a] += v * static_cast<double>(row[a]);
  }
  const double inv = 1.0 / f.normSum;
  for (double& q : out) q *= inv;
  if (counters) counters->multiplyAdds += f.entries.size() * nA;
}

template <typename T>
std::vector<double> q_values_all(const SparseFeatures& f, const BasicWeightTable<T>& w) {
  std::vector<double> out(w.n_actions());
  q_values_all(f, w, std::span<double>(out));
  return out;
}

template <typename T>
double q_value(const SparseFeatures& f, const BasicWeightTable<T>& w, std::size_t action) {
  if (action >= w.n_actions()) throw ParameterError("q_value: action index out of range");
  if (!(f.normSum > 0.0)) throw ParameterError("q_value: degenerate state (zero feature sum)");
  double acc = 0.0;
  for (const FeatureEntry& e : f.entries) acc += e.value * static_cast<double>(w.at(e.index, action));
  return acc / f.normSum;
}

/// Explicit evaluation over all M multivariate features. Gaussian kinds use
/// the joint exponent exp(-sum d_i^2 / (2 sigma_i^2)); compact kinds use the
/// product of 1D kernels. Reference path for tests and benchmarks.
template <typename T>
double dense_q_oracle(const StateSpace& space, KernelKind kind, std::span<const double> s,
                      const BasicWeightTable<T>& w, std::size_t action);

extern template double dense_q_oracle<float>(const StateSpace&, KernelKind, std::span<const double>,
                                             const BasicWeightTable<float>&, std::size_t);
extern template double dense_q_oracle<double>(const StateSpace&, KernelKind,
                                              std::span<const double>,
                                              const BasicWeightTable<double>&, std::size_t);

// Weight file: 28-byte little-endian header then row-major float32 weights.
//   [0,8)   magic "FSRLWGT1"
//   [8,12)  u32 format version (1)
//   [12,20) u64 totalFeatures
//   [20,24) u32 nActions
//   [24,28) u32 bytesPerWeight (4)
inline constexpr std::size_t kWeightHeaderBytes = 28;
inline constexpr std::uint32_t kWeightFormatVersion = 1;

void save_weights(const std::filesystem::path& path, const WeightTable& w);
WeightTable load_weights(const std::filesystem::path& path);

/// Sidecar "<weights>.meta.json" describing grids, kernel and any extra fields.
std::string weight_metadata_json(const StateSpace& space, KernelKind kind,
                                 const std::string& extraJsonObject = "{}");

}  // namespace fsrl
