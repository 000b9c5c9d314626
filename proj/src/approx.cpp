#include "fsrl/approx.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "fsrl/io.hpp"

namespace fsrl {

StateSpace::StateSpace(std::vector<DimensionGrid> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ShapeError("StateSpace: no dimensions");
  strides_.resize(dims_.size());
  total_ = 1;
  for (std::size_t i = dims_.size(); i-- > 0;) {
    strides_[i] = total_;
    total_ *= static_cast<std::size_t>(dims_[i].n_cores());
  }
}

std::size_t StateSpace::flat_index(std::span<const int> coords) const {
  if (coords.size() != dims_.size()) throw ShapeError("flat_index: coordinate count mismatch");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] < 0 || coords[i] >= dims_[i].n_cores()) {
      throw ParameterError("flat_index: coordinate out of range");
    }
    flat += static_cast<std::size_t>(coords[i]) * strides_[i];
  }
  return flat;
}

std::vector<int> StateSpace::decode(std::size_t flat) const {
  if (flat >= total_) throw ParameterError("decode: flat index out of range");
  std::vector<int> coords(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    coords[i] = static_cast<int>(flat / strides_[i]);
    flat %= strides_[i];
  }
  return coords;
}

std::size_t StateSpace::max_active_entries() const noexcept {
  std::size_t bound = 1;
  for (const auto& d : dims_) bound *= static_cast<std::size_t>(d.max_active());
  return bound;
}

FeatureBuilder::FeatureBuilder(const StateSpace& space, KernelKind kind)
    : space_(&space),
      kind_(kind),
      perDim_(space.n_dims()),
      cursor_(space.n_dims()),
      prefix_(space.n_dims() + 1),
      offset_(space.n_dims() + 1) {}

void FeatureBuilder::build(std::span<const double> s, SparseFeatures& out, OpCounters* counters) {
  const auto dims = space_->dims();
  const std::size_t n = dims.size();
  if (s.size() != n) throw ShapeError("features: state has wrong dimensionality");

  std::size_t product = 1;
  for (std::size_t i = 0; i < n; ++i) {
    active_centers(dims[i], kind_, s[i], perDim_[i]);
    product *= perDim_[i].size();
    if (counters) {
      // Candidate evaluations: all cores for the full Gaussian, else the
      // active set (the index window is computed, not searched).
      counters->kernelEvals += perDim_[i].size();
    }
  }

  out.entries.clear();
  out.normSum = 0.0;
  if (product == 0) return;
  const bool dense = !has_finite_support(kind_);
  out.entries.reserve(product);

  // Odometer over the per-dimension active lists, last dimension fastest, so
  // flat indices come out ascending. prefix_[i] is the product of the first i
  // 1D values; offset_[i] the matching partial flat index.
  std::fill(cursor_.begin(), cursor_.end(), 0);
  prefix_[0] = 1.0;
  offset_[0] = 0;
  std::size_t depth = 0;
  for (;;) {
    for (; depth < n; ++depth) {
      const ActiveCenter& c = perDim_[depth][cursor_[depth]];
      prefix_[depth + 1] = prefix_[depth] * c.value;
      offset_[depth + 1] = offset_[depth] + static_cast<std::size_t>(c.index) * space_->stride(depth);
    }
    const double v = prefix_[n];
    if (v > 0.0 || dense) {
      out.entries.push_back({offset_[n], v});
      out.normSum += v;
    }
    std::size_t i = n;
    while (i > 0 && ++cursor_[i - 1] == perDim_[i - 1].size()) {
      cursor_[i - 1] = 0;
      --i;
    }
    if (i == 0) break;
    depth = i - 1;
  }
  if (counters) counters->activeEntries += out.entries.size();
}

SparseFeatures features(const StateSpace& space, KernelKind kind, std::span<const double> s) {
  FeatureBuilder builder(space, kind);
  SparseFeatures out;
  builder.build(s, out);
  return out;
}

template <typename T>
double dense_q_oracle(const StateSpace& space, KernelKind kind, std::span<const double> s,
                      const BasicWeightTable<T>& w, std::size_t action) {
  const auto dims = space.dims();
  const std::size_t n = dims.size();
  if (s.size() != n) throw ShapeError("dense_q_oracle: state has wrong dimensionality");
  if (w.n_features() != space.total_features()) throw ShapeError("dense_q_oracle: table shape");
  if (action >= w.n_actions()) throw ParameterError("dense_q_oracle: action out of range");

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = dims[i].clamp(s[i]);

  const bool gaussian =
      kind == KernelKind::GaussianFull || kind == KernelKind::GaussianTruncated3Sigma;
  std::vector<int> k(n, 0);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t flat = 0; flat < space.total_features(); ++flat) {
    double phi;
    if (gaussian) {
      double exponent = 0.0;
      bool inside = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - dims[i].center(k[i]);
        if ((kind == KernelKind::GaussianTruncated3Sigma || dims[i].is_binary()) &&
            std::abs(d) >= dims[i].half_width()) {
          inside = false;
        }
        exponent += (d * d) / (2.0 * dims[i].sigma() * dims[i].sigma());
      }
      phi = inside ? std::exp(-exponent) : 0.0;
    } else {
      phi = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        phi *= kernel_eval(kind, x[i] - dims[i].center(k[i]), dims[i].sigma(), dims[i].half_width());
      }
    }
    if (phi > 0.0) {
      num += phi * static_cast<double>(w.at(flat, action));
      den += phi;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++k[i] < dims[i].n_cores()) break;
      k[i] = 0;
    }
  }
  if (!(den > 0.0)) throw ParameterError("dense_q_oracle: degenerate state");
  return num / den;
}

template double dense_q_oracle<float>(const StateSpace&, KernelKind, std::span<const double>,
                                      const BasicWeightTable<float>&, std::size_t);
template double dense_q_oracle<double>(const StateSpace&, KernelKind, std::span<const double>,
                                       const BasicWeightTable<double>&, std::size_t);

namespace {

constexpr char kMagic[8] = {'F', 'S', 'R', 'L', 'W', 'G', 'T', '1'};

template <typename U>
void put_le(std::string& buf, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(const std::string& buf, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(buf[offset + i])) << (8 * i);
  }
  return value;
}

}  // namespace

void save_weights(const std::filesystem::path& path, const WeightTable& w) {
  std::string buf;
  buf.reserve(kWeightHeaderBytes + w.data().size() * 4);
  buf.append(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(buf, kWeightFormatVersion);
  put_le<std::uint64_t>(buf, w.n_features());
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(w.n_actions()));
  put_le<std::uint32_t>(buf, 4);
  for (float v : w.data()) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
  write_file_atomic(path, buf);
}

WeightTable load_weights(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  if (buf.size() < kWeightHeaderBytes || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path.string() + ": not a weight file");
  }
  if (get_le<std::uint32_t>(buf, 8) != kWeightFormatVersion) {
    throw IoError(path.string() + ": unsupported weight format version");
  }
  const auto nFeatures = get_le<std::uint64_t>(buf, 12);
  const auto nActions = get_le<std::uint32_t>(buf, 20);
  const auto bytesPerWeight = get_le<std::uint32_t>(buf, 24);
  if (bytesPerWeight != 4) throw IoError(path.string() + ": unsupported weight width");
  if (buf.size() != kWeightHeaderBytes + nFeatures * nActions * 4) {
    throw IoError(path.string() + ": truncated or oversized weight file");
  }
  WeightTable w(nFeatures, nActions);
  auto data = w.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_le<std::uint32_t>(buf, kWeightHeaderBytes + 4 * i));
  }
  return w;
}

std::string weight_metadata_json(const StateSpace& space, KernelKind kind,
                                 const std::string& extraJsonObject) {
  nlohmann::ordered_json meta;
  meta["format"] = "fsrl-weights";
  meta["version"] = kWeightFormatVersion;
  meta["header_bytes"] = kWeightHeaderBytes;
  meta["bytes_per_weight"] = 4;
  meta["layout"] = "row-major [feature][action], little-endian float32";
  meta["kernel"] = std::string(kernel_name(kind));
  meta["total_features"] = space.total_features();
  auto& grids = meta["grids"] = nlohmann::ordered_json::array();
  for (const auto& g : space.dims()) {
    nlohmann::ordered_json j;
    j["binary"] = g.is_binary();
    j["min"] = g.min();
    j["max"] = g.max();
    j["n_cores"] = g.n_cores();
    j["delta"] = g.delta();
    j["sigma"] = g.sigma();
    j["half_width"] = g.half_width();
    grids.push_back(j);
  }
  const auto extra = nlohmann::ordered_json::parse(extraJsonObject);
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  return meta.dump(2) + "\n";
}

}  // namespace fsrl
