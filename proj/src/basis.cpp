#include "fsrl/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fsrl/errors.hpp"

namespace fsrl {

namespace {

double kernel_value(KernelKind kind, double d, double sigma, double halfWidth) noexcept {
  const double ad = std::abs(d);
  switch (kind) {
    case KernelKind::GaussianFull:
      return std::exp(-(d * d) / (2.0 * sigma * sigma));
    case KernelKind::GaussianTruncated3Sigma:
      return ad < halfWidth ? std::exp(-(d * d) / (2.0 * sigma * sigma)) : 0.0;
    case KernelKind::Epanechnikov: {
      const double u = ad / halfWidth;
      return u < 1.0 ? 1.0 - u * u : 0.0;
    }
    case KernelKind::Cosine: {
      const double u = ad / halfWidth;
      return u < 1.0 ? std::cos(0.5 * std::numbers::pi * u) : 0.0;
    }
    case KernelKind::Triangular: {
      const double u = ad / halfWidth;
      return u < 1.0 ? 1.0 - u : 0.0;
    }
  }
  return 0.0;
}

}  // namespace

std::string_view kernel_name(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::GaussianFull:
      return "gaussian";
    case KernelKind::GaussianTruncated3Sigma:
      return "gaussian3s";
    case KernelKind::Epanechnikov:
      return "epanechnikov";
    case KernelKind::Cosine:
      return "cosine";
    case KernelKind::Triangular:
      return "triangular";
  }
  return "unknown";
}

KernelKind parse_kernel(std::string_view name) {
  for (KernelKind kind : kAllKernels) {
    if (kernel_name(kind) == name) return kind;
  }
  throw ConfigError("unknown kernel '" + std::string(name) +
                    "' (expected gaussian, gaussian3s, epanechnikov, cosine or triangular)");
}

double kernel_eval(KernelKind kind, double d, double sigma, double halfWidth) {
  if (!(sigma > 0.0) || !(halfWidth > 0.0)) {
    throw ParameterError("kernel_eval: sigma and halfWidth must be positive");
  }
  return kernel_value(kind, d, sigma, halfWidth);
}

DimensionGrid::DimensionGrid(double min, double max, int nCores, double sigmaInDeltas,
                             double widthInDeltas)
    : min_(min), max_(max), n_cores_(nCores) {
  if (nCores < 2) throw ParameterError("DimensionGrid: at least two cores are required");
  if (!(max > min)) throw ParameterError("DimensionGrid: max must exceed min");
  if (!(sigmaInDeltas > 0.0) || !(widthInDeltas > 0.0)) {
    throw ParameterError("DimensionGrid: sigma and width must be positive");
  }
  delta_ = (max - min) / (nCores - 1);
  sigma_ = sigmaInDeltas * delta_;
  half_width_ = 0.5 * widthInDeltas * delta_;
}

DimensionGrid DimensionGrid::binary() {
  DimensionGrid g;
  g.min_ = 0.0;
  g.max_ = 1.0;
  g.n_cores_ = 2;
  g.delta_ = 1.0;
  g.sigma_ = 0.5;
  g.half_width_ = 0.5;
  g.binary_ = true;
  return g;
}

double DimensionGrid::center(int k) const noexcept {
  return k == n_cores_ - 1 ? max_ : min_ + k * delta_;
}

double DimensionGrid::clamp(double x) const noexcept { return std::clamp(x, min_, max_); }

int DimensionGrid::max_active() const noexcept {
  return static_cast<int>(std::ceil(2.0 * half_width_ / delta_ - 1e-12));
}

void active_centers(const DimensionGrid& grid, KernelKind kind, double x,
                    std::vector<ActiveCenter>& out) {
  out.clear();
  const double xc = grid.clamp(x);
  const int n = grid.n_cores();
  int lo = 0;
  int hi = n - 1;
  if (has_finite_support(kind)) {
    // One extra candidate on each side absorbs rounding in the index estimate;
    // the kernel itself decides membership.
    const double hw = grid.half_width();
    lo = std::max(0, static_cast<int>(std::floor((xc - hw - grid.min()) / grid.delta())) - 1);
    hi = std::min(n - 1, static_cast<int>(std::ceil((xc + hw - grid.min()) / grid.delta())) + 1);
  }
  // A binary flag is categorical: the full Gaussian is cut at the midpoint
  // like every other kernel, so it never mixes the two flag values.
  const KernelKind valueKind =
      grid.is_binary() && kind == KernelKind::GaussianFull ? KernelKind::GaussianTruncated3Sigma : kind;
  for (int k = lo; k <= hi; ++k) {
    const double v = kernel_value(valueKind, xc - grid.center(k), grid.sigma(), grid.half_width());
    // The full Gaussian is dense by definition, even where it underflows.
    if (v > 0.0 || !has_finite_support(kind)) out.push_back({k, v});
  }
}

std::vector<ActiveCenter> active_centers(const DimensionGrid& grid, KernelKind kind, double x) {
  std::vector<ActiveCenter> out;
  active_centers(grid, kind, x, out);
  return out;
}

}  // namespace fsrl
