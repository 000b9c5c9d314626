#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace fsrl {

/// One-dimensional kernels, all peak-normalized so K(0) = 1.
enum class KernelKind {
  GaussianFull,
  GaussianTruncated3Sigma,
  Epanechnikov,
  Cosine,
  Triangular,
};

inline constexpr KernelKind kAllKernels[] = {
    KernelKind::GaussianFull, KernelKind::GaussianTruncated3Sigma, KernelKind::Epanechnikov,
    KernelKind::Cosine, KernelKind::Triangular};

/// Config name: "gaussian", "gaussian3s", "epanechnikov", "cosine", "triangular".
std::string_view kernel_name(KernelKind kind) noexcept;

/// Inverse of kernel_name. Throws ConfigError on an unknown name.
KernelKind parse_kernel(std::string_view name);

/// True for every kernel except the untruncated Gaussian.
constexpr bool has_finite_support(KernelKind kind) noexcept {
  return kind != KernelKind::GaussianFull;
}

/// Kernel value at signed distance `d` from its center. Compact kernels are
/// exactly zero for |d| >= halfWidth. Throws ParameterError unless
/// sigma > 0 and halfWidth > 0.
double kernel_eval(KernelKind kind, double d, double sigma, double halfWidth);

/// Uniformly spaced kernel centers along one state dimension.
///
/// Continuous grids use sigma = 0.5 delta and a support of 3 delta
/// (halfWidth = 1.5 delta). Binary grids have two centers at 0 and 1 with
/// halfWidth = 0.5 and act as an indicator for every kernel; the full
/// Gaussian still lists both centers, the other one with value 0.
class DimensionGrid {
 public:
  DimensionGrid(double min, double max, int nCores, double sigmaInDeltas = 0.5,
                double widthInDeltas = 3.0);

  static DimensionGrid binary();

  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  int n_cores() const noexcept { return n_cores_; }
  double delta() const noexcept { return delta_; }
  double sigma() const noexcept { return sigma_; }
  double half_width() const noexcept { return half_width_; }
  bool is_binary() const noexcept { return binary_; }

  /// c_k = min + k delta, with c_{n-1} pinned to max.
  double center(int k) const noexcept;

  double clamp(double x) const noexcept;

  /// Upper bound on centers a compact kernel can activate: ceil(2 halfWidth / delta).
  int max_active() const noexcept;

 private:
  DimensionGrid() = default;

  double min_ = 0.0;
  double max_ = 1.0;
  int n_cores_ = 2;
  double delta_ = 1.0;
  double sigma_ = 0.5;
  double half_width_ = 1.5;
  bool binary_ = false;
};

struct ActiveCenter {
  int index;
  double value;
};

/// Centers with non-zero kernel value at x (clamped to the grid box), in
/// ascending index order; every center for the full Gaussian. Clears `out`
/// first.
void active_centers(const DimensionGrid& grid, KernelKind kind, double x,
                    std::vector<ActiveCenter>& out);

std::vector<ActiveCenter> active_centers(const DimensionGrid& grid, KernelKind kind, double x);

}  // namespace fsrl
