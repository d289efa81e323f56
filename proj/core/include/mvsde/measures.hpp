#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace mvsde {

inline constexpr double order_infinity = std::numeric_limits<double>::infinity();

/// Equal-weight empirical probability measure on R^m, held as N particle
/// positions in a flat row-major buffer. All distance and moment operations
/// on clouds are permutation-invariant in the particle index.
class ParticleCloud {
 public:
  ParticleCloud(std::size_t dim, std::vector<double> data);

  /// Skips the finiteness scan; callers must have validated the buffer.
  static ParticleCloud unchecked(std::size_t dim, std::vector<double> data) noexcept;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size() / dim_; }
  std::span<const double> point(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  ParticleCloud() = default;
  std::size_t dim_ = 1;
  std::vector<double> data_;
};

/// i.i.d. draws of a scalar random variable.
struct Sample {
  std::vector<double> values;
};

/// [X]_p = E[(X^+)^p]^{1/p} for p < inf, esssup X (the sample maximum) for
/// p = inf. Signed only in the p = inf case.
double essential_bracket(const Sample& sample, double order);

/// (1/N) sum |x_i|^p, the p-th moment of the cloud about the origin.
double moment(const ParticleCloud& cloud, double p);

/// Wasserstein-p distance between equal-size clouds on R^1 via sorted order
/// statistics; equals the optimal-coupling value for empirical measures.
double wasserstein_1d(const ParticleCloud& a, const ParticleCloud& b, double p);

/// Exact Wasserstein-p distance between equal-size clouds in any dimension by
/// optimal assignment (O(N^3) augmenting paths). Throws when N exceeds max_n.
double wasserstein_exact(const ParticleCloud& a, const ParticleCloud& b, double p,
                         std::size_t max_n = 256);

/// Dispatcher: sorted matching for dim 1, exact assignment otherwise.
double wasserstein(const ParticleCloud& a, const ParticleCloud& b, double p,
                   std::size_t max_n = 256);

/// Coordinate-wise mean of the cloud, reduced with the fixed pairwise tree.
std::vector<double> cloud_mean(const ParticleCloud& cloud);

}  // namespace mvsde
