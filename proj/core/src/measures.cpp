#include "mvsde/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvsde/grid.hpp"

namespace mvsde {

namespace {

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

void require_pair(const ParticleCloud& a, const ParticleCloud& b, double p) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wasserstein: dimension mismatch");
  if (a.size() != b.size()) throw std::invalid_argument("wasserstein: unequal particle counts");
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: order p must be >= 1");
}

/// Min-cost assignment by shortest augmenting paths (Jonker-Volgenant style),
/// O(N^3). cost is row-major N x N.
double assignment_cost(const std::vector<double>& cost, std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays, index 0 is the scratch column of the standard formulation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> way(n + 1, 0), matched_row(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    matched_row[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = matched_row[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[matched_row[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (matched_row[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      matched_row[j0] = matched_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  std::vector<double> terms(n);
  for (std::size_t j = 1; j <= n; ++j) terms[j - 1] = cost[(matched_row[j] - 1) * n + (j - 1)];
  total = pairwise_sum(terms);
  return total;
}

}  // namespace

ParticleCloud::ParticleCloud(std::size_t dim, std::vector<double> data) {
  if (dim == 0) throw std::invalid_argument("ParticleCloud: dim must be positive");
  if (data.empty() || data.size() % dim != 0)
    throw std::invalid_argument("ParticleCloud: data must hold N >= 1 points of `dim` coordinates");
  if (!all_finite(data)) throw std::invalid_argument("ParticleCloud: coordinates must be finite");
  dim_ = dim;
  data_ = std::move(data);
}

ParticleCloud ParticleCloud::unchecked(std::size_t dim, std::vector<double> data) noexcept {
  ParticleCloud c;
  c.dim_ = dim;
  c.data_ = std::move(data);
  return c;
}

double essential_bracket(const Sample& sample, double order) {
  if (sample.values.empty()) throw std::invalid_argument("essential_bracket: empty sample");
  if (!(order >= 1.0)) throw std::invalid_argument("essential_bracket: order must be >= 1");
  if (std::isinf(order)) return *std::max_element(sample.values.begin(), sample.values.end());
  std::vector<double> powers(sample.values.size());
  for (std::size_t i = 0; i < powers.size(); ++i)
    powers[i] = std::pow(std::max(sample.values[i], 0.0), order);
  const double mean = pairwise_sum(powers) / static_cast<double>(powers.size());
  return std::pow(mean, 1.0 / order);
}

double moment(const ParticleCloud& cloud, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("moment: order p must be >= 1");
  const std::size_t n = cloud.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = cloud.point(i);
    double norm_sq = 0.0;
    for (double c : x) norm_sq += c * c;
    terms[i] = (p == 2.0) ? norm_sq : std::pow(std::sqrt(norm_sq), p);
  }
  return pairwise_sum(terms) / static_cast<double>(n);
}

double wasserstein_1d(const ParticleCloud& a, const ParticleCloud& b, double p) {
  require_pair(a, b, p);
  if (a.dim() != 1) throw std::invalid_argument("wasserstein_1d: clouds must have dim 1");
  std::vector<double> xs(a.data().begin(), a.data().end());
  std::vector<double> ys(b.data().begin(), b.data().end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> terms(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) terms[i] = std::pow(std::abs(xs[i] - ys[i]), p);
  const double mean = pairwise_sum(terms) / static_cast<double>(terms.size());
  return std::pow(mean, 1.0 / p);
}

double wasserstein_exact(const ParticleCloud& a, const ParticleCloud& b, double p,
                         std::size_t max_n) {
  require_pair(a, b, p);
  const std::size_t n = a.size();
  if (n > max_n)
    throw std::invalid_argument(
        "wasserstein_exact: particle count over the assignment cap; use wasserstein_1d or a "
        "moment proxy");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = std::pow(std::sqrt(sq_distance(a.point(i), b.point(j))), p);
  const double total = assignment_cost(cost, n);
  return std::pow(total / static_cast<double>(n), 1.0 / p);
}

double wasserstein(const ParticleCloud& a, const ParticleCloud& b, double p, std::size_t max_n) {
  require_pair(a, b, p);
  if (a.dim() == 1) return wasserstein_1d(a, b, p);
  return wasserstein_exact(a, b, p, max_n);
}

std::vector<double> cloud_mean(const ParticleCloud& cloud) {
  const std::size_t m = cloud.dim();
  const std::size_t n = cloud.size();
  std::vector<double> out(m), column(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = cloud.data()[i * m + j];
    out[j] = pairwise_sum(column) / static_cast<double>(n);
  }
  return out;
}

}  // namespace mvsde
