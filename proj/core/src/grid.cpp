#include "mvsde/grid.hpp"

namespace mvsde {

double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

std::vector<double> cumulative_trapezoid(const TimeGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size())
    throw std::invalid_argument("cumulative_trapezoid: values.size() must equal grid.size()");
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t k = 1; k < values.size(); ++k)
    out[k] = out[k - 1] + 0.5 * grid.dt * (values[k - 1] + values[k]);
  return out;
}

}  // namespace mvsde
