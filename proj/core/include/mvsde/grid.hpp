#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mvsde {

/// Uniform time grid t_k = t0 + k*dt, k = 0..steps.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1e-3;
  std::size_t steps = 1;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, std::size_t steps_) : t0(t0_), dt(dt_), steps(steps_) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
    if (steps == 0) throw std::invalid_argument("TimeGrid: steps must be positive");
  }

  std::size_t size() const { return steps + 1; }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double horizon() const { return time(steps); }

  bool operator==(const TimeGrid&) const = default;
};

/// A function sampled on a uniform grid: values[k] at grid.time(k).
struct Curve {
  TimeGrid grid;
  std::vector<double> values;

  Curve() = default;
  Curve(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("Curve: values.size() must equal grid.size()");
  }

  std::size_t size() const { return values.size(); }
};

/// Sum with a fixed pairwise reduction tree over the element index. The
/// result depends only on the contents, never on threading or chunking.
double pairwise_sum(std::span<const double> xs);

/// Cumulative trapezoid integral along the grid; out[k] = integral from t_0 to t_k.
std::vector<double> cumulative_trapezoid(const TimeGrid& grid, std::span<const double> values);

}  // namespace mvsde
