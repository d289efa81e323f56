#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "mvsde/grid.hpp"

namespace mvsde {

/// Deterministic time functions used as regularity coefficients: a small
/// closed-form library (constant, scale*t^r, scale*e^{r t}) plus samples on a
/// grid with linear interpolation between nodes.
class TimeFunction {
 public:
  TimeFunction() : repr_(Constant{0.0}) {}

  static TimeFunction constant(double value) { return TimeFunction(Constant{value}); }
  static TimeFunction power(double scale, double exponent) {
    return TimeFunction(Power{scale, exponent});
  }
  static TimeFunction exponential(double scale, double rate) {
    return TimeFunction(Exponential{scale, rate});
  }
  static TimeFunction sampled(TimeGrid grid, std::vector<double> values) {
    if (values.size() != grid.size())
      throw std::invalid_argument("TimeFunction::sampled: values.size() must equal grid.size()");
    return TimeFunction(Sampled{grid, std::move(values)});
  }

  double operator()(double t) const {
    if (const auto* c = std::get_if<Constant>(&repr_)) return c->value;
    if (const auto* p = std::get_if<Power>(&repr_)) return p->scale * std::pow(t, p->exponent);
    if (const auto* e = std::get_if<Exponential>(&repr_)) return e->scale * std::exp(e->rate * t);
    const auto& s = std::get<Sampled>(repr_);
    if (t <= s.grid.t0) return s.values.front();
    if (t >= s.grid.horizon()) return s.values.back();
    const double u = (t - s.grid.t0) / s.grid.dt;
    const auto k = static_cast<std::size_t>(u);
    const double w = u - static_cast<double>(k);
    return (1.0 - w) * s.values[k] + w * s.values[k + 1];
  }

  bool is_constant(double value) const {
    const auto* c = std::get_if<Constant>(&repr_);
    return c != nullptr && c->value == value;
  }

  Curve sample(const TimeGrid& grid) const {
    std::vector<double> vals(grid.size());
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = (*this)(grid.time(k));
    return Curve(grid, std::move(vals));
  }

  struct Constant {
    double value;
    bool operator==(const Constant&) const = default;
  };
  struct Power {
    double scale, exponent;
    bool operator==(const Power&) const = default;
  };
  struct Exponential {
    double scale, rate;
    bool operator==(const Exponential&) const = default;
  };
  struct Sampled {
    TimeGrid grid;
    std::vector<double> values;
    bool operator==(const Sampled&) const = default;
  };
  using Repr = std::variant<Constant, Power, Exponential, Sampled>;

  const Repr& repr() const { return repr_; }
  bool operator==(const TimeFunction&) const = default;

 private:
  explicit TimeFunction(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

}  // namespace mvsde
