#include "mvsde/bihari.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvsde {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double quad(const std::function<double(double)>& f, double a, double b) {
  // Map onto [0, 1] so the adaptive rule sees an O(1)-scaled problem; its
  // error estimate degrades badly on intervals far from unit scale.
  const double width = b - a;
  const auto g = [&](double t) { return width * f(a + t * width); };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, 0.0, 1.0, 12, 1e-12, &error);
  if (!std::isfinite(value) || error > 1e-8 * std::max(1.0, std::abs(value)))
    throw std::runtime_error("bihari: quadrature did not converge");
  return value;
}

/// Integral of 1/rho over [a, b], 0 < a <= b, split into octaves so the
/// adaptive rule never sees a badly scaled interval, and split at v = 1 where
/// moduli built from |log v| have a kink.
double integrate_inv_rho(const ModulusFunction& rho, double a, double b) {
  const auto f = [&rho](double v) { return 1.0 / rho(v); };
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    double hi = std::min(b, 2.0 * lo);
    if (lo < 1.0 && hi > 1.0) hi = 1.0;
    total += quad(f, lo, hi);
    lo = hi;
  }
  return total;
}

double phi_custom(const ModulusFunction& rho, double w) {
  if (w == 1.0) return 0.0;
  if (w > 1.0) return integrate_inv_rho(rho, 1.0, w);
  return -integrate_inv_rho(rho, w, 1.0);
}

struct EndpointProbe {
  OsgoodVerdict verdict;
  double partial_sum;
};

/// Dyadic-window partial sums of 1/rho toward the endpoint.
EndpointProbe endpoint_probe(const ModulusFunction& rho, OsgoodEndpoint endpoint,
                             const OsgoodOptions& options) {
  const auto f = [&rho](double v) { return 1.0 / rho(v); };
  double total = 0.0;
  // 2^900 and 2^-900 both stay clear of overflow/underflow.
  for (int k = 1; k <= 900; ++k) {
    double increment;
    if (endpoint == OsgoodEndpoint::zero) {
      const double hi = std::ldexp(1.0, -(k - 1));
      increment = quad(f, 0.5 * hi, hi);
    } else {
      const double lo = std::ldexp(1.0, k - 1);
      increment = quad(f, lo, 2.0 * lo);
    }
    total += increment;
    if (total > options.divergence_threshold) return {OsgoodVerdict::divergent, total};
    if (increment < options.cauchy_tolerance) return {OsgoodVerdict::convergent, total};
  }
  return {OsgoodVerdict::inconclusive, total};
}

}  // namespace

ModulusFunction ModulusFunction::linear() {
  ModulusFunction m;
  m.kind_ = Kind::linear;
  return m;
}

ModulusFunction ModulusFunction::power(double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("ModulusFunction::power: theta must lie in (0, 1]");
  ModulusFunction m;
  m.kind_ = Kind::power;
  m.theta_ = theta;
  return m;
}

ModulusFunction ModulusFunction::log_modulus(double alpha_hat) {
  if (!(alpha_hat > 0.0 && alpha_hat <= 1.0))
    throw std::invalid_argument("ModulusFunction::log_modulus: alpha_hat must lie in (0, 1]");
  ModulusFunction m;
  m.kind_ = Kind::log_modulus;
  m.alpha_hat_ = alpha_hat;
  return m;
}

ModulusFunction ModulusFunction::custom(std::function<double(double)> rho, bool concave,
                                        bool increasing) {
  if (!rho) throw std::invalid_argument("ModulusFunction::custom: callable required");
  ModulusFunction m;
  m.kind_ = Kind::custom;
  m.fn_ = std::move(rho);
  m.concave_ = concave;
  m.increasing_ = increasing;
  return m;
}

double ModulusFunction::operator()(double v) const {
  if (v < 0.0) throw std::invalid_argument("ModulusFunction: argument must be nonnegative");
  switch (kind_) {
    case Kind::linear:
      return v;
    case Kind::power:
      return std::pow(v, theta_);
    case Kind::log_modulus:
      return v == 0.0 ? 0.0 : alpha_hat_ * v * (std::abs(std::log(v)) + 1.0);
    case Kind::custom:
      return fn_(v);
  }
  return 0.0;
}

double phi(const ModulusFunction& rho, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("phi: argument must be positive");
  switch (rho.kind()) {
    case ModulusFunction::Kind::linear:
      return std::log(w);
    case ModulusFunction::Kind::power: {
      const double theta = rho.theta();
      if (theta == 1.0) return std::log(w);
      return (std::pow(w, 1.0 - theta) - 1.0) / (1.0 - theta);
    }
    case ModulusFunction::Kind::log_modulus: {
      const double a = rho.alpha_hat();
      if (w >= 1.0) return std::log1p(std::log(w)) / a;
      return -std::log1p(-std::log(w)) / a;
    }
    case ModulusFunction::Kind::custom:
      return phi_custom(rho, w);
  }
  return nan;
}

namespace {

std::optional<double> psi_custom(const ModulusFunction& rho, double v, double w) {
  double phi_v;
  if (v == 0.0) {
    const auto probe = endpoint_probe(rho, OsgoodEndpoint::zero, OsgoodOptions{});
    if (probe.verdict == OsgoodVerdict::divergent) return 0.0;  // Phi(0) = -inf
    if (probe.verdict == OsgoodVerdict::inconclusive)
      throw std::runtime_error("psi: cannot resolve Phi(0) for custom modulus");
    phi_v = -probe.partial_sum;
  } else {
    phi_v = phi_custom(rho, v);
  }
  const double target = phi_v + w;

  // Bracket the root of Phi(x) = target. Phi is strictly increasing and
  // Phi(v) <= target, so expand upward one octave at a time.
  double lo = v;
  double phi_lo = phi_v;
  double hi = std::max(v, 1e-8);
  double phi_hi = hi == v ? phi_v : phi_custom(rho, hi);
  int stagnant = 0;
  while (phi_hi < target) {
    lo = hi;
    phi_lo = phi_hi;
    const double next = 2.0 * hi;
    if (next > 1e300) return std::nullopt;  // Phi(inf) finite below target: outside D_rho
    const double increment = integrate_inv_rho(rho, hi, next);
    // Phi approaching a finite limit below the target also means (v, w) has
    // left D_rho; octave gains at rounding level certify the plateau.
    stagnant = increment < 1e-14 * (1.0 + std::abs(phi_hi)) ? stagnant + 1 : 0;
    if (stagnant >= 8) return std::nullopt;
    phi_hi += increment;
    hi = next;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double phi_mid = lo == 0.0 ? phi_custom(rho, mid) : phi_lo + integrate_inv_rho(rho, lo, mid);
    if (phi_mid < target) {
      lo = mid;
      phi_lo = phi_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::optional<double> psi(const ModulusFunction& rho, double v, double w) {
  if (v < 0.0 || w < 0.0) throw std::invalid_argument("psi: arguments must be nonnegative");
  if (w == 0.0) return v;  // Phi^{-1} o Phi
  switch (rho.kind()) {
    case ModulusFunction::Kind::linear:
      return v * std::exp(w);
    case ModulusFunction::Kind::power: {
      const double theta = rho.theta();
      if (theta == 1.0) return v * std::exp(w);
      const double q = 1.0 - theta;
      return std::pow(std::pow(v, q) + q * w, 1.0 / q);
    }
    case ModulusFunction::Kind::log_modulus: {
      const double a = rho.alpha_hat();
      if (v == 0.0) return 0.0;  // Phi(0) = -inf
      if (v >= 1.0) return std::exp((1.0 + std::log(v)) * std::exp(a * w) - 1.0);
      const double b = 1.0 - std::log(v);  // > 1
      const double growth = std::exp(a * w);
      if (growth >= b) return std::exp(growth / b - 1.0);
      return std::exp(1.0 - b / growth);
    }
    case ModulusFunction::Kind::custom:
      return psi_custom(rho, v, w);
  }
  return std::nullopt;
}

OsgoodVerdict osgood_divergence(const ModulusFunction& rho, OsgoodEndpoint endpoint,
                                const OsgoodOptions& options) {
  switch (rho.kind()) {
    case ModulusFunction::Kind::linear:
    case ModulusFunction::Kind::log_modulus:
      return OsgoodVerdict::divergent;  // both endpoints
    case ModulusFunction::Kind::power:
      if (endpoint == OsgoodEndpoint::infinity) return OsgoodVerdict::divergent;
      return rho.theta() == 1.0 ? OsgoodVerdict::divergent : OsgoodVerdict::convergent;
    case ModulusFunction::Kind::custom:
      return endpoint_probe(rho, endpoint, options).verdict;
  }
  return OsgoodVerdict::inconclusive;
}

ModulusFunction compose_rho0(const ModulusFunction& rho, const ModulusFunction& varrho,
                             double alpha, double beta, double c2) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("compose_rho0: alpha and beta must lie in (0, 1]");
  if (!(c2 >= 0.0)) throw std::invalid_argument("compose_rho0: c2 must be nonnegative");
  const bool concave = rho.concave() && varrho.concave() && alpha == 1.0 && beta == 1.0;
  const bool increasing = rho.increasing() && varrho.increasing();
  return ModulusFunction::custom(
      [rho, varrho, alpha, beta, c2](double v) {
        const double drift_part = std::pow(rho(v), 1.0 / alpha);
        const double measure_part = std::pow(varrho(c2 * c2 * v), 1.0 / beta);
        return std::max(drift_part, measure_part);
      },
      concave, increasing);
}

SecondMomentBound second_moment_bound(const BoundInputs& inputs, const TimeGrid& grid) {
  if (!(inputs.initial >= 0.0))
    throw std::invalid_argument("second_moment_bound: initial must be nonnegative");
  const Curve additive = inputs.additive.sample(grid);
  const Curve gain = inputs.gain.sample(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (additive.values[k] < 0.0 || gain.values[k] < 0.0)
      throw std::invalid_argument("second_moment_bound: additive and gain must be nonnegative");
  }
  const auto cum_additive = cumulative_trapezoid(grid, additive.values);
  const auto cum_gain = cumulative_trapezoid(grid, gain.values);

  std::vector<double> values(grid.size(), nan);
  double t0_plus = inf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto b = psi(inputs.rho0, inputs.initial + cum_additive[k], cum_gain[k]);
    if (!b) {
      t0_plus = grid.time(k);
      break;
    }
    values[k] = *b;
  }
  return {Curve(grid, std::move(values)), t0_plus};
}

}  // namespace mvsde
