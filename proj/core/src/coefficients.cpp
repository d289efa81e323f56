#include "mvsde/coefficients.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mvsde/measures.hpp"

namespace mvsde {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void validate_exponents(const std::vector<double>& alpha, const std::vector<double>& beta,
                        const char* who) {
  if (alpha.empty() || alpha.size() != beta.size())
    throw std::invalid_argument(std::string(who) + ": alpha and beta must share a size l >= 1");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const bool ok = alpha[k] >= 0.0 && alpha[k] <= 1.0 && beta[k] >= 0.0 && beta[k] <= 1.0 &&
                    alpha[k] + beta[k] <= 1.0;
    if (!ok)
      throw std::invalid_argument(std::string(who) +
                                  ": need alpha, beta and alpha+beta in [0,1] per term");
  }
}

void validate_weights(const std::vector<double>& alpha, const std::vector<double>& beta,
                      const std::vector<TimeFunction>& weights, const char* who) {
  if (weights.empty()) return;  // all-ones convention
  if (weights.size() != alpha.size())
    throw std::invalid_argument(std::string(who) + ": weight vector size must equal l");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] + beta[k] == 1.0 && !weights[k].is_constant(1.0))
      throw std::invalid_argument(std::string(who) +
                                  ": weights are forced to 1 where alpha_k + beta_k = 1");
  }
}

double weight_at(const std::vector<TimeFunction>& weights, std::size_t k, double t) {
  return weights.empty() ? 1.0 : weights[k](t);
}

/// Shared evaluator behind gamma_delta_hoelder and growth_coeffs: the two
/// formulas are the same folds over (alpha, beta, drift, diffusion) data.
StabilityPair stability_pair(const std::vector<double>& alpha, const std::vector<double>& beta,
                             const std::vector<double>& drift,
                             const std::vector<double>& diffusion,
                             const std::vector<double>& weight,
                             const std::vector<double>& weight_hat, double p, double c) {
  const std::size_t l = alpha.size();
  const double cp = cp_factor(p);
  double gamma = 0.0;
  double delta = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    const double q = alpha[k] == 1.0 ? order_infinity : p / (1.0 - alpha[k]);
    const double bracket = deterministic_bracket(drift[k], q);
    gamma += (p - 1.0 + alpha[k] + beta[k]) * std::pow(c, beta[k]) * bracket;
    const double slack = 1.0 - alpha[k] - beta[k];
    if (slack > 0.0)
      delta += slack * std::pow(c, beta[k]) * std::pow(weight[k], p / slack) * bracket;
  }
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t k = 0; k < l; ++k) {
      const double product = diffusion[j] * diffusion[k];
      const double cb = std::pow(c, beta[j] + beta[k]);
      gamma += cp * (p - 2.0 + alpha[j] + alpha[k] + beta[j] + beta[k]) * cb * product;
      const double slack = 2.0 - alpha[j] - alpha[k] - beta[j] - beta[k];
      if (slack > 0.0)
        delta += cp * slack * cb * std::pow(weight_hat[j] * weight_hat[k], p / slack) * product;
    }
  }
  return {gamma, delta};
}

StabilityPair evaluate_profile(const std::vector<double>& alpha, const std::vector<double>& beta,
                               const std::vector<TimeFunction>& drift,
                               const std::vector<TimeFunction>& diffusion,
                               const std::vector<TimeFunction>& weight,
                               const std::vector<TimeFunction>& weight_hat, double p, double c,
                               double t) {
  const std::size_t l = alpha.size();
  std::vector<double> drift_vals(l), diffusion_vals(l), w(l), w_hat(l);
  for (std::size_t k = 0; k < l; ++k) {
    drift_vals[k] = drift[k](t);
    diffusion_vals[k] = diffusion[k](t);
    w[k] = weight_at(weight, k, t);
    w_hat[k] = weight_at(weight_hat, k, t);
  }
  return stability_pair(alpha, beta, drift_vals, diffusion_vals, w, w_hat, p, c);
}

}  // namespace

double deterministic_bracket(double x, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("deterministic_bracket: order must be >= 1");
  return std::isinf(q) ? x : std::max(x, 0.0);
}

void HoelderProfile::validate() const {
  validate_exponents(alpha, beta, "HoelderProfile");
  if (eta.size() != terms() || eta_hat.size() != terms())
    throw std::invalid_argument("HoelderProfile: eta and eta_hat must have size l");
  validate_weights(alpha, beta, zeta, "HoelderProfile");
  validate_weights(alpha, beta, zeta_hat, "HoelderProfile");
  if (!(p >= 2.0)) throw std::invalid_argument("HoelderProfile: p must be >= 2");
  if (!(c_pp >= 0.0)) throw std::invalid_argument("HoelderProfile: c_pp must be nonnegative");
}

void LipschitzProfile::validate() const {
  if (!(p >= 2.0)) throw std::invalid_argument("LipschitzProfile: p must be >= 2");
  if (!(c_pp >= 0.0)) throw std::invalid_argument("LipschitzProfile: c_pp must be nonnegative");
}

void GrowthProfile::validate() const {
  validate_exponents(alpha, beta, "GrowthProfile");
  if (upsilon.size() != terms() || upsilon_hat.size() != terms())
    throw std::invalid_argument("GrowthProfile: upsilon and upsilon_hat must have size l");
  validate_weights(alpha, beta, kappa, "GrowthProfile");
  validate_weights(alpha, beta, kappa_hat, "GrowthProfile");
  if (!(p >= 2.0)) throw std::invalid_argument("GrowthProfile: p must be >= 2");
  if (!(c_pp >= 0.0)) throw std::invalid_argument("GrowthProfile: c_pp must be nonnegative");
}

void PowerEnvelope::validate() const {
  if (alpha.empty() || alpha.size() != lambda_hat.size() || alpha.size() != shifts.size())
    throw std::invalid_argument("PowerEnvelope: alpha, lambda_hat, shifts must share a size l >= 1");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(alpha[k] > 0.0)) throw std::invalid_argument("PowerEnvelope: alpha must be positive");
    if (k > 0 && !(alpha[k] > alpha[k - 1]))
      throw std::invalid_argument("PowerEnvelope: alpha must be strictly increasing");
    if (!(shifts[k] <= t1)) throw std::invalid_argument("PowerEnvelope: max_k s_k must be <= t1");
  }
  if (!(lambda_hat.back() < 0.0))
    throw std::invalid_argument("PowerEnvelope: lambda_hat_l must be negative");
}

double PowerEnvelope::operator()(double t) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k)
    sum += lambda_hat[k] * alpha[k] * std::pow(t - shifts[k], alpha[k] - 1.0);
  return sum;
}

StabilityPair gamma_delta_hoelder(const HoelderProfile& profile, double t) {
  profile.validate();
  return evaluate_profile(profile.alpha, profile.beta, profile.eta, profile.eta_hat, profile.zeta,
                          profile.zeta_hat, profile.p, profile.c_pp, t);
}

namespace {

double gamma_lipschitz_at_order(const LipschitzProfile& profile, double order, double t) {
  const double c = profile.c_pp;
  const double cp = cp_factor(order);
  const double eta1 = profile.eta1(t);
  const double eta2 = deterministic_bracket(profile.eta2(t), order);
  const double h1 = profile.eta_hat1(t);
  const double h2 = profile.eta_hat2(t);
  return order *
         (eta1 + c * eta2 + cp * (h1 * h1 + 2.0 * c * (h1 * h2) + c * c * (h2 * h2)));
}

}  // namespace

double gamma_lipschitz(const LipschitzProfile& profile, double t) {
  profile.validate();
  return gamma_lipschitz_at_order(profile, profile.p, t);
}

double gamma_pq(const LipschitzProfile& profile, double q, double t) {
  profile.validate();
  if (!(q >= 2.0)) throw std::invalid_argument("gamma_pq: q must be >= 2");
  return gamma_lipschitz_at_order(profile, profile.p * q, t);
}

GrowthPair growth_coeffs(const GrowthProfile& profile, double t) {
  profile.validate();
  const StabilityPair pair =
      evaluate_profile(profile.alpha, profile.beta, profile.upsilon, profile.upsilon_hat,
                       profile.kappa, profile.kappa_hat, profile.p, profile.c_pp, t);
  return {pair.gamma, pair.delta};
}

LyapunovCertificate lyapunov_from_envelope(const PowerEnvelope& envelope, double moment_order) {
  envelope.validate();
  if (!(moment_order > 0.0))
    throw std::invalid_argument("lyapunov_from_envelope: moment_order must be positive");
  return {envelope.lambda_hat.back() / moment_order, envelope.alpha.back()};
}

EnvelopeCheck check_envelope(const Curve& gamma_curve, const PowerEnvelope& envelope) {
  envelope.validate();
  for (std::size_t k = 0; k < gamma_curve.size(); ++k) {
    const double t = gamma_curve.grid.time(k);
    if (t < envelope.t1) continue;
    if (gamma_curve.values[k] > envelope(t)) return {false, t};
  }
  return {true, nan};
}

}  // namespace mvsde
