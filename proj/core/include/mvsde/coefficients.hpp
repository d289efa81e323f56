#pragma once

#include <cstddef>
#include <vector>

#include "mvsde/grid.hpp"
#include "mvsde/time_function.hpp"

namespace mvsde {

/// c_p = (p - 1) / 2, the Ito correction constant of the p-th power expansion.
inline double cp_factor(double p) { return 0.5 * (p - 1.0); }

/// The bracket [x]_q of a deterministic coefficient: x^+ for q < inf and x
/// (the essential supremum of a constant) for q = inf.
double deterministic_bracket(double x, double q);

/// Mixed Hoelder regularity data: exponent pairs (alpha_k, beta_k) with
/// alpha + beta in [0,1]^l, drift coefficients eta_k (signed), diffusion
/// coefficients eta_hat_k (nonnegative) and the Young-splitting weights
/// zeta_k, zeta_hat_k (forced to 1 where alpha_k + beta_k = 1). Empty zeta
/// vectors mean all-ones.
struct HoelderProfile {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<TimeFunction> eta;
  std::vector<TimeFunction> eta_hat;
  std::vector<TimeFunction> zeta;
  std::vector<TimeFunction> zeta_hat;
  double p = 2.0;
  double c_pp = 1.0;  ///< domination constant c_{p,P}

  std::size_t terms() const { return alpha.size(); }
  void validate() const;
};

/// Partial Lipschitz data for the drift and complete Lipschitz data for the
/// diffusion: eta1 signed, eta2 / eta_hat1 / eta_hat2 nonnegative.
struct LipschitzProfile {
  TimeFunction eta1;
  TimeFunction eta2;
  TimeFunction eta_hat1;
  TimeFunction eta_hat2;
  double p = 2.0;
  double c_pp = 1.0;

  void validate() const;
};

/// Growth data of the same shape as HoelderProfile, bounding x'B(x, mu) and
/// |Sigma(x, mu)| against powers of |x| and theta(mu, delta_0).
struct GrowthProfile {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<TimeFunction> upsilon;      ///< signed
  std::vector<TimeFunction> upsilon_hat;  ///< nonnegative
  std::vector<TimeFunction> kappa;
  std::vector<TimeFunction> kappa_hat;
  double p = 2.0;
  double c_pp = 1.0;

  std::size_t terms() const { return alpha.size(); }
  void validate() const;
};

/// Sum of power functions bounding a stability coefficient from above:
/// t -> sum_k lambda_hat_k * alpha_k * (t - s_k)^{alpha_k - 1} on [t1, inf),
/// with alpha strictly increasing and lambda_hat_l < 0.
struct PowerEnvelope {
  std::vector<double> alpha;
  std::vector<double> lambda_hat;
  std::vector<double> shifts;
  double t1 = 0.0;

  std::size_t terms() const { return alpha.size(); }
  void validate() const;
  double operator()(double t) const;
};

struct StabilityPair {
  double gamma;  ///< signed
  double delta;  ///< nonnegative
};

/// The stability coefficients gamma_{p,P}(t), delta_{p,P}(t) of the mixed
/// Hoelder condition, with deterministic brackets. The diffusion double sum
/// evaluates the product brackets as pointwise products eta_hat_j(t) *
/// eta_hat_k(t); for deterministic coefficients this coincides with the
/// product of marginal brackets, so callers holding only marginal bracket
/// curves may pass those directly.
StabilityPair gamma_delta_hoelder(const HoelderProfile& profile, double t);

/// gamma_{p,P}(t) in the Lipschitz case, where delta_{p,P} vanishes:
/// p*(eta1 + c*[eta2] + c_p*([eta_hat1]^2 + 2c*[eta_hat1*eta_hat2] + c^2*[eta_hat2]^2)).
double gamma_lipschitz(const LipschitzProfile& profile, double t);

/// The same stability coefficient evaluated at moment order p*q with the
/// constants c_{pq} and c_{pq,P}; requires q >= 2.
double gamma_pq(const LipschitzProfile& profile, double q, double t);

struct GrowthPair {
  double f;  ///< signed
  double g;  ///< nonnegative
};

/// The growth coefficients f_{p,P}(t), g_{p,P}(t); structurally identical to
/// the stability coefficients applied to the growth data.
GrowthPair growth_coeffs(const GrowthProfile& profile, double t);

struct LyapunovCertificate {
  double exponent;  ///< negative
  double order;     ///< the time power alpha_l
};

/// Certified Lyapunov data from an envelope: exponent lambda_hat_l divided by
/// the moment order (pathwise certificates use moment_order = p*q, moment-level
/// ones use 1), at time order alpha_l.
LyapunovCertificate lyapunov_from_envelope(const PowerEnvelope& envelope, double moment_order);

struct EnvelopeCheck {
  bool holds;
  double t_star;  ///< first violation time; NaN when the envelope holds
};

/// Pointwise check gamma(t) <= envelope(t) on all grid points >= t1.
EnvelopeCheck check_envelope(const Curve& gamma_curve, const PowerEnvelope& envelope);

}  // namespace mvsde
