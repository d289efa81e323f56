#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mvsde/coefficients.hpp"
#include "mvsde/engine.hpp"
#include "mvsde/grid.hpp"

namespace mvsde {

struct PicardOptions {
  double p = 2.0;
  double c_pp = 1.0;
  std::size_t max_iterations = 8;
  double tolerance = 1e-3;          ///< sup-distance stopping threshold
  std::size_t assignment_cap = 256; ///< exact matching limit for dim > 1
  bool keep_iterates = false;       ///< retain every measure flow (memory-heavy)
};

struct PicardState {
  std::vector<MeasureFlow> iterates;  ///< populated when keep_iterates is set
  MeasureFlow final_flow;
  std::vector<double> distances;      ///< sup_t theta_p(mu_n, mu_{n+1})
  std::vector<double> bound_values;   ///< error bound at the horizon per n (with profile)
  double delta_estimate = 0.0;        ///< Delta(T), the a-priori scale factor
  double noise_floor = 0.0;           ///< sup_t sample-sigma(|X_t|)/sqrt(N) of the last iterate
  bool converged = false;
  std::size_t iterations = 0;         ///< n with sup theta_p(mu_n, mu_{n+1}) <= tol
  bool metric_is_lower_bound = false; ///< moment-proxy distance was used
  bool blew_up = false;
  double blow_up_time = 0.0;
};

/// Sup over grid times of the cloud distance between two flows: sorted
/// matching for dim 1, exact assignment for dim > 1 up to the cap, and the
/// flagged moment-difference proxy |theta_p(mu,d0) - theta_p(nu,d0)| above it.
double flow_distance(const MeasureFlow& a, const MeasureFlow& b, double p,
                     std::size_t assignment_cap, bool* used_proxy = nullptr);

/// Picard iteration mu_n = Law(X^{xi, mu_{n-1}}) with common random numbers:
/// every iterate reuses cfg.seed, so successive distances reflect the flow
/// update, not Monte Carlo resampling. mu0 defaults to the constant flow of
/// the empirical law of xi. When a profile is supplied, the a-priori error
/// bound is evaluated per iteration.
PicardState picard_solve(const ModelSpec& model, const InitialCondition& init,
                         const SimConfig& cfg, const PicardOptions& options,
                         const MeasureFlow* mu0 = nullptr,
                         const LipschitzProfile* profile = nullptr);

/// Tail of the a-priori error estimate:
///   Delta_t * sum_{i>=n} (c^i / i!)^{1/p} * J(t)^{i/p},
/// with J(t) = int_t0^t exp(int_s^t gamma_p^+) delta(s) ds evaluated from the
/// sampled curves by trapezoid rule. The series is truncated when a term
/// falls below 1e-15 of the partial sum.
double error_bound(const Curve& gamma_p_plus, const Curve& delta, double delta_t, double c_pp,
                   double p, std::size_t n, double t);

/// The mu-SDE comparison coefficients gamma_p and delta of the Picard error
/// estimate, sampled on a grid. gamma_p_plus is already clipped at zero.
struct PicardCoefficients {
  Curve gamma_p_plus;
  Curve delta;
};
PicardCoefficients picard_coefficients(const LipschitzProfile& profile, const TimeGrid& grid);

struct GrowthInvariantCheck {
  bool member;
  double t_star;  ///< first violation time; NaN when member
};

/// Membership in the growth-invariant set M_p: theta_p(mu(t), delta_0)^p must
/// stay below e^{int f} E|xi|^p + int e^{int f} g at every grid point.
GrowthInvariantCheck growth_invariant_check(const MeasureFlow& flow, const TimeGrid& grid,
                                            const GrowthProfile& growth, double xi_moment_p);

}  // namespace mvsde
