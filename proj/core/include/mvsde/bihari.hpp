#pragma once

#include <functional>
#include <optional>

#include "mvsde/grid.hpp"
#include "mvsde/time_function.hpp"

namespace mvsde {

/// A modulus of continuity rho: R+ -> R+, continuous, vanishing at 0 and
/// positive on (0, inf). Closed-form kinds carry analytic antiderivatives;
/// custom kinds go through adaptive quadrature.
class ModulusFunction {
 public:
  enum class Kind { linear, power, log_modulus, custom };

  static ModulusFunction linear();
  /// rho(v) = v^theta, theta in (0, 1].
  static ModulusFunction power(double theta);
  /// rho(v) = alpha_hat * v * (|log v| + 1), alpha_hat in (0, 1].
  static ModulusFunction log_modulus(double alpha_hat);
  static ModulusFunction custom(std::function<double(double)> rho, bool concave, bool increasing);

  Kind kind() const { return kind_; }
  double operator()(double v) const;
  bool concave() const { return concave_; }
  bool increasing() const { return increasing_; }
  double theta() const { return theta_; }
  double alpha_hat() const { return alpha_hat_; }

 private:
  ModulusFunction() = default;
  Kind kind_ = Kind::linear;
  double theta_ = 1.0;
  double alpha_hat_ = 1.0;
  std::function<double(double)> fn_;
  bool concave_ = true;
  bool increasing_ = true;
};

/// Phi_rho(w) = integral from 1 to w of dv / rho(v); negative for w < 1.
/// Analytic for closed-form kinds, adaptive quadrature (rel. tol 1e-12) for
/// custom ones.
double phi(const ModulusFunction& rho, double w);

/// Psi_rho(v, w) = Phi_rho^{-1}(Phi_rho(v) + w) on the domain D_rho where
/// Phi_rho(v) + w < Phi_rho(inf); nullopt marks (v, w) outside D_rho.
std::optional<double> psi(const ModulusFunction& rho, double v, double w);

enum class OsgoodEndpoint { zero, infinity };
enum class OsgoodVerdict { divergent, convergent, inconclusive };

struct OsgoodOptions {
  double divergence_threshold = 1e3;
  double cauchy_tolerance = 1e-6;
};

/// Does the integral of 1/rho diverge at the endpoint? Analytic for
/// closed-form kinds; dyadic-window partial sums with an explicit
/// `inconclusive` verdict for custom ones.
OsgoodVerdict osgood_divergence(const ModulusFunction& rho, OsgoodEndpoint endpoint,
                                const OsgoodOptions& options = {});

/// The composed modulus behind the second-moment estimate:
///   varrho_0(v) = max(rho(v)^{1/alpha}, varrho(c2^2 v)^{1/beta})
/// with alpha, beta in (0, 1]. Declared concave/increasing only when both
/// inputs say so.
ModulusFunction compose_rho0(const ModulusFunction& rho, const ModulusFunction& varrho,
                             double alpha, double beta, double c2);

/// Inputs of the quantitative second-moment estimate: initial = E|Y_t0|^2,
/// additive = s -> E[eps_s] + delta(s), gain = s -> gamma(s).
struct BoundInputs {
  double initial = 0.0;
  TimeFunction additive;
  TimeFunction gain;
  ModulusFunction rho0 = ModulusFunction::linear();
};

struct SecondMomentBound {
  Curve bound;     ///< NaN past the horizon t0_plus
  double t0_plus;  ///< +inf when the domain membership never fails
};

/// t -> Psi_rho0(initial + int additive, int gain) with trapezoid integrals on
/// the grid; t0_plus is the first grid time at which (v, w) leaves D_rho0.
SecondMomentBound second_moment_bound(const BoundInputs& inputs, const TimeGrid& grid);

}  // namespace mvsde
