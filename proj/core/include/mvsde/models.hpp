#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mvsde/coefficients.hpp"
#include "mvsde/grid.hpp"
#include "mvsde/measures.hpp"

namespace mvsde {

/// Per-step statistics of an interaction cloud. The engine computes these
/// once per step so coefficient evaluations stay O(1) per particle for models
/// that only read summary statistics.
struct CloudStats {
  std::vector<double> mean;

  static CloudStats of(const ParticleCloud& cloud) { return {cloud_mean(cloud)}; }
};

/// Drift b(t, x, mu) -> out[m] and diffusion sigma(t, x, mu) -> out[m*d],
/// row-major. Must be reentrant: evaluations carry no mutable state.
using CoefficientFn = std::function<void(double t, std::span<const double> x,
                                         const ParticleCloud& cloud, const CloudStats& stats,
                                         std::span<double> out)>;

/// Kernel of an integral-map coefficient: (t, x, y) -> out.
using KernelFn =
    std::function<void(double t, std::span<const double> x, std::span<const double> y,
                       std::span<double> out)>;

/// Lipschitz interaction map f(x, y) -> R^m with declared constants:
/// |f(x,y) - f(x~,y~)| <= lip_x |x-x~| + lip_y |y-y~| and |f(0,0)| <= bound_origin.
struct InteractionMap {
  std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> out)>
      f;
  double lip_x = 0.0;
  double lip_y = 0.0;
  double bound_origin = 0.0;
};

/// Power-drift kernel b0(t,x,y) = -x * sum_j b_hat_j |x|^{alpha_hat_j - 1}
///                                + sum_j c_hat_j f_j(x,y),
/// with the x = 0 value defined by the interaction part alone.
struct PowerDriftParams {
  std::vector<double> b_hat;      ///< nonnegative
  std::vector<double> alpha_hat;  ///< positive
  std::vector<double> c_hat;
  std::vector<InteractionMap> interactions;
};

/// Integral-map coefficients b(t,x,mu) = int b0(t,x,y) mu(dy) and likewise
/// sigma0. Flags record whether the kernels actually read y, so the cloud
/// average can be skipped for non-interacting kernels. The sigma_* constants
/// declare |sigma0(t,x,y)| <= sigma_const + sigma_lip_x |x| + sigma_lip_y |y|,
/// which doubles as its Lipschitz data for profiles.
struct IntegralKernel {
  KernelFn b0;
  KernelFn sigma0;
  bool b0_depends_on_y = true;
  bool sigma0_depends_on_y = true;
  std::optional<PowerDriftParams> power_drift;
  double sigma_const = 0.0;
  double sigma_lip_x = 0.0;
  double sigma_lip_y = 0.0;
};

/// Scalar linear mean-field model: drift a*x + b_mf*E[X], diffusion
/// c0 + c1*x + c2*E[X]. The smallest family whose moment flows close into
/// ODEs, used as ground truth.
struct LinearMeanField {
  double a = 0.0;
  double b_mf = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  bool operator==(const LinearMeanField&) const = default;
};

/// Drift/diffusion specification of a mean-field SDE.
class ModelSpec {
 public:
  enum class Kind { integral_map, linear_meanfield, custom };

  static ModelSpec linear_meanfield(const LinearMeanField& params);
  static ModelSpec integral_map(std::size_t dim_state, std::size_t dim_noise,
                                IntegralKernel kernel);
  /// Integral map with the power-drift kernel family and constant diffusion
  /// sigma0 = sigma_const (independent of x and y).
  static ModelSpec power_drift(std::size_t dim_state, PowerDriftParams params,
                               double sigma_const);
  static ModelSpec custom(std::size_t dim_state, std::size_t dim_noise, CoefficientFn drift,
                          CoefficientFn diffusion);

  Kind kind() const { return kind_; }
  std::size_t dim_state() const { return dim_state_; }
  std::size_t dim_noise() const { return dim_noise_; }
  const std::optional<LinearMeanField>& linear_params() const { return linear_; }
  const std::optional<IntegralKernel>& kernel() const { return kernel_; }

  /// Hot-path evaluations; dimensions of x/out are the caller's contract.
  void drift(double t, std::span<const double> x, const ParticleCloud& cloud,
             const CloudStats& stats, std::span<double> out) const;
  void diffusion(double t, std::span<const double> x, const ParticleCloud& cloud,
                 const CloudStats& stats, std::span<double> out) const;

 private:
  ModelSpec() = default;
  Kind kind_ = Kind::custom;
  std::size_t dim_state_ = 1;
  std::size_t dim_noise_ = 1;
  std::optional<LinearMeanField> linear_;
  std::optional<IntegralKernel> kernel_;
  CoefficientFn drift_;
  CoefficientFn diffusion_;
};

/// Validating wrappers: check dimensions, evaluate, and reject non-finite
/// output.
std::vector<double> eval_drift(const ModelSpec& model, double t, std::span<const double> x,
                               const ParticleCloud& cloud);
std::vector<double> eval_diffusion(const ModelSpec& model, double t, std::span<const double> x,
                                   const ParticleCloud& cloud);

struct MomentCurves {
  Curve mean;
  Curve second;
};

/// Closed moment ODEs of the linear mean-field family, integrated by the
/// classical 4th-order one-step method with substep dt/10:
///   m' = (a + b_mf) m,
///   v' = 2 a v + 2 b_mf m^2 + E[(c0 + c1 X + c2 m)^2].
MomentCurves linear_moment_oracle(const LinearMeanField& model, double x0_mean,
                                  double x0_second_moment, const TimeGrid& grid);

/// The Lipschitz profile the coefficient family certifies. Throws for custom
/// models and for integral maps without structured kernel data.
LipschitzProfile lipschitz_profile_of(const ModelSpec& model, double p = 2.0, double c_pp = 1.0);

/// The growth profile of the family; the dissipative power terms contribute
/// a nonpositive amount and are dropped from the upper bound.
GrowthProfile growth_profile_of(const ModelSpec& model, double p = 2.0, double c_pp = 1.0);

}  // namespace mvsde
