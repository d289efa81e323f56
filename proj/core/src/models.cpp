#include "mvsde/models.hpp"

#include <cmath>
#include <stdexcept>

namespace mvsde {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

/// Averages kernel(t, x, y) over the cloud points y. Skips the loop when the
/// kernel ignores y.
void average_kernel(const KernelFn& kernel, bool depends_on_y, double t,
                    std::span<const double> x, const ParticleCloud& cloud,
                    std::span<double> out) {
  if (!depends_on_y) {
    static const std::vector<double> origin(16, 0.0);
    kernel(t, x, std::span<const double>(origin.data(), cloud.dim()), out);
    return;
  }
  const std::size_t n = cloud.size();
  std::vector<double> acc(out.size(), 0.0);
  std::vector<double> tmp(out.size());
  for (std::size_t i = 0; i < n; ++i) {
    kernel(t, x, cloud.point(i), std::span<double>(tmp));
    for (std::size_t j = 0; j < out.size(); ++j) acc[j] += tmp[j];
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = acc[j] / static_cast<double>(n);
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

KernelFn make_power_drift_kernel(std::size_t m, const PowerDriftParams& params) {
  return [m, params](double, std::span<const double> x, std::span<const double> y,
                     std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double r = norm(x);
    if (r > 0.0) {
      double factor = 0.0;
      for (std::size_t j = 0; j < params.b_hat.size(); ++j)
        factor += params.b_hat[j] * std::pow(r, params.alpha_hat[j] - 1.0);
      for (std::size_t i = 0; i < m; ++i) out[i] = -x[i] * factor;
    }
    std::vector<double> tmp(m);
    for (std::size_t j = 0; j < params.interactions.size(); ++j) {
      params.interactions[j].f(x, y, std::span<double>(tmp));
      for (std::size_t i = 0; i < m; ++i) out[i] += params.c_hat[j] * tmp[i];
    }
  };
}

}  // namespace

ModelSpec ModelSpec::linear_meanfield(const LinearMeanField& params) {
  ModelSpec model;
  model.kind_ = Kind::linear_meanfield;
  model.dim_state_ = 1;
  model.dim_noise_ = 1;
  model.linear_ = params;
  return model;
}

ModelSpec ModelSpec::integral_map(std::size_t dim_state, std::size_t dim_noise,
                                  IntegralKernel kernel) {
  require(dim_state >= 1 && dim_noise >= 1, "ModelSpec: dimensions must be positive");
  require(static_cast<bool>(kernel.b0) && static_cast<bool>(kernel.sigma0),
          "ModelSpec::integral_map: both kernels required");
  if (kernel.power_drift) {
    const auto& pd = *kernel.power_drift;
    require(pd.b_hat.size() == pd.alpha_hat.size() &&
                pd.c_hat.size() == pd.interactions.size(),
            "PowerDriftParams: b_hat/alpha_hat and c_hat/interactions must pair up");
    for (double b : pd.b_hat) require(b >= 0.0, "PowerDriftParams: b_hat must be nonnegative");
    for (double a : pd.alpha_hat) require(a > 0.0, "PowerDriftParams: alpha_hat must be positive");
  }
  ModelSpec model;
  model.kind_ = Kind::integral_map;
  model.dim_state_ = dim_state;
  model.dim_noise_ = dim_noise;
  model.kernel_ = std::move(kernel);
  return model;
}

ModelSpec ModelSpec::power_drift(std::size_t dim_state, PowerDriftParams params,
                                 double sigma_const) {
  const std::size_t m = dim_state;
  IntegralKernel kernel;
  kernel.b0 = make_power_drift_kernel(m, params);
  kernel.b0_depends_on_y = !params.interactions.empty();
  // Constant diffusion in the m x 1 layout: sigma0 = sigma_const e_1.
  const double s = sigma_const;
  kernel.sigma0 = [s](double, std::span<const double>, std::span<const double>,
                      std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = s;
  };
  kernel.sigma0_depends_on_y = false;
  kernel.sigma_const = std::abs(sigma_const);
  kernel.power_drift = std::move(params);
  return integral_map(m, 1, std::move(kernel));
}

ModelSpec ModelSpec::custom(std::size_t dim_state, std::size_t dim_noise, CoefficientFn drift,
                            CoefficientFn diffusion) {
  require(dim_state >= 1 && dim_noise >= 1, "ModelSpec: dimensions must be positive");
  require(static_cast<bool>(drift) && static_cast<bool>(diffusion),
          "ModelSpec::custom: drift and diffusion required");
  ModelSpec model;
  model.kind_ = Kind::custom;
  model.dim_state_ = dim_state;
  model.dim_noise_ = dim_noise;
  model.drift_ = std::move(drift);
  model.diffusion_ = std::move(diffusion);
  return model;
}

void ModelSpec::drift(double t, std::span<const double> x, const ParticleCloud& cloud,
                      const CloudStats& stats, std::span<double> out) const {
  switch (kind_) {
    case Kind::linear_meanfield:
      out[0] = linear_->a * x[0] + linear_->b_mf * stats.mean[0];
      return;
    case Kind::integral_map:
      average_kernel(kernel_->b0, kernel_->b0_depends_on_y, t, x, cloud, out);
      return;
    case Kind::custom:
      drift_(t, x, cloud, stats, out);
      return;
  }
}

void ModelSpec::diffusion(double t, std::span<const double> x, const ParticleCloud& cloud,
                          const CloudStats& stats, std::span<double> out) const {
  switch (kind_) {
    case Kind::linear_meanfield:
      out[0] = linear_->c0 + linear_->c1 * x[0] + linear_->c2 * stats.mean[0];
      return;
    case Kind::integral_map:
      average_kernel(kernel_->sigma0, kernel_->sigma0_depends_on_y, t, x, cloud, out);
      return;
    case Kind::custom:
      diffusion_(t, x, cloud, stats, out);
      return;
  }
}

namespace {

std::vector<double> checked_eval(const ModelSpec& model, bool want_drift, double t,
                                 std::span<const double> x, const ParticleCloud& cloud) {
  if (x.size() != model.dim_state())
    throw std::invalid_argument("eval: state dimension mismatch");
  if (cloud.dim() != model.dim_state())
    throw std::invalid_argument("eval: cloud dimension mismatch");
  const std::size_t out_size =
      want_drift ? model.dim_state() : model.dim_state() * model.dim_noise();
  std::vector<double> out(out_size);
  const CloudStats stats = CloudStats::of(cloud);
  if (want_drift)
    model.drift(t, x, cloud, stats, std::span<double>(out));
  else
    model.diffusion(t, x, cloud, stats, std::span<double>(out));
  for (double v : out)
    if (!std::isfinite(v)) throw std::domain_error("eval: non-finite coefficient output");
  return out;
}

}  // namespace

std::vector<double> eval_drift(const ModelSpec& model, double t, std::span<const double> x,
                               const ParticleCloud& cloud) {
  return checked_eval(model, true, t, x, cloud);
}

std::vector<double> eval_diffusion(const ModelSpec& model, double t, std::span<const double> x,
                                   const ParticleCloud& cloud) {
  return checked_eval(model, false, t, x, cloud);
}

MomentCurves linear_moment_oracle(const LinearMeanField& model, double x0_mean,
                                  double x0_second_moment, const TimeGrid& grid) {
  const double a = model.a, b = model.b_mf, c0 = model.c0, c1 = model.c1, c2 = model.c2;
  const auto rhs = [&](double m, double v, double& dm, double& dv) {
    dm = (a + b) * m;
    dv = 2.0 * a * v + 2.0 * b * m * m + c0 * c0 + c1 * c1 * v + c2 * c2 * m * m +
         2.0 * c0 * c1 * m + 2.0 * c0 * c2 * m + 2.0 * c1 * c2 * m * m;
  };
  std::vector<double> mean(grid.size()), second(grid.size());
  double m = x0_mean, v = x0_second_moment;
  mean[0] = m;
  second[0] = v;
  const double h = grid.dt / 10.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    for (int sub = 0; sub < 10; ++sub) {
      double k1m, k1v, k2m, k2v, k3m, k3v, k4m, k4v;
      rhs(m, v, k1m, k1v);
      rhs(m + 0.5 * h * k1m, v + 0.5 * h * k1v, k2m, k2v);
      rhs(m + 0.5 * h * k2m, v + 0.5 * h * k2v, k3m, k3v);
      rhs(m + h * k3m, v + h * k3v, k4m, k4v);
      m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    mean[k] = m;
    second[k] = v;
  }
  return {Curve(grid, std::move(mean)), Curve(grid, std::move(second))};
}

LipschitzProfile lipschitz_profile_of(const ModelSpec& model, double p, double c_pp) {
  LipschitzProfile profile;
  profile.p = p;
  profile.c_pp = c_pp;
  switch (model.kind()) {
    case ModelSpec::Kind::linear_meanfield: {
      const auto& lm = *model.linear_params();
      profile.eta1 = TimeFunction::constant(lm.a);
      profile.eta2 = TimeFunction::constant(std::abs(lm.b_mf));
      profile.eta_hat1 = TimeFunction::constant(std::abs(lm.c1));
      profile.eta_hat2 = TimeFunction::constant(std::abs(lm.c2));
      return profile;
    }
    case ModelSpec::Kind::integral_map: {
      const auto& kernel = *model.kernel();
      if (!kernel.power_drift)
        throw std::invalid_argument(
            "lipschitz_profile_of: integral map without structured kernel data");
      // The pure power part is monotone decreasing, so it contributes a
      // nonpositive amount to (x-x~)'(b0(x,.) - b0(x~,.)).
      const auto& pd = *kernel.power_drift;
      double lip_x = 0.0, lip_y = 0.0;
      for (std::size_t j = 0; j < pd.interactions.size(); ++j) {
        lip_x += std::abs(pd.c_hat[j]) * pd.interactions[j].lip_x;
        lip_y += std::abs(pd.c_hat[j]) * pd.interactions[j].lip_y;
      }
      profile.eta1 = TimeFunction::constant(lip_x);
      profile.eta2 = TimeFunction::constant(lip_y);
      profile.eta_hat1 = TimeFunction::constant(kernel.sigma_lip_x);
      profile.eta_hat2 = TimeFunction::constant(kernel.sigma_lip_y);
      return profile;
    }
    case ModelSpec::Kind::custom:
      throw std::invalid_argument("lipschitz_profile_of: profile must be user-supplied for custom models");
  }
  throw std::invalid_argument("lipschitz_profile_of: unknown model kind");
}

GrowthProfile growth_profile_of(const ModelSpec& model, double p, double c_pp) {
  GrowthProfile profile;
  profile.p = p;
  profile.c_pp = c_pp;
  switch (model.kind()) {
    case ModelSpec::Kind::linear_meanfield: {
      const auto& lm = *model.linear_params();
      // x'b <= a|x|^2 + |b_mf| |x| theta;  |sigma| <= |c1||x| + |c2| theta + |c0|.
      profile.alpha = {1.0, 0.0, 0.0};
      profile.beta = {0.0, 1.0, 0.0};
      profile.upsilon = {TimeFunction::constant(lm.a), TimeFunction::constant(std::abs(lm.b_mf)),
                         TimeFunction::constant(0.0)};
      profile.upsilon_hat = {TimeFunction::constant(std::abs(lm.c1)),
                             TimeFunction::constant(std::abs(lm.c2)),
                             TimeFunction::constant(std::abs(lm.c0))};
      return profile;
    }
    case ModelSpec::Kind::integral_map: {
      const auto& kernel = *model.kernel();
      if (!kernel.power_drift)
        throw std::invalid_argument(
            "growth_profile_of: integral map without structured kernel data");
      const auto& pd = *kernel.power_drift;
      // Dissipative power terms bound x'b0 from above by 0. The interaction
      // part obeys |f_j(x,y)| <= bound_origin + lip_x |x| + lip_y |y|.
      double origin = 0.0, lip_x = 0.0, lip_y = 0.0;
      for (std::size_t j = 0; j < pd.interactions.size(); ++j) {
        origin += std::abs(pd.c_hat[j]) * pd.interactions[j].bound_origin;
        lip_x += std::abs(pd.c_hat[j]) * pd.interactions[j].lip_x;
        lip_y += std::abs(pd.c_hat[j]) * pd.interactions[j].lip_y;
      }
      profile.alpha = {1.0, 0.0, 0.0};
      profile.beta = {0.0, 1.0, 0.0};
      profile.upsilon = {TimeFunction::constant(lip_x), TimeFunction::constant(lip_y),
                         TimeFunction::constant(origin)};
      profile.upsilon_hat = {TimeFunction::constant(kernel.sigma_lip_x),
                             TimeFunction::constant(kernel.sigma_lip_y),
                             TimeFunction::constant(kernel.sigma_const)};
      return profile;
    }
    case ModelSpec::Kind::custom:
      throw std::invalid_argument("growth_profile_of: profile must be user-supplied for custom models");
  }
  throw std::invalid_argument("growth_profile_of: unknown model kind");
}

}  // namespace mvsde
