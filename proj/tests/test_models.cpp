#include <doctest.h>

#include <cmath>
#include <random>

#include "mvsde/models.hpp"

using namespace mvsde;

namespace {

ModelSpec difference_kernel_model() {
  IntegralKernel kernel;
  kernel.b0 = [](double, std::span<const double> x, std::span<const double> y,
                 std::span<double> out) { out[0] = y[0] - x[0]; };
  kernel.sigma0 = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> out) { out[0] = 0.0; };
  kernel.sigma0_depends_on_y = false;
  return ModelSpec::integral_map(1, 1, std::move(kernel));
}

ModelSpec pure_power_drift(std::vector<double> b_hat, std::vector<double> alpha_hat) {
  PowerDriftParams params;
  params.b_hat = std::move(b_hat);
  params.alpha_hat = std::move(alpha_hat);
  return ModelSpec::power_drift(1, std::move(params), 0.0);
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("integral map averages the kernel over the cloud") {
  const auto model = difference_kernel_model();
  const ParticleCloud cloud(1, {1.0, 3.0});
  const std::vector<double> x = {2.0};
  CHECK(eval_drift(model, 0.0, x, cloud)[0] == doctest::Approx(0.0));
}

TEST_CASE("linear mean-field drift") {
  const auto model = ModelSpec::linear_meanfield({-1.0, 0.5, 0.0, 0.0, 0.0});
  const ParticleCloud cloud(1, {1.0, 3.0});  // mean 2
  const std::vector<double> x = {1.0};
  CHECK(eval_drift(model, 0.0, x, cloud)[0] == doctest::Approx(0.0));
  const auto noisy = ModelSpec::linear_meanfield({0.0, 0.0, 0.25, 0.5, 0.125});
  CHECK(eval_diffusion(noisy, 0.0, x, cloud)[0] == doctest::Approx(0.25 + 0.5 + 0.25));
}

TEST_CASE("power drift closed evaluation") {
  const auto model = pure_power_drift({1.0}, {3.0});
  const ParticleCloud cloud(1, {0.0});
  CHECK(eval_drift(model, 0.0, std::vector<double>{2.0}, cloud)[0] == doctest::Approx(-8.0));
  // x = 0 takes the explicit interaction-only clause
  CHECK(eval_drift(model, 0.0, std::vector<double>{0.0}, cloud)[0] == 0.0);
  const auto singular = pure_power_drift({1.0}, {0.5});
  CHECK(eval_drift(singular, 0.0, std::vector<double>{0.0}, cloud)[0] == 0.0);
}

TEST_CASE("eval validates dimensions and finiteness") {
  const auto model = ModelSpec::linear_meanfield({1.0, 0.0, 0.0, 0.0, 0.0});
  const ParticleCloud cloud(1, {0.0});
  CHECK_THROWS_AS(eval_drift(model, 0.0, std::vector<double>{1.0, 2.0}, cloud),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_drift(model, 0.0, std::vector<double>{1.0}, ParticleCloud(2, {0.0, 0.0})),
                  std::invalid_argument);
  const auto exploding = ModelSpec::custom(
      1, 1,
      [](double, std::span<const double>, const ParticleCloud&, const CloudStats&,
         std::span<double> out) { out[0] = std::numeric_limits<double>::infinity(); },
      [](double, std::span<const double>, const ParticleCloud&, const CloudStats&,
         std::span<double> out) { out[0] = 0.0; });
  CHECK_THROWS_AS(eval_drift(exploding, 0.0, std::vector<double>{1.0}, cloud), std::domain_error);
}

TEST_CASE("power drift is dissipative on random pairs") {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  const std::vector<ModelSpec> models = {pure_power_drift({1.0}, {3.0}),
                                         pure_power_drift({0.5, 1.5}, {0.5, 2.0}),
                                         pure_power_drift({2.0}, {1.0})};
  const ParticleCloud cloud(1, {0.0});
  for (const auto& model : models) {
    for (int rep = 0; rep < 100000 / 3; ++rep) {
      const double x = unif(gen);
      const double y = unif(gen);
      const double bx = eval_drift(model, 0.0, std::vector<double>{x}, cloud)[0];
      const double by = eval_drift(model, 0.0, std::vector<double>{y}, cloud)[0];
      CHECK((x - y) * (bx - by) <= 0.0);
    }
  }
}

TEST_CASE("integral map is permutation invariant and linear in the measure") {
  const auto model = difference_kernel_model();
  const std::vector<double> x = {0.5};
  SUBCASE("integer data evaluates identically under permutation") {
    const ParticleCloud cloud(1, {1.0, 2.0, 4.0, 8.0});
    const ParticleCloud permuted(1, {8.0, 4.0, 2.0, 1.0});
    CHECK(eval_drift(model, 0.0, x, cloud)[0] == eval_drift(model, 0.0, x, permuted)[0]);
  }
  SUBCASE("random data agrees to rounding accuracy") {
    std::mt19937_64 gen(55);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> data(6);
      for (double& v : data) v = normal(gen);
      std::vector<double> reversed(data.rbegin(), data.rend());
      const ParticleCloud cloud(1, data);
      const ParticleCloud permuted(1, reversed);
      CHECK(eval_drift(model, 0.0, x, cloud)[0] ==
            doctest::Approx(eval_drift(model, 0.0, x, permuted)[0]).epsilon(1e-13));
    }
  }
  SUBCASE("concatenation is the weighted average") {
    const ParticleCloud a(1, {1.0, 3.0});
    const ParticleCloud b(1, {5.0, 7.0, 9.0, 11.0});
    std::vector<double> joined(a.data().begin(), a.data().end());
    joined.insert(joined.end(), b.data().begin(), b.data().end());
    const ParticleCloud both(1, std::move(joined));
    const double va = eval_drift(model, 0.0, x, a)[0];
    const double vb = eval_drift(model, 0.0, x, b)[0];
    const double vab = eval_drift(model, 0.0, x, both)[0];
    CHECK(vab == doctest::Approx((2.0 * va + 4.0 * vb) / 6.0).epsilon(1e-14));
  }
}

TEST_CASE("linear moment oracle closed forms") {
  const TimeGrid grid(0.0, 0.01, 100);
  SUBCASE("pure decay of the mean") {
    const auto curves = linear_moment_oracle({-1.0, 0.0, 0.0, 0.0, 0.0}, 1.0, 1.0, grid);
    CHECK(curves.mean.values.back() == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  }
  SUBCASE("Brownian variance grows linearly") {
    const auto curves = linear_moment_oracle({0.0, 0.0, 1.0, 0.0, 0.0}, 0.0, 0.0, grid);
    CHECK(curves.second.values.back() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("all parameters zero freeze the curves") {
    const auto curves = linear_moment_oracle({0.0, 0.0, 0.0, 0.0, 0.0}, 0.7, 1.3, grid);
    for (double v : curves.mean.values) CHECK(v == 0.7);
    for (double v : curves.second.values) CHECK(v == 1.3);
  }
  SUBCASE("matches the non-interacting Ornstein-Uhlenbeck closed form") {
    const double a = -0.8, c0 = 0.5, m0 = 1.2, v0 = 2.0;
    const auto curves = linear_moment_oracle({a, 0.0, c0, 0.0, 0.0}, m0, v0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid.time(k);
      const double mean_ref = m0 * std::exp(a * t);
      const double second_ref =
          v0 * std::exp(2.0 * a * t) + c0 * c0 * (1.0 - std::exp(2.0 * a * t)) / (-2.0 * a);
      CHECK(curves.mean.values[k] == doctest::Approx(mean_ref).epsilon(1e-8));
      CHECK(curves.second.values[k] == doctest::Approx(second_ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("profiles derived from the coefficient families") {
  SUBCASE("linear mean-field") {
    const auto model = ModelSpec::linear_meanfield({-1.0, 0.5, 0.0, 0.0, 0.0});
    const auto profile = lipschitz_profile_of(model);
    CHECK(profile.eta1(0.0) == -1.0);
    CHECK(profile.eta2(0.0) == 0.5);
    CHECK(profile.eta_hat1(0.0) == 0.0);
    CHECK(profile.eta_hat2(0.0) == 0.0);
  }
  SUBCASE("pure power drift certifies a dissipative drift") {
    const auto profile = lipschitz_profile_of(pure_power_drift({1.0}, {3.0}));
    CHECK(profile.eta1(0.0) == 0.0);
    CHECK(profile.eta2(0.0) == 0.0);
  }
  SUBCASE("growth profile of the linear family") {
    const auto model = ModelSpec::linear_meanfield({-1.0, 0.25, 0.5, 0.0, 0.0});
    const auto growth = growth_profile_of(model);
    growth.validate();
    const auto [f, g] = growth_coeffs(growth, 0.0);
    // drift: 2*(-1) + 2*0.25; the constant-diffusion square carries the
    // factor p-2 = 0, so it only feeds g = 2*c_p*c0^2 = 0.25
    CHECK(f == doctest::Approx(-1.5));
    CHECK(g == doctest::Approx(0.25));
  }
  SUBCASE("custom models must supply their own profile") {
    const auto custom = ModelSpec::custom(
        1, 1,
        [](double, std::span<const double>, const ParticleCloud&, const CloudStats&,
           std::span<double> out) { out[0] = 0.0; },
        [](double, std::span<const double>, const ParticleCloud&, const CloudStats&,
           std::span<double> out) { out[0] = 0.0; });
    CHECK_THROWS_AS(lipschitz_profile_of(custom), std::invalid_argument);
    CHECK_THROWS_AS(growth_profile_of(custom), std::invalid_argument);
  }
}

}  // TEST_SUITE
