#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "mvsde/bihari.hpp"
#include "mvsde/engine.hpp"
#include "mvsde/measures.hpp"
#include "mvsde/models.hpp"

namespace {

mvsde::ParticleCloud random_cloud(std::size_t dim, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<double> data(dim * n);
  for (double& x : data) x = normal(gen);
  return mvsde::ParticleCloud(dim, std::move(data));
}

void BM_Wasserstein1D(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_cloud(1, n, 1);
  const auto b = random_cloud(1, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mvsde::wasserstein_1d(a, b, 2.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Wasserstein1D)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_WassersteinExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_cloud(2, n, 3);
  const auto b = random_cloud(2, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(mvsde::wasserstein_exact(a, b, 2.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WassersteinExact)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_SimulateMeanField(benchmark::State& state) {
  const auto model = mvsde::ModelSpec::linear_meanfield({-1.0, 0.5, 0.3, 0.0, 0.0});
  const auto init = mvsde::InitialCondition::gaussian({1.0}, {0.5});
  mvsde::SimConfig cfg;
  cfg.grid = mvsde::TimeGrid(0.0, 1e-3, 200);
  cfg.n_particles = static_cast<std::size_t>(state.range(0));
  cfg.seed = 5;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mvsde::simulate(model, init, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}
BENCHMARK(BM_SimulateMeanField)->RangeMultiplier(4)->Range(256, 16384);

void BM_PsiClosedForm(benchmark::State& state) {
  const auto rho = mvsde::ModulusFunction::log_modulus(1.0);
  double v = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mvsde::psi(rho, v, 1.4));
    v = v < 3.0 ? v + 1e-3 : 0.3;
  }
}
BENCHMARK(BM_PsiClosedForm);

void BM_PsiNumeric(benchmark::State& state) {
  const auto rho = mvsde::ModulusFunction::custom(
      [](double v) { return v == 0.0 ? 0.0 : v * (std::abs(std::log(v)) + 1.0); }, true, true);
  double v = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mvsde::psi(rho, v, 1.4));
    v = v < 3.0 ? v + 1e-2 : 0.3;
  }
}
BENCHMARK(BM_PsiNumeric);

}  // namespace

BENCHMARK_MAIN();
