#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mvsde/measures.hpp"

using namespace mvsde;

namespace {

ParticleCloud cloud1d(std::vector<double> xs) { return ParticleCloud(1, std::move(xs)); }

/// Independent oracle: minimum over all N! assignments, N <= 7.
double wasserstein_bruteforce(const ParticleCloud& a, const ParticleCloud& b, double p) {
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < a.dim(); ++j) {
        const double d = a.point(i)[j] - b.point(perm[i])[j];
        sq += d * d;
      }
      total += std::pow(std::sqrt(sq), p);
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(n), 1.0 / p);
}

ParticleCloud random_cloud(std::mt19937_64& gen, std::size_t dim, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> data(dim * n);
  for (double& x : data) x = normal(gen);
  return ParticleCloud(dim, std::move(data));
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("essential bracket closed cases") {
  CHECK(essential_bracket(Sample{{-1.0, -2.0}}, 2.0) == 0.0);
  CHECK(essential_bracket(Sample{{-1.0}}, order_infinity) == -1.0);
  CHECK(essential_bracket(Sample{{3.0, -1.0}}, 1.0) == doctest::Approx(1.5));
  // single-element reductions: x^+ and x
  CHECK(essential_bracket(Sample{{-0.5}}, 3.0) == 0.0);
  CHECK(essential_bracket(Sample{{2.5}}, 3.0) == doctest::Approx(2.5));
  CHECK_THROWS_AS(essential_bracket(Sample{{}}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(essential_bracket(Sample{{1.0}}, 0.5), std::invalid_argument);
}

TEST_CASE("essential bracket approaches the sup as the order grows") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 5.0);
  for (int rep = 0; rep < 20; ++rep) {
    Sample sample;
    for (int i = 0; i < 12; ++i) sample.values.push_back(unif(gen));
    const double b8 = essential_bracket(sample, 8.0);
    const double b16 = essential_bracket(sample, 16.0);
    const double b32 = essential_bracket(sample, 32.0);
    const double sup = essential_bracket(sample, order_infinity);
    CHECK(b8 <= b16 + 1e-12);
    CHECK(b16 <= b32 + 1e-12);
    CHECK(b32 <= sup + 1e-12);
    CHECK(sup - b32 < sup - b8 + 1e-12);
  }
}

TEST_CASE("moment examples") {
  CHECK(moment(cloud1d({1.0, -1.0}), 2.0) == doctest::Approx(1.0));
  CHECK(moment(cloud1d({3.0}), 2.0) == doctest::Approx(9.0));
  CHECK(moment(cloud1d({1.0, 2.0}), 1.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(moment(cloud1d({1.0}), 0.5), std::invalid_argument);
}

TEST_CASE("cloud validation") {
  CHECK_THROWS_AS(ParticleCloud(0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ParticleCloud(2, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ParticleCloud(1, {}), std::invalid_argument);
  CHECK_THROWS_AS(ParticleCloud(1, {std::numeric_limits<double>::quiet_NaN()}),
                  std::invalid_argument);
}

TEST_CASE("wasserstein_1d examples") {
  CHECK(wasserstein_1d(cloud1d({0.0}), cloud1d({1.0}), 2.0) == doctest::Approx(1.0));
  const auto c = cloud1d({0.4, -1.2, 3.0});
  CHECK(wasserstein_1d(c, c, 1.0) == 0.0);
  CHECK(wasserstein_1d(c, c, 3.0) == 0.0);
  // sorted match (1+1)/2 beats the crossed pairing (3+1)/2
  CHECK(wasserstein_1d(cloud1d({0.0, 2.0}), cloud1d({1.0, 3.0}), 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wasserstein_1d(cloud1d({0.0}), cloud1d({1.0, 2.0}), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(wasserstein_1d(ParticleCloud(2, {0.0, 0.0}), ParticleCloud(2, {1.0, 1.0}), 1.0),
                  std::invalid_argument);
}

TEST_CASE("wasserstein_exact examples") {
  const ParticleCloud a(2, {0.0, 0.0});
  const ParticleCloud b(2, {3.0, 4.0});
  CHECK(wasserstein_exact(a, b, 2.0) == doctest::Approx(5.0));
  CHECK(wasserstein_exact(a, a, 2.0) == 0.0);
  const ParticleCloud c(2, {0.0, 0.0, 1.0, 0.0});
  const ParticleCloud d(2, {0.0, 1.0, 1.0, 1.0});
  CHECK(wasserstein_exact(c, d, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wasserstein_exact(c, d, 2.0, 1), std::invalid_argument);  // over the cap
}

TEST_CASE("exact assignment agrees with the N! oracle") {
  std::mt19937_64 gen(42);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t dim = 1 + rep % 3;
    const std::size_t n = 2 + gen() % 6;
    const double p = 1.0 + static_cast<double>(gen() % 3);
    const auto a = random_cloud(gen, dim, n);
    const auto b = random_cloud(gen, dim, n);
    const double exact = wasserstein_exact(a, b, p);
    const double brute = wasserstein_bruteforce(a, b, p);
    CHECK(exact == doctest::Approx(brute).epsilon(1e-12));
    if (dim == 1) CHECK(wasserstein_1d(a, b, p) == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("assignment solver agrees with sorted matching at larger sizes") {
  // in one dimension the sorted matching is provably optimal, which makes it
  // an independent oracle for the augmenting-path solver well beyond the N!
  // enumeration range
  std::mt19937_64 gen(77);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 48 + gen() % 17;
    std::vector<double> xs(n), ys(n);
    for (double& v : xs) v = normal(gen);
    for (double& v : ys) v = normal(gen);
    const ParticleCloud a(1, xs);
    const ParticleCloud b(1, ys);
    for (double p : {1.0, 2.0}) {
      CHECK(wasserstein_exact(a, b, p) ==
            doctest::Approx(wasserstein_1d(a, b, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("metric properties on random clouds") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t dim = 1 + rep % 2;
    const std::size_t n = 2 + gen() % 5;
    const double p = 1.0 + static_cast<double>(gen() % 3);
    const auto a = random_cloud(gen, dim, n);
    const auto b = random_cloud(gen, dim, n);
    const auto c = random_cloud(gen, dim, n);
    const double dab = wasserstein(a, b, p);
    const double dba = wasserstein(b, a, p);
    const double dac = wasserstein(a, c, p);
    const double dcb = wasserstein(c, b, p);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    CHECK(wasserstein(a, a, p) == 0.0);
    CHECK(dab <= dac + dcb + 1e-9);
  }
}

TEST_CASE("monotonicity in the order p") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 25; ++rep) {
    const auto a = random_cloud(gen, 1, 4 + gen() % 4);
    const auto b = random_cloud(gen, 1, a.size());
    double prev = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
      const double d = wasserstein(a, b, p);
      CHECK(d >= prev - 1e-10);
      prev = d;
    }
  }
}

TEST_CASE("distance to the origin equals the moment root") {
  // sorted nonnegative input keeps the reduction order identical on both
  // routes, hence the exact comparison
  const auto sorted = cloud1d({0.5, 1.0, 2.0, 3.5});
  const ParticleCloud origin(1, std::vector<double>(4, 0.0));
  for (double p : {1.0, 2.0, 3.0}) {
    CHECK(wasserstein_1d(sorted, origin, p) == std::pow(moment(sorted, p), 1.0 / p));
  }
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + gen() % 5;
    const auto a = random_cloud(gen, 1, n);
    const ParticleCloud zero(1, std::vector<double>(n, 0.0));
    for (double p : {1.0, 2.0, 3.0}) {
      CHECK(wasserstein_1d(a, zero, p) ==
            doctest::Approx(std::pow(moment(a, p), 1.0 / p)).epsilon(1e-13));
    }
  }
}

TEST_CASE("permutation invariance of cloud operations") {
  std::mt19937_64 gen(9);
  const auto a = random_cloud(gen, 2, 6);
  std::vector<double> shuffled(a.data().begin(), a.data().end());
  // swap points 0 and 4
  for (std::size_t j = 0; j < 2; ++j) std::swap(shuffled[j], shuffled[4 * 2 + j]);
  const ParticleCloud b(2, std::move(shuffled));
  CHECK(wasserstein_exact(a, b, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(moment(a, 2.0) == doctest::Approx(moment(b, 2.0)).epsilon(1e-14));
}

}  // TEST_SUITE
