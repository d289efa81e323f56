// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Usage: acceptance [path-to-mvsde-cli]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvsde/bihari.hpp"
#include "mvsde/cli.hpp"
#include "mvsde/coefficients.hpp"
#include "mvsde/engine.hpp"
#include "mvsde/measures.hpp"
#include "mvsde/models.hpp"
#include "mvsde/picard.hpp"
#include "mvsde/verify.hpp"

using namespace mvsde;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string cli_path;

// ---------------------------------------------------------------------------
// 1. Bihari closed forms through the numeric route
// ---------------------------------------------------------------------------

double log_modulus_psi_reference(double alpha_hat, double v, double w) {
  if (v >= 1.0) return std::exp((1.0 + std::log(v)) * std::exp(alpha_hat * w) - 1.0);
  if (v >= std::exp(1.0 - std::exp(alpha_hat * w)))
    return std::exp(std::exp(alpha_hat * w) / (1.0 - std::log(v)) - 1.0);
  return std::exp(1.0 - (1.0 - std::log(v)) * std::exp(-alpha_hat * w));
}

Outcome criterion_bihari_closed_forms() {
  double max_rel = 0.0;
  const auto record = [&max_rel](double got, double expected) {
    max_rel = std::max(max_rel, std::abs(got - expected) / std::abs(expected));
  };

  const auto linear_mirror = ModulusFunction::custom([](double v) { return v; }, true, true);
  for (int i = 0; i < 50; ++i) {
    const double v = 0.1 + 3.9 * i / 49.0;
    const double w = 0.02 + 2.0 * i / 49.0;
    record(*psi(linear_mirror, v, w), v * std::exp(w));
  }

  const double alpha_hat = 1.0;
  const auto log_mirror = ModulusFunction::custom(
      [alpha_hat](double v) {
        return v == 0.0 ? 0.0 : alpha_hat * v * (std::abs(std::log(v)) + 1.0);
      },
      true, true);
  const double w = 1.2;
  const double boundary = std::exp(1.0 - std::exp(alpha_hat * w));
  const auto run_branch = [&](double lo, double hi) {
    for (int i = 0; i < 50; ++i) {
      const double v = lo + (hi - lo) * i / 49.0;
      record(*psi(log_mirror, v, w), log_modulus_psi_reference(alpha_hat, v, w));
    }
  };
  run_branch(1.0, 4.0);                       // v >= 1
  run_branch(boundary * 1.05, 0.999);         // middle branch
  run_branch(boundary * 1e-3, boundary * 0.9);  // small-v branch

  char detail[96];
  std::snprintf(detail, sizeof detail, "max rel err %.2e (limit 1e-8)", max_rel);
  return {max_rel <= 1e-8, detail};
}

// ---------------------------------------------------------------------------
// 2. Exact Wasserstein against the N! oracle
// ---------------------------------------------------------------------------

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

Outcome criterion_wasserstein_oracle() {
  std::mt19937_64 gen(20260811);
  std::normal_distribution<double> normal(0.0, 2.0);
  double max_err = 0.0;
  for (int pair = 0; pair < 200; ++pair) {
    const std::size_t dim = 1 + pair % 3;
    const std::size_t n = 2 + gen() % 6;
    const double p = 1.0 + static_cast<double>(pair % 3);
    std::vector<double> da(dim * n), db(dim * n);
    for (double& x : da) x = normal(gen);
    for (double& x : db) x = normal(gen);
    const ParticleCloud a(dim, std::move(da));
    const ParticleCloud b(dim, std::move(db));
    const double brute = wasserstein_bruteforce(a, b, p);
    max_err = std::max(max_err, std::abs(wasserstein_exact(a, b, p) - brute));
    if (dim == 1) max_err = std::max(max_err, std::abs(wasserstein_1d(a, b, p) - brute));
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "200 pairs, max abs err %.2e (limit 1e-12)", max_err);
  return {max_err <= 1e-12, detail};
}

// ---------------------------------------------------------------------------
// 3. Coefficient consistency
// ---------------------------------------------------------------------------

Outcome criterion_coefficient_consistency() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  double max_rel = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    LipschitzProfile lp;
    lp.eta1 = TimeFunction::constant(unif(gen));
    lp.eta2 = TimeFunction::constant(std::abs(unif(gen)));
    lp.eta_hat1 = TimeFunction::constant(std::abs(unif(gen)));
    lp.eta_hat2 = TimeFunction::constant(std::abs(unif(gen)));
    lp.p = 2.0 + std::abs(unif(gen)) * 3.0;
    lp.c_pp = std::abs(unif(gen)) + 0.1;
    HoelderProfile hp;
    hp.alpha = {1.0, 0.0};
    hp.beta = {0.0, 1.0};
    hp.eta = {lp.eta1, lp.eta2};
    hp.eta_hat = {lp.eta_hat1, lp.eta_hat2};
    hp.p = lp.p;
    hp.c_pp = lp.c_pp;
    const double t = unif(gen);
    const auto [gamma, delta] = gamma_delta_hoelder(hp, t);
    if (delta != 0.0) return {false, "delta failed to vanish in the Lipschitz reduction"};
    const double reference = gamma_lipschitz(lp, t);
    const double scale = std::max(1.0, std::abs(reference));
    max_rel = std::max(max_rel, std::abs(gamma - reference) / scale);
  }

  // delta vanishes exactly when the remark's condition holds
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    HoelderProfile hp;
    const std::size_t l = 1 + gen() % 3;
    for (std::size_t k = 0; k < l; ++k) {
      const bool saturated = gen() % 2 == 0;
      hp.alpha.push_back(saturated ? 1.0 : unit(gen) * 0.4);
      hp.beta.push_back(saturated ? 0.0 : unit(gen) * 0.4);
      hp.eta.push_back(TimeFunction::constant(unif(gen)));
      hp.eta_hat.push_back(TimeFunction::constant(gen() % 3 == 0 ? 0.0 : std::abs(unif(gen))));
      hp.zeta.push_back(TimeFunction::constant(
          saturated ? 1.0 : (gen() % 3 == 0 ? 0.0 : std::abs(unif(gen)))));
      hp.zeta_hat.push_back(TimeFunction::constant(
          saturated ? 1.0 : (gen() % 3 == 0 ? 0.0 : std::abs(unif(gen)))));
    }
    hp.p = 2.0;
    const auto [gamma, delta] = gamma_delta_hoelder(hp, 0.0);
    (void)gamma;
    bool expect_zero = true;
    for (std::size_t k = 0; k < l; ++k) {
      if (hp.alpha[k] + hp.beta[k] >= 1.0) continue;
      const bool drift_zero = hp.zeta[k](0.0) == 0.0 || hp.eta[k](0.0) <= 0.0;
      const bool diffusion_zero = hp.zeta_hat[k](0.0) == 0.0 || hp.eta_hat[k](0.0) == 0.0;
      expect_zero = expect_zero && drift_zero && diffusion_zero;
    }
    if ((delta == 0.0) != expect_zero)
      return {false, "delta vanishing disagrees with the stated condition"};
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "100 reductions, max rel dev %.2e (limit 1e-12)", max_rel);
  return {max_rel <= 1e-12, detail};
}

// ---------------------------------------------------------------------------
// 4. Moment stability rate of the linear mean-field model
// ---------------------------------------------------------------------------

Outcome criterion_moment_rate() {
  const double a = 1.0, b_mf = 0.25;
  const auto model = ModelSpec::linear_meanfield({-a, b_mf, 0.0, 0.0, 0.0});
  SimConfig cfg;
  cfg.grid = TimeGrid(0.0, 1e-3, 3000);
  cfg.n_particles = 10000;
  cfg.seed = 7;
  const auto [xa, xb] = simulate_coupled(model, model, InitialCondition::constant({1.0}),
                                         InitialCondition::constant({2.0}), cfg);
  const auto report = check_moment_comparison(xa, xb, lipschitz_profile_of(model), 2.0);
  double max_rel = 0.0;
  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    const double expected = std::exp(2.0 * (-a + b_mf) * cfg.grid.time(k));
    const double allowance = 3.0 * report.mc_sigma[k] / expected;
    max_rel = std::max(max_rel,
                       std::abs(report.empirical[k] / expected - 1.0) - allowance);
  }
  char detail[128];
  std::snprintf(detail, sizeof detail, "max rel dev %.3e (limit 1e-2), report %s", max_rel,
                report.verdict == Verdict::pass ? "pass" : "fail");
  return {max_rel <= 1e-2 && report.verdict == Verdict::pass, detail};
}

// ---------------------------------------------------------------------------
// 5. Picard convergence with the a-priori error bound
// ---------------------------------------------------------------------------

Outcome criterion_picard() {
  const LinearMeanField params{-1.0, 0.25, 0.5, 0.0, 0.0};
  const auto model = ModelSpec::linear_meanfield(params);
  SimConfig cfg;
  cfg.grid = TimeGrid(0.0, 1e-3, 1000);
  cfg.n_particles = 10000;
  cfg.seed = 11;
  PicardOptions options;
  options.tolerance = 1e-3;
  options.max_iterations = 9;  // allows up to 8 contraction updates
  const auto profile = lipschitz_profile_of(model);
  const MeasureFlow dirac_flow(cfg.grid.size(),
                               ParticleCloud(1, std::vector<double>(cfg.n_particles, 0.0)));
  const auto state = picard_solve(model, InitialCondition::constant({1.0}), cfg, options,
                                  &dirac_flow, &profile);
  if (state.blew_up) return {false, "blow-up inside an iterate"};
  if (!state.converged || state.iterations > 8) {
    return {false, "did not converge within 8 iterations"};
  }
  for (std::size_t n = 0; n < state.distances.size(); ++n) {
    if (state.distances[n] > state.bound_values[n] + 5.0 * state.noise_floor) {
      char detail[128];
      std::snprintf(detail, sizeof detail,
                    "distance[%zu] = %.3e above bound %.3e + 5*%.1e", n, state.distances[n],
                    state.bound_values[n], state.noise_floor);
      return {false, detail};
    }
  }
  const auto oracle = linear_moment_oracle(params, 1.0, 1.0, cfg.grid);
  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    const auto& cloud = state.final_flow[k];
    const double n = static_cast<double>(cloud.size());
    const double mean = cloud_mean(cloud)[0];
    const double second = moment(cloud, 2.0);
    double var_x = std::max(second - mean * mean, 0.0);
    double fourth = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double sq = cloud.point(i)[0] * cloud.point(i)[0];
      fourth += (sq - second) * (sq - second);
    }
    fourth /= n;
    const double se_mean = std::sqrt(var_x / n);
    const double se_second = std::sqrt(fourth / n);
    if (std::abs(mean - oracle.mean.values[k]) > 3.0 * se_mean + 1e-3 ||
        std::abs(second - oracle.second.values[k]) > 3.0 * se_second + 2e-3) {
      char detail[128];
      std::snprintf(detail, sizeof detail, "moment curves left the 3-sigma oracle band at t=%.3f",
                    cfg.grid.time(k));
      return {false, detail};
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "converged after %zu iterations, last distance %.2e, noise floor %.1e",
                state.iterations, state.distances.back(), state.noise_floor);
  return {true, detail};
}

// ---------------------------------------------------------------------------
// 6. Pathwise Lyapunov certification of the geometric model
// ---------------------------------------------------------------------------

Outcome criterion_pathwise() {
  const double a = 1.0, sigma = 0.5;
  const auto model = ModelSpec::linear_meanfield({-a, 0.0, 0.0, sigma, 0.0});
  SimConfig cfg;
  cfg.grid = TimeGrid(0.0, 5e-3, 10000);  // T = 50
  cfg.n_particles = 1000;
  cfg.seed = 13;
  const auto [xa, xb] = simulate_coupled(model, model, InitialCondition::constant({1.0}),
                                         InitialCondition::constant({2.0}), cfg);
  PowerEnvelope envelope;
  envelope.alpha = {1.0};
  envelope.lambda_hat = {4.0 * (-a + 1.5 * sigma * sigma)};  // gamma_4 = -2.5
  envelope.shifts = {0.0};
  envelope.t1 = 0.0;
  const auto cert = certify_pathwise(xa, xb, lipschitz_profile_of(model), 2.0, 2.0, envelope,
                                     {25.0, 50.0});
  const double truth = -a - 0.5 * sigma * sigma;  // -1.125
  const bool certified = cert.status == PathwiseCertificate::Status::pass;
  const bool near_truth = std::abs(cert.empirical_mean - truth) <= 0.1 * std::abs(truth);
  const bool below_certificate = cert.empirical_mean <= cert.certified_exponent;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "certified %.4g, empirical mean %.4g / max %.4g, truth %.4g",
                cert.certified_exponent, cert.empirical_mean, cert.empirical_max, truth);
  return {certified && near_truth && below_certificate, detail};
}

// ---------------------------------------------------------------------------
// 7. Growth bound for the cubic-dissipative power drift
// ---------------------------------------------------------------------------

Outcome criterion_growth() {
  PowerDriftParams params;
  params.b_hat = {1.0};
  params.alpha_hat = {3.0};
  const auto model = ModelSpec::power_drift(1, std::move(params), 1.0);
  SimConfig cfg;
  cfg.grid = TimeGrid(0.0, 1e-3, 5000);  // [0, 5]
  cfg.n_particles = 10000;
  cfg.seed = 19;
  const auto ens = simulate(model, InitialCondition::constant({2.0}), cfg);
  const auto report = check_growth(ens, growth_profile_of(model), 2.0, 0.02);
  char detail[128];
  std::snprintf(detail, sizeof detail, "final moment %.3f vs bound %.3f, verdict %s",
                report.empirical.back(), report.bound.back(),
                report.verdict == Verdict::pass ? "pass" : "fail");
  return {report.verdict == Verdict::pass, detail};
}

// ---------------------------------------------------------------------------
// 8. Thread-count determinism through the CLI
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "mvsde_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config_path = root / "config.json";
  {
    std::ofstream os(config_path);
    os << R"({
  "task": "verify-moment",
  "model": {"kind": "linear_meanfield", "a": -1.0, "b_mf": 0.25},
  "init": {"kind": "constant", "value": [1.0]},
  "init_b": {"kind": "constant", "value": [2.0]},
  "sim": {"dt": 0.001, "steps": 3000, "particles": 10000, "seed": 7}
})";
  }
  if (cli_path.empty()) return {false, "CLI binary path not supplied"};
  const auto dir_a = root / "threads1";
  const auto dir_b = root / "threads8";
  const std::string cmd_a = cli_path + " --config " + config_path.string() + " --output-dir " +
                            dir_a.string() + " --threads 1 > /dev/null";
  const std::string cmd_b = cli_path + " --config " + config_path.string() + " --output-dir " +
                            dir_b.string() + " --threads 8 > /dev/null";
  const int rc_a = std::system(cmd_a.c_str());
  const int rc_b = std::system(cmd_b.c_str());
  if (rc_a != 0 || rc_b != 0) {
    char detail[96];
    std::snprintf(detail, sizeof detail, "CLI exit codes %d / %d (expected 0)", rc_a, rc_b);
    return {false, detail};
  }
  const bool reports_equal = slurp(dir_a / "report.json") == slurp(dir_b / "report.json");
  const bool curves_equal = slurp(dir_a / "curves.csv") == slurp(dir_b / "curves.csv");
  const bool nonempty = !slurp(dir_a / "report.json").empty();
  char detail[96];
  std::snprintf(detail, sizeof detail, "report.json %s, curves.csv %s",
                reports_equal ? "byte-identical" : "DIFFER",
                curves_equal ? "byte-identical" : "DIFFER");
  return {reports_equal && curves_equal && nonempty, detail};
}

// ---------------------------------------------------------------------------
// 9. Osgood divergence checker
// ---------------------------------------------------------------------------

Outcome criterion_osgood() {
  const auto ok = [](bool b) { return b; };
  bool pass = true;
  pass = ok(osgood_divergence(ModulusFunction::linear(), OsgoodEndpoint::zero) ==
            OsgoodVerdict::divergent) &&
         pass;
  pass = ok(osgood_divergence(ModulusFunction::log_modulus(1.0), OsgoodEndpoint::zero) ==
            OsgoodVerdict::divergent) &&
         pass;
  pass = ok(osgood_divergence(ModulusFunction::power(0.5), OsgoodEndpoint::zero) ==
            OsgoodVerdict::convergent) &&
         pass;
  const auto linear_mirror = ModulusFunction::custom([](double v) { return v; }, true, true);
  const auto log_mirror = ModulusFunction::custom(
      [](double v) { return v == 0.0 ? 0.0 : v * (std::abs(std::log(v)) + 1.0); }, true, true);
  const auto sqrt_mirror =
      ModulusFunction::custom([](double v) { return std::sqrt(v); }, true, true);
  // mirrors must agree or stay inconclusive, never give the wrong answer
  pass = ok(osgood_divergence(linear_mirror, OsgoodEndpoint::zero) !=
            OsgoodVerdict::convergent) &&
         pass;
  pass = ok(osgood_divergence(log_mirror, OsgoodEndpoint::zero) != OsgoodVerdict::convergent) &&
         pass;
  pass = ok(osgood_divergence(sqrt_mirror, OsgoodEndpoint::zero) == OsgoodVerdict::convergent) &&
         pass;
  return {pass, pass ? "closed forms and numeric mirrors consistent" : "verdict mismatch"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) cli_path = argv[1];
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"bihari closed forms", criterion_bihari_closed_forms, 1.0},
      {"wasserstein assignment oracle", criterion_wasserstein_oracle, 10.0},
      {"coefficient consistency", criterion_coefficient_consistency, 1.0},
      {"moment stability rate", criterion_moment_rate, 30.0},
      {"picard convergence and error bound", criterion_picard, 120.0},
      {"pathwise lyapunov certification", criterion_pathwise, 60.0},
      {"power-drift growth bound", criterion_growth, 30.0},
      {"thread-count determinism", criterion_determinism, 0.0},  // no stated budget
      {"osgood divergence checker", criterion_osgood, 1.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome{false, "exception"};
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string detail = outcome.detail;
    if (criteria[i].budget_seconds > 0.0 && seconds >= criteria[i].budget_seconds) {
      outcome.pass = false;
      detail += "; OVER the runtime budget";
    }
    std::printf("[%s] %zu/9 %s (%s; %.1f s", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, detail.c_str(), seconds);
    if (criteria[i].budget_seconds > 0.0)
      std::printf(" of %.0f s budget", criteria[i].budget_seconds);
    std::printf(")\n");
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
