#include "mvsde/verify.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace mvsde {

namespace {

struct DifferenceMoments {
  std::vector<double> moment;    ///< E|Y_t|^p
  std::vector<double> mc_sigma;  ///< sample std of |Y|^p over sqrt(N)
};

DifferenceMoments difference_moments(const PathEnsemble& a, const PathEnsemble& b, double p) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("verify: ensembles on different grids");
  if (a.n_particles() != b.n_particles() || a.dim() != b.dim())
    throw std::invalid_argument("verify: ensemble shape mismatch");
  const std::size_t n = a.n_particles();
  const std::size_t m = a.dim();
  DifferenceMoments out;
  out.moment.resize(a.grid.size());
  out.mc_sigma.resize(a.grid.size());
  std::vector<double> powers(n);
  for (std::size_t k = 0; k < a.grid.size(); ++k) {
    const auto xa = a.clouds[k].data();
    const auto xb = b.clouds[k].data();
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        const double d = xa[i * m + r] - xb[i * m + r];
        sq += d * d;
      }
      powers[i] = p == 2.0 ? sq : std::pow(std::sqrt(sq), p);
    }
    const double mean = pairwise_sum(powers) / static_cast<double>(n);
    out.moment[k] = mean;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (powers[i] - mean) * (powers[i] - mean);
    var /= static_cast<double>(n);
    out.mc_sigma[k] = std::sqrt(std::max(var, 0.0)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

std::vector<double> ensemble_mc_sigma(const PathEnsemble& ensemble, double p) {
  const std::size_t n = ensemble.n_particles();
  const std::size_t m = ensemble.dim();
  std::vector<double> out(ensemble.grid.size());
  std::vector<double> powers(n);
  for (std::size_t k = 0; k < ensemble.grid.size(); ++k) {
    const auto x = ensemble.clouds[k].data();
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t r = 0; r < m; ++r) sq += x[i * m + r] * x[i * m + r];
      powers[i] = p == 2.0 ? sq : std::pow(std::sqrt(sq), p);
    }
    const double mean = pairwise_sum(powers) / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (powers[i] - mean) * (powers[i] - mean);
    var /= static_cast<double>(n);
    out[k] = std::sqrt(std::max(var, 0.0)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

/// bound_{k+1} = e^{dG} bound_k + dt/2 (e^{dG} delta_k + delta_{k+1}).
std::vector<double> propagate_bound(const TimeGrid& grid, const std::vector<double>& gamma,
                                    const std::vector<double>& delta, double initial) {
  std::vector<double> bound(grid.size());
  bound[0] = initial;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double dg = 0.5 * grid.dt * (gamma[k - 1] + gamma[k]);
    const double growth = std::exp(dg);
    bound[k] = growth * bound[k - 1] + 0.5 * grid.dt * (growth * delta[k - 1] + delta[k]);
  }
  return bound;
}

BoundReport make_moment_report(const char* name, const PathEnsemble& a, const PathEnsemble& b,
                               const std::vector<double>& gamma, const std::vector<double>& delta,
                               double p, double tolerance) {
  DifferenceMoments diff = difference_moments(a, b, p);
  BoundReport report;
  report.name = name;
  report.grid = a.grid;
  report.bound = propagate_bound(a.grid, gamma, delta, diff.moment.front());
  report.empirical = std::move(diff.moment);
  report.mc_sigma = std::move(diff.mc_sigma);
  report.tolerance = tolerance;
  report.finalize();
  return report;
}

}  // namespace

void BoundReport::finalize() {
  verdict = Verdict::pass;
  t_star = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (empirical[k] > bound[k] * (1.0 + tolerance) + 3.0 * mc_sigma[k]) {
      verdict = Verdict::fail;
      t_star = grid.time(k);
      return;
    }
  }
}

BoundReport check_moment_comparison(const PathEnsemble& a, const PathEnsemble& b,
                                    const LipschitzProfile& profile, double p, double tolerance) {
  profile.validate();
  std::vector<double> gamma(a.grid.size()), delta(a.grid.size(), 0.0);
  LipschitzProfile at_order = profile;
  at_order.p = p;
  for (std::size_t k = 0; k < gamma.size(); ++k)
    gamma[k] = gamma_lipschitz(at_order, a.grid.time(k));
  return make_moment_report("moment_comparison", a, b, gamma, delta, p, tolerance);
}

BoundReport check_moment_comparison(const PathEnsemble& a, const PathEnsemble& b,
                                    const HoelderProfile& profile, double p, double tolerance) {
  HoelderProfile at_order = profile;
  at_order.p = p;
  at_order.validate();
  std::vector<double> gamma(a.grid.size()), delta(a.grid.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const StabilityPair pair = gamma_delta_hoelder(at_order, a.grid.time(k));
    gamma[k] = pair.gamma;
    delta[k] = pair.delta;
  }
  return make_moment_report("moment_comparison", a, b, gamma, delta, p, tolerance);
}

BoundReport check_exponential_stability(const PathEnsemble& a, const PathEnsemble& b,
                                        double lambda, double alpha, double c, double p,
                                        double tolerance) {
  if (!(lambda < 0.0))
    throw std::invalid_argument("check_exponential_stability: lambda must be negative");
  if (!(alpha > 0.0) || !(c > 0.0))
    throw std::invalid_argument("check_exponential_stability: alpha and c must be positive");
  DifferenceMoments diff = difference_moments(a, b, p);
  BoundReport report;
  report.name = "exponential_stability";
  report.grid = a.grid;
  report.tolerance = tolerance;
  const double initial = diff.moment.front();
  report.bound.resize(a.grid.size());
  for (std::size_t k = 0; k < a.grid.size(); ++k) {
    const double dt0 = a.grid.time(k) - a.grid.t0;
    report.bound[k] = c * std::exp(lambda * std::pow(dt0, alpha)) * initial;
  }
  report.empirical = std::move(diff.moment);
  report.mc_sigma = std::move(diff.mc_sigma);

  // Regression slope of log empirical on (t - t0)^alpha over positive points.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < a.grid.size(); ++k) {
    if (!(report.empirical[k] > 0.0)) continue;
    const double x = std::pow(a.grid.time(k) - a.grid.t0, alpha);
    const double y = std::log(report.empirical[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = sxx - sx * sx / static_cast<double>(count);
    if (denom > 0.0)
      report.extras["log_slope"] = (sxy - sx * sy / static_cast<double>(count)) / denom;
  }
  report.finalize();
  return report;
}

BoundReport check_growth(const PathEnsemble& ensemble, const GrowthProfile& growth, double p,
                         double tolerance) {
  GrowthProfile at_order = growth;
  at_order.p = p;
  at_order.validate();
  std::vector<double> f(ensemble.grid.size()), g(ensemble.grid.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const GrowthPair pair = growth_coeffs(at_order, ensemble.grid.time(k));
    f[k] = pair.f;
    g[k] = pair.g;
  }
  const Curve empirical = moment_curve(ensemble, p);
  BoundReport report;
  report.name = "growth_bound";
  report.grid = ensemble.grid;
  report.bound = propagate_bound(ensemble.grid, f, g, empirical.values.front());
  report.empirical = empirical.values;
  report.mc_sigma = ensemble_mc_sigma(ensemble, p);
  report.tolerance = tolerance;
  report.finalize();
  return report;
}

PathwiseCertificate certify_pathwise(const PathEnsemble& a, const PathEnsemble& b,
                                     const LipschitzProfile& profile, double p, double q,
                                     const PowerEnvelope& envelope,
                                     const PathwiseWindow& window) {
  profile.validate();
  envelope.validate();
  LipschitzProfile base = profile;
  base.p = p;
  std::vector<double> gamma(a.grid.size());
  for (std::size_t k = 0; k < gamma.size(); ++k)
    gamma[k] = gamma_pq(base, q, a.grid.time(k));
  const EnvelopeCheck check = check_envelope(Curve(a.grid, std::move(gamma)), envelope);

  PathwiseCertificate cert;
  const LyapunovCertificate lyapunov = lyapunov_from_envelope(envelope, p * q);
  cert.certified_exponent = lyapunov.exponent;
  cert.order = lyapunov.order;
  if (!check.holds) {
    cert.status = PathwiseCertificate::Status::refused;
    cert.envelope_violation_time = check.t_star;
    return cert;
  }
  const PathwiseExponentEstimate est =
      pathwise_exponent(difference_paths(a, b), cert.order, window);
  cert.empirical_max = est.max_estimate;
  cert.empirical_mean = est.mean_estimate;
  cert.n_excluded = est.n_excluded;
  const double slack = cert.certified_exponent + 0.1 * std::abs(cert.certified_exponent);
  cert.status = est.max_estimate <= slack ? PathwiseCertificate::Status::pass
                                          : PathwiseCertificate::Status::fail;
  return cert;
}

void write_report_json(const BoundReport& report, std::ostream& os) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["verdict"] = report.verdict == Verdict::pass ? "pass" : "fail";
  if (std::isnan(report.t_star))
    j["t_star"] = nullptr;
  else
    j["t_star"] = report.t_star;
  j["tolerance"] = report.tolerance;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.extras) extras[key] = value;
  j["extras"] = extras;
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < report.grid.size(); ++k) t.push_back(report.grid.time(k));
  j["t"] = t;
  j["bound"] = report.bound;
  j["empirical"] = report.empirical;
  j["mc_sigma"] = report.mc_sigma;
  os << j.dump(2) << "\n";
}

void write_report_csv(const BoundReport& report, std::ostream& os) {
  os << "t,bound,empirical,mc_sigma\n";
  char buf[128];
  for (std::size_t k = 0; k < report.grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", report.grid.time(k),
                  report.bound[k], report.empirical[k], report.mc_sigma[k]);
    os << buf;
  }
}

}  // namespace mvsde
