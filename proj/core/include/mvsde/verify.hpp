#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mvsde/coefficients.hpp"
#include "mvsde/engine.hpp"
#include "mvsde/grid.hpp"

namespace mvsde {

enum class Verdict { pass, fail };

/// A certified bound curve confronted with an empirical curve. The verdict is
/// pass iff empirical <= bound * (1 + tolerance) + 3 * mc_sigma at every grid
/// point; t_star records the first crossing otherwise.
struct BoundReport {
  std::string name;
  TimeGrid grid;
  std::vector<double> bound;
  std::vector<double> empirical;
  std::vector<double> mc_sigma;
  double tolerance = 0.02;
  Verdict verdict = Verdict::pass;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> extras;  ///< named scalars (slopes, exponents)

  void finalize();  ///< recompute verdict and t_star from the curves
};

/// E|Y_t|^p against e^{int gamma} E|Y_t0|^p + int e^{int gamma} delta for the
/// synchronously coupled difference Y.
BoundReport check_moment_comparison(const PathEnsemble& a, const PathEnsemble& b,
                                    const LipschitzProfile& profile, double p,
                                    double tolerance = 0.02);
BoundReport check_moment_comparison(const PathEnsemble& a, const PathEnsemble& b,
                                    const HoelderProfile& profile, double p,
                                    double tolerance = 0.02);

/// E|Y_t|^p against c e^{lambda (t-t0)^alpha} E|Y_t0|^p; also reports the
/// regression slope of log E|Y_t|^p on (t-t0)^alpha in extras["log_slope"].
BoundReport check_exponential_stability(const PathEnsemble& a, const PathEnsemble& b,
                                        double lambda, double alpha, double c, double p,
                                        double tolerance = 0.02);

/// E|X_t|^p against the f/g growth bound.
BoundReport check_growth(const PathEnsemble& ensemble, const GrowthProfile& growth, double p,
                         double tolerance = 0.02);

/// Pathwise certification: refuse unless gamma_{pq} stays under the envelope,
/// then compare the empirical window exponent with lambda_hat_l / (pq).
struct PathwiseCertificate {
  enum class Status { pass, fail, refused };
  Status status = Status::refused;
  double certified_exponent = 0.0;
  double order = 0.0;
  double empirical_max = std::numeric_limits<double>::quiet_NaN();
  double empirical_mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_excluded = 0;
  double envelope_violation_time = std::numeric_limits<double>::quiet_NaN();
};

PathwiseCertificate certify_pathwise(const PathEnsemble& a, const PathEnsemble& b,
                                     const LipschitzProfile& profile, double p, double q,
                                     const PowerEnvelope& envelope,
                                     const PathwiseWindow& window);

/// JSON report, UTF-8, stable key order; see README for the schema.
void write_report_json(const BoundReport& report, std::ostream& os);
/// CSV with columns t,bound,empirical,mc_sigma.
void write_report_csv(const BoundReport& report, std::ostream& os);

}  // namespace mvsde
