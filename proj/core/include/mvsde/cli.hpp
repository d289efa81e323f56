#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvsde/bihari.hpp"
#include "mvsde/coefficients.hpp"
#include "mvsde/engine.hpp"

namespace mvsde {

/// Configuration rejected: message carries the offending key path or byte
/// position and the violated rule.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Task { simulate, picard, certify, verify_moment, verify_pathwise, bihari };

struct ModelConfig {
  std::string kind;  ///< "linear_meanfield" | "power_drift"
  LinearMeanField linear;
  std::vector<double> b_hat;
  std::vector<double> alpha_hat;
  double sigma = 0.0;

  bool operator==(const ModelConfig&) const = default;
};

struct InitConfig {
  std::string kind;  ///< "constant" | "gaussian" | "two_point"
  std::vector<double> value;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> a;
  std::vector<double> b;
  double prob_a = 0.5;

  bool operator==(const InitConfig&) const = default;
};

struct ProfileConfig {
  TimeFunction eta1, eta2, eta_hat1, eta_hat2;
  double c_pp = 1.0;

  bool operator==(const ProfileConfig&) const = default;
};

struct EnvelopeConfig {
  std::vector<double> alpha;
  std::vector<double> lambda_hat;
  std::vector<double> shifts;
  double t1 = 0.0;

  bool operator==(const EnvelopeConfig&) const = default;
};

struct BihariTaskConfig {
  double initial = 0.0;
  TimeFunction additive;
  TimeFunction gain;
  std::string rho0_kind = "linear";  ///< "linear" | "power" | "log_modulus"
  double rho0_param = 1.0;

  bool operator==(const BihariTaskConfig&) const = default;
};

struct OutputConfig {
  std::string report = "report.json";
  std::string curves = "curves.csv";
  std::string ensemble;  ///< empty = skip ensemble CSV

  bool operator==(const OutputConfig&) const = default;
};

/// A fully validated experiment description (schema version 1).
struct ExperimentConfig {
  int version = 1;
  Task task = Task::simulate;
  ModelConfig model;
  std::optional<ModelConfig> model_b;
  InitConfig init;
  std::optional<InitConfig> init_b;
  TimeGrid grid;
  std::size_t particles = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  double p = 2.0;
  double q = 2.0;
  double c_pp = 1.0;
  double tolerance_rel = 0.02;
  double picard_tol = 1e-3;
  std::size_t max_iterations = 8;
  std::optional<ProfileConfig> profile;
  std::optional<EnvelopeConfig> envelope;
  std::optional<PathwiseWindow> window;
  std::optional<BihariTaskConfig> bihari;
  OutputConfig output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse and validate a configuration document. Unknown keys are rejected,
/// defaults are applied, invariants are checked with the violated rule named.
ExperimentConfig parse_config(const std::string& text);

/// Serialize with every default made explicit; parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

struct RunOverrides {
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

/// Execute the task, write the report and curve files under output_dir, and
/// print a one-line verdict. Exit codes: 0 pass/converged, 1 fail/violated,
/// 2 refusal/blow-up, 3 I/O error.
int run_experiment(ExperimentConfig config, const std::string& output_dir,
                   const RunOverrides& overrides = {});

ModelSpec build_model(const ModelConfig& config);
InitialCondition build_init(const InitConfig& config);

}  // namespace mvsde
