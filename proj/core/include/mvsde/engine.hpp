#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mvsde/grid.hpp"
#include "mvsde/measures.hpp"
#include "mvsde/models.hpp"

namespace mvsde {

/// A measure-valued path: one empirical cloud per grid time.
using MeasureFlow = std::vector<ParticleCloud>;

struct SimConfig {
  TimeGrid grid;
  std::size_t n_particles = 10000;
  std::uint64_t seed = 0;
  enum class Scheme { euler_maruyama } scheme = Scheme::euler_maruyama;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  void validate(const ModelSpec& model) const;
};

/// Initial-condition sampler for xi; draws are pure functions of
/// (seed, particle index).
class InitialCondition {
 public:
  static InitialCondition constant(std::vector<double> value);
  static InitialCondition gaussian(std::vector<double> mean, std::vector<double> stddev);
  static InitialCondition two_point(std::vector<double> a, std::vector<double> b,
                                    double prob_a = 0.5);

  std::size_t dim() const { return dim_; }
  void sample(std::uint64_t seed, std::uint64_t particle, std::span<double> out) const;

  enum class Kind { constant, gaussian, two_point };
  Kind kind() const { return kind_; }
  const std::vector<double>& param_a() const { return a_; }
  const std::vector<double>& param_b() const { return b_; }
  double prob_a() const { return prob_a_; }

 private:
  InitialCondition() = default;
  Kind kind_ = Kind::constant;
  std::size_t dim_ = 1;
  std::vector<double> a_;
  std::vector<double> b_;
  double prob_a_ = 0.5;
};

/// Simulated particle system: the empirical cloud at every grid time, in
/// stable particle-index order (clouds double as per-particle paths).
struct PathEnsemble {
  TimeGrid grid;
  MeasureFlow clouds;

  std::size_t n_particles() const { return clouds.front().size(); }
  std::size_t dim() const { return clouds.front().dim(); }
};

/// Non-finite state encountered while stepping.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::size_t step, double time);
  std::size_t step() const { return step_; }
  double time() const { return time_; }

 private:
  std::size_t step_;
  double time_;
};

/// Euler-Maruyama simulation of the mean-field SDE. The interaction measure
/// at step k is frozen_flow's cloud when given (the mu-SDE), else the
/// ensemble's own cloud (self-interaction). Bitwise deterministic in
/// (seed, cfg, model), independent of cfg.threads.
PathEnsemble simulate(const ModelSpec& model, const InitialCondition& init, const SimConfig& cfg,
                      const MeasureFlow* frozen_flow = nullptr);

/// Two self-interacting runs driven by identical noise streams (synchronous
/// coupling); the per-index differences realize Y = X - X~.
std::pair<PathEnsemble, PathEnsemble> simulate_coupled(const ModelSpec& model_a,
                                                       const ModelSpec& model_b,
                                                       const InitialCondition& init_a,
                                                       const InitialCondition& init_b,
                                                       const SimConfig& cfg);

/// t -> E|X_t|^p along the ensemble.
Curve moment_curve(const PathEnsemble& ensemble, double p);

/// |Y_t| per coupled particle pair, row-major paths x times.
struct DiffPaths {
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::vector<double> values;

  std::span<const double> path(std::size_t i) const {
    return {values.data() + i * grid.size(), grid.size()};
  }
};

DiffPaths difference_paths(const PathEnsemble& a, const PathEnsemble& b);

struct PathwiseWindow {
  double t_lo;
  double t_hi;

  bool operator==(const PathwiseWindow&) const = default;
};

/// Finite-horizon estimates of limsup t^{-alpha} log |Y_t|: per path the
/// maximum of t^{-alpha} log |Y_t| over the latter half of the window. Paths
/// hitting exact zero inside the window are excluded and counted.
struct PathwiseExponentEstimate {
  std::vector<double> per_path;  ///< NaN for excluded paths
  double max_estimate;
  double mean_estimate;
  std::size_t n_used;
  std::size_t n_excluded;
};

PathwiseExponentEstimate pathwise_exponent(const DiffPaths& diff, double alpha,
                                           const PathwiseWindow& window);

/// CSV with header `t,particle_id,x_1,..,x_m`, full precision.
void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& os);
/// CSV with header `t,<name>`, full precision.
void write_curve_csv(const Curve& curve, std::ostream& os, const char* name = "value");

}  // namespace mvsde
