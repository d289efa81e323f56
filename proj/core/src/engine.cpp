#include "mvsde/engine.hpp"

#include <atomic>
#include <barrier>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "mvsde/philox.hpp"

namespace mvsde {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

bool interacting(const ModelSpec& model) {
  switch (model.kind()) {
    case ModelSpec::Kind::linear_meanfield: {
      const auto& lm = *model.linear_params();
      return lm.b_mf != 0.0 || lm.c2 != 0.0;
    }
    case ModelSpec::Kind::integral_map:
      return model.kernel()->b0_depends_on_y || model.kernel()->sigma0_depends_on_y;
    case ModelSpec::Kind::custom:
      return false;  // not decidable; the caller knows
  }
  return false;
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

unsigned resolve_threads(unsigned requested, std::size_t n_particles) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  t = std::min<unsigned>(t, 256);
  t = std::min<std::size_t>(t, n_particles);
  return std::max(1u, t);
}

/// Shared per-simulation context for the stepping loop.
struct StepContext {
  const ModelSpec* model;
  const MeasureFlow* frozen;
  TimeGrid grid;
  std::size_t n, m, d;
  std::uint64_t seed;
  double sqrt_dt;

  MeasureFlow clouds;
  std::vector<double> next;
  const ParticleCloud* interaction = nullptr;
  CloudStats stats;
  std::size_t k = 0;
  bool done = false;
  std::atomic<bool> failed{false};

  void prepare_step() {
    interaction = frozen != nullptr ? &(*frozen)[k] : &clouds[k];
    stats = CloudStats::of(*interaction);
  }

  /// Commits the freshly written state as cloud k+1 and stages step k+1.
  /// Runs exactly once between phases (serially, or as barrier completion).
  void commit() noexcept {
    if (failed.load(std::memory_order_relaxed)) {
      done = true;
      return;
    }
    clouds.push_back(ParticleCloud::unchecked(m, std::move(next)));
    ++k;
    if (k == grid.steps) {
      done = true;
      return;
    }
    next = std::vector<double>(n * m);
    prepare_step();
  }

  void run_chunk(std::size_t lo, std::size_t hi, std::vector<double>& drift_buf,
                 std::vector<double>& diffusion_buf, std::vector<double>& normal_buf) {
    const double t = grid.time(k);
    const ParticleCloud& current = clouds[k];
    bool ok = true;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto x = current.point(i);
      model->drift(t, x, *interaction, stats, drift_buf);
      model->diffusion(t, x, *interaction, stats, diffusion_buf);
      rng::fill_normals(seed, rng::Stream::noise, i, k, normal_buf);
      for (std::size_t r = 0; r < m; ++r) {
        double noise = 0.0;
        for (std::size_t c = 0; c < d; ++c) noise += diffusion_buf[r * d + c] * normal_buf[c];
        const double value = x[r] + drift_buf[r] * grid.dt + sqrt_dt * noise;
        next[i * m + r] = value;
        ok = ok && std::isfinite(value);
      }
    }
    if (!ok) failed.store(true, std::memory_order_relaxed);
  }
};

}  // namespace

BlowUpError::BlowUpError(std::size_t step, double time)
    : std::runtime_error("blow-up: non-finite state at step " + std::to_string(step) + ", t = " +
                         std::to_string(time)),
      step_(step),
      time_(time) {}

void SimConfig::validate(const ModelSpec& model) const {
  if (n_particles == 0) throw std::invalid_argument("SimConfig: n_particles must be positive");
  if (n_particles < 2 && interacting(model))
    throw std::invalid_argument("SimConfig: interacting models need n_particles >= 2");
}

InitialCondition InitialCondition::constant(std::vector<double> value) {
  if (value.empty()) throw std::invalid_argument("InitialCondition: empty value");
  InitialCondition init;
  init.kind_ = Kind::constant;
  init.dim_ = value.size();
  init.a_ = std::move(value);
  return init;
}

InitialCondition InitialCondition::gaussian(std::vector<double> mean,
                                            std::vector<double> stddev) {
  if (mean.empty() || mean.size() != stddev.size())
    throw std::invalid_argument("InitialCondition: mean and stddev must share a nonzero size");
  for (double s : stddev)
    if (!(s >= 0.0)) throw std::invalid_argument("InitialCondition: stddev must be nonnegative");
  InitialCondition init;
  init.kind_ = Kind::gaussian;
  init.dim_ = mean.size();
  init.a_ = std::move(mean);
  init.b_ = std::move(stddev);
  return init;
}

InitialCondition InitialCondition::two_point(std::vector<double> a, std::vector<double> b,
                                             double prob_a) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("InitialCondition: atoms must share a nonzero size");
  if (!(prob_a >= 0.0 && prob_a <= 1.0))
    throw std::invalid_argument("InitialCondition: prob_a must lie in [0, 1]");
  InitialCondition init;
  init.kind_ = Kind::two_point;
  init.dim_ = a.size();
  init.a_ = std::move(a);
  init.b_ = std::move(b);
  init.prob_a_ = prob_a;
  return init;
}

void InitialCondition::sample(std::uint64_t seed, std::uint64_t particle,
                              std::span<double> out) const {
  switch (kind_) {
    case Kind::constant:
      for (std::size_t j = 0; j < dim_; ++j) out[j] = a_[j];
      return;
    case Kind::gaussian: {
      rng::fill_normals(seed, rng::Stream::init, particle, 0, out);
      for (std::size_t j = 0; j < dim_; ++j) out[j] = a_[j] + b_[j] * out[j];
      return;
    }
    case Kind::two_point: {
      const bool take_a = rng::uniform(seed, rng::Stream::aux, particle, 0) < prob_a_;
      const auto& atom = take_a ? a_ : b_;
      for (std::size_t j = 0; j < dim_; ++j) out[j] = atom[j];
      return;
    }
  }
}

PathEnsemble simulate(const ModelSpec& model, const InitialCondition& init, const SimConfig& cfg,
                      const MeasureFlow* frozen_flow) {
  cfg.validate(model);
  const std::size_t m = model.dim_state();
  const std::size_t d = model.dim_noise();
  if (init.dim() != m) throw std::invalid_argument("simulate: initial condition dimension mismatch");
  if (frozen_flow != nullptr) {
    if (frozen_flow->size() != cfg.grid.size())
      throw std::invalid_argument("simulate: frozen flow must live on the simulation grid");
    for (const auto& cloud : *frozen_flow)
      if (cloud.dim() != m) throw std::invalid_argument("simulate: frozen flow dimension mismatch");
  }

  StepContext ctx;
  ctx.model = &model;
  ctx.frozen = frozen_flow;
  ctx.grid = cfg.grid;
  ctx.n = cfg.n_particles;
  ctx.m = m;
  ctx.d = d;
  ctx.seed = cfg.seed;
  ctx.sqrt_dt = std::sqrt(cfg.grid.dt);
  ctx.clouds.reserve(cfg.grid.size());

  std::vector<double> state0(ctx.n * m);
  for (std::size_t i = 0; i < ctx.n; ++i)
    init.sample(cfg.seed, i, std::span<double>(state0.data() + i * m, m));
  if (!all_finite(state0)) throw std::invalid_argument("simulate: non-finite initial sample");
  ctx.clouds.push_back(ParticleCloud::unchecked(m, std::move(state0)));
  ctx.next = std::vector<double>(ctx.n * m);
  ctx.prepare_step();

  const unsigned threads = resolve_threads(cfg.threads, ctx.n);
  std::exception_ptr worker_error;
  std::mutex error_mutex;

  const auto worker_body = [&](std::size_t lo, std::size_t hi, auto&& sync) {
    std::vector<double> drift_buf(m), diffusion_buf(m * d), normal_buf(d);
    while (true) {
      try {
        ctx.run_chunk(lo, hi, drift_buf, diffusion_buf, normal_buf);
      } catch (...) {
        {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!worker_error) worker_error = std::current_exception();
        }
        ctx.failed.store(true, std::memory_order_relaxed);
      }
      sync();
      if (ctx.done) break;
    }
  };

  if (threads == 1) {
    worker_body(0, ctx.n, [&ctx] { ctx.commit(); });
  } else {
    std::barrier sync(static_cast<std::ptrdiff_t>(threads), [&ctx]() noexcept { ctx.commit(); });
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (ctx.n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = std::min<std::size_t>(t * chunk, ctx.n);
      const std::size_t hi = std::min<std::size_t>(lo + chunk, ctx.n);
      pool.emplace_back([&, lo, hi] { worker_body(lo, hi, [&sync] { sync.arrive_and_wait(); }); });
    }
    for (auto& th : pool) th.join();
  }

  if (worker_error) std::rethrow_exception(worker_error);
  if (ctx.failed.load())
    throw BlowUpError(ctx.k + 1, ctx.grid.time(ctx.k + 1));

  PathEnsemble ensemble;
  ensemble.grid = cfg.grid;
  ensemble.clouds = std::move(ctx.clouds);
  return ensemble;
}

std::pair<PathEnsemble, PathEnsemble> simulate_coupled(const ModelSpec& model_a,
                                                       const ModelSpec& model_b,
                                                       const InitialCondition& init_a,
                                                       const InitialCondition& init_b,
                                                       const SimConfig& cfg) {
  if (model_a.dim_state() != model_b.dim_state() || model_a.dim_noise() != model_b.dim_noise())
    throw std::invalid_argument("simulate_coupled: models must share dimensions");
  // The counter-based streams depend only on (seed, particle, step), so two
  // runs with the same cfg are automatically driven by identical noise.
  PathEnsemble a = simulate(model_a, init_a, cfg);
  PathEnsemble b = simulate(model_b, init_b, cfg);
  return {std::move(a), std::move(b)};
}

Curve moment_curve(const PathEnsemble& ensemble, double p) {
  std::vector<double> values(ensemble.grid.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = moment(ensemble.clouds[k], p);
  return Curve(ensemble.grid, std::move(values));
}

DiffPaths difference_paths(const PathEnsemble& a, const PathEnsemble& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("difference_paths: grid mismatch");
  if (a.n_particles() != b.n_particles() || a.dim() != b.dim())
    throw std::invalid_argument("difference_paths: ensemble shape mismatch");
  const std::size_t n = a.n_particles();
  const std::size_t m = a.dim();
  const std::size_t nt = a.grid.size();
  DiffPaths diff;
  diff.grid = a.grid;
  diff.n_paths = n;
  diff.values.resize(n * nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto xa = a.clouds[k].data();
    const auto xb = b.clouds[k].data();
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        const double dydr = xa[i * m + r] - xb[i * m + r];
        sq += dydr * dydr;
      }
      diff.values[i * nt + k] = std::sqrt(sq);
    }
  }
  return diff;
}

PathwiseExponentEstimate pathwise_exponent(const DiffPaths& diff, double alpha,
                                           const PathwiseWindow& window) {
  if (!(alpha > 0.0)) throw std::invalid_argument("pathwise_exponent: alpha must be positive");
  if (!(window.t_lo < window.t_hi))
    throw std::invalid_argument("pathwise_exponent: empty window");
  const TimeGrid& grid = diff.grid;
  const double half_start = 0.5 * (window.t_lo + window.t_hi);
  std::size_t first_window = grid.size(), first_half = grid.size(), last = grid.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    if (t >= window.t_lo && first_window == grid.size()) first_window = k;
    if (t >= half_start && first_half == grid.size()) first_half = k;
    if (t <= window.t_hi) last = k;
  }
  if (first_half >= grid.size() || last == grid.size() || first_half > last)
    throw std::invalid_argument("pathwise_exponent: window lies outside the grid");
  if (!(grid.time(first_half) > 0.0))
    throw std::invalid_argument("pathwise_exponent: window must lie in positive time");

  PathwiseExponentEstimate est;
  est.per_path.assign(diff.n_paths, nan);
  est.n_used = 0;
  est.n_excluded = 0;
  double max_v = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < diff.n_paths; ++i) {
    const auto path = diff.path(i);
    bool hit_zero = false;
    for (std::size_t k = first_window; k <= last && !hit_zero; ++k) hit_zero = path[k] == 0.0;
    if (hit_zero) {
      ++est.n_excluded;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = first_half; k <= last; ++k) {
      const double t = grid.time(k);
      best = std::max(best, std::log(path[k]) / std::pow(t, alpha));
    }
    est.per_path[i] = best;
    max_v = std::max(max_v, best);
    sum += best;
    ++est.n_used;
  }
  if (est.n_used == 0)
    throw std::invalid_argument("pathwise_exponent: every path hit zero inside the window");
  est.max_estimate = max_v;
  est.mean_estimate = sum / static_cast<double>(est.n_used);
  return est;
}

namespace {

void print_value(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& os) {
  const std::size_t m = ensemble.dim();
  os << "t,particle_id";
  for (std::size_t r = 1; r <= m; ++r) os << ",x_" << r;
  os << "\n";
  for (std::size_t k = 0; k < ensemble.grid.size(); ++k) {
    const auto& cloud = ensemble.clouds[k];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      print_value(os, ensemble.grid.time(k));
      os << ',' << i;
      for (double x : cloud.point(i)) {
        os << ',';
        print_value(os, x);
      }
      os << "\n";
    }
  }
}

void write_curve_csv(const Curve& curve, std::ostream& os, const char* name) {
  os << "t," << name << "\n";
  for (std::size_t k = 0; k < curve.size(); ++k) {
    print_value(os, curve.grid.time(k));
    os << ',';
    print_value(os, curve.values[k]);
    os << "\n";
  }
}

}  // namespace mvsde
