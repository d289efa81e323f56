#include "mvsde/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <json.hpp>

#include "mvsde/picard.hpp"
#include "mvsde/verify.hpp"

namespace mvsde {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join_path(path, key), "unknown key");
  }
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
  const json* v = find(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw ConfigError(join_path(path, key), "required number missing");
  }
  if (!v->is_number()) throw ConfigError(join_path(path, key), "expected a number");
  return v->get<double>();
}

std::uint64_t get_unsigned(const json& obj, const std::string& path, const std::string& key,
                           std::uint64_t fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_unsigned()) throw ConfigError(join_path(path, key), "expected a nonnegative integer");
  return v->get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
  const json* v = find(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw ConfigError(join_path(path, key), "required string missing");
  }
  if (!v->is_string()) throw ConfigError(join_path(path, key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> get_number_array(const json& obj, const std::string& path,
                                     const std::string& key,
                                     std::optional<std::vector<double>> fallback = std::nullopt) {
  const json* v = find(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw ConfigError(join_path(path, key), "required array missing");
  }
  if (!v->is_array()) throw ConfigError(join_path(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : *v) {
    if (!item.is_number()) throw ConfigError(join_path(path, key), "expected an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

TimeFunction parse_time_function(const json& obj, const std::string& path, const TimeGrid& grid) {
  if (!obj.is_object()) throw ConfigError(path, "expected a time-function object");
  const std::string kind = get_string(obj, path, "kind");
  if (kind == "constant") {
    check_keys(obj, path, {"kind", "value"});
    return TimeFunction::constant(get_number(obj, path, "value"));
  }
  if (kind == "power") {
    check_keys(obj, path, {"kind", "scale", "exponent"});
    return TimeFunction::power(get_number(obj, path, "scale"), get_number(obj, path, "exponent"));
  }
  if (kind == "exponential") {
    check_keys(obj, path, {"kind", "scale", "rate"});
    return TimeFunction::exponential(get_number(obj, path, "scale"),
                                     get_number(obj, path, "rate"));
  }
  if (kind == "sampled") {
    check_keys(obj, path, {"kind", "values"});
    auto values = get_number_array(obj, path, "values");
    if (values.size() != grid.size())
      throw ConfigError(join_path(path, "values"),
                        "sampled time function must have steps+1 values (the simulation grid)");
    return TimeFunction::sampled(grid, std::move(values));
  }
  throw ConfigError(join_path(path, "kind"),
                    "expected one of constant, power, exponential, sampled");
}

ordered_json time_function_json(const TimeFunction& tf) {
  ordered_json j;
  if (const auto* c = std::get_if<TimeFunction::Constant>(&tf.repr())) {
    j["kind"] = "constant";
    j["value"] = c->value;
  } else if (const auto* p = std::get_if<TimeFunction::Power>(&tf.repr())) {
    j["kind"] = "power";
    j["scale"] = p->scale;
    j["exponent"] = p->exponent;
  } else if (const auto* e = std::get_if<TimeFunction::Exponential>(&tf.repr())) {
    j["kind"] = "exponential";
    j["scale"] = e->scale;
    j["rate"] = e->rate;
  } else {
    const auto& s = std::get<TimeFunction::Sampled>(tf.repr());
    j["kind"] = "sampled";
    j["values"] = s.values;
  }
  return j;
}

ModelConfig parse_model(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected a model object");
  ModelConfig model;
  model.kind = get_string(obj, path, "kind");
  if (model.kind == "linear_meanfield") {
    check_keys(obj, path, {"kind", "a", "b_mf", "c0", "c1", "c2"});
    model.linear.a = get_number(obj, path, "a", 0.0);
    model.linear.b_mf = get_number(obj, path, "b_mf", 0.0);
    model.linear.c0 = get_number(obj, path, "c0", 0.0);
    model.linear.c1 = get_number(obj, path, "c1", 0.0);
    model.linear.c2 = get_number(obj, path, "c2", 0.0);
    return model;
  }
  if (model.kind == "power_drift") {
    check_keys(obj, path, {"kind", "b_hat", "alpha_hat", "sigma"});
    model.b_hat = get_number_array(obj, path, "b_hat");
    model.alpha_hat = get_number_array(obj, path, "alpha_hat");
    model.sigma = get_number(obj, path, "sigma", 0.0);
    if (model.b_hat.size() != model.alpha_hat.size())
      throw ConfigError(path, "violates rule: b_hat and alpha_hat must pair up");
    for (double b : model.b_hat)
      if (!(b >= 0.0)) throw ConfigError(join_path(path, "b_hat"), "violates rule: b_hat >= 0");
    for (double a : model.alpha_hat)
      if (!(a > 0.0))
        throw ConfigError(join_path(path, "alpha_hat"), "violates rule: alpha_hat > 0");
    return model;
  }
  throw ConfigError(join_path(path, "kind"), "expected one of linear_meanfield, power_drift");
}

ordered_json model_json(const ModelConfig& model) {
  ordered_json j;
  j["kind"] = model.kind;
  if (model.kind == "linear_meanfield") {
    j["a"] = model.linear.a;
    j["b_mf"] = model.linear.b_mf;
    j["c0"] = model.linear.c0;
    j["c1"] = model.linear.c1;
    j["c2"] = model.linear.c2;
  } else {
    j["b_hat"] = model.b_hat;
    j["alpha_hat"] = model.alpha_hat;
    j["sigma"] = model.sigma;
  }
  return j;
}

InitConfig parse_init(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an init object");
  InitConfig init;
  init.kind = get_string(obj, path, "kind");
  if (init.kind == "constant") {
    check_keys(obj, path, {"kind", "value"});
    init.value = get_number_array(obj, path, "value");
    return init;
  }
  if (init.kind == "gaussian") {
    check_keys(obj, path, {"kind", "mean", "std"});
    init.mean = get_number_array(obj, path, "mean");
    init.stddev = get_number_array(obj, path, "std");
    if (init.mean.size() != init.stddev.size())
      throw ConfigError(path, "violates rule: mean and std must share a size");
    return init;
  }
  if (init.kind == "two_point") {
    check_keys(obj, path, {"kind", "a", "b", "prob_a"});
    init.a = get_number_array(obj, path, "a");
    init.b = get_number_array(obj, path, "b");
    init.prob_a = get_number(obj, path, "prob_a", 0.5);
    if (init.a.size() != init.b.size())
      throw ConfigError(path, "violates rule: atoms a and b must share a size");
    if (!(init.prob_a >= 0.0 && init.prob_a <= 1.0))
      throw ConfigError(join_path(path, "prob_a"), "violates rule: prob_a in [0, 1]");
    return init;
  }
  throw ConfigError(join_path(path, "kind"), "expected one of constant, gaussian, two_point");
}

ordered_json init_json(const InitConfig& init) {
  ordered_json j;
  j["kind"] = init.kind;
  if (init.kind == "constant") {
    j["value"] = init.value;
  } else if (init.kind == "gaussian") {
    j["mean"] = init.mean;
    j["std"] = init.stddev;
  } else {
    j["a"] = init.a;
    j["b"] = init.b;
    j["prob_a"] = init.prob_a;
  }
  return j;
}

EnvelopeConfig parse_envelope(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an envelope object");
  check_keys(obj, path, {"alpha", "lambda_hat", "s", "t1"});
  EnvelopeConfig env;
  env.alpha = get_number_array(obj, path, "alpha");
  env.lambda_hat = get_number_array(obj, path, "lambda_hat");
  env.shifts = get_number_array(obj, path, "s",
                                std::vector<double>(env.alpha.size(), 0.0));
  env.t1 = get_number(obj, path, "t1", 0.0);
  if (env.alpha.size() != env.lambda_hat.size() || env.alpha.size() != env.shifts.size() ||
      env.alpha.empty())
    throw ConfigError(path, "violates rule: alpha, lambda_hat, s must share a size l >= 1");
  for (std::size_t k = 0; k < env.alpha.size(); ++k) {
    if (!(env.alpha[k] > 0.0))
      throw ConfigError(join_path(path, "alpha"), "violates rule: alpha_k > 0");
    if (k > 0 && !(env.alpha[k] > env.alpha[k - 1]))
      throw ConfigError(join_path(path, "alpha"), "violates rule: alpha strictly increasing");
    if (!(env.shifts[k] <= env.t1))
      throw ConfigError(join_path(path, "s"), "violates rule: max_k s_k <= t1");
  }
  if (!(env.lambda_hat.back() < 0.0))
    throw ConfigError(join_path(path, "lambda_hat"), "violates rule: lambda_hat_l < 0");
  return env;
}

ordered_json envelope_json(const EnvelopeConfig& env) {
  ordered_json j;
  j["alpha"] = env.alpha;
  j["lambda_hat"] = env.lambda_hat;
  j["s"] = env.shifts;
  j["t1"] = env.t1;
  return j;
}

ProfileConfig parse_profile(const json& obj, const std::string& path, const TimeGrid& grid) {
  if (!obj.is_object()) throw ConfigError(path, "expected a profile object");
  const std::string kind = get_string(obj, path, "kind", std::string("lipschitz"));
  if (kind != "lipschitz")
    throw ConfigError(join_path(path, "kind"), "only lipschitz profiles are configurable");
  check_keys(obj, path, {"kind", "eta1", "eta2", "eta_hat1", "eta_hat2", "c_pp"});
  ProfileConfig profile;
  const auto parse_member = [&](const char* key) -> TimeFunction {
    const json* v = find(obj, key);
    if (v == nullptr) return TimeFunction::constant(0.0);
    return parse_time_function(*v, join_path(path, key), grid);
  };
  profile.eta1 = parse_member("eta1");
  profile.eta2 = parse_member("eta2");
  profile.eta_hat1 = parse_member("eta_hat1");
  profile.eta_hat2 = parse_member("eta_hat2");
  profile.c_pp = get_number(obj, path, "c_pp", 1.0);
  if (!(profile.c_pp >= 0.0))
    throw ConfigError(join_path(path, "c_pp"), "violates rule: c_pp >= 0");
  return profile;
}

ordered_json profile_json(const ProfileConfig& profile) {
  ordered_json j;
  j["kind"] = "lipschitz";
  j["eta1"] = time_function_json(profile.eta1);
  j["eta2"] = time_function_json(profile.eta2);
  j["eta_hat1"] = time_function_json(profile.eta_hat1);
  j["eta_hat2"] = time_function_json(profile.eta_hat2);
  j["c_pp"] = profile.c_pp;
  return j;
}

BihariTaskConfig parse_bihari(const json& obj, const std::string& path, const TimeGrid& grid) {
  if (!obj.is_object()) throw ConfigError(path, "expected a bihari object");
  check_keys(obj, path, {"initial", "additive", "gain", "rho0"});
  BihariTaskConfig cfg;
  cfg.initial = get_number(obj, path, "initial", 0.0);
  if (!(cfg.initial >= 0.0))
    throw ConfigError(join_path(path, "initial"), "violates rule: initial >= 0");
  if (const json* v = find(obj, "additive"))
    cfg.additive = parse_time_function(*v, join_path(path, "additive"), grid);
  else
    cfg.additive = TimeFunction::constant(0.0);
  if (const json* v = find(obj, "gain"))
    cfg.gain = parse_time_function(*v, join_path(path, "gain"), grid);
  else
    cfg.gain = TimeFunction::constant(0.0);
  const json* rho = find(obj, "rho0");
  if (rho == nullptr) throw ConfigError(join_path(path, "rho0"), "required object missing");
  check_keys(*rho, join_path(path, "rho0"), {"kind", "theta", "alpha_hat"});
  cfg.rho0_kind = get_string(*rho, join_path(path, "rho0"), "kind");
  if (cfg.rho0_kind == "linear") {
    cfg.rho0_param = 1.0;
  } else if (cfg.rho0_kind == "power") {
    cfg.rho0_param = get_number(*rho, join_path(path, "rho0"), "theta");
    if (!(cfg.rho0_param > 0.0 && cfg.rho0_param <= 1.0))
      throw ConfigError(join_path(path, "rho0.theta"), "violates rule: theta in (0, 1]");
  } else if (cfg.rho0_kind == "log_modulus") {
    cfg.rho0_param = get_number(*rho, join_path(path, "rho0"), "alpha_hat", 1.0);
    if (!(cfg.rho0_param > 0.0 && cfg.rho0_param <= 1.0))
      throw ConfigError(join_path(path, "rho0.alpha_hat"), "violates rule: alpha_hat in (0, 1]");
  } else {
    throw ConfigError(join_path(path, "rho0.kind"),
                      "expected one of linear, power, log_modulus");
  }
  return cfg;
}

ordered_json bihari_json(const BihariTaskConfig& cfg) {
  ordered_json j;
  j["initial"] = cfg.initial;
  j["additive"] = time_function_json(cfg.additive);
  j["gain"] = time_function_json(cfg.gain);
  ordered_json rho;
  rho["kind"] = cfg.rho0_kind;
  if (cfg.rho0_kind == "power") rho["theta"] = cfg.rho0_param;
  if (cfg.rho0_kind == "log_modulus") rho["alpha_hat"] = cfg.rho0_param;
  j["rho0"] = rho;
  return j;
}

const std::set<std::string> top_keys = {"version", "task",   "model",  "model_b", "init",
                                        "init_b",  "sim",    "params", "output"};

Task parse_task(const std::string& name) {
  if (name == "simulate") return Task::simulate;
  if (name == "picard") return Task::picard;
  if (name == "certify") return Task::certify;
  if (name == "verify-moment") return Task::verify_moment;
  if (name == "verify-pathwise") return Task::verify_pathwise;
  if (name == "bihari") return Task::bihari;
  throw ConfigError("task",
                    "expected one of simulate, picard, certify, verify-moment, verify-pathwise, "
                    "bihari");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::simulate: return "simulate";
    case Task::picard: return "picard";
    case Task::certify: return "certify";
    case Task::verify_moment: return "verify-moment";
    case Task::verify_pathwise: return "verify-pathwise";
    case Task::bihari: return "bihari";
  }
  return "simulate";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top-level document must be an object");
  check_keys(doc, "", top_keys);

  ExperimentConfig cfg;
  const json* version = find(doc, "version");
  if (version != nullptr) {
    if (!version->is_number_integer() || version->get<int>() != 1)
      throw ConfigError("version", "unsupported schema version (expected 1)");
  }
  cfg.version = 1;
  cfg.task = parse_task(get_string(doc, "", "task"));

  const json* model = find(doc, "model");
  if (model == nullptr) throw ConfigError("model", "required object missing");
  cfg.model = parse_model(*model, "model");
  if (const json* mb = find(doc, "model_b")) cfg.model_b = parse_model(*mb, "model_b");

  // Simulation defaults: dt = 1e-3, steps = 1000, N = 10^4, seed = 0.
  json sim = json::object();
  if (const json* s = find(doc, "sim")) {
    if (!s->is_object()) throw ConfigError("sim", "expected an object");
    sim = *s;
  }
  check_keys(sim, "sim", {"t0", "dt", "steps", "particles", "seed", "threads"});
  const double t0 = get_number(sim, "sim", "t0", 0.0);
  const double dt = get_number(sim, "sim", "dt", 1e-3);
  if (!(dt > 0.0)) throw ConfigError("sim.dt", "violates rule: dt > 0");
  const auto steps = static_cast<std::size_t>(get_unsigned(sim, "sim", "steps", 1000));
  if (steps == 0) throw ConfigError("sim.steps", "violates rule: steps >= 1");
  cfg.grid = TimeGrid(t0, dt, steps);
  cfg.particles = static_cast<std::size_t>(get_unsigned(sim, "sim", "particles", 10000));
  if (cfg.particles == 0) throw ConfigError("sim.particles", "violates rule: particles >= 1");
  cfg.seed = get_unsigned(sim, "sim", "seed", 0);
  cfg.threads = static_cast<unsigned>(get_unsigned(sim, "sim", "threads", 0));

  const std::size_t dim = 1;  // configurable model kinds are scalar
  if (const json* init = find(doc, "init"))
    cfg.init = parse_init(*init, "init");
  else {
    cfg.init.kind = "constant";
    cfg.init.value = std::vector<double>(dim, 0.0);
  }
  if (const json* ib = find(doc, "init_b")) cfg.init_b = parse_init(*ib, "init_b");

  json params = json::object();
  if (const json* p = find(doc, "params")) {
    if (!p->is_object()) throw ConfigError("params", "expected an object");
    params = *p;
  }
  check_keys(params, "params",
             {"p", "q", "c_pp", "tolerance_rel", "tol", "max_iterations", "profile", "envelope",
              "window", "bihari"});
  cfg.p = get_number(params, "params", "p", 2.0);
  if (!(cfg.p >= 1.0)) throw ConfigError("params.p", "violates rule: p >= 1");
  if (cfg.p < 2.0 && cfg.task != Task::simulate && cfg.task != Task::bihari)
    throw ConfigError("params.p", "violates rule: coefficient-based tasks need p >= 2");
  cfg.q = get_number(params, "params", "q", 2.0);
  cfg.c_pp = get_number(params, "params", "c_pp", 1.0);
  if (!(cfg.c_pp >= 0.0)) throw ConfigError("params.c_pp", "violates rule: c_pp >= 0");
  cfg.tolerance_rel = get_number(params, "params", "tolerance_rel", 0.02);
  if (!(cfg.tolerance_rel >= 0.0))
    throw ConfigError("params.tolerance_rel", "violates rule: tolerance_rel >= 0");
  cfg.picard_tol = get_number(params, "params", "tol", 1e-3);
  if (!(cfg.picard_tol > 0.0)) throw ConfigError("params.tol", "violates rule: tol > 0");
  cfg.max_iterations =
      static_cast<std::size_t>(get_unsigned(params, "params", "max_iterations", 8));
  if (cfg.max_iterations == 0)
    throw ConfigError("params.max_iterations", "violates rule: max_iterations >= 1");
  if (const json* pr = find(params, "profile"))
    cfg.profile = parse_profile(*pr, "params.profile", cfg.grid);
  if (const json* env = find(params, "envelope"))
    cfg.envelope = parse_envelope(*env, "params.envelope");
  if (find(params, "window") != nullptr) {
    const auto values = get_number_array(params, "params", "window");
    if (values.size() != 2 || !(values[0] < values[1]))
      throw ConfigError("params.window", "violates rule: window = [t_lo, t_hi] with t_lo < t_hi");
    cfg.window = PathwiseWindow{values[0], values[1]};
  }
  if (const json* b = find(params, "bihari")) cfg.bihari = parse_bihari(*b, "params.bihari", cfg.grid);

  json output = json::object();
  if (const json* o = find(doc, "output")) {
    if (!o->is_object()) throw ConfigError("output", "expected an object");
    output = *o;
  }
  check_keys(output, "output", {"report", "curves", "ensemble"});
  cfg.output.report = get_string(output, "output", "report", std::string("report.json"));
  cfg.output.curves = get_string(output, "output", "curves", std::string("curves.csv"));
  cfg.output.ensemble = get_string(output, "output", "ensemble", std::string(""));

  // Task-specific requirements.
  if (cfg.task == Task::bihari && !cfg.bihari)
    throw ConfigError("params.bihari", "required for task bihari");
  if ((cfg.task == Task::certify || cfg.task == Task::verify_pathwise) && !cfg.envelope)
    throw ConfigError("params.envelope", "required for certify and verify-pathwise tasks");
  if (cfg.task == Task::verify_pathwise && !cfg.window)
    throw ConfigError("params.window", "required for task verify-pathwise");
  if (!(cfg.q >= 2.0) && (cfg.task == Task::certify || cfg.task == Task::verify_pathwise))
    throw ConfigError("params.q", "violates rule: q >= 2");
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ordered_json doc;
  doc["version"] = 1;
  doc["task"] = task_name(cfg.task);
  doc["model"] = model_json(cfg.model);
  if (cfg.model_b) doc["model_b"] = model_json(*cfg.model_b);
  doc["init"] = init_json(cfg.init);
  if (cfg.init_b) doc["init_b"] = init_json(*cfg.init_b);
  ordered_json sim;
  sim["t0"] = cfg.grid.t0;
  sim["dt"] = cfg.grid.dt;
  sim["steps"] = cfg.grid.steps;
  sim["particles"] = cfg.particles;
  sim["seed"] = cfg.seed;
  sim["threads"] = cfg.threads;
  doc["sim"] = sim;
  ordered_json params;
  params["p"] = cfg.p;
  params["q"] = cfg.q;
  params["c_pp"] = cfg.c_pp;
  params["tolerance_rel"] = cfg.tolerance_rel;
  params["tol"] = cfg.picard_tol;
  params["max_iterations"] = cfg.max_iterations;
  if (cfg.profile) params["profile"] = profile_json(*cfg.profile);
  if (cfg.envelope) params["envelope"] = envelope_json(*cfg.envelope);
  if (cfg.window) params["window"] = std::vector<double>{cfg.window->t_lo, cfg.window->t_hi};
  if (cfg.bihari) params["bihari"] = bihari_json(*cfg.bihari);
  doc["params"] = params;
  ordered_json output;
  output["report"] = cfg.output.report;
  output["curves"] = cfg.output.curves;
  output["ensemble"] = cfg.output.ensemble;
  doc["output"] = output;
  return doc.dump(2) + "\n";
}

ModelSpec build_model(const ModelConfig& config) {
  if (config.kind == "linear_meanfield") return ModelSpec::linear_meanfield(config.linear);
  PowerDriftParams params;
  params.b_hat = config.b_hat;
  params.alpha_hat = config.alpha_hat;
  return ModelSpec::power_drift(1, std::move(params), config.sigma);
}

InitialCondition build_init(const InitConfig& config) {
  if (config.kind == "constant") return InitialCondition::constant(config.value);
  if (config.kind == "gaussian") return InitialCondition::gaussian(config.mean, config.stddev);
  return InitialCondition::two_point(config.a, config.b, config.prob_a);
}

namespace {

class OutputWriter {
 public:
  explicit OutputWriter(std::string dir) : dir_(std::move(dir)) {}

  bool write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    if (name.empty()) return true;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const std::filesystem::path path = std::filesystem::path(dir_) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) return false;
    body(os);
    os.flush();
    return static_cast<bool>(os);
  }

 private:
  std::string dir_;
};

ModulusFunction build_rho0(const BihariTaskConfig& cfg) {
  if (cfg.rho0_kind == "linear") return ModulusFunction::linear();
  if (cfg.rho0_kind == "power") return ModulusFunction::power(cfg.rho0_param);
  return ModulusFunction::log_modulus(cfg.rho0_param);
}

LipschitzProfile resolve_profile(const ExperimentConfig& cfg, const ModelSpec& model) {
  if (cfg.profile) {
    LipschitzProfile profile;
    profile.eta1 = cfg.profile->eta1;
    profile.eta2 = cfg.profile->eta2;
    profile.eta_hat1 = cfg.profile->eta_hat1;
    profile.eta_hat2 = cfg.profile->eta_hat2;
    profile.p = cfg.p;
    profile.c_pp = cfg.profile->c_pp;
    return profile;
  }
  return lipschitz_profile_of(model, cfg.p, cfg.c_pp);
}

PowerEnvelope build_envelope(const EnvelopeConfig& env) {
  PowerEnvelope envelope;
  envelope.alpha = env.alpha;
  envelope.lambda_hat = env.lambda_hat;
  envelope.shifts = env.shifts;
  envelope.t1 = env.t1;
  return envelope;
}

int run_simulate(const ExperimentConfig& cfg, const SimConfig& sim, OutputWriter& out) {
  const ModelSpec model = build_model(cfg.model);
  const InitialCondition init = build_init(cfg.init);
  PathEnsemble ensemble;
  try {
    ensemble = simulate(model, init, sim);
  } catch (const BlowUpError& e) {
    ordered_json j;
    j["task"] = "simulate";
    j["status"] = "blow-up";
    j["blow_up_time"] = e.time();
    j["blow_up_step"] = e.step();
    out.write(cfg.output.report, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    std::cout << "simulate: blow-up at t = " << e.time() << "\n";
    return 2;
  }
  const Curve curve = moment_curve(ensemble, cfg.p);
  bool io_ok = out.write(cfg.output.curves,
                         [&](std::ostream& os) { write_curve_csv(curve, os, "moment"); });
  io_ok = out.write(cfg.output.ensemble,
                    [&](std::ostream& os) { write_ensemble_csv(ensemble, os); }) &&
          io_ok;
  ordered_json j;
  j["task"] = "simulate";
  j["status"] = "ok";
  j["p"] = cfg.p;
  j["particles"] = sim.n_particles;
  j["seed"] = sim.seed;
  j["final_moment"] = curve.values.back();
  io_ok = out.write(cfg.output.report, [&](std::ostream& os) { os << j.dump(2) << "\n"; }) && io_ok;
  if (!io_ok) return 3;
  std::cout << "simulate: E|X_T|^p = " << curve.values.back() << " (pass)\n";
  return 0;
}

int run_picard(const ExperimentConfig& cfg, const SimConfig& sim, OutputWriter& out) {
  const ModelSpec model = build_model(cfg.model);
  const InitialCondition init = build_init(cfg.init);
  PicardOptions options;
  options.p = cfg.p;
  options.c_pp = cfg.c_pp;
  options.max_iterations = cfg.max_iterations;
  options.tolerance = cfg.picard_tol;
  std::optional<LipschitzProfile> profile;
  try {
    profile = resolve_profile(cfg, model);
  } catch (const std::invalid_argument&) {
    profile.reset();  // no certified profile available; bounds omitted
  }
  const PicardState state = picard_solve(model, init, sim, options, nullptr,
                                         profile ? &*profile : nullptr);
  ordered_json j;
  j["task"] = "picard";
  j["status"] = state.blew_up ? "blow-up" : (state.converged ? "converged" : "not-converged");
  j["iterations"] = state.iterations;
  j["distances"] = state.distances;
  j["error_bounds"] = state.bound_values;
  j["delta_estimate"] = state.delta_estimate;
  j["noise_floor"] = state.noise_floor;
  j["metric_is_lower_bound"] = state.metric_is_lower_bound;
  if (state.blew_up) j["blow_up_time"] = state.blow_up_time;
  bool io_ok = out.write(cfg.output.report, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  if (!state.final_flow.empty()) {
    std::vector<double> mean_curve(cfg.grid.size()), second_curve(cfg.grid.size());
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
      mean_curve[k] = cloud_mean(state.final_flow[k])[0];
      second_curve[k] = moment(state.final_flow[k], 2.0);
    }
    io_ok = out.write(cfg.output.curves,
                      [&](std::ostream& os) {
                        os << "t,mean,second_moment\n";
                        char buf[96];
                        for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
                          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", cfg.grid.time(k),
                                        mean_curve[k], second_curve[k]);
                          os << buf;
                        }
                      }) &&
            io_ok;
  }
  if (!io_ok) return 3;
  if (state.blew_up) {
    std::cout << "picard: blow-up at t = " << state.blow_up_time << "\n";
    return 2;
  }
  std::cout << "picard: " << (state.converged ? "converged" : "not converged") << " after "
            << state.iterations << " iterations, last distance "
            << (state.distances.empty() ? 0.0 : state.distances.back()) << "\n";
  return state.converged ? 0 : 1;
}

int run_certify(const ExperimentConfig& cfg, OutputWriter& out) {
  const ModelSpec model = build_model(cfg.model);
  const LipschitzProfile profile = resolve_profile(cfg, model);
  const PowerEnvelope envelope = build_envelope(*cfg.envelope);
  std::vector<double> gamma(cfg.grid.size());
  LipschitzProfile base = profile;
  base.p = cfg.p;
  for (std::size_t k = 0; k < gamma.size(); ++k)
    gamma[k] = gamma_pq(base, cfg.q, cfg.grid.time(k));
  const EnvelopeCheck check = check_envelope(Curve(cfg.grid, std::move(gamma)), envelope);
  const LyapunovCertificate cert = lyapunov_from_envelope(envelope, base.p * cfg.q);
  ordered_json j;
  j["task"] = "certify";
  j["status"] = check.holds ? "certified" : "refused";
  j["exponent"] = cert.exponent;
  j["order"] = cert.order;
  if (!check.holds) j["violated_at"] = check.t_star;
  if (!out.write(cfg.output.report, [&](std::ostream& os) { os << j.dump(2) << "\n"; })) return 3;
  if (!check.holds) {
    std::cout << "certify: refused, envelope violated at t = " << check.t_star << "\n";
    return 2;
  }
  std::cout << "certify: pathwise exponent " << cert.exponent << " at order " << cert.order
            << " (pass)\n";
  return 0;
}

int run_verify_moment(const ExperimentConfig& cfg, const SimConfig& sim, OutputWriter& out) {
  const ModelSpec model_a = build_model(cfg.model);
  const ModelSpec model_b = build_model(cfg.model_b ? *cfg.model_b : cfg.model);
  const InitialCondition init_a = build_init(cfg.init);
  const InitialCondition init_b = build_init(cfg.init_b ? *cfg.init_b : cfg.init);
  const LipschitzProfile profile = resolve_profile(cfg, model_a);
  std::pair<PathEnsemble, PathEnsemble> coupled;
  try {
    coupled = simulate_coupled(model_a, model_b, init_a, init_b, sim);
  } catch (const BlowUpError& e) {
    std::cout << "verify-moment: blow-up at t = " << e.time() << "\n";
    return 2;
  }
  const BoundReport report = check_moment_comparison(coupled.first, coupled.second, profile,
                                                     cfg.p, cfg.tolerance_rel);
  bool io_ok =
      out.write(cfg.output.report, [&](std::ostream& os) { write_report_json(report, os); });
  io_ok = out.write(cfg.output.curves,
                    [&](std::ostream& os) { write_report_csv(report, os); }) &&
          io_ok;
  if (!io_ok) return 3;
  if (report.verdict == Verdict::pass) {
    std::cout << "verify-moment: pass\n";
    return 0;
  }
  std::cout << "verify-moment: fail at t = " << report.t_star << "\n";
  return 1;
}

int run_verify_pathwise(const ExperimentConfig& cfg, const SimConfig& sim, OutputWriter& out) {
  const ModelSpec model_a = build_model(cfg.model);
  const ModelSpec model_b = build_model(cfg.model_b ? *cfg.model_b : cfg.model);
  const InitialCondition init_a = build_init(cfg.init);
  const InitialCondition init_b = build_init(cfg.init_b ? *cfg.init_b : cfg.init);
  const LipschitzProfile profile = resolve_profile(cfg, model_a);
  std::pair<PathEnsemble, PathEnsemble> coupled;
  try {
    coupled = simulate_coupled(model_a, model_b, init_a, init_b, sim);
  } catch (const BlowUpError& e) {
    std::cout << "verify-pathwise: blow-up at t = " << e.time() << "\n";
    return 2;
  }
  const PathwiseCertificate cert =
      certify_pathwise(coupled.first, coupled.second, profile, cfg.p, cfg.q,
                       build_envelope(*cfg.envelope), *cfg.window);
  ordered_json j;
  j["task"] = "verify-pathwise";
  const char* status = cert.status == PathwiseCertificate::Status::pass
                           ? "pass"
                           : (cert.status == PathwiseCertificate::Status::fail ? "fail"
                                                                               : "refused");
  j["status"] = status;
  j["certified_exponent"] = cert.certified_exponent;
  j["order"] = cert.order;
  if (cert.status != PathwiseCertificate::Status::refused) {
    j["empirical_max"] = cert.empirical_max;
    j["empirical_mean"] = cert.empirical_mean;
    j["excluded_paths"] = cert.n_excluded;
  } else {
    j["violated_at"] = cert.envelope_violation_time;
  }
  if (!out.write(cfg.output.report, [&](std::ostream& os) { os << j.dump(2) << "\n"; })) return 3;
  std::cout << "verify-pathwise: " << status << " (certified " << cert.certified_exponent
            << ", empirical max " << cert.empirical_max << ")\n";
  switch (cert.status) {
    case PathwiseCertificate::Status::pass: return 0;
    case PathwiseCertificate::Status::fail: return 1;
    case PathwiseCertificate::Status::refused: return 2;
  }
  return 1;
}

int run_bihari(const ExperimentConfig& cfg, OutputWriter& out) {
  BoundInputs inputs;
  inputs.initial = cfg.bihari->initial;
  inputs.additive = cfg.bihari->additive;
  inputs.gain = cfg.bihari->gain;
  inputs.rho0 = build_rho0(*cfg.bihari);
  const SecondMomentBound bound = second_moment_bound(inputs, cfg.grid);
  ordered_json j;
  j["task"] = "bihari";
  j["status"] = "ok";
  if (std::isinf(bound.t0_plus))
    j["t0_plus"] = nullptr;
  else
    j["t0_plus"] = bound.t0_plus;
  bool io_ok = out.write(cfg.output.report, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  io_ok = out.write(cfg.output.curves,
                    [&](std::ostream& os) { write_curve_csv(bound.bound, os, "bound"); }) &&
          io_ok;
  if (!io_ok) return 3;
  std::cout << "bihari: bound computed, t0_plus = "
            << (std::isinf(bound.t0_plus) ? std::string("inf") : std::to_string(bound.t0_plus))
            << "\n";
  return 0;
}

}  // namespace

int run_experiment(ExperimentConfig cfg, const std::string& output_dir,
                   const RunOverrides& overrides) {
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.seed) cfg.seed = *overrides.seed;

  SimConfig sim;
  sim.grid = cfg.grid;
  sim.n_particles = cfg.particles;
  sim.seed = cfg.seed;
  sim.threads = cfg.threads;

  OutputWriter out(output_dir);
  switch (cfg.task) {
    case Task::simulate: return run_simulate(cfg, sim, out);
    case Task::picard: return run_picard(cfg, sim, out);
    case Task::certify: return run_certify(cfg, out);
    case Task::verify_moment: return run_verify_moment(cfg, sim, out);
    case Task::verify_pathwise: return run_verify_pathwise(cfg, sim, out);
    case Task::bihari: return run_bihari(cfg, out);
  }
  return 3;
}

}  // namespace mvsde
