#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "mvsde/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mvsde: mean-field SDE laboratory"};
  std::string config_path;
  std::string output_dir = ".";
  unsigned threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
  app.add_option("--output-dir", output_dir, "directory for report and curve files");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: all cores)");
  auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
  CLI11_PARSE(app, argc, argv);

  std::ifstream is(config_path, std::ios::binary);
  if (!is) {
    std::cerr << "error: cannot read " << config_path << "\n";
    return 3;
  }
  std::ostringstream text;
  text << is.rdbuf();

  mvsde::ExperimentConfig config;
  try {
    config = mvsde::parse_config(text.str());
  } catch (const mvsde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  }

  mvsde::RunOverrides overrides;
  if (threads_opt->count() > 0) overrides.threads = threads;
  if (seed_opt->count() > 0) overrides.seed = seed;

  try {
    return mvsde::run_experiment(std::move(config), output_dir, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
