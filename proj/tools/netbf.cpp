#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "netbf/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Relay network beamforming experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a BLER sweep described by a config file");
  std::string config_path;
  std::uint64_t seed = 0, trials = 0;
  unsigned workers = 0;
  std::string out_dir;
  run->add_option("config", config_path, "Config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "RNG seed");
  auto* trials_opt = run->add_option("--trials", trials, "Trials per power point")->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--out", out_dir, "Output directory");
  auto* workers_opt = run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  netbf::ExperimentConfig cfg;
  try {
    cfg = netbf::load_config(config_path);
  } catch (const netbf::ConfigError& e) {
    std::fprintf(stderr, "%s:%s\n", config_path.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  if (*seed_opt) cfg.seed = seed;
  if (*trials_opt) cfg.trials_per_point = trials;
  if (*out_opt) cfg.output = out_dir;
  if (*workers_opt) cfg.workers = workers;

  try {
    const auto curves = netbf::run(cfg);
    std::fputs(netbf::summary_text(curves, cfg).c_str(), stdout);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: running %s: %s\n", config_path.c_str(), e.what());
    return 1;
  }
  return 0;
}
