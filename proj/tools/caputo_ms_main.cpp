#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "caputo_ms/errors.hpp"
#include "caputo_ms/experiment.hpp"
#include "caputo_ms/version.hpp"

int main(int argc, char** argv) {
  using namespace caputo_ms;
  CLI::App app{"Monte Carlo and quadrature checks for tempered Caputo fractional SDEs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::size_t> reps;
  std::size_t workers = 0;

  for (const char* name : {"sample", "verify", "solve", "check", "all"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file (key = value lines)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides `output`)");
    sub->add_option("--seed", seed, "master seed (overrides `seed`)");
    sub->add_option("--workers", workers, "worker threads; 0 uses CAPUTO_MS_WORKERS or all cores");
    sub->add_option("--dt", dt, "time step (overrides `dt`)");
    sub->add_option("--reps", reps, "Monte Carlo replicates (overrides `reps`)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (seed) cfg.seed = *seed;
    if (dt) cfg.dt = *dt;
    if (reps) cfg.reps = *reps;
    const Subcommand sub = parse_subcommand(app.get_subcommands().front()->get_name());
    return run_experiment(cfg, sub, workers, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
