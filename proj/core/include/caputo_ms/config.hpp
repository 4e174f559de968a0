#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "caputo_ms/solver.hpp"

namespace caputo_ms {

struct ExperimentConfig {
  FracParams frac{0.75, 4.0};
  NoiseParams noise{0.7, 1.0};
  std::size_t dim = 1;
  std::string field = "linear";  // zero | constant | linear | rotation
  double kappa = 0.5;
  double constant = 0.0;
  double amplitude = 0.0;
  double omega = 1.0;
  double horizon = 8.0;
  double dt = 1.0 / 256.0;
  std::size_t reps = 10000;
  std::uint64_t seed = 42;
  std::vector<std::string> checks;
  std::vector<double> x0{1.0};
  std::vector<double> base_points{0.0};
  std::size_t paths = 4;
  std::vector<double> verify_times{0.5, 1.0, 2.0};
  double absorbing_factor = 100.0;
  double modulus_t = 1.0;
  std::vector<double> modulus_thetas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
  double lemma42_t = 1.0;
  std::vector<double> lemma42_thetas{0.25, 0.5, 1.0, 2.0};
  double equilip_t = 1.0;
  double equilip_theta = 1.0;
  std::vector<double> equilip_deltas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
  double cocycle_tau = 0.5;
  double cocycle_sigma = 0.5;
  std::vector<double> cocycle_thetas{0.0, 0.5, 1.0};
  std::size_t cocycle_reps = 20000;
  std::vector<double> omega_snapshots{2.0, 4.0};
  std::size_t omega_nmax = 2;
  std::filesystem::path output = "out";

  // Range checks on every field; throws ConfigError.
  void validate() const;
  Model model() const;
  TimeGrid grid() const;
  std::vector<BasePoint> bases() const;

  // Canonical key = value text of the semantic fields, one per line.
  std::string canonical() const;
  // FNV-1a of canonical(), 16 hex digits.
  std::string hash() const;
};

// Every check name the runner understands, in execution order.
const std::vector<std::string>& known_checks();

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace caputo_ms
