#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace caputo_ms {

std::uint64_t splitmix64(std::uint64_t& state);

// Independent seed for (master seed, stream tag, replicate index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t replicate);

class ReplicateRng {
 public:
  ReplicateRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t replicate)
      : engine_(derive_seed(seed, stream, replicate)) {}

  double normal() { return normal_(engine_); }
  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace caputo_ms
