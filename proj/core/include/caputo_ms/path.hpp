#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "caputo_ms/grid.hpp"

namespace caputo_ms {

// One realization on a grid; values are node-major, values[k * dim + c].
struct SamplePath {
  TimeGrid grid;
  std::size_t dim = 1;
  std::vector<double> values;
  std::uint64_t replicate = 0;

  double operator()(std::size_t k, std::size_t c = 0) const { return values[k * dim + c]; }
  double norm_sq(std::size_t k) const {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += values[k * dim + c] * values[k * dim + c];
    return s;
  }
};

// Noise increments dB_j = B(t_{j+1}) - B(t_j), increments[j * dim + c].
struct IncrementPath {
  TimeGrid grid;
  std::size_t dim = 1;
  std::vector<double> increments;
  std::uint64_t replicate = 0;

  double operator()(std::size_t j, std::size_t c = 0) const { return increments[j * dim + c]; }
  std::size_t steps() const { return dim == 0 ? 0 : increments.size() / dim; }
};

}  // namespace caputo_ms
