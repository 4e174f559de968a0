#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "caputo_ms/driving.hpp"

namespace caputo_ms {

// Drift g(x, p) with its declared mean-square Lipschitz constant L:
// |g(x,p) - g(y,q)|^2 <= L |x - y|^2 + L d(p,q)^2.
struct VectorField {
  using Eval = std::function<void(std::span<const double> x, BasePoint p, std::span<double> out)>;

  std::string name;
  std::size_t dim = 1;
  Eval evaluate;
  double lipschitz = 0.0;
  double g00_sq = 0.0;  // |g(0, p_ref)|^2 at angle 0
  bool depends_on_base = false;

  void operator()(std::span<const double> x, BasePoint p, std::span<double> out) const { evaluate(x, p, out); }
};

VectorField zero_field(std::size_t dim);
VectorField constant_field(std::size_t dim, double value);
// g(x, p) = -kappa x
VectorField linear_decay(std::size_t dim, double kappa);
// g(x, p) = -kappa x + amplitude sin(angle) in every coordinate
VectorField rotation_forced(std::size_t dim, double kappa, double amplitude);

struct LipschitzCheck {
  double worst_excess = 0.0;  // max of lhs - rhs over the samples
  bool ok = true;
};

// Samples random pairs (x, p), (y, q) and compares both sides of the Lipschitz bound.
LipschitzCheck check_lipschitz(const VectorField& g, std::size_t samples, std::uint64_t seed, double scale = 10.0,
                               double slack = 1e-9);

}  // namespace caputo_ms
