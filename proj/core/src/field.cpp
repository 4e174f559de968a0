#include "caputo_ms/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "caputo_ms/errors.hpp"

namespace caputo_ms {

namespace {
void check_dim(std::size_t dim) {
  if (dim == 0) throw ParameterError("field dimension must be positive");
}
}  // namespace

VectorField zero_field(std::size_t dim) {
  check_dim(dim);
  VectorField g;
  g.name = "zero";
  g.dim = dim;
  g.evaluate = [](std::span<const double>, BasePoint, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  return g;
}

VectorField constant_field(std::size_t dim, double value) {
  check_dim(dim);
  VectorField g;
  g.name = "constant";
  g.dim = dim;
  g.evaluate = [value](std::span<const double>, BasePoint, std::span<double> out) {
    std::fill(out.begin(), out.end(), value);
  };
  g.g00_sq = static_cast<double>(dim) * value * value;
  return g;
}

VectorField linear_decay(std::size_t dim, double kappa) {
  check_dim(dim);
  if (!(kappa >= 0.0)) throw ParameterError("linear decay rate must be non-negative");
  VectorField g;
  g.name = "linear";
  g.dim = dim;
  g.evaluate = [kappa](std::span<const double> x, BasePoint, std::span<double> out) {
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = -kappa * x[c];
  };
  g.lipschitz = kappa * kappa;
  return g;
}

VectorField rotation_forced(std::size_t dim, double kappa, double amplitude) {
  check_dim(dim);
  if (!(kappa >= 0.0)) throw ParameterError("decay rate must be non-negative");
  VectorField g;
  g.name = "rotation";
  g.dim = dim;
  g.evaluate = [kappa, amplitude](std::span<const double> x, BasePoint p, std::span<double> out) {
    const double force = amplitude * std::sin(p.angle());
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = -kappa * x[c] + force;
  };
  // (a + b)^2 <= 2a^2 + 2b^2 and |sin p - sin q| <= d(p, q).
  g.lipschitz = 2.0 * std::max(kappa * kappa, static_cast<double>(dim) * amplitude * amplitude);
  g.depends_on_base = amplitude != 0.0;
  return g;
}

LipschitzCheck check_lipschitz(const VectorField& g, std::size_t samples, std::uint64_t seed, double scale,
                               double slack) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-scale, scale);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> x(g.dim), y(g.dim), gx(g.dim), gy(g.dim);
  LipschitzCheck out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t c = 0; c < g.dim; ++c) {
      x[c] = coord(rng);
      y[c] = coord(rng);
    }
    const BasePoint p(angle(rng)), q(angle(rng));
    g(x, p, gx);
    g(y, q, gy);
    double lhs = 0.0, dx = 0.0;
    for (std::size_t c = 0; c < g.dim; ++c) {
      lhs += (gx[c] - gy[c]) * (gx[c] - gy[c]);
      dx += (x[c] - y[c]) * (x[c] - y[c]);
    }
    const double d = dist(p, q);
    const double rhs = g.lipschitz * dx + g.lipschitz * d * d;
    out.worst_excess = std::max(out.worst_excess, lhs - rhs);
    if (lhs > rhs + slack * std::max(1.0, rhs)) out.ok = false;
  }
  return out;
}

}  // namespace caputo_ms
