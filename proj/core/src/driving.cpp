#include "caputo_ms/driving.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "caputo_ms/errors.hpp"

namespace caputo_ms {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double canonical_angle(double angle) {
  if (!std::isfinite(angle)) throw DomainError("base point angle must be finite");
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

BasePoint::BasePoint(double angle) : angle_(canonical_angle(angle)) {}

double dist(BasePoint p, BasePoint q) {
  const double d = std::abs(p.angle() - q.angle());
  return std::min(d, kTwoPi - d);
}

BasePoint DrivingSystem::flow(double t, BasePoint p) const {
  if (t == 0.0) return p;
  return BasePoint(p.angle() + canonical_angle(omega * t));
}

BasePoint flow(const DrivingSystem& sys, double t, BasePoint p) { return sys.flow(t, p); }

double assumption2_bound(const DrivingSystem& sys, const FracParams& p, double t, BasePoint point,
                         std::size_t cells) {
  p.validate();
  if (!(t >= 0.0)) throw DomainError("assumption2_bound needs t >= 0");
  if (t == 0.0) return 0.0;
  if (cells == 0) throw DomainError("assumption2_bound needs at least one cell");
  const TimeGrid grid = TimeGrid::from_steps(cells, t / static_cast<double>(cells));
  const KernelWeights w(p, grid);
  double sum = 0.0;
  // Cell j is weighted by the norm at its midpoint.
  for (std::size_t j = cells; j-- > 0;) {
    const double norm = sys.embed_norm(sys.flow((static_cast<double>(j) + 0.5) * grid.dt(), point));
    sum += w(cells, j) * norm * norm;
  }
  return sum;
}

double assumption2_constant(const DrivingSystem& sys, const FracParams& p) {
  p.validate();
  return sys.embed_norm_sup * sys.embed_norm_sup * std::pow(p.varrho, -p.alpha);
}

}  // namespace caputo_ms
