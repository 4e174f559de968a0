#include "caputo_ms/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caputo_ms/errors.hpp"

namespace caputo_ms {

namespace {
constexpr double kNodeTolerance = 1e-9;
}

TimeGrid::TimeGrid(double horizon, double dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw GridError("grid step must be positive and finite");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw GridError("grid horizon must be non-negative");
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > kNodeTolerance * std::max(1.0, ratio))
    throw GridError("horizon " + std::to_string(horizon) + " is not a multiple of dt " + std::to_string(dt));
  steps_ = static_cast<std::size_t>(steps);
}

TimeGrid TimeGrid::from_steps(std::size_t steps, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw GridError("grid step must be positive and finite");
  TimeGrid g;
  g.dt_ = dt;
  g.steps_ = steps;
  return g;
}

bool TimeGrid::is_node(double t) const {
  if (!(t >= -kNodeTolerance * dt_)) return false;
  const double ratio = t / dt_;
  const double k = std::round(ratio);
  return std::abs(ratio - k) <= kNodeTolerance * std::max(1.0, ratio) && k <= static_cast<double>(steps_);
}

std::size_t TimeGrid::node_of(double t) const {
  if (!is_node(t)) throw DomainError("time " + std::to_string(t) + " is not a node of the grid");
  return static_cast<std::size_t>(std::round(t / dt_));
}

TimeGrid TimeGrid::prefix(std::size_t steps) const {
  if (steps > steps_) throw GridError("prefix longer than grid");
  return from_steps(steps, dt_);
}

}  // namespace caputo_ms
