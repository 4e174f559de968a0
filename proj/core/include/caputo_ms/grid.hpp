#pragma once

#include <cstddef>

namespace caputo_ms {

// Uniform grid t_k = k * dt, k = 0..steps.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, double dt);

  static TimeGrid from_steps(std::size_t steps, double dt);

  double dt() const { return dt_; }
  std::size_t steps() const { return steps_; }
  std::size_t nodes() const { return steps_ + 1; }
  double horizon() const { return static_cast<double>(steps_) * dt_; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt_; }

  // Index of the node at time t; throws DomainError when t is not a node.
  std::size_t node_of(double t) const;
  bool is_node(double t) const;

  // Grid with the same step and fewer (or equal) steps.
  TimeGrid prefix(std::size_t steps) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double dt_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace caputo_ms
