#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "caputo_ms/driving.hpp"
#include "caputo_ms/field.hpp"
#include "caputo_ms/grid.hpp"
#include "caputo_ms/kernel.hpp"
#include "caputo_ms/path.hpp"
#include "caputo_ms/tfbm.hpp"

namespace caputo_ms {

struct Model {
  FracParams frac;
  NoiseParams noise;
  VectorField field;
  DrivingSystem driving;

  void validate() const;
  std::size_t dim() const { return field.dim; }
};

// Forcing f tabulated on a grid, f[k * dim + c], paired with a base point.
struct CocycleState {
  TimeGrid grid;
  std::size_t dim = 1;
  std::vector<double> f;
  BasePoint base;

  double operator()(std::size_t k, std::size_t c = 0) const { return f[k * dim + c]; }
};

// f(t) = x0 exp(-varrho t)
CocycleState exponential_forcing(const FracParams& p, std::span<const double> x0, BasePoint p0, const TimeGrid& grid);

inline constexpr double kDivergenceThreshold = 1e12;

// Explicit product-integration scheme for x(t) = f(t) + int_0^t a(t,s) [g(x(s), theta_s p) ds + dB(s)]:
//   x_k = f_k + sum_{j<k} w[k][j] (g(x_j, theta_{t_j} p) + dB_j / dt).
// Holds the kernel weights of one grid; every call reuses them.
class PathSolver {
 public:
  PathSolver(const Model& model, const TimeGrid& grid);

  const Model& model() const { return model_; }
  const TimeGrid& grid() const { return grid_; }
  const KernelWeights& weights() const { return weights_; }

  // Solves on the first `steps` steps. `drive`, if given, receives
  // u_j = g(x_j, theta_{t_j} p) + dB_j / dt for j < steps.
  SamplePath solve(const CocycleState& state, std::size_t steps, const IncrementPath* noise,
                   std::vector<double>* drive = nullptr) const;

  // (T_tau f)(theta) at tau = t_{k_tau}, theta = t_{k_theta}; out[i * dim + c].
  std::vector<double> cocycle(const CocycleState& state, std::size_t k_tau, std::span<const std::size_t> k_thetas,
                              const IncrementPath* noise) const;

  // Same, given the drive of a path already solved to k_tau.
  std::vector<double> cocycle_from_drive(const CocycleState& state, std::size_t k_tau,
                                         std::span<const std::size_t> k_thetas, std::span<const double> drive) const;

  // (T_tau f, theta_tau p) on the grid shifted by tau.
  CocycleState skew(const CocycleState& state, std::size_t k_tau, const IncrementPath* noise) const;

 private:
  void check_state(const CocycleState& state) const;
  void check_noise(const IncrementPath* noise, std::size_t steps) const;

  Model model_;
  TimeGrid grid_;
  KernelWeights weights_;
};

SamplePath solve_fsde(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                      const IncrementPath* noise);
SamplePath solve_volterra(const Model& model, const CocycleState& state, const TimeGrid& grid,
                          const IncrementPath* noise);
std::vector<double> cocycle_apply(const Model& model, const CocycleState& state, double tau,
                                  std::span<const double> thetas, const IncrementPath* noise);
CocycleState skew_product(const Model& model, const CocycleState& state, double tau, const IncrementPath* noise);

}  // namespace caputo_ms
