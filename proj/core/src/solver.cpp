#include "caputo_ms/solver.hpp"

#include <cmath>
#include <string>

#include "caputo_ms/errors.hpp"

namespace caputo_ms {

namespace {

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(a); }

}  // namespace

void Model::validate() const {
  frac.validate();
  noise.validate();
  if (field.dim == 0 || !field.evaluate) throw ParameterError("vector field is not set");
  if (!(field.lipschitz >= 0.0)) throw ParameterError("Lipschitz constant must be non-negative");
}

CocycleState exponential_forcing(const FracParams& p, std::span<const double> x0, BasePoint p0, const TimeGrid& grid) {
  p.validate();
  if (x0.empty()) throw DomainError("initial condition must have positive dimension");
  CocycleState s;
  s.grid = grid;
  s.dim = x0.size();
  s.base = p0;
  s.f.resize(grid.nodes() * s.dim);
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    const double decay = std::exp(-p.varrho * grid.time(k));
    for (std::size_t c = 0; c < s.dim; ++c) s.f[k * s.dim + c] = x0[c] * decay;
  }
  return s;
}

PathSolver::PathSolver(const Model& model, const TimeGrid& grid)
    : model_(model), grid_(grid), weights_(model.frac, grid) {
  model_.validate();
}

void PathSolver::check_state(const CocycleState& state) const {
  if (state.dim != model_.dim())
    throw DomainError("state dimension " + std::to_string(state.dim) + " does not match field dimension " +
                      std::to_string(model_.dim()));
  if (!same_step(state.grid.dt(), grid_.dt())) throw GridError("state grid step differs from the solver grid");
  if (state.grid.steps() > grid_.steps()) throw GridError("state grid is longer than the solver grid");
  if (state.f.size() != state.grid.nodes() * state.dim) throw DomainError("forcing table has the wrong size");
}

void PathSolver::check_noise(const IncrementPath* noise, std::size_t steps) const {
  if (!noise) return;
  if (noise->dim != model_.dim()) throw DomainError("noise dimension does not match the field");
  if (!same_step(noise->grid.dt(), grid_.dt())) throw GridError("noise grid step differs from the solver grid");
  if (noise->steps() < steps)
    throw DomainError("noise covers " + std::to_string(noise->steps()) + " steps, " + std::to_string(steps) +
                      " needed");
}

SamplePath PathSolver::solve(const CocycleState& state, std::size_t steps, const IncrementPath* noise,
                             std::vector<double>* drive) const {
  check_state(state);
  if (steps > state.grid.steps()) throw DomainError("solve horizon exceeds the forcing table");
  check_noise(noise, steps);
  const std::size_t d = state.dim;
  const double h = grid_.dt();
  SamplePath path;
  path.grid = grid_.prefix(steps);
  path.dim = d;
  path.replicate = noise ? noise->replicate : 0;
  path.values.resize((steps + 1) * d);
  std::vector<double> u(steps * d);
  for (std::size_t c = 0; c < d; ++c) path.values[c] = state.f[c];

  const auto& lag = weights_.lags();
  for (std::size_t k = 1; k <= steps; ++k) {
    const std::size_t j = k - 1;
    const BasePoint pj = model_.driving.flow(grid_.time(j), state.base);
    std::span<double> uj(u.data() + j * d, d);
    model_.field(std::span<const double>(path.values.data() + j * d, d), pj, uj);
    if (noise)
      for (std::size_t c = 0; c < d; ++c) uj[c] += (*noise)(j, c) / h;
    double norm_sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += lag[k - i - 1] * u[i * d + c];
      const double x = state.f[k * d + c] + acc;
      path.values[k * d + c] = x;
      norm_sq += x * x;
    }
    if (!std::isfinite(norm_sq) || norm_sq > kDivergenceThreshold * kDivergenceThreshold)
      throw DivergenceError("solution diverged at node " + std::to_string(k) + " (t = " +
                            std::to_string(grid_.time(k)) + ")");
  }
  if (drive) *drive = std::move(u);
  return path;
}

std::vector<double> PathSolver::cocycle_from_drive(const CocycleState& state, std::size_t k_tau,
                                                   std::span<const std::size_t> k_thetas,
                                                   std::span<const double> drive) const {
  const std::size_t d = state.dim;
  const auto& lag = weights_.lags();
  std::vector<double> out(k_thetas.size() * d);
  for (std::size_t i = 0; i < k_thetas.size(); ++i) {
    const std::size_t target = k_tau + k_thetas[i];
    if (target > state.grid.steps())
      throw DomainError("theta = " + std::to_string(grid_.time(k_thetas[i])) + " reaches beyond the forcing table");
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k_tau; ++j) acc += lag[target - j - 1] * drive[j * d + c];
      out[i * d + c] = state.f[target * d + c] + acc;
    }
  }
  return out;
}

std::vector<double> PathSolver::cocycle(const CocycleState& state, std::size_t k_tau,
                                        std::span<const std::size_t> k_thetas, const IncrementPath* noise) const {
  check_state(state);
  if (k_tau > state.grid.steps()) throw DomainError("tau beyond the forcing table");
  std::vector<double> drive;
  solve(state, k_tau, noise, &drive);
  return cocycle_from_drive(state, k_tau, k_thetas, drive);
}

CocycleState PathSolver::skew(const CocycleState& state, std::size_t k_tau, const IncrementPath* noise) const {
  check_state(state);
  if (k_tau > state.grid.steps()) throw DomainError("tau beyond the forcing table");
  const std::size_t rest = state.grid.steps() - k_tau;
  std::vector<std::size_t> thetas(rest + 1);
  for (std::size_t i = 0; i <= rest; ++i) thetas[i] = i;
  CocycleState out;
  out.grid = grid_.prefix(rest);
  out.dim = state.dim;
  out.f = cocycle(state, k_tau, thetas, noise);
  out.base = model_.driving.flow(grid_.time(k_tau), state.base);
  return out;
}

SamplePath solve_fsde(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                      const IncrementPath* noise) {
  return solve_volterra(model, exponential_forcing(model.frac, x0, p0, grid), grid, noise);
}

SamplePath solve_volterra(const Model& model, const CocycleState& state, const TimeGrid& grid,
                          const IncrementPath* noise) {
  const PathSolver solver(model, state.grid);
  if (!same_step(grid.dt(), state.grid.dt())) throw GridError("solve grid step differs from the forcing grid");
  return solver.solve(state, grid.steps(), noise);
}

std::vector<double> cocycle_apply(const Model& model, const CocycleState& state, double tau,
                                  std::span<const double> thetas, const IncrementPath* noise) {
  const PathSolver solver(model, state.grid);
  const std::size_t k_tau = state.grid.node_of(tau);
  std::vector<std::size_t> k_thetas;
  k_thetas.reserve(thetas.size());
  for (double th : thetas) {
    if (!(th >= 0.0)) throw DomainError("theta must be non-negative");
    const double ratio = th / state.grid.dt();
    const double k = std::round(ratio);
    if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio))
      throw DomainError("theta = " + std::to_string(th) + " is not a grid node");
    k_thetas.push_back(static_cast<std::size_t>(k));
  }
  return solver.cocycle(state, k_tau, k_thetas, noise);
}

CocycleState skew_product(const Model& model, const CocycleState& state, double tau, const IncrementPath* noise) {
  const PathSolver solver(model, state.grid);
  return solver.skew(state, state.grid.node_of(tau), noise);
}

}  // namespace caputo_ms
