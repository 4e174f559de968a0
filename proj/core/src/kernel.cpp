#include "caputo_ms/kernel.hpp"

#include <cmath>
#include <string>

#include "caputo_ms/errors.hpp"
#include "caputo_ms/special.hpp"

namespace caputo_ms {

void FracParams::validate() const {
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw ParameterError("alpha must lie in (1/2, 1], got " + std::to_string(alpha));
  if (!(varrho > 0.0) || !std::isfinite(varrho))
    throw ParameterError("varrho must be positive, got " + std::to_string(varrho));
}

double kernel_eval(const FracParams& p, double lag) {
  p.validate();
  if (!(lag > 0.0)) throw DomainError("kernel lag must be positive, got " + std::to_string(lag));
  return std::pow(lag, p.alpha - 1.0) * std::exp(-p.varrho * lag) / std::tgamma(p.alpha);
}

double kernel_eval(const FracParams& p, double t, double s) { return kernel_eval(p, t - s); }

double kernel_mass(const FracParams& p, double t) {
  p.validate();
  if (!(t >= 0.0)) throw DomainError("kernel_mass needs t >= 0");
  return std::pow(p.varrho, -p.alpha) * gamma_p(p.alpha, p.varrho * t);
}

double kernel_lag_integral(const FracParams& p, double lo, double hi) {
  p.validate();
  if (!(lo >= 0.0 && hi >= lo)) throw DomainError("kernel_lag_integral needs 0 <= lo <= hi");
  if (p.degenerate())
    return (std::exp(-p.varrho * lo) - std::exp(-p.varrho * hi)) / p.varrho;
  return std::pow(p.varrho, -p.alpha) * gamma_p_increment(p.alpha, p.varrho * lo, p.varrho * hi);
}

KernelWeights::KernelWeights(const FracParams& p, const TimeGrid& grid) : params_(p), grid_(grid) {
  p.validate();
  lag_.resize(grid.steps());
  const double h = grid.dt();
  for (std::size_t m = 0; m < lag_.size(); ++m)
    lag_[m] = kernel_lag_integral(p, static_cast<double>(m) * h, static_cast<double>(m + 1) * h);
}

double KernelWeights::row_sum(std::size_t k) const {
  double s = 0.0;
  for (std::size_t m = k; m-- > 0;) s += lag_[m];
  return s;
}

KernelWeights build_weights(const FracParams& p, const TimeGrid& grid) { return KernelWeights(p, grid); }

double contraction_ratio(const FracParams& p, double lipschitz) {
  p.validate();
  if (!(lipschitz >= 0.0)) throw ParameterError("Lipschitz constant must be non-negative");
  return 6.0 * lipschitz * std::pow(2.0, p.alpha) / std::pow(p.varrho, 2.0 * p.alpha);
}

std::optional<double> series_multiplier(double q) {
  if (!(q >= 0.0) || q >= 1.0) return std::nullopt;
  return 1.0 + q / (1.0 - q);
}

std::optional<double> series_bound(const FracParams& p, double lipschitz, double m2, double initial_msq, double t) {
  if (!(m2 >= 0.0) || !(initial_msq >= 0.0)) throw DomainError("series_bound needs M2 >= 0 and E|x0|^2 >= 0");
  const auto mult = series_multiplier(contraction_ratio(p, lipschitz));
  if (!mult) return std::nullopt;
  return (3.0 * std::exp(-0.5 * p.varrho * t) * initial_msq + m2) * *mult;
}

}  // namespace caputo_ms
