#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "caputo_ms/grid.hpp"

namespace caputo_ms {

// Order alpha in (1/2, 1] and tempering rate varrho > 0 of the memory kernel
// a(t, s) = (t - s)^(alpha - 1) exp(-varrho (t - s)) / Gamma(alpha).
struct FracParams {
  double alpha = 0.75;
  double varrho = 1.0;

  void validate() const;
  bool degenerate() const { return alpha == 1.0; }
};

double kernel_eval(const FracParams& p, double lag);
double kernel_eval(const FracParams& p, double t, double s);

// Integral of a(t, s) over s in [0, t]: varrho^-alpha P(alpha, varrho t).
double kernel_mass(const FracParams& p, double t);

// Integral of a over lags in [lo, hi].
double kernel_lag_integral(const FracParams& p, double lo, double hi);

// Product-integration weights. Toeplitz: w[k][j] depends on k - j only, so a
// single column of lag weights is stored.
class KernelWeights {
 public:
  KernelWeights() = default;
  KernelWeights(const FracParams& p, const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  const FracParams& params() const { return params_; }

  // Integral of a(t_k, .) over [t_j, t_{j+1}]; zero for j >= k.
  double operator()(std::size_t k, std::size_t j) const {
    return j < k ? lag_[k - j - 1] : 0.0;
  }
  // lag(m) = integral of a over lags in [m dt, (m + 1) dt].
  double lag(std::size_t m) const { return lag_[m]; }
  const std::vector<double>& lags() const { return lag_; }

  double row_sum(std::size_t k) const;

 private:
  FracParams params_;
  TimeGrid grid_;
  std::vector<double> lag_;
};

KernelWeights build_weights(const FracParams& p, const TimeGrid& grid);

// q = 6 L 2^alpha / varrho^(2 alpha)
double contraction_ratio(const FracParams& p, double lipschitz);

// 1 + sum_{n>=1} q^n, when finite.
std::optional<double> series_multiplier(double q);

// (3 exp(-varrho t / 2) E|x0|^2 + M2) * (1 + q / (1 - q)), or nullopt when q >= 1.
std::optional<double> series_bound(const FracParams& p, double lipschitz, double m2, double initial_msq, double t);

}  // namespace caputo_ms
