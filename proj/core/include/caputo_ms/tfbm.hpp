#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "caputo_ms/grid.hpp"
#include "caputo_ms/kernel.hpp"
#include "caputo_ms/path.hpp"

namespace caputo_ms {

// Hurst index H in (1/2, 1) and tempering lambda >= 0 (lambda = 0 is the fBm limit).
struct NoiseParams {
  double hurst = 0.7;
  double lambda = 1.0;

  void validate() const;
};

// Covariance density as a function of the gap |t - s| > 0.
double phi_eval(const NoiseParams& n, double gap);

// (H - 1/2)^2 B(H - 1/2, 2 - 2H), the constant in the lambda = 0 density.
double fbm_density_constant(const NoiseParams& n);

// fbm_density_constant * gap^(2H - 2).
double phi_upper_bound(const NoiseParams& n, double gap);

// Var B(t) = 2 * int_0^t phi(u) (t - u) du.
double tfbm_variance(const NoiseParams& n, double t);

// Increment covariance on a uniform grid. C is Toeplitz and stored by its first
// column; the factor is dense lower-triangular with factor * factor^T = C + jitter I.
class IncrementCovariance {
 public:
  IncrementCovariance() = default;
  IncrementCovariance(const NoiseParams& n, const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  const NoiseParams& params() const { return params_; }
  std::size_t size() const { return autocov_.size(); }

  double operator()(std::size_t i, std::size_t j) const { return autocov_[i > j ? i - j : j - i]; }
  const std::vector<double>& autocovariance() const { return autocov_; }
  const Eigen::MatrixXd& factor() const { return factor_; }
  double jitter() const { return jitter_; }

  Eigen::MatrixXd dense() const;

  // Covariance of the first `steps` increments (leading block; same factor).
  IncrementCovariance leading(std::size_t steps) const;

 private:
  NoiseParams params_;
  TimeGrid grid_;
  std::vector<double> autocov_;
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

IncrementCovariance increment_cov(const NoiseParams& n, const TimeGrid& grid);

// Replicates are generated in fixed-width batches; a replicate's noise depends
// only on (seed, stream, replicate index).
inline constexpr std::size_t kBatchWidth = 32;

// Standard normals for the replicates [first, first + count) of one batch:
// z[c] is steps x kBatchWidth, zero beyond `count` columns.
void standard_normal_batch(std::size_t steps, std::size_t dim, std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t first, std::size_t count, std::vector<Eigen::MatrixXd>& z);

// Increment paths for replicates [first, first + count), count <= kBatchWidth.
std::vector<IncrementPath> sample_increments(const IncrementCovariance& cov, std::size_t dim, std::uint64_t seed,
                                             std::uint64_t stream, std::uint64_t first, std::size_t count);

// B(t_k) = sum_{i<k} dB_i for replicates 0..reps-1.
std::vector<SamplePath> sample_paths(const IncrementCovariance& cov, std::size_t reps, std::uint64_t seed,
                                     std::size_t dim = 1, std::size_t workers = 1);

// int int_{[0,t]^2} a(t,s) a(t,r) phi(|s - r|) ds dr.
double convolution_variance(const FracParams& p, const NoiseParams& n, double t);

struct MRhoAlphaH {
  double time_domain = 0.0;
  double spectral = 0.0;
  double tail_bound = 0.0;  // neglected mass beyond varrho r = 40 in the time-domain route
};

// int int_{[0,inf)^2} e^{-varrho s} e^{-varrho r} s^{alpha-1} r^{alpha-1} |s - r|^{2H-2} ds dr,
// by direct quadrature and through the spectral representation. Throws
// ConsistencyError when the two disagree beyond 1e-4.
MRhoAlphaH m_rho_alpha_h(const FracParams& p, const NoiseParams& n);

// Gamma(2H - 1) sin(pi H) / pi: the constant with
// int int f(s) f(r) |s - r|^{2H-2} = c_H int |xi|^{1-2H} |f^(xi)|^2 dxi.
double parseval_constant(const NoiseParams& n);

}  // namespace caputo_ms
