#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "caputo_ms/solver.hpp"
#include "caputo_ms/tfbm.hpp"

namespace caputo_ms {

// Covariance factor L and the noise-convolution matrix (W / dt) L for one grid.
class NoiseContext {
 public:
  NoiseContext(const FracParams& frac, const NoiseParams& noise, const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  const IncrementCovariance& covariance() const { return cov_; }
  // Row k - 1 maps the standard normals to the convolution at node k.
  const Eigen::MatrixXd& convolution() const { return conv_; }
  bool compatible(const FracParams& frac, const NoiseParams& noise, const TimeGrid& grid) const;

 private:
  FracParams frac_;
  NoiseParams noise_;
  TimeGrid grid_;
  IncrementCovariance cov_;
  Eigen::MatrixXd conv_;
};

struct MonteCarlo {
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  std::size_t workers = 0;  // 0: CAPUTO_MS_WORKERS or hardware concurrency
  bool noise = true;
};

// One batch of one scenario, handed to the visitor. Matrices are per
// coordinate and kBatchWidth wide; only the first `count` columns are real
// replicates (first, first + 1, ...).
struct BatchView {
  std::size_t batch = 0;
  std::size_t scenario = 0;
  std::uint64_t first = 0;
  std::size_t count = 0;
  std::size_t steps = 0;
  const std::vector<Eigen::MatrixXd>* x = nullptr;      // (steps + 1) x width
  const std::vector<Eigen::MatrixXd>* drive = nullptr;  // steps x width, g_j + dB_j / dt; null unless requested
};

// Batched replicate solver. All scenarios see the same noise replicates.
class Ensemble {
 public:
  Ensemble(const Model& model, const TimeGrid& grid, std::shared_ptr<const NoiseContext> context = nullptr);

  const Model& model() const { return model_; }
  const TimeGrid& grid() const { return grid_; }
  const KernelWeights& weights() const { return weights_; }
  const std::shared_ptr<const NoiseContext>& context() const { return context_; }

  static std::size_t batch_count(std::size_t reps);

  // Solves every scenario on the first `steps` steps for every replicate.
  // Scenario forcing tables must cover `steps`. The visitor may run
  // concurrently for different batches. Throws DivergenceError naming the
  // diverged replicates after the whole run.
  void run(std::span<const CocycleState> scenarios, std::size_t steps, const MonteCarlo& mc, bool keep_drive,
           const std::function<void(const BatchView&)>& visit) const;

  // Row vector of weights for (T_tau f)(theta) with tau = t_{k_tau}, theta = t_{k_theta}:
  // entry j is w[k_tau + k_theta][j], j < k_tau.
  Eigen::RowVectorXd cocycle_weights(std::size_t k_tau, std::size_t k_theta) const;

 private:
  Model model_;
  TimeGrid grid_;
  KernelWeights weights_;
  Eigen::VectorXd reversed_;  // reversed_[i] = lag(steps - 1 - i)
  std::shared_ptr<const NoiseContext> context_;
};

// Welford accumulator; merge() is Chan's pairwise update.
struct RunningMoments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double y) {
    n += 1.0;
    const double delta = y - mean;
    mean += delta / n;
    m2 += delta * (y - mean);
  }
  void merge(const RunningMoments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * (o.n / total);
    m2 += o.m2 + delta * delta * (n * o.n / total);
    n = total;
  }
  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
  double standard_error() const { return n > 1.0 ? std::sqrt(variance() / n) : 0.0; }
};

}  // namespace caputo_ms
