#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "caputo_ms/ensemble.hpp"
#include "caputo_ms/solver.hpp"

namespace caputo_ms {

struct MomentSeries {
  TimeGrid grid;
  std::vector<double> msq;
  std::vector<double> se;
  std::size_t reps = 0;
};

MomentSeries estimate_moments(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                              const MonteCarlo& mc, std::shared_ptr<const NoiseContext> context = nullptr);

// One series per scenario; every scenario sees the same replicate noise.
std::vector<MomentSeries> estimate_moments(const Model& model, std::span<const CocycleState> scenarios,
                                           const TimeGrid& grid, const MonteCarlo& mc,
                                           std::shared_ptr<const NoiseContext> context = nullptr);

struct BoundConstants {
  double lipschitz = 0.0;
  double g00_sq = 0.0;
  double m_assumption2 = 0.0;    // M
  double m_rho = 0.0;            // M_{varrho,alpha,H}, time domain
  double m_rho_spectral = 0.0;
  double noise_constant = 0.0;   // (H - 1/2)^2 B(H - 1/2, 2 - 2H)
  double q = 0.0;
  bool applicable = false;       // q < 1
  double multiplier = 0.0;       // 1 + q / (1 - q); infinite when q >= 1
  double m2 = 0.0;
  double r_star_sq = 0.0;        // 2 + 2 M2
  double b_r = 0.0;              // B_R at R = R*
  double b_r_g = 0.0;            // B^g_R at R = R*
  double r_hat_sq = 0.0;
};

BoundConstants compute_constants(const Model& model);

double theorem32_rhs(const BoundConstants& c, const FracParams& p, double initial_msq, double t);
double lemma42_rhs(const BoundConstants& c, const FracParams& p, const NoiseParams& n, double theta);

enum class Verdict { satisfied, violated, inapplicable };
const char* to_string(Verdict v);

struct BoundRow {
  std::string series;  // empty: the report name
  double x = 0.0;      // t or theta
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;
  bool satisfied = true;
};

struct BoundReport {
  std::string name;
  Verdict verdict = Verdict::satisfied;
  std::vector<BoundRow> rows;
  BoundConstants constants;
  std::map<std::string, double> findings;
  std::vector<std::string> notes;

  bool ok() const { return verdict != Verdict::violated; }
};

// Least-squares slope of log(lhs) against log(x) over rows with x > 0.
double loglog_slope(std::span<const double> x, std::span<const double> y);

BoundReport check_theorem32(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                            const MonteCarlo& mc, std::shared_ptr<const NoiseContext> context = nullptr);

// Initial conditions of norm R (spread evenly over coordinates) for every R and base point.
BoundReport absorbing_scan(const Model& model, std::span<const double> radii, std::span<const BasePoint> p0set,
                           const TimeGrid& grid, const MonteCarlo& mc,
                           std::shared_ptr<const NoiseContext> context = nullptr);

// E|x(t + theta) - x(t)|^2 on shared replicates.
BoundReport time_modulus(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                         double t, std::span<const double> thetas, const MonteCarlo& mc,
                         std::shared_ptr<const NoiseContext> context = nullptr);

BoundReport check_lemma42(const Model& model, std::span<const std::vector<double>> x0set,
                          std::span<const BasePoint> p0set, const TimeGrid& grid, double t,
                          std::span<const double> thetas, const MonteCarlo& mc,
                          std::shared_ptr<const NoiseContext> context = nullptr);

// E|chi(t, theta) - chi(t, theta + delta)|^2 with chi(t, .) = T_t(x0 e^{-varrho .}, p0).
BoundReport theta_equilipschitz(const Model& model, std::span<const std::vector<double>> x0set,
                                std::span<const BasePoint> p0set, const TimeGrid& grid, double t, double theta,
                                std::span<const double> deltas, const MonteCarlo& mc,
                                std::shared_ptr<const NoiseContext> context = nullptr);

// E|T_{sigma+tau}(f, p)(theta)|^2 against E|T_sigma(T_tau(f, p), theta_tau p)(theta)|^2, the outer
// stage driven by a fresh noise.
BoundReport cocycle_test(const Model& model, const CocycleState& f0, double tau, double sigma,
                         std::span<const double> thetas, const MonteCarlo& mc);

struct WeightedNorm {
  double alpha = 0.0;
  std::size_t nmax = 0;
  double value = 0.0;
  double tail_bound = 0.0;
};

// E|f(0)|^2 + sum_{N <= nmax} 2^-N N^-2alpha sup_{[1/N, N]} E|f|^2, from second moments sampled at
// increasing points (points[0] == 0).
WeightedNorm weighted_norm_sampled(std::span<const double> points, std::span<const double> msq, double alpha,
                                   std::size_t nmax);
WeightedNorm weighted_norm(const TimeGrid& grid, std::span<const double> msq, double alpha, std::size_t nmax);
WeightedNorm weighted_norm(const CocycleState& f, double alpha, std::size_t nmax);

struct MetricValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

// sum_{n <= nmax} 2^-n rho_n, rho_n = S_n / (1 + S_n), S_n = sup_{[0, n]} E|f - h|^2.
MetricValue metric_rho(const TimeGrid& grid, std::span<const double> diff_msq, std::size_t nmax);
MetricValue metric_rho(const CocycleState& f, const CocycleState& h, std::size_t nmax);

struct OmegaOptions {
  std::size_t nmax = 4;
  std::vector<double> lags = {0.25, 0.5, 1.0};
  std::size_t max_theta_samples = 256;
};

BoundReport omega_limit_proxy(const Model& model, std::span<const std::vector<double>> x0set,
                              std::span<const BasePoint> p0set, const TimeGrid& grid,
                              std::span<const double> snapshots, const MonteCarlo& mc, const OmegaOptions& opt = {},
                              std::shared_ptr<const NoiseContext> context = nullptr);

}  // namespace caputo_ms
