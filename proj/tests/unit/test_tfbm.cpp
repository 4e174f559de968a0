#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "caputo_ms/diagnostics.hpp"
#include "caputo_ms/ensemble.hpp"
#include "caputo_ms/errors.hpp"
#include "caputo_ms/tfbm.hpp"
#include "oracle_values.hpp"

using namespace caputo_ms;

namespace {

// Bessel-K form of the covariance density.
double phi_bessel(double gap, double h, double lam) {
  const double c = 1.0 / std::sqrt(std::numbers::pi);
  const double t1 = c * std::pow(gap / (2 * lam), h - 1) * std::tgamma(h - 0.5) *
                    boost::math::cyl_bessel_k(1 - h, lam * gap);
  const double t2 = c * std::pow(gap / (2 * lam), h) * std::tgamma(h + 0.5) * boost::math::cyl_bessel_k(h, lam * gap);
  return (h - 0.5) * (h - 0.5) * t1 - lam * lam * t2;
}

double variance_bessel(double t, double h, double lam) {
  return 2 * std::tgamma(2 * h) / std::pow(2 * lam, 2 * h) -
         2 * std::tgamma(h + 0.5) / std::sqrt(std::numbers::pi) * std::pow(t / (2 * lam), h) *
             boost::math::cyl_bessel_k(h, lam * t);
}

}  // namespace

TEST(Phi, Oracles) {
  EXPECT_NEAR(phi_eval({0.75, 0.0}, 1.0), oracle::kPhiH075Lam0Gap1, 1e-13);
  EXPECT_NEAR(phi_eval({0.7, 1.0}, 0.1), oracle::kPhiH07Lam1Gap01, 1e-12);
  EXPECT_NEAR(phi_eval({0.7, 1.0}, 1.0), oracle::kPhiH07Lam1Gap1, 1e-12);
  EXPECT_NEAR(phi_eval({0.6, 2.0}, 0.5), oracle::kPhiH06Lam2Gap05, 1e-12);
}

TEST(Phi, MatchesBesselForm) {
  for (double h : {0.55, 0.7, 0.9})
    for (double lam : {0.3, 1.0, 3.0})
      for (double g : {0.01, 0.2, 1.0, 4.0}) {
        const double ref = phi_bessel(g, h, lam);
        EXPECT_NEAR(phi_eval({h, lam}, g), ref, 1e-9 * std::abs(phi_upper_bound({h, lam}, g))) << h << ' ' << lam << ' ' << g;
      }
}

TEST(Phi, FbmLimitAndDominance) {
  for (double h : {0.6, 0.75, 0.9})
    for (double g : {0.1, 0.5, 1.0, 5.0}) {
      const NoiseParams n0{h, 0.0};
      EXPECT_NEAR(phi_eval(n0, g), phi_upper_bound(n0, g), 1e-6 * phi_upper_bound(n0, g));
      for (double lam : {0.5, 1.0, 2.0}) EXPECT_LT(phi_eval({h, lam}, g), phi_upper_bound({h, lam}, g));
    }
  EXPECT_NEAR(fbm_density_constant({0.75, 1.0}), 0.0625 * oracle::kBeta025_05, 1e-14);
  EXPECT_THROW(phi_eval({0.7, 1.0}, 0.0), DomainError);
}

TEST(Phi, ValidatesParameters) {
  EXPECT_THROW((NoiseParams{0.5, 1.0}).validate(), ParameterError);
  EXPECT_THROW((NoiseParams{1.0, 1.0}).validate(), ParameterError);
  EXPECT_THROW((NoiseParams{0.7, -0.1}).validate(), ParameterError);
}

TEST(Tfbm, Variance) {
  EXPECT_NEAR(tfbm_variance({0.7, 1.0}, 1.0), oracle::kVarB1H07Lam1, 1e-11);
  for (double t : {0.5, 2.0, 5.0}) {
    const double ref = variance_bessel(t, 0.7, 1.0);
    EXPECT_NEAR(tfbm_variance({0.7, 1.0}, t), ref, 1e-9 * ref);
  }
  const double h = 0.75;
  EXPECT_NEAR(tfbm_variance({h, 0.0}, 2.0), fbm_density_constant({h, 0.0}) * std::pow(2.0, 2 * h) / (h * (2 * h - 1)),
              1e-9);
}

TEST(IncrementCov, EntriesAndFactor) {
  const IncrementCovariance cov({0.7, 1.0}, TimeGrid(1.0, 1.0 / 256.0));
  EXPECT_NEAR(cov(0, 0), oracle::kIncrementCovC0, 1e-12 * oracle::kIncrementCovC0);
  EXPECT_NEAR(cov(3, 4), oracle::kIncrementCovC1, 1e-11 * oracle::kIncrementCovC1);
  EXPECT_NEAR(cov(10, 3), oracle::kIncrementCovC7, 1e-10 * oracle::kIncrementCovC7);
  const Eigen::MatrixXd c = cov.dense();
  const Eigen::MatrixXd l = cov.factor();
  EXPECT_LT((l * l.transpose() - c).cwiseAbs().maxCoeff(), 1e-15 + 1e-6 * cov.jitter() + 1e-12 * c(0, 0));
  // Sum of the leading block is Var B(t).
  const std::size_t k = 128;
  EXPECT_NEAR(c.topLeftCorner(k, k).sum(), tfbm_variance({0.7, 1.0}, 0.5), 1e-8);
  const IncrementCovariance lead = cov.leading(64);
  EXPECT_EQ(lead.size(), 64u);
  EXPECT_EQ(lead(2, 5), cov(2, 5));
  EXPECT_EQ(lead.factor()(10, 3), cov.factor()(10, 3));
}

TEST(IncrementCov, SamplingIsDeterministicAndUnbiased) {
  const NoiseParams n{0.7, 1.0};
  const IncrementCovariance cov(n, TimeGrid(1.0, 1.0 / 64.0));
  const auto a = sample_increments(cov, 2, 7, 0, 32, 5);
  const auto b = sample_increments(cov, 2, 7, 0, 32, 5);
  const auto c = sample_increments(cov, 2, 7, 1, 32, 5);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a[3].increments, b[3].increments);
  EXPECT_NE(a[3].increments, c[3].increments);
  EXPECT_EQ(a[3].replicate, 35u);
  // A replicate does not depend on its batch position.
  const auto d = sample_increments(cov, 2, 7, 0, 35, 1);
  EXPECT_EQ(d[0].increments, a[3].increments);

  const std::size_t reps = 20000;
  const auto paths = sample_paths(cov, reps, 11, 1, 2);
  double s = 0.0, s2 = 0.0;
  for (const auto& p : paths) {
    const double v = p(64) * p(64);
    s += v;
    s2 += v * v;
  }
  const double mean = s / reps;
  const double se = std::sqrt((s2 / reps - mean * mean) / reps);
  EXPECT_NEAR(mean, tfbm_variance(n, 1.0), 4 * se);
  EXPECT_EQ(paths[5].grid.nodes(), 65u);
  EXPECT_EQ(paths[5](0), 0.0);
}

TEST(Tfbm, ConvolutionVarianceOracles) {
  const NoiseParams n{0.7, 1.0};
  EXPECT_NEAR(convolution_variance({0.75, 4.0}, n, 0.5), oracle::kConvVarBaselineT05, 1e-8);
  EXPECT_NEAR(convolution_variance({0.75, 4.0}, n, 1.0), oracle::kConvVarBaselineT1, 1e-8);
  EXPECT_NEAR(convolution_variance({0.75, 4.0}, n, 2.0), oracle::kConvVarBaselineT2, 1e-8);
  EXPECT_NEAR(convolution_variance({0.75, 1.0}, n, 1.0), oracle::kConvVarRho1T1, 1e-8);
  EXPECT_LT(convolution_variance({0.75, 1.0}, n, 1e-10), 1e-7);
  EXPECT_THROW(convolution_variance({0.75, 1.0}, n, 0.0), DomainError);
  // Dominated by the lambda = 0 density integrated over the quadrant.
  const double m = m_rho_alpha_h({0.75, 4.0}, n).time_domain;
  EXPECT_LT(oracle::kConvVarBaselineT2, fbm_density_constant(n) * m / std::pow(std::tgamma(0.75), 2));
}

TEST(Tfbm, IsometryClosureAtUnitRate) {
  Model m;
  m.frac = {0.75, 1.0};
  m.noise = {0.7, 1.0};
  m.field = zero_field(1);
  const std::vector<double> zero{0.0};
  MonteCarlo mc;
  mc.reps = 10000;
  const MomentSeries s = estimate_moments(m, zero, BasePoint{}, TimeGrid(1.0, 1.0 / 256), mc);
  EXPECT_NEAR(s.msq.back(), oracle::kConvVarRho1T1, 3 * s.se.back());
}

TEST(Tfbm, MRhoAlphaHAgreesWithClosedForm) {
  for (double a : {0.6, 0.75, 0.9})
    for (double h : {0.6, 0.75, 0.9})
      for (double rho : {1.0, 4.0}) {
        const MRhoAlphaH m = m_rho_alpha_h({a, rho}, {h, 1.0});
        const double closed = std::pow(rho, 2 - 2 * a - 2 * h) * std::pow(2.0, 1 - 2 * a) * std::tgamma(2 * a + 2 * h - 2) *
                              boost::math::beta(h - 0.5, a);
        EXPECT_NEAR(m.time_domain, closed, 1e-6 * closed) << a << ' ' << h << ' ' << rho;
        EXPECT_NEAR(m.spectral, closed, 1e-6 * closed);
      }
  EXPECT_NEAR(m_rho_alpha_h({0.75, 1.0}, {0.75, 1.0}).spectral, std::numbers::pi, 1e-9);
  const double h = 0.7;
  EXPECT_NEAR(parseval_constant({h, 1.0}), std::tgamma(2 * h - 1) * std::sin(std::numbers::pi * h) / std::numbers::pi,
              1e-15);
}
