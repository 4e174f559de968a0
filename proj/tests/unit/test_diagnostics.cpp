#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "caputo_ms/diagnostics.hpp"
#include "caputo_ms/errors.hpp"
#include "caputo_ms/report_io.hpp"
#include "oracle_values.hpp"

using namespace caputo_ms;

namespace {

Model baseline(double kappa = 0.5) {
  Model m;
  m.frac = {0.75, 4.0};
  m.noise = {0.7, 1.0};
  m.field = linear_decay(1, kappa);
  return m;
}

MonteCarlo small_mc(std::size_t reps = 400) {
  MonteCarlo mc;
  mc.reps = reps;
  mc.seed = 42;
  mc.workers = 2;
  return mc;
}

}  // namespace

TEST(WeightedNorm, MatchesClosedSum) {
  const TimeGrid g(20.0, 0.05);
  const std::vector<double> ones(g.nodes(), 1.0);
  const WeightedNorm w = weighted_norm(g, ones, 0.75, 20);
  EXPECT_NEAR(w.value, 1.0 + oracle::kWeightedSum20Alpha075, 1e-14);
  EXPECT_NEAR(w.tail_bound, std::pow(2.0, -20), 1e-20);
  EXPECT_THROW(weighted_norm(g, ones, 0.75, 21), DomainError);
  EXPECT_THROW(weighted_norm(g, ones, 0.75, 0), DomainError);
}

TEST(WeightedNorm, OfForcing) {
  const FracParams p{0.75, 4.0};
  const TimeGrid g(4.0, 1.0 / 64);
  const std::vector<double> x0{2.0};
  const WeightedNorm w = weighted_norm(exponential_forcing(p, x0, BasePoint{}, g), 0.75, 4);
  // sup over [1/N, N] of 4 e^{-8t} sits at the first node at or after 1/N.
  double ref = 4.0;
  for (int n = 1; n <= 4; ++n)
    ref += std::pow(2.0, -n) * std::pow(n, -1.5) * 4.0 * std::exp(-8.0 * std::ceil(64.0 / n) / 64.0);
  EXPECT_NEAR(w.value, ref, 1e-12);
}

TEST(Metric, Properties) {
  const FracParams p{0.75, 1.0};
  const TimeGrid g(4.0, 1.0 / 16);
  const std::vector<double> a{1.0}, b{3.0};
  const CocycleState f = exponential_forcing(p, a, BasePoint{}, g);
  const CocycleState h = exponential_forcing(p, b, BasePoint{}, g);
  EXPECT_EQ(metric_rho(f, f, 4).value, 0.0);
  const MetricValue m = metric_rho(f, h, 4);
  EXPECT_NEAR(m.value, (0.5 + 0.25 + 0.125 + 0.0625) * 0.8, 1e-14);
  EXPECT_EQ(m.value, metric_rho(h, f, 4).value);
  EXPECT_LT(m.value, 1.0);
  EXPECT_THROW(metric_rho(f, h, 5), DomainError);
}

TEST(Slope, ExactPowerLaw) {
  const std::vector<double> x{0.1, 0.2, 0.4, 0.8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
  EXPECT_NEAR(loglog_slope(x, y), 1.7, 1e-12);
}

TEST(Constants, BaselineRecipe) {
  const BoundConstants c = compute_constants(baseline());
  EXPECT_NEAR(c.q, 1.5 * std::pow(2.0, 0.75) / 8.0, 1e-15);
  EXPECT_TRUE(c.applicable);
  EXPECT_NEAR(c.m_rho, c.m_rho_spectral, 1e-4 * c.m_rho);
  EXPECT_NEAR(c.r_star_sq, 2 + 2 * c.m2, 1e-14);
  EXPECT_NEAR(c.m_assumption2, std::pow(4.0, -0.75), 1e-15);
  EXPECT_GT(c.r_hat_sq, c.r_star_sq);
  EXPECT_NEAR(theorem32_rhs(c, {0.75, 4.0}, 1.0, 0.0), (3.0 + c.m2) * c.multiplier, 1e-12);
}

TEST(Theorem32, HoldsOnSmallRunAndIsInapplicableForLargeQ) {
  const TimeGrid g(2.0, 1.0 / 64);
  const std::vector<double> x0{1.0};
  const BoundReport ok = check_theorem32(baseline(), x0, BasePoint{}, g, small_mc());
  EXPECT_EQ(ok.verdict, Verdict::satisfied);
  EXPECT_EQ(ok.rows.size(), g.nodes());
  const BoundReport na = check_theorem32(baseline(10.0), x0, BasePoint{}, g, small_mc());
  EXPECT_EQ(na.verdict, Verdict::inapplicable);
  EXPECT_TRUE(na.ok());
  EXPECT_TRUE(na.rows.empty());
}

TEST(Absorbing, FindsEntryTime) {
  const TimeGrid g(4.0, 1.0 / 64);
  const std::vector<double> radii{10.0};
  const std::vector<BasePoint> bases{BasePoint(0.0), BasePoint(2.0)};
  const BoundReport r = absorbing_scan(baseline(), radii, bases, g, small_mc());
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  EXPECT_GT(r.findings.at("T_hat[10]"), 0.0);
  EXPECT_EQ(r.findings.at("T_hat_spread_nodes[10]"), 0.0);
}

TEST(TimeModulus, ValidatesThetaSet) {
  const TimeGrid g(2.0, 1.0 / 256);
  const std::vector<double> x0{1.0};
  const std::vector<double> few{0.25, 0.125, 0.0625};
  EXPECT_THROW(time_modulus(baseline(), x0, BasePoint{}, g, 1.0, few, small_mc()), ConfigError);
  const std::vector<double> narrow{0.25, 0.125, 0.0625, 0.03125};
  EXPECT_THROW(time_modulus(baseline(), x0, BasePoint{}, g, 1.0, narrow, small_mc()), ConfigError);
}

TEST(TimeModulus, NoiselessSlopeAtLeastTwoAlpha) {
  const TimeGrid g(2.0, 1.0 / 1024);
  const std::vector<double> x0{1.0};
  std::vector<double> th;
  for (int k = 3; k <= 8; ++k) th.push_back(std::ldexp(1.0, -k));
  MonteCarlo mc = small_mc(2);
  mc.noise = false;
  const BoundReport r = time_modulus(baseline(), x0, BasePoint{}, g, 1.0, th, mc);
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  EXPECT_GE(r.findings.at("slope"), 1.5 - 0.15);
}

TEST(Lemma42, BoundHolds) {
  const TimeGrid g(4.0, 1.0 / 64);
  const std::vector<std::vector<double>> x0set{{1.0}, {-2.0}};
  const std::vector<BasePoint> bases{BasePoint(0.0)};
  const std::vector<double> th{0.0, 0.5, 1.0, 2.0};
  const BoundReport r = check_lemma42(baseline(), x0set, bases, g, 1.0, th, small_mc());
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_LT(r.rows[2].lhs, r.rows[2].rhs);
}

TEST(Cocycle, TauZeroIsExact) {
  const Model m = baseline();
  const TimeGrid g(2.0, 1.0 / 64);
  const std::vector<double> x0{1.0};
  const CocycleState f = exponential_forcing(m.frac, x0, BasePoint{}, g);
  const std::vector<double> th{0.0, 0.5};
  const BoundReport r = cocycle_test(m, f, 0.0, 0.5, th, small_mc(100));
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  for (const auto& row : r.rows) EXPECT_EQ(row.lhs, row.rhs);
}

TEST(Cocycle, SecondMomentsAgree) {
  const Model m = baseline();
  const TimeGrid g(2.0, 1.0 / 64);
  const std::vector<double> x0{1.0};
  const CocycleState f = exponential_forcing(m.frac, x0, BasePoint{}, g);
  const std::vector<double> th{0.0, 0.5, 1.0};
  const BoundReport r = cocycle_test(m, f, 0.5, 0.5, th, small_mc(2000));
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  EXPECT_THROW(cocycle_test(m, f, 0.5, 0.5, std::vector<double>{1.5}, small_mc(10)), DomainError);
}

TEST(OmegaProxy, ContainedInBall) {
  const TimeGrid g(6.0, 1.0 / 32);
  const std::vector<std::vector<double>> x0set{{1.0}};
  const std::vector<BasePoint> bases{BasePoint(0.0)};
  const std::vector<double> snaps{2.0, 4.0};
  OmegaOptions opt;
  opt.nmax = 2;
  const BoundReport r = omega_limit_proxy(baseline(), x0set, bases, g, snaps, small_mc(), opt);
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  EXPECT_EQ(r.findings.at("monotone_containment"), 1.0);
  EXPECT_THROW(omega_limit_proxy(baseline(), x0set, bases, g, std::vector<double>{5.0}, small_mc(), opt),
               DomainError);
}

TEST(ReportIo, Formats) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  BoundReport r;
  r.name = "x";
  r.rows.push_back({"", 0.5, 1.0, 2.0, 0.25, true});
  std::ostringstream os;
  write_report_csv(os, std::span<const BoundReport>(&r, 1));
  EXPECT_EQ(os.str(), "check,t_or_theta,lhs,rhs,se,satisfied\nx,0.5,1,2,0.25,true\n");
}
