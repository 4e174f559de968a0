// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a single criterion.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "caputo_ms/diagnostics.hpp"
#include "caputo_ms/errors.hpp"
#include "caputo_ms/report_io.hpp"
#include "caputo_ms/special.hpp"
#include "caputo_ms/tfbm.hpp"
#include "oracle_values.hpp"

using namespace caputo_ms;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string num(double v) { return format_number(v); }

Model baseline_model() {
  Model m;
  m.frac = {0.75, 4.0};
  m.noise = {0.7, 1.0};
  m.field = linear_decay(1, 0.5);
  m.driving.omega = 1.0;
  return m;
}

const TimeGrid& baseline_grid() {
  static const TimeGrid g(8.0, 1.0 / 256.0);
  return g;
}

std::shared_ptr<const NoiseContext> baseline_context() {
  static const auto ctx = [] {
    const Model m = baseline_model();
    return std::make_shared<const NoiseContext>(m.frac, m.noise, baseline_grid());
  }();
  return ctx;
}

MonteCarlo baseline_mc(std::size_t reps = 10000) {
  MonteCarlo mc;
  mc.reps = reps;
  mc.seed = 42;
  return mc;
}

std::vector<double> dyadic(int lo, int hi) {
  std::vector<double> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

Outcome kernel_exactness() {
  double worst_translation = 0.0, worst_exp = 0.0;
  for (double a : {0.6, 0.75, 0.9, 1.0}) {
    const FracParams p{a, 4.0};
    for (double t : {0.01, 0.3, 1.0, 5.0})
      for (double h : {0.25, 1.0, 10.0}) {
        const double base = kernel_eval(p, t, 0.0);
        worst_translation = std::max(worst_translation, std::abs(kernel_eval(p, t + h, h) - base) / base);
      }
  }
  for (double rho : {0.5, 4.0})
    for (double lag : {1e-3, 0.1, 1.0, 3.0}) {
      const double e = std::exp(-rho * lag);
      worst_exp = std::max(worst_exp, std::abs(kernel_eval(FracParams{1.0, rho}, lag) - e));
    }
  const double mass = kernel_mass({0.75, 2.0}, 10.0);
  const double mass_rel = std::abs(mass - oracle::kKernelMass075Rho2T10) / oracle::kKernelMass075Rho2T10;
  const double m1 = kernel_mass({1.0, 4.0}, 1.5);
  const double m1_rel = std::abs(m1 - (1 - std::exp(-6.0)) / 4.0) / m1;
  Outcome o;
  o.pass = worst_translation <= 1e-12 && worst_exp <= 1e-12 && mass_rel <= 1e-10 && m1_rel <= 1e-10;
  o.detail = "translation rel " + num(worst_translation) + ", alpha=1 abs " + num(worst_exp) + ", mass rel " +
             num(mass_rel) + " / " + num(m1_rel);
  return o;
}

Outcome phi_validation() {
  double worst_rel = 0.0, worst_ratio = 0.0;
  for (double h : {0.6, 0.75, 0.9})
    for (double g : {0.1, 0.5, 1.0, 5.0}) {
      const NoiseParams n0{h, 0.0};
      const double closed = fbm_density_constant(n0) * std::pow(g, 2 * h - 2);
      worst_rel = std::max(worst_rel, std::abs(phi_eval(n0, g) - closed) / closed);
      for (double lam : {0.5, 1.0, 2.0}) {
        const NoiseParams n{h, lam};
        worst_ratio = std::max(worst_ratio, phi_eval(n, g) / phi_upper_bound(n, g));
      }
    }
  return {worst_rel <= 1e-6 && worst_ratio < 1.0,
          "lambda=0 rel " + num(worst_rel) + ", max phi/upper " + num(worst_ratio)};
}

Outcome isometry_closure() {
  Model m = baseline_model();
  m.field = zero_field(1);
  const std::vector<double> zero{0.0};
  const MomentSeries s = estimate_moments(m, zero, BasePoint{}, baseline_grid(), baseline_mc(), baseline_context());
  Outcome o{true, ""};
  for (double t : {0.5, 1.0, 2.0}) {
    const std::size_t k = baseline_grid().node_of(t);
    const double quad = convolution_variance(m.frac, m.noise, t);
    const double z = (s.msq[k] - quad) / s.se[k];
    o.pass = o.pass && std::abs(z) <= 3.0;
    o.detail += "t=" + num(t) + ": mc " + num(s.msq[k]) + " quad " + num(quad) + " z " + num(z) + "; ";
  }
  return o;
}

Outcome parseval_closure() {
  double worst = 0.0;
  for (double a : {0.6, 0.75, 0.9})
    for (double h : {0.6, 0.75, 0.9})
      for (double rho : {1.0, 4.0}) {
        try {
          const MRhoAlphaH m = m_rho_alpha_h({a, rho}, {h, 1.0});
          worst = std::max(worst, std::abs(m.time_domain - m.spectral) / std::abs(m.spectral));
        } catch (const ConsistencyError& e) {
          return {false, e.what()};
        }
      }
  return {worst <= 1e-4, "max relative gap " + num(worst) + " over 18 configurations"};
}

Outcome theorem32_dominance() {
  const std::vector<double> x0{1.0};
  const BoundReport r =
      check_theorem32(baseline_model(), x0, BasePoint{}, baseline_grid(), baseline_mc(), baseline_context());
  std::size_t bad = 0;
  for (const auto& row : r.rows) bad += row.satisfied ? 0 : 1;
  return {r.verdict == Verdict::satisfied && r.rows.size() == baseline_grid().nodes(),
          std::to_string(r.rows.size()) + " nodes, " + std::to_string(bad) + " violations, max lhs/rhs " +
              num(r.findings.at("max_lhs_over_rhs")) + ", q " + num(r.constants.q)};
}

Outcome absorbing_behavior() {
  const Model m = baseline_model();
  const BoundConstants c = compute_constants(m);
  const double radius = std::sqrt(100.0 * c.r_star_sq);
  const std::vector<double> radii{radius};
  std::vector<BasePoint> bases;
  for (int i = 0; i < 8; ++i) bases.emplace_back(2.0 * std::numbers::pi * i / 8.0);
  const BoundReport r = absorbing_scan(m, radii, bases, baseline_grid(), baseline_mc(), baseline_context());
  const std::string k = "[" + num(radius) + "]";
  const double t_hat = r.findings.at("T_hat" + k);
  const auto spread = r.findings.find("T_hat_spread_nodes" + k);
  const double sp = spread == r.findings.end() ? -1.0 : spread->second;
  // After the entry time every node must stay inside.
  bool inside = t_hat >= 0.0;
  for (const auto& row : r.rows)
    if (row.x >= t_hat && !(row.lhs <= row.rhs + 3.0 * row.se)) inside = false;
  return {r.verdict == Verdict::satisfied && inside && sp >= 0.0 && sp <= 1.0,
          "R*^2 " + num(c.r_star_sq) + ", T_hat " + num(t_hat) + ", spread " + num(sp) + " nodes over 8 base points"};
}

Outcome time_modulus_exponent() {
  const std::vector<double> x0{1.0};
  const BoundReport r = time_modulus(baseline_model(), x0, BasePoint{}, baseline_grid(), 1.0, dyadic(3, 8),
                                     baseline_mc(), baseline_context());
  const double slope = r.findings.at("slope");
  return {std::abs(slope - 0.9) <= 0.15, "slope " + num(slope) + ", target 0.9 +- 0.15"};
}

Outcome cocycle_identity() {
  const Model m = baseline_model();
  const std::vector<double> x0{1.0};
  const CocycleState f0 = exponential_forcing(m.frac, x0, BasePoint{}, baseline_grid());
  const std::vector<double> thetas{0.0, 0.5, 1.0};
  const BoundReport r = cocycle_test(m, f0, 0.5, 0.5, thetas, baseline_mc(20000));
  std::string d;
  bool ok = r.rows.size() == 3;
  for (const auto& row : r.rows) {
    const double z = std::abs(row.lhs - row.rhs) / row.se;
    ok = ok && z <= 3.0;
    d += "theta=" + num(row.x) + ": |lhs-rhs|/se " + num(z) + "; ";
  }
  return {ok, d};
}

Outcome theta_equilipschitz_slope() {
  const std::vector<std::vector<double>> x0set{{1.0}};
  const std::vector<BasePoint> bases{BasePoint{}};
  const BoundReport r = theta_equilipschitz(baseline_model(), x0set, bases, baseline_grid(), 1.0, 1.0, dyadic(3, 8),
                                            baseline_mc(), baseline_context());
  const double slope = r.findings.at("slope");
  return {std::abs(slope - 1.5) <= 0.15, "slope " + num(slope) + ", target min(2, 2 alpha) = 1.5 +- 0.15"};
}

Outcome solver_self_convergence() {
  Model m = baseline_model();
  const std::vector<double> x0{1.0};
  const double horizon = 2.0;
  const SamplePath ref = solve_fsde(m, x0, BasePoint{}, TimeGrid(horizon, 1.0 / 8192), nullptr);
  std::vector<double> diffs;
  for (int e = 6; e <= 10; ++e) {
    const TimeGrid g(horizon, std::ldexp(1.0, -e));
    const SamplePath x = solve_fsde(m, x0, BasePoint{}, g, nullptr);
    const std::size_t stride = std::size_t{1} << (13 - e);
    double d = 0.0;
    for (std::size_t k = 0; k < g.nodes(); ++k) d = std::max(d, std::abs(x(k) - ref(k * stride)));
    diffs.push_back(d);
  }
  bool ok = true;
  std::string detail = "max diffs";
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    detail += " " + num(diffs[i]);
    if (i > 0 && !(diffs[i] < diffs[i - 1])) ok = false;
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "caputo_ms_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "baseline.cfg") << "alpha = 0.75\nvarrho = 4\nhurst = 0.7\nlambda = 1\ndim = 1\n"
                                         "field = linear\nfield.kappa = 0.5\nomega = 1\nT = 8\ndt = 1/256\n"
                                         "reps = 10000\nseed = 42\nx0 = 1\n"
                                         "checks = paths, moments, theorem32, time_modulus, lemma42, cocycle\n";
  const std::string cli = CAPUTO_MS_CLI;
  std::vector<int> codes;
  for (int w : {1, 4}) {
    const std::string cmd = cli + " all --config " + (dir / "baseline.cfg").string() + " --out " +
                            (dir / ("w" + std::to_string(w))).string() + " --workers " + std::to_string(w) +
                            " 2>/dev/null";
    codes.push_back(WEXITSTATUS(std::system(cmd.c_str())));
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(dir / "w1")) {
    const auto name = e.path().filename();
    if (name == "meta.json") continue;
    ++compared;
    if (!fs::exists(dir / "w4" / name) || slurp(e.path()) != slurp(dir / "w4" / name)) ++differing;
  }
  return {codes[0] == 0 && codes[1] == 0 && compared >= 7 && differing == 0,
          "exit codes " + std::to_string(codes[0]) + "/" + std::to_string(codes[1]) + ", " + std::to_string(compared) +
              " artifacts compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const std::vector<Criterion> criteria{
      {1, "kernel exactness", 1, kernel_exactness},
      {2, "phi validation", 10, phi_validation},
      {3, "isometry closure", 60, isometry_closure},
      {4, "Parseval closure", 30, parseval_closure},
      {5, "mean-square bound dominance", 120, theorem32_dominance},
      {6, "absorbing behavior", 180, absorbing_behavior},
      {7, "time-modulus exponent", 120, time_modulus_exponent},
      {8, "cocycle second-moment identity", 180, cocycle_identity},
      {9, "theta-equi-Lipschitz slope", 120, theta_equilipschitz_slope},
      {10, "solver self-convergence", 30, solver_self_convergence},
      {11, "determinism across workers", 300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  C" << c.id << " " << c.title << ": " << o.detail << " ["
              << num(secs) << " s, budget " << num(c.budget_s) << " s" << (in_budget ? "" : ", OVER BUDGET") << "]"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
