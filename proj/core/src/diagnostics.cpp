#include "caputo_ms/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "caputo_ms/errors.hpp"
#include "caputo_ms/parallel.hpp"
#include "caputo_ms/report_io.hpp"
#include "caputo_ms/special.hpp"

namespace caputo_ms {

namespace {

constexpr double kSlopeTolerance = 0.15;

std::size_t node_index(const TimeGrid& grid, double t, const char* what) {
  if (!(t >= 0.0)) throw DomainError(std::string(what) + " must be non-negative");
  const double ratio = t / grid.dt();
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio))
    throw DomainError(std::string(what) + " = " + format_number(t) + " is not a grid node");
  return static_cast<std::size_t>(k);
}

std::vector<CocycleState> make_scenarios(const Model& model, std::span<const std::vector<double>> x0set,
                                         std::span<const BasePoint> p0set, const TimeGrid& grid) {
  if (x0set.empty() || p0set.empty()) throw DomainError("empty initial-condition or base-point set");
  std::vector<CocycleState> out;
  for (const auto& x0 : x0set) {
    if (x0.size() != model.dim()) throw DomainError("initial condition dimension does not match the field");
    for (const auto& p0 : p0set) out.push_back(exponential_forcing(model.frac, x0, p0, grid));
  }
  return out;
}

double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

using Slots = std::vector<std::vector<std::vector<RunningMoments>>>;  // [batch][scenario][item]

Slots make_slots(std::size_t batches, std::size_t scenarios, std::size_t items) {
  return Slots(batches, std::vector<std::vector<RunningMoments>>(scenarios, std::vector<RunningMoments>(items)));
}

// Merges batch slots in batch order.
std::vector<std::vector<RunningMoments>> reduce(const Slots& slots) {
  std::vector<std::vector<RunningMoments>> out = slots.front();
  for (auto& s : out)
    for (auto& m : s) m = RunningMoments{};
  for (const auto& batch : slots)
    for (std::size_t s = 0; s < batch.size(); ++s)
      for (std::size_t i = 0; i < batch[s].size(); ++i) out[s][i].merge(batch[s][i]);
  return out;
}

// chi[c](i, r) = (T_{t_kt} f)(theta_i) for the batch.
void evaluate_chi(const BatchView& v, const CocycleState& sc, std::size_t kt, const Eigen::MatrixXd& weights,
                  std::span<const std::size_t> k_thetas, std::vector<Eigen::MatrixXd>& chi) {
  const std::size_t d = sc.dim;
  chi.resize(d);
  const auto kt_i = static_cast<Eigen::Index>(kt);
  for (std::size_t c = 0; c < d; ++c) {
    if (kt > 0)
      chi[c].noalias() = weights * (*v.drive)[c].topRows(kt_i);
    else
      chi[c].setZero(static_cast<Eigen::Index>(k_thetas.size()), static_cast<Eigen::Index>(kBatchWidth));
    for (std::size_t i = 0; i < k_thetas.size(); ++i)
      chi[c].row(static_cast<Eigen::Index>(i)).array() += sc.f[(kt + k_thetas[i]) * d + c];
  }
}

Eigen::MatrixXd cocycle_weight_matrix(const Ensemble& ens, std::size_t kt, std::span<const std::size_t> k_thetas) {
  Eigen::MatrixXd w(static_cast<Eigen::Index>(k_thetas.size()), static_cast<Eigen::Index>(kt));
  for (std::size_t i = 0; i < k_thetas.size(); ++i) w.row(static_cast<Eigen::Index>(i)) = ens.cocycle_weights(kt, k_thetas[i]);
  return w;
}

struct Extremum {
  double value = -std::numeric_limits<double>::infinity();
  double se = 0.0;
  std::size_t scenario = 0;
};

Extremum max_over_scenarios(const std::vector<std::vector<RunningMoments>>& m, std::size_t item) {
  Extremum e;
  for (std::size_t s = 0; s < m.size(); ++s)
    if (m[s][item].mean > e.value) e = {m[s][item].mean, m[s][item].standard_error(), s};
  return e;
}

void require_reps(const MonteCarlo& mc) {
  if (mc.reps < 2) throw DomainError("Monte Carlo estimates need reps >= 2");
}

std::string key(const std::string& name, double v) { return name + "[" + format_number(v) + "]"; }

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "unknown";
}

std::vector<MomentSeries> estimate_moments(const Model& model, std::span<const CocycleState> scenarios,
                                           const TimeGrid& grid, const MonteCarlo& mc,
                                           std::shared_ptr<const NoiseContext> context) {
  require_reps(mc);
  const Ensemble ens(model, grid, std::move(context));
  const std::size_t nodes = grid.nodes();
  const std::size_t d = model.dim();
  Slots slots = make_slots(Ensemble::batch_count(mc.reps), scenarios.size(), nodes);
  ens.run(scenarios, grid.steps(), mc, false, [&](const BatchView& v) {
    auto& acc = slots[v.batch][v.scenario];
    for (std::size_t r = 0; r < v.count; ++r)
      for (std::size_t k = 0; k < nodes; ++k) {
        double y = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double x = (*v.x)[c](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r));
          y += x * x;
        }
        acc[k].add(y);
      }
  });
  const auto total = reduce(slots);
  std::vector<MomentSeries> out(scenarios.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    out[s].grid = grid;
    out[s].reps = mc.reps;
    out[s].msq.resize(nodes);
    out[s].se.resize(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      out[s].msq[k] = total[s][k].mean;
      out[s].se[k] = total[s][k].standard_error();
    }
  }
  return out;
}

MomentSeries estimate_moments(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                              const MonteCarlo& mc, std::shared_ptr<const NoiseContext> context) {
  const CocycleState sc = exponential_forcing(model.frac, x0, p0, grid);
  return estimate_moments(model, std::span<const CocycleState>(&sc, 1), grid, mc, std::move(context)).front();
}

BoundConstants compute_constants(const Model& model) {
  model.validate();
  const FracParams& p = model.frac;
  const NoiseParams& n = model.noise;
  BoundConstants c;
  c.lipschitz = model.field.lipschitz;
  c.g00_sq = model.field.g00_sq;
  c.m_assumption2 = assumption2_constant(model.driving, p);
  const MRhoAlphaH m = m_rho_alpha_h(p, n);
  c.m_rho = m.time_domain;
  c.m_rho_spectral = m.spectral;
  c.noise_constant = fbm_density_constant(n);
  c.q = contraction_ratio(p, c.lipschitz);
  const auto mult = series_multiplier(c.q);
  c.applicable = mult.has_value();
  c.multiplier = mult ? *mult : std::numeric_limits<double>::infinity();
  const double ga = std::tgamma(p.alpha);
  const double ga1 = std::tgamma(p.alpha + 1.0);
  c.m2 = 6.0 * c.lipschitz * c.m_assumption2 / std::pow(p.varrho, p.alpha) +
         6.0 * c.g00_sq / std::pow(p.varrho, 2.0 * p.alpha) + 3.0 * c.noise_constant * c.m_rho / (ga * ga);
  c.r_star_sq = 2.0 + 2.0 * c.m2;
  // B_R: sup over t of theorem32_rhs with E|x0|^2 = R*^2, attained at t = 0.
  c.b_r = (3.0 * c.r_star_sq + c.m2) * c.multiplier;
  // B^g_R from the Lipschitz bound against (0, p_ref): |g(x,p)|^2 <= 2L|x|^2 + 2L d(p, p_ref)^2 + 2|g(0, p_ref)|^2.
  c.b_r_g = 2.0 * c.lipschitz * c.b_r + 2.0 * c.lipschitz * kBaseDiameter * kBaseDiameter + 2.0 * c.g00_sq;
  const double h = n.hurst;
  c.r_hat_sq = 3.0 * c.r_star_sq + 4.0 * c.b_r_g / (ga1 * ga1) +
               4.0 * (h - 0.5) * beta_fn(h - 0.5, 2.0 - 2.0 * h) / (h * ga * ga);
  return c;
}

double theorem32_rhs(const BoundConstants& c, const FracParams& p, double initial_msq, double t) {
  return (3.0 * std::exp(-0.5 * p.varrho * t) * initial_msq + c.m2) * c.multiplier;
}

double lemma42_rhs(const BoundConstants& c, const FracParams& p, const NoiseParams& n, double theta) {
  const double ga = std::tgamma(p.alpha);
  const double ga1 = std::tgamma(p.alpha + 1.0);
  const double h = n.hurst;
  return 4.0 * c.b_r_g * std::pow(theta, 2.0 * p.alpha) / (ga1 * ga1) +
         4.0 * (h - 0.5) * beta_fn(h - 0.5, 2.0 - 2.0 * h) * std::pow(theta, 2.0 * p.alpha + 2.0 * h - 2.0) /
             (h * ga * ga) +
         2.0 * c.r_star_sq;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, n = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1.0;
  }
  if (n < 2.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BoundReport check_theorem32(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                            const MonteCarlo& mc, std::shared_ptr<const NoiseContext> context) {
  BoundReport rep;
  rep.name = "theorem32";
  rep.constants = compute_constants(model);
  if (!rep.constants.applicable) {
    rep.verdict = Verdict::inapplicable;
    rep.notes.push_back("q = " + format_number(rep.constants.q) + " >= 1: the geometric series diverges");
    return rep;
  }
  const MomentSeries m = estimate_moments(model, x0, p0, grid, mc, std::move(context));
  const double x0sq = norm_sq(x0);
  std::size_t violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    BoundRow row;
    row.x = grid.time(k);
    row.lhs = m.msq[k];
    row.rhs = theorem32_rhs(rep.constants, model.frac, x0sq, row.x);
    row.se = m.se[k];
    row.satisfied = row.lhs <= row.rhs + 3.0 * row.se;
    violations += row.satisfied ? 0 : 1;
    worst = std::max(worst, row.lhs / row.rhs);
    rep.rows.push_back(row);
  }
  rep.findings["violations"] = static_cast<double>(violations);
  rep.findings["max_lhs_over_rhs"] = worst;
  rep.verdict = violations == 0 ? Verdict::satisfied : Verdict::violated;
  return rep;
}

BoundReport absorbing_scan(const Model& model, std::span<const double> radii, std::span<const BasePoint> p0set,
                           const TimeGrid& grid, const MonteCarlo& mc, std::shared_ptr<const NoiseContext> context) {
  BoundReport rep;
  rep.name = "absorbing";
  rep.constants = compute_constants(model);
  if (!rep.constants.applicable) {
    rep.verdict = Verdict::inapplicable;
    rep.notes.push_back("q >= 1: no absorbing radius available");
    return rep;
  }
  if (radii.empty()) throw DomainError("absorbing_scan needs at least one radius");
  const std::size_t d = model.dim();
  std::vector<std::vector<double>> x0set;
  for (double r : radii) {
    if (!(r >= 0.0)) throw DomainError("radii must be non-negative");
    x0set.emplace_back(d, r / std::sqrt(static_cast<double>(d)));
  }
  const auto scenarios = make_scenarios(model, x0set, p0set, grid);
  const auto series = estimate_moments(model, scenarios, grid, mc, std::move(context));
  const double level = rep.constants.r_star_sq;
  const std::size_t np = p0set.size();
  bool ok = true;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const std::string label = "absorbing[R=" + format_number(radii[i]) + "]";
    std::size_t worst_node = 0, best_node = std::numeric_limits<std::size_t>::max();
    bool absorbed = true;
    for (std::size_t j = 0; j < np; ++j) {
      const MomentSeries& m = series[i * np + j];
      std::size_t k = grid.nodes();
      while (k > 0 && m.msq[k - 1] <= level + 3.0 * m.se[k - 1]) --k;
      if (k == grid.nodes()) {
        absorbed = false;
        continue;
      }
      worst_node = std::max(worst_node, k);
      best_node = std::min(best_node, k);
    }
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      BoundRow row;
      row.series = label;
      row.x = grid.time(k);
      row.lhs = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < np; ++j) {
        const MomentSeries& m = series[i * np + j];
        if (m.msq[k] > row.lhs) {
          row.lhs = m.msq[k];
          row.se = m.se[k];
        }
      }
      row.rhs = level;
      row.satisfied = row.lhs <= row.rhs + 3.0 * row.se;
      rep.rows.push_back(row);
    }
    const double r = radii[i];
    if (absorbed) {
      rep.findings[key("T_hat", r)] = grid.time(worst_node);
      rep.findings[key("T_hat_spread_nodes", r)] = static_cast<double>(worst_node - best_node);
      if (!model.field.depends_on_base && worst_node - best_node > 1) ok = false;
    } else {
      rep.findings[key("T_hat", r)] = -1.0;
      rep.notes.push_back("R = " + format_number(r) + ": not absorbed within the grid horizon");
      ok = false;
    }
  }
  rep.findings["R_star_sq"] = level;
  rep.verdict = ok ? Verdict::satisfied : Verdict::violated;
  return rep;
}

namespace {

void check_slope_inputs(std::span<const double> xs, const char* what) {
  std::size_t positive = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double x : xs)
    if (x > 0.0) {
      ++positive;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (positive < 4) throw ConfigError(std::string(what) + ": at least 4 positive values are needed for a slope fit");
  if (std::log10(hi / lo) < 1.5 - 1e-9)
    throw ConfigError(std::string(what) + ": values must span at least 1.5 decades");
}

}  // namespace

BoundReport time_modulus(const Model& model, std::span<const double> x0, BasePoint p0, const TimeGrid& grid,
                         double t, std::span<const double> thetas, const MonteCarlo& mc,
                         std::shared_ptr<const NoiseContext> context) {
  require_reps(mc);
  check_slope_inputs(thetas, "time_modulus thetas");
  BoundReport rep;
  rep.name = "time_modulus";
  rep.constants = compute_constants(model);
  const std::size_t kt = node_index(grid, t, "t");
  std::vector<std::size_t> kth;
  for (double th : thetas) kth.push_back(node_index(grid, th, "theta"));
  const std::size_t top = kt + *std::max_element(kth.begin(), kth.end());
  if (top > grid.steps()) throw DomainError("t + theta exceeds the grid horizon");
  const std::size_t d = model.dim();
  const Ensemble ens(model, grid, std::move(context));
  const CocycleState sc = exponential_forcing(model.frac, x0, p0, grid);
  Slots slots = make_slots(Ensemble::batch_count(mc.reps), 1, kth.size());
  ens.run(std::span<const CocycleState>(&sc, 1), top, mc, false, [&](const BatchView& v) {
    auto& acc = slots[v.batch][0];
    for (std::size_t r = 0; r < v.count; ++r)
      for (std::size_t i = 0; i < kth.size(); ++i) {
        double y = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const auto& x = (*v.x)[c];
          const double diff = x(static_cast<Eigen::Index>(kt + kth[i]), static_cast<Eigen::Index>(r)) -
                              x(static_cast<Eigen::Index>(kt), static_cast<Eigen::Index>(r));
          y += diff * diff;
        }
        acc[i].add(y);
      }
  });
  const auto total = reduce(slots);
  const double a = model.frac.alpha, h = model.noise.hurst;
  const double predicted = mc.noise ? std::min({2.0 * a, 2.0 * h + 2.0 * a - 2.0, 2.0}) : std::min(2.0 * a, 2.0);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < kth.size(); ++i) {
    xs.push_back(grid.time(kth[i]));
    ys.push_back(total[0][i].mean);
  }
  const double slope = loglog_slope(xs, ys);
  const bool ok = mc.noise ? std::abs(slope - predicted) <= kSlopeTolerance : slope >= predicted - kSlopeTolerance;
  double ratio_max = 0.0;
  for (std::size_t i = 0; i < kth.size(); ++i) {
    const double th = xs[i];
    BoundRow row;
    row.x = th;
    row.lhs = ys[i];
    row.se = total[0][i].standard_error();
    row.rhs = rep.constants.b_r_g * std::pow(th, 2.0 * a) + th * th +
              (mc.noise ? std::pow(th, 2.0 * h + 2.0 * a - 2.0) : 0.0);
    row.satisfied = ok;
    if (th > 0.0) ratio_max = std::max(ratio_max, row.lhs / row.rhs);
    rep.rows.push_back(row);
  }
  rep.findings["slope"] = slope;
  rep.findings["predicted_exponent"] = predicted;
  rep.findings["tolerance"] = kSlopeTolerance;
  rep.findings["max_ratio_to_polynomial"] = ratio_max;
  rep.notes.push_back(mc.noise ? "criterion: |slope - predicted| <= tolerance"
                               : "noise off: criterion slope >= 2 alpha - tolerance");
  rep.verdict = ok ? Verdict::satisfied : Verdict::violated;
  return rep;
}

namespace {

// Per scenario and item, moments of |sum_i coef_i chi(t, theta_{index_i})|^2 where each item is
// either chi(theta_a) (b = npos) or chi(theta_a) - chi(theta_b).
struct ChiItem {
  std::size_t a;
  std::size_t b;
};
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

std::vector<std::vector<RunningMoments>> chi_moments(const Ensemble& ens, std::span<const CocycleState> scenarios,
                                                     std::size_t kt, std::span<const std::size_t> k_thetas,
                                                     std::span<const ChiItem> items, const MonteCarlo& mc) {
  const Eigen::MatrixXd weights = cocycle_weight_matrix(ens, kt, k_thetas);
  const std::size_t d = ens.model().dim();
  Slots slots = make_slots(Ensemble::batch_count(mc.reps), scenarios.size(), items.size());
  ens.run(scenarios, kt, mc, true, [&](const BatchView& v) {
    std::vector<Eigen::MatrixXd> chi;
    evaluate_chi(v, scenarios[v.scenario], kt, weights, k_thetas, chi);
    auto& acc = slots[v.batch][v.scenario];
    for (std::size_t r = 0; r < v.count; ++r) {
      const auto col = static_cast<Eigen::Index>(r);
      for (std::size_t i = 0; i < items.size(); ++i) {
        double y = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          double val = chi[c](static_cast<Eigen::Index>(items[i].a), col);
          if (items[i].b != kNone) val -= chi[c](static_cast<Eigen::Index>(items[i].b), col);
          y += val * val;
        }
        acc[i].add(y);
      }
    }
  });
  return reduce(slots);
}

}  // namespace

BoundReport check_lemma42(const Model& model, std::span<const std::vector<double>> x0set,
                          std::span<const BasePoint> p0set, const TimeGrid& grid, double t,
                          std::span<const double> thetas, const MonteCarlo& mc,
                          std::shared_ptr<const NoiseContext> context) {
  require_reps(mc);
  BoundReport rep;
  rep.name = "lemma42";
  rep.constants = compute_constants(model);
  if (!rep.constants.applicable) {
    rep.verdict = Verdict::inapplicable;
    rep.notes.push_back("q >= 1: R* and B^g are not available");
    return rep;
  }
  if (thetas.empty()) throw DomainError("check_lemma42 needs at least one theta");
  const std::size_t kt = node_index(grid, t, "t");
  std::vector<std::size_t> kth;
  std::vector<ChiItem> items;
  for (double th : thetas) {
    kth.push_back(node_index(grid, th, "theta"));
    items.push_back({kth.size() - 1, kNone});
  }
  if (kt + *std::max_element(kth.begin(), kth.end()) > grid.steps())
    throw DomainError("t + theta exceeds the grid horizon");
  const auto scenarios = make_scenarios(model, x0set, p0set, grid);
  const Ensemble ens(model, grid, std::move(context));
  const auto total = chi_moments(ens, scenarios, kt, kth, items, mc);
  bool ok = true;
  for (std::size_t i = 0; i < kth.size(); ++i) {
    const Extremum e = max_over_scenarios(total, i);
    BoundRow row;
    row.x = grid.time(kth[i]);
    row.lhs = e.value;
    row.se = e.se;
    row.rhs = lemma42_rhs(rep.constants, model.frac, model.noise, row.x);
    row.satisfied = row.lhs <= row.rhs + 3.0 * row.se;
    ok = ok && row.satisfied;
    rep.rows.push_back(row);
  }
  rep.findings["t"] = t;
  rep.verdict = ok ? Verdict::satisfied : Verdict::violated;
  return rep;
}

BoundReport theta_equilipschitz(const Model& model, std::span<const std::vector<double>> x0set,
                                std::span<const BasePoint> p0set, const TimeGrid& grid, double t, double theta,
                                std::span<const double> deltas, const MonteCarlo& mc,
                                std::shared_ptr<const NoiseContext> context) {
  require_reps(mc);
  check_slope_inputs(deltas, "theta_equilipschitz deltas");
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  BoundReport rep;
  rep.name = "equilipschitz";
  rep.constants = compute_constants(model);
  const std::size_t kt = node_index(grid, t, "t");
  const std::size_t k0 = node_index(grid, theta, "theta");
  std::vector<std::size_t> kth{k0};
  std::vector<ChiItem> items;
  for (double dl : deltas) {
    kth.push_back(k0 + node_index(grid, dl, "delta"));
    items.push_back({kth.size() - 1, 0});
  }
  if (kt + *std::max_element(kth.begin(), kth.end()) > grid.steps())
    throw DomainError("t + theta + delta exceeds the grid horizon");
  const auto scenarios = make_scenarios(model, x0set, p0set, grid);
  const Ensemble ens(model, grid, std::move(context));
  const auto total = chi_moments(ens, scenarios, kt, kth, items, mc);

  const double a = model.frac.alpha;
  const double varrho = model.frac.varrho;
  double x0sq = 0.0;
  for (const auto& x0 : x0set) x0sq = std::max(x0sq, norm_sq(x0));
  const double bg = rep.constants.b_r_g;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Extremum e = max_over_scenarios(total, i);
    const double dl = deltas[i];
    BoundRow row;
    row.x = dl;
    row.lhs = e.value;
    row.se = e.se;
    // Bound structure with unit constants in place of the unspecified c_alpha, c_{H,alpha,varrho}.
    row.rhs = 5.0 * x0sq * varrho * varrho * std::exp(-2.0 * varrho * theta) * dl * dl +
              bg * std::pow(theta, 2.0 * a - 2.0) * dl * dl + bg * std::pow(dl, 2.0 * a) +
              std::pow(theta, 2.0 * a - 4.0) * dl * dl + std::pow(theta, 2.0 * a - 2.0) * dl * dl;
    xs.push_back(dl);
    ys.push_back(row.lhs);
    rep.rows.push_back(row);
  }
  const double slope = loglog_slope(xs, ys);
  const double predicted = std::min(2.0, 2.0 * a);
  const bool ok = slope >= predicted - kSlopeTolerance;
  for (auto& row : rep.rows) row.satisfied = ok;
  rep.findings["slope"] = slope;
  rep.findings["predicted_exponent"] = predicted;
  rep.findings["tolerance"] = kSlopeTolerance;
  rep.findings["theta"] = theta;
  rep.findings["t"] = t;
  rep.notes.push_back("criterion: slope >= min(2, 2 alpha) - tolerance");
  rep.verdict = ok ? Verdict::satisfied : Verdict::violated;
  return rep;
}

BoundReport cocycle_test(const Model& model, const CocycleState& f0, double tau, double sigma,
                         std::span<const double> thetas, const MonteCarlo& mc) {
  require_reps(mc);
  if (thetas.empty()) throw DomainError("cocycle_test needs at least one theta");
  const TimeGrid& grid = f0.grid;
  const std::size_t kt = node_index(grid, tau, "tau");
  const std::size_t ks = node_index(grid, sigma, "sigma");
  std::vector<std::size_t> kth;
  for (double th : thetas) kth.push_back(node_index(grid, th, "theta"));
  if (kt + ks + *std::max_element(kth.begin(), kth.end()) > grid.steps())
    throw DomainError("tau + sigma + theta exceeds the forcing table");

  BoundReport rep;
  rep.name = "cocycle";
  rep.constants = compute_constants(model);
  const PathSolver solver(model, grid);
  const std::size_t d = model.dim();
  std::unique_ptr<IncrementCovariance> cov_all, cov_outer;
  if (mc.noise && kt + ks > 0) {
    cov_all = std::make_unique<IncrementCovariance>(model.noise, grid.prefix(kt + ks));
    if (ks > 0) cov_outer = std::make_unique<IncrementCovariance>(cov_all->leading(ks));
  }
  const std::size_t batches = Ensemble::batch_count(mc.reps);
  Slots slots = make_slots(batches, 2, kth.size());
  parallel_for(batches, resolve_workers(mc.workers), [&](std::size_t b, std::size_t) {
    const std::uint64_t first = b * kBatchWidth;
    const std::size_t count = std::min<std::size_t>(kBatchWidth, mc.reps - first);
    std::vector<IncrementPath> inner_noise, outer_noise;
    if (cov_all) inner_noise = sample_increments(*cov_all, d, mc.seed, 0, first, count);
    if (cov_outer) outer_noise = sample_increments(*cov_outer, d, mc.seed, 1, first, count);
    auto& lhs_acc = slots[b][0];
    auto& rhs_acc = slots[b][1];
    for (std::size_t r = 0; r < count; ++r) {
      const IncrementPath* n1 = cov_all ? &inner_noise[r] : nullptr;
      // With tau = 0 the two sides coincide, so the outer stage reuses the same noise.
      const IncrementPath* n2 = cov_outer ? (kt == 0 ? n1 : &outer_noise[r]) : nullptr;
      const auto lhs = solver.cocycle(f0, kt + ks, kth, n1);
      const CocycleState shifted = solver.skew(f0, kt, n1);
      const auto rhs = solver.cocycle(shifted, ks, kth, n2);
      for (std::size_t i = 0; i < kth.size(); ++i) {
        lhs_acc[i].add(norm_sq(std::span<const double>(lhs.data() + i * d, d)));
        rhs_acc[i].add(norm_sq(std::span<const double>(rhs.data() + i * d, d)));
      }
    }
  });
  const auto total = reduce(slots);
  bool ok = true;
  for (std::size_t i = 0; i < kth.size(); ++i) {
    BoundRow row;
    row.x = grid.time(kth[i]);
    row.lhs = total[0][i].mean;
    row.rhs = total[1][i].mean;
    row.se = total[0][i].standard_error() + total[1][i].standard_error();
    row.satisfied = std::abs(row.lhs - row.rhs) <= 3.0 * row.se;
    ok = ok && row.satisfied;
    rep.findings[key("relative_gap", row.x)] = row.rhs != 0.0 ? (row.lhs - row.rhs) / row.rhs : 0.0;
    rep.rows.push_back(row);
  }
  rep.findings["tau"] = tau;
  rep.findings["sigma"] = sigma;
  rep.notes.push_back("rows: lhs = E|T_{sigma+tau}(f,p)(theta)|^2, rhs = E|T_sigma(T_tau(f,p), theta_tau p)(theta)|^2, "
                      "se = se_lhs + se_rhs");
  rep.verdict = ok ? Verdict::satisfied : Verdict::violated;
  return rep;
}

WeightedNorm weighted_norm_sampled(std::span<const double> points, std::span<const double> msq, double alpha,
                                   std::size_t nmax) {
  if (points.size() != msq.size() || points.empty()) throw DomainError("weighted_norm: size mismatch");
  if (nmax == 0) throw DomainError("weighted_norm needs nmax >= 1");
  if (std::abs(points.front()) > 1e-12) throw DomainError("weighted_norm: the first sample must be at 0");
  constexpr double eps = 1e-9;
  if (points.back() < static_cast<double>(nmax) - eps)
    throw DomainError("weighted_norm: samples do not cover [1/Nmax, Nmax] with Nmax = " + std::to_string(nmax));
  WeightedNorm out;
  out.alpha = alpha;
  out.nmax = nmax;
  out.value = msq.front();
  double last = 0.0;
  for (std::size_t N = 1; N <= nmax; ++N) {
    const double lo = 1.0 / static_cast<double>(N), hi = static_cast<double>(N);
    double sup = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i] >= lo - eps && points[i] <= hi + eps) sup = std::max(sup, msq[i]);
    if (sup < 0.0) throw DomainError("weighted_norm: no sample in [1/" + std::to_string(N) + ", " + std::to_string(N) + "]");
    out.value += std::pow(2.0, -static_cast<double>(N)) * std::pow(static_cast<double>(N), -2.0 * alpha) * sup;
    last = sup;
  }
  out.tail_bound = std::pow(2.0, -static_cast<double>(nmax)) * last;
  return out;
}

WeightedNorm weighted_norm(const TimeGrid& grid, std::span<const double> msq, double alpha, std::size_t nmax) {
  if (msq.size() != grid.nodes()) throw DomainError("weighted_norm: table does not match the grid");
  std::vector<double> points(grid.nodes());
  for (std::size_t k = 0; k < points.size(); ++k) points[k] = grid.time(k);
  return weighted_norm_sampled(points, msq, alpha, nmax);
}

WeightedNorm weighted_norm(const CocycleState& f, double alpha, std::size_t nmax) {
  std::vector<double> msq(f.grid.nodes());
  for (std::size_t k = 0; k < msq.size(); ++k) msq[k] = norm_sq(std::span<const double>(f.f.data() + k * f.dim, f.dim));
  return weighted_norm(f.grid, msq, alpha, nmax);
}

MetricValue metric_rho(const TimeGrid& grid, std::span<const double> diff_msq, std::size_t nmax) {
  if (diff_msq.size() != grid.nodes()) throw DomainError("metric_rho: table does not match the grid");
  if (nmax == 0) throw DomainError("metric_rho needs nmax >= 1");
  if (grid.horizon() < static_cast<double>(nmax) - 1e-9) throw DomainError("metric_rho: grid does not cover [0, nmax]");
  MetricValue out;
  double sup = 0.0;
  std::size_t k = 0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    while (k < grid.nodes() && grid.time(k) <= static_cast<double>(n) + 1e-9) sup = std::max(sup, diff_msq[k++]);
    out.value += std::pow(2.0, -static_cast<double>(n)) * sup / (1.0 + sup);
  }
  out.tail_bound = std::pow(2.0, -static_cast<double>(nmax));
  return out;
}

MetricValue metric_rho(const CocycleState& f, const CocycleState& h, std::size_t nmax) {
  if (!(f.grid == h.grid) || f.dim != h.dim) throw DomainError("metric_rho: functions on different grids");
  std::vector<double> diff(f.grid.nodes());
  for (std::size_t k = 0; k < diff.size(); ++k) {
    double s = 0.0;
    for (std::size_t c = 0; c < f.dim; ++c) {
      const double v = f(k, c) - h(k, c);
      s += v * v;
    }
    diff[k] = s;
  }
  return metric_rho(f.grid, diff, nmax);
}

BoundReport omega_limit_proxy(const Model& model, std::span<const std::vector<double>> x0set,
                              std::span<const BasePoint> p0set, const TimeGrid& grid,
                              std::span<const double> snapshots, const MonteCarlo& mc, const OmegaOptions& opt,
                              std::shared_ptr<const NoiseContext> context) {
  require_reps(mc);
  if (snapshots.empty()) throw DomainError("omega_limit_proxy needs snapshots");
  for (std::size_t i = 1; i < snapshots.size(); ++i)
    if (!(snapshots[i] > snapshots[i - 1])) throw DomainError("snapshots must be increasing");
  BoundReport rep;
  rep.name = "omega_limit";
  rep.constants = compute_constants(model);
  if (!rep.constants.applicable) {
    rep.verdict = Verdict::inapplicable;
    rep.notes.push_back("q >= 1: R-hat* is not available");
    return rep;
  }
  std::vector<std::size_t> ks;
  for (double t : snapshots) ks.push_back(node_index(grid, t, "snapshot"));
  const std::size_t k_theta_max = node_index(grid, static_cast<double>(opt.nmax), "nmax");
  if (ks.back() + k_theta_max > grid.steps())
    throw DomainError("grid must cover the last snapshot plus nmax");

  // theta samples: a strided sweep of [0, nmax] plus the first node at or above each 1/N.
  std::vector<std::size_t> kth;
  const std::size_t stride = std::max<std::size_t>(1, k_theta_max / std::max<std::size_t>(1, opt.max_theta_samples));
  for (std::size_t k = 0; k <= k_theta_max; k += stride) kth.push_back(k);
  kth.push_back(k_theta_max);
  for (std::size_t N = 1; N <= opt.nmax; ++N)
    kth.push_back(static_cast<std::size_t>(std::ceil(1.0 / (static_cast<double>(N) * grid.dt()) - 1e-9)));
  std::sort(kth.begin(), kth.end());
  kth.erase(std::unique(kth.begin(), kth.end()), kth.end());
  std::vector<double> points;
  for (std::size_t k : kth) points.push_back(grid.time(k));

  std::vector<std::size_t> klag;
  for (double l : opt.lags) klag.push_back(node_index(grid, l, "lag"));

  const auto scenarios = make_scenarios(model, x0set, p0set, grid);
  const Ensemble ens(model, grid, std::move(context));
  const std::size_t d = model.dim();
  const std::size_t ns = snapshots.size();
  // Items per snapshot: |chi(theta)|^2 for every theta sample, then x(t) . x(t - lag) per lag.
  const std::size_t per = kth.size() + klag.size();
  std::vector<Eigen::MatrixXd> weights;
  for (std::size_t k : ks) weights.push_back(cocycle_weight_matrix(ens, k, kth));
  Slots slots = make_slots(Ensemble::batch_count(mc.reps), scenarios.size(), ns * per);
  ens.run(scenarios, ks.back(), mc, true, [&](const BatchView& v) {
    auto& acc = slots[v.batch][v.scenario];
    std::vector<Eigen::MatrixXd> chi;
    for (std::size_t i = 0; i < ns; ++i) {
      evaluate_chi(v, scenarios[v.scenario], ks[i], weights[i], kth, chi);
      for (std::size_t r = 0; r < v.count; ++r) {
        const auto col = static_cast<Eigen::Index>(r);
        for (std::size_t j = 0; j < kth.size(); ++j) {
          double y = 0.0;
          for (std::size_t c = 0; c < d; ++c) y += chi[c](static_cast<Eigen::Index>(j), col) * chi[c](static_cast<Eigen::Index>(j), col);
          acc[i * per + j].add(y);
        }
        for (std::size_t l = 0; l < klag.size(); ++l) {
          double y = 0.0;
          if (klag[l] <= ks[i])
            for (std::size_t c = 0; c < d; ++c)
              y += (*v.x)[c](static_cast<Eigen::Index>(ks[i]), col) *
                   (*v.x)[c](static_cast<Eigen::Index>(ks[i] - klag[l]), col);
          acc[i * per + kth.size() + l].add(y);
        }
      }
    }
  });
  const auto total = reduce(slots);

  const double level = rep.constants.r_hat_sq;
  bool contained = true, monotone = true;
  double prev_radius = 0.0, prev_se = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    BoundRow row;
    row.x = snapshots[i];
    row.lhs = -std::numeric_limits<double>::infinity();
    double radius = -1.0, radius_se = 0.0;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      std::vector<double> msq(kth.size());
      for (std::size_t j = 0; j < kth.size(); ++j) msq[j] = total[s][i * per + j].mean;
      const WeightedNorm wn = weighted_norm_sampled(points, msq, model.frac.alpha, opt.nmax);
      // Standard error of the truncated norm, propagated through the arg-max of each sup.
      double se = total[s][i * per].standard_error();
      for (std::size_t N = 1; N <= opt.nmax; ++N) {
        double best = -1.0, best_se = 0.0;
        for (std::size_t j = 0; j < kth.size(); ++j)
          if (points[j] >= 1.0 / static_cast<double>(N) - 1e-9 && points[j] <= static_cast<double>(N) + 1e-9 &&
              msq[j] > best) {
            best = msq[j];
            best_se = total[s][i * per + j].standard_error();
          }
        se += std::pow(2.0, -static_cast<double>(N)) * std::pow(static_cast<double>(N), -2.0 * model.frac.alpha) * best_se;
      }
      if (wn.value + wn.tail_bound > row.lhs) {
        row.lhs = wn.value + wn.tail_bound;
        row.se = se;
      }
      const RunningMoments& m0 = total[s][i * per];
      if (m0.mean > radius) {
        radius = m0.mean;
        radius_se = m0.standard_error();
      }
      if (s == 0)
        for (std::size_t l = 0; l < klag.size(); ++l)
          if (klag[l] <= ks[i])
            rep.findings["autocovariance[t=" + format_number(snapshots[i]) + ",lag=" + format_number(opt.lags[l]) + "]"] =
                total[s][i * per + kth.size() + l].mean;
    }
    row.rhs = level;
    row.satisfied = row.lhs <= row.rhs + 3.0 * row.se;
    contained = contained && row.satisfied;
    rep.findings[key("radius", snapshots[i])] = radius;
    if (i > 0 && radius > prev_radius + 3.0 * (radius_se + prev_se)) monotone = false;
    prev_radius = radius;
    prev_se = radius_se;
    rep.rows.push_back(row);
  }
  rep.findings["monotone_containment"] = monotone ? 1.0 : 0.0;
  rep.findings["nmax"] = static_cast<double>(opt.nmax);
  rep.notes.push_back("lhs: largest weighted norm E|chi(t,.)|^2_alpha (truncated at nmax, tail bound added) over the "
                      "initial-condition and base-point sets; rhs: R-hat*^2");
  rep.verdict = contained && monotone ? Verdict::satisfied : Verdict::violated;
  return rep;
}

}  // namespace caputo_ms
