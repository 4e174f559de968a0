#include "caputo_ms/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>

#include "caputo_ms/diagnostics.hpp"
#include "caputo_ms/ensemble.hpp"
#include "caputo_ms/errors.hpp"
#include "caputo_ms/parallel.hpp"
#include "caputo_ms/report_io.hpp"
#include "caputo_ms/tfbm.hpp"
#include "caputo_ms/version.hpp"
#include "json.hpp"

namespace caputo_ms {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Subcommand parse_subcommand(std::string_view name) {
  if (name == "sample") return Subcommand::sample;
  if (name == "verify") return Subcommand::verify;
  if (name == "solve") return Subcommand::solve;
  if (name == "check") return Subcommand::check;
  if (name == "all") return Subcommand::all;
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::sample: return "sample";
    case Subcommand::verify: return "verify";
    case Subcommand::solve: return "solve";
    case Subcommand::check: return "check";
    case Subcommand::all: return "all";
  }
  return "unknown";
}

bool subcommand_runs(Subcommand s, std::string_view check) {
  const bool verify = check == "constants" || check == "kernel" || check == "tfbm" || check == "isometry" ||
                      check == "parseval";
  switch (s) {
    case Subcommand::sample: return check == "paths";
    case Subcommand::verify: return verify;
    case Subcommand::solve: return check == "moments";
    case Subcommand::check: return !verify && check != "paths" && check != "moments";
    case Subcommand::all: return true;
  }
  return false;
}

namespace {

BoundRow tolerance_row(std::string series, double x, double lhs, double rhs, double tol) {
  BoundRow row;
  row.series = std::move(series);
  row.x = x;
  row.lhs = lhs;
  row.rhs = rhs;
  row.satisfied = std::abs(lhs - rhs) <= tol;
  return row;
}

void settle(BoundReport& r) {
  const bool ok = std::all_of(r.rows.begin(), r.rows.end(), [](const BoundRow& row) { return row.satisfied; });
  r.verdict = ok ? Verdict::satisfied : Verdict::violated;
}

BoundReport constants_report(const Model& model, const BoundConstants& c, std::uint64_t seed) {
  BoundReport r;
  r.name = "constants";
  r.constants = c;
  r.rows.push_back(tolerance_row("M_rho_alpha_H", 0.0, c.m_rho, c.m_rho_spectral, 1e-4 * std::abs(c.m_rho_spectral)));
  const LipschitzCheck lip = check_lipschitz(model.field, 4096, seed);
  BoundRow row;
  row.series = "lipschitz";
  row.lhs = lip.worst_excess;
  row.rhs = 0.0;
  row.satisfied = lip.ok;
  r.rows.push_back(row);
  r.findings["q"] = c.q;
  settle(r);
  if (!c.applicable) r.notes.push_back("q >= 1: the moment-bound constants are not available");
  return r;
}

BoundReport kernel_report(const FracParams& p, const TimeGrid& grid) {
  BoundReport r;
  r.name = "kernel";
  for (double lag : {0.01, 0.1, 1.0, 4.0})
    for (double shift : {0.5, 3.0}) {
      const double a = kernel_eval(p, 1.0 + lag, 1.0);
      const double b = kernel_eval(p, 1.0 + lag + shift, 1.0 + shift);
      r.rows.push_back(tolerance_row("translation", lag, b, a, 1e-12 * std::abs(a)));
    }
  if (p.degenerate())
    for (double lag : {0.01, 0.1, 1.0, 4.0}) {
      const double e = std::exp(-p.varrho * lag);
      r.rows.push_back(tolerance_row("exponential", lag, kernel_eval(p, lag), e, 1e-12 * e));
    }
  const KernelWeights w(p, grid);
  for (std::size_t k = 1; k <= grid.steps(); k *= 2) {
    const double mass = kernel_mass(p, grid.time(k));
    r.rows.push_back(tolerance_row("weights_mass", grid.time(k), w.row_sum(k), mass, 1e-10 * mass));
  }
  settle(r);
  return r;
}

BoundReport tfbm_report(const NoiseParams& n, const IncrementCovariance& cov, std::span<const double> times) {
  BoundReport r;
  r.name = "tfbm";
  for (double gap : {0.1, 0.5, 1.0, 5.0}) {
    BoundRow row;
    row.series = "phi_dominance";
    row.x = gap;
    row.lhs = phi_eval(n, gap);
    row.rhs = phi_upper_bound(n, gap);
    row.satisfied = n.lambda == 0.0 ? std::abs(row.lhs - row.rhs) <= 1e-6 * row.rhs : row.lhs < row.rhs;
    r.rows.push_back(row);
  }
  const TimeGrid& grid = cov.grid();
  const auto& c = cov.autocovariance();
  for (double t : times) {
    if (!grid.is_node(t) || grid.node_of(t) == 0) continue;
    const std::size_t k = grid.node_of(t);
    // Sum of the leading k x k Toeplitz block.
    double sum = static_cast<double>(k) * c[0];
    for (std::size_t m = 1; m < k; ++m) sum += 2.0 * static_cast<double>(k - m) * c[m];
    const double var = tfbm_variance(n, t);
    r.rows.push_back(tolerance_row("variance", t, sum, var, 1e-7 * var));
  }
  r.findings["jitter"] = cov.jitter();
  settle(r);
  return r;
}

BoundReport isometry_report(const Model& model, const TimeGrid& grid, std::span<const double> times,
                            const MonteCarlo& mc, const std::shared_ptr<const NoiseContext>& ctx) {
  BoundReport r;
  r.name = "isometry";
  Model pure = model;
  pure.field = zero_field(model.dim());
  const std::vector<double> zero(model.dim(), 0.0);
  const MomentSeries m = estimate_moments(pure, zero, BasePoint{}, grid, mc, ctx);
  for (double t : times) {
    const std::size_t k = grid.node_of(t);
    BoundRow row;
    row.x = t;
    row.lhs = m.msq[k] / static_cast<double>(model.dim());
    row.se = m.se[k] / static_cast<double>(model.dim());
    row.rhs = convolution_variance(model.frac, model.noise, t);
    row.satisfied = std::abs(row.lhs - row.rhs) <= 3.0 * row.se;
    r.rows.push_back(row);
  }
  settle(r);
  return r;
}

BoundReport parseval_report(const FracParams& p, const NoiseParams& n) {
  BoundReport r;
  r.name = "parseval";
  const MRhoAlphaH m = m_rho_alpha_h(p, n);
  BoundRow row = tolerance_row("M_rho_alpha_H", 0.0, m.time_domain, m.spectral, 1e-4 * std::abs(m.spectral));
  row.se = m.tail_bound;
  r.rows.push_back(row);
  r.findings["parseval_constant"] = parseval_constant(n);
  settle(r);
  return r;
}

json report_json(const BoundReport& r, const std::string& csv) {
  json j;
  j["name"] = r.name;
  j["verdict"] = to_string(r.verdict);
  j["csv"] = csv;
  json f = json::object();
  for (const auto& [k, v] : r.findings) f[k] = std::isfinite(v) ? json(v) : json(nullptr);
  j["findings"] = f;
  j["notes"] = r.notes;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Runner {
  const ExperimentConfig& cfg;
  Subcommand sub;
  std::size_t workers;
  std::ostream& log;

  Model model;
  TimeGrid grid;
  std::vector<BasePoint> bases;
  std::vector<double> x0;
  MonteCarlo mc;
  std::shared_ptr<const NoiseContext> ctx;
  std::unique_ptr<BoundConstants> constants;
  json checks = json::array();
  bool violated = false;

  const BoundConstants& consts() {
    if (!constants) constants = std::make_unique<BoundConstants>(compute_constants(model));
    return *constants;
  }

  const std::shared_ptr<const NoiseContext>& context() {
    if (!ctx) ctx = std::make_shared<const NoiseContext>(model.frac, model.noise, grid);
    return ctx;
  }

  void emit(const BoundReport& r) {
    const std::string csv = r.name + ".csv";
    std::ofstream out(cfg.output / csv, std::ios::binary);
    write_report_csv(out, std::span<const BoundReport>(&r, 1));
    checks.push_back(report_json(r, csv));
    log << r.name << ": " << to_string(r.verdict) << '\n';
    violated = violated || r.verdict == Verdict::violated;
  }

  void run_check(const std::string& name) {
    log << "running " << name << '\n';
    if (name == "constants") return emit(constants_report(model, consts(), cfg.seed));
    if (name == "kernel") return emit(kernel_report(model.frac, grid));
    if (name == "tfbm") return emit(tfbm_report(model.noise, context()->covariance(), cfg.verify_times));
    if (name == "isometry") return emit(isometry_report(model, grid, cfg.verify_times, mc, context()));
    if (name == "parseval") return emit(parseval_report(model.frac, model.noise));
    if (name == "paths") {
      const auto paths = sample_paths(context()->covariance(), cfg.paths, cfg.seed, model.dim(), workers);
      std::ofstream out(cfg.output / "paths.csv", std::ios::binary);
      write_paths_csv(out, paths);
      json j;
      j["name"] = "paths";
      j["verdict"] = "written";
      j["csv"] = "paths.csv";
      checks.push_back(j);
      return;
    }
    if (name == "moments") {
      const MomentSeries m = estimate_moments(model, x0, bases.front(), grid, mc, context());
      std::ofstream out(cfg.output / "moments.csv", std::ios::binary);
      write_moments_csv(out, m);
      json j;
      j["name"] = "moments";
      j["verdict"] = "written";
      j["csv"] = "moments.csv";
      checks.push_back(j);
      return;
    }
    const std::vector<std::vector<double>> x0set{x0};
    if (name == "theorem32") return emit(check_theorem32(model, x0, bases.front(), grid, mc, context()));
    if (name == "absorbing") {
      const double radius = std::sqrt(cfg.absorbing_factor * consts().r_star_sq);
      const std::vector<double> radii{std::isfinite(radius) ? radius : 0.0};
      return emit(absorbing_scan(model, radii, bases, grid, mc, context()));
    }
    if (name == "time_modulus")
      return emit(time_modulus(model, x0, bases.front(), grid, cfg.modulus_t, cfg.modulus_thetas, mc, context()));
    if (name == "lemma42")
      return emit(check_lemma42(model, x0set, bases, grid, cfg.lemma42_t, cfg.lemma42_thetas, mc, context()));
    if (name == "equilipschitz")
      return emit(theta_equilipschitz(model, x0set, bases, grid, cfg.equilip_t, cfg.equilip_theta,
                                      cfg.equilip_deltas, mc, context()));
    if (name == "cocycle") {
      MonteCarlo cmc = mc;
      cmc.reps = cfg.cocycle_reps;
      const CocycleState f0 = exponential_forcing(model.frac, x0, bases.front(), grid);
      return emit(cocycle_test(model, f0, cfg.cocycle_tau, cfg.cocycle_sigma, cfg.cocycle_thetas, cmc));
    }
    if (name == "omega_limit") {
      OmegaOptions opt;
      opt.nmax = cfg.omega_nmax;
      return emit(omega_limit_proxy(model, x0set, bases, grid, cfg.omega_snapshots, mc, opt, context()));
    }
    throw ConfigError("unknown check '" + name + "'");
  }
};

void write_meta(const ExperimentConfig& cfg, Subcommand sub, std::size_t workers, const std::vector<std::string>& ran,
                const std::string& status) {
  json meta;
  meta["config_hash"] = cfg.hash();
  meta["seed"] = cfg.seed;
  meta["version"] = std::string(kVersion);
  meta["timestamp"] = utc_timestamp();
  meta["subcommand"] = to_string(sub);
  meta["workers"] = workers;
  meta["alpha_degenerate"] = cfg.frac.degenerate();
  meta["checks"] = ran;
  meta["status"] = status;
  write_text(cfg.output / "meta.json", meta.dump(2) + "\n");
}

}  // namespace

int run_experiment(const ExperimentConfig& config, Subcommand sub, std::size_t workers, std::ostream& log) {
  std::vector<std::string> selected;
  std::size_t resolved = 0;
  try {
    config.validate();
    resolved = resolve_workers(workers);
    for (const auto& name : known_checks())
      if (std::find(config.checks.begin(), config.checks.end(), name) != config.checks.end() &&
          subcommand_runs(sub, name))
        selected.push_back(name);
    std::error_code ec;
    fs::create_directories(config.output, ec);
    if (ec || !fs::is_directory(config.output))
      throw ConfigError("cannot create output directory " + config.output.string());
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  Runner run{config, sub, resolved, log, config.model(), config.grid(), config.bases(), {}, {}, nullptr, nullptr};
  run.x0 = config.x0.size() == config.dim ? config.x0 : std::vector<double>(config.dim, config.x0.front());
  run.mc.reps = config.reps;
  run.mc.seed = config.seed;
  run.mc.workers = resolved;
  const double q = contraction_ratio(config.frac, run.model.field.lipschitz);
  log << "q = " << format_number(q) << (q < 1.0 ? " (series converges)" : " (series diverges: bounds inapplicable)")
      << '\n';

  int status = kExitOk;
  std::string label = "satisfied";
  try {
    for (const auto& name : selected) run.run_check(name);
    if (!selected.empty()) {
      json summary;
      summary["config_hash"] = config.hash();
      summary["subcommand"] = to_string(sub);
      summary["q"] = q;
      summary["constants"] = json::parse(constants_json(run.consts()));
      summary["checks"] = run.checks;
      summary["status"] = run.violated ? "violated" : "satisfied";
      write_text(config.output / "summary.json", summary.dump(2) + "\n");
    }
    if (run.violated) {
      status = kExitUnsatisfied;
      label = "violated";
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    status = kExitConfig;
    label = "config_error";
  } catch (const ParameterError& e) {
    log << "config error: " << e.what() << '\n';
    status = kExitConfig;
    label = "config_error";
  } catch (const GridError& e) {
    log << "config error: " << e.what() << '\n';
    status = kExitConfig;
    label = "config_error";
  } catch (const DomainError& e) {
    log << "config error: " << e.what() << '\n';
    status = kExitConfig;
    label = "config_error";
  } catch (const Error& e) {
    log << "numeric failure: " << e.what() << '\n';
    status = kExitNumeric;
    label = "numeric_failure";
  }
  try {
    write_meta(config, sub, resolved, selected, label);
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return status;
}

}  // namespace caputo_ms
