#include "caputo_ms/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "caputo_ms/errors.hpp"

namespace caputo_ms {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view s) {
  s = trim(s);
  // a/b is accepted for convenience (dt = 1/256).
  if (const auto slash = s.find('/'); slash != std::string_view::npos)
    return parse_double(key, s.substr(0, slash)) / parse_double(key, s.substr(slash + 1));
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ConfigError(std::string(key) + ": not a non-negative integer: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view key, std::string_view s) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(parse_double(key, item));
  return out;
}

// Shortest round-trip form, so the hash sees every bit.
std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string exact(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + exact(v[i]);
  return s;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void require_positive(const std::vector<double>& v, const char* key, bool allow_zero) {
  for (double x : v)
    require(std::isfinite(x) && (allow_zero ? x >= 0.0 : x > 0.0),
            std::string(key) + (allow_zero ? " must be non-negative" : " must be positive"));
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"constants", "kernel",  "tfbm",          "isometry",
                                              "parseval",  "paths",   "moments",       "theorem32",
                                              "absorbing", "time_modulus", "lemma42",   "equilipschitz",
                                              "cocycle",   "omega_limit"};
  return names;
}

void ExperimentConfig::validate() const {
  try {
    frac.validate();
    noise.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  require(dim >= 1, "dim must be at least 1");
  require(field == "zero" || field == "constant" || field == "linear" || field == "rotation",
          "field must be one of zero, constant, linear, rotation");
  require(std::isfinite(kappa) && kappa >= 0.0, "field.kappa must be non-negative");
  require(std::isfinite(constant), "field.c must be finite");
  require(std::isfinite(amplitude), "field.amplitude must be finite");
  require(std::isfinite(omega), "omega must be finite");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  require(std::isfinite(horizon) && horizon > 0.0, "T must be positive");
  const double ratio = horizon / dt;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "T must be a multiple of dt");
  require(ratio <= 16384.0, "T / dt must not exceed 16384");
  require(reps >= 2, "reps must be at least 2");
  require(cocycle_reps >= 2, "cocycle.reps must be at least 2");
  require(x0.size() == dim || x0.size() == 1, "x0 must have 1 or dim entries");
  for (double v : x0) require(std::isfinite(v), "x0 must be finite");
  require(!base_points.empty(), "base_points must not be empty");
  for (double v : base_points) require(std::isfinite(v), "base_points must be finite");
  for (const auto& c : checks)
    require(std::find(known_checks().begin(), known_checks().end(), c) != known_checks().end(),
            "unknown check '" + c + "'");
  require_positive(verify_times, "verify.times", false);
  require(std::isfinite(absorbing_factor) && absorbing_factor >= 0.0, "absorbing.factor must be non-negative");
  require_positive({modulus_t, lemma42_t, equilip_t, cocycle_tau, cocycle_sigma}, "time parameters", true);
  require_positive(modulus_thetas, "modulus.thetas", false);
  require_positive(lemma42_thetas, "lemma42.thetas", true);
  require_positive({equilip_theta}, "equilip.theta", false);
  require_positive(equilip_deltas, "equilip.deltas", false);
  require_positive(cocycle_thetas, "cocycle.thetas", true);
  require_positive(omega_snapshots, "omega.snapshots", false);
  require(omega_nmax >= 1, "omega.nmax must be at least 1");
}

Model ExperimentConfig::model() const {
  Model m;
  m.frac = frac;
  m.noise = noise;
  if (field == "zero") m.field = zero_field(dim);
  else if (field == "constant") m.field = constant_field(dim, constant);
  else if (field == "linear") m.field = linear_decay(dim, kappa);
  else m.field = rotation_forced(dim, kappa, amplitude);
  m.driving.omega = omega;
  return m;
}

TimeGrid ExperimentConfig::grid() const { return TimeGrid(horizon, dt); }

std::vector<BasePoint> ExperimentConfig::bases() const {
  std::vector<BasePoint> out;
  for (double a : base_points) out.emplace_back(a);
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "alpha=" << exact(frac.alpha) << "\nvarrho=" << exact(frac.varrho) << "\nhurst=" << exact(noise.hurst)
     << "\nlambda=" << exact(noise.lambda) << "\ndim=" << dim << "\nfield=" << field
     << "\nfield.kappa=" << exact(kappa) << "\nfield.c=" << exact(constant)
     << "\nfield.amplitude=" << exact(amplitude) << "\nomega=" << exact(omega) << "\nT=" << exact(horizon)
     << "\ndt=" << exact(dt) << "\nreps=" << reps << "\nseed=" << seed << "\nchecks=";
  for (std::size_t i = 0; i < checks.size(); ++i) os << (i ? "," : "") << checks[i];
  os << "\nx0=" << exact(x0) << "\nbase_points=" << exact(base_points) << "\npaths=" << paths
     << "\nverify.times=" << exact(verify_times) << "\nabsorbing.factor=" << exact(absorbing_factor)
     << "\nmodulus.t=" << exact(modulus_t) << "\nmodulus.thetas=" << exact(modulus_thetas)
     << "\nlemma42.t=" << exact(lemma42_t) << "\nlemma42.thetas=" << exact(lemma42_thetas)
     << "\nequilip.t=" << exact(equilip_t) << "\nequilip.theta=" << exact(equilip_theta)
     << "\nequilip.deltas=" << exact(equilip_deltas) << "\ncocycle.tau=" << exact(cocycle_tau)
     << "\ncocycle.sigma=" << exact(cocycle_sigma) << "\ncocycle.thetas=" << exact(cocycle_thetas)
     << "\ncocycle.reps=" << cocycle_reps << "\nomega.snapshots=" << exact(omega_snapshots)
     << "\nomega.nmax=" << omega_nmax << '\n';
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  using Setter = std::function<void(std::string_view key, std::string_view value)>;
  auto dbl = [](double& dst) -> Setter { return [&dst](auto k, auto v) { dst = parse_double(k, v); }; };
  auto dbls = [](std::vector<double>& dst) -> Setter { return [&dst](auto k, auto v) { dst = parse_doubles(k, v); }; };
  auto size = [](std::size_t& dst) -> Setter {
    return [&dst](auto k, auto v) { dst = static_cast<std::size_t>(parse_u64(k, v)); };
  };
  const std::map<std::string, Setter, std::less<>> setters{
      {"alpha", dbl(c.frac.alpha)},
      {"varrho", dbl(c.frac.varrho)},
      {"hurst", dbl(c.noise.hurst)},
      {"lambda", dbl(c.noise.lambda)},
      {"dim", size(c.dim)},
      {"field", [&c](auto, auto v) { c.field = std::string(v); }},
      {"field.kappa", dbl(c.kappa)},
      {"field.c", dbl(c.constant)},
      {"field.amplitude", dbl(c.amplitude)},
      {"omega", dbl(c.omega)},
      {"T", dbl(c.horizon)},
      {"dt", dbl(c.dt)},
      {"reps", size(c.reps)},
      {"seed", [&c](auto k, auto v) { c.seed = parse_u64(k, v); }},
      {"checks",
       [&c](auto, auto v) {
         c.checks.clear();
         for (auto item : split_list(v)) c.checks.emplace_back(item);
       }},
      {"x0", dbls(c.x0)},
      {"base_points", dbls(c.base_points)},
      {"paths", size(c.paths)},
      {"verify.times", dbls(c.verify_times)},
      {"absorbing.factor", dbl(c.absorbing_factor)},
      {"modulus.t", dbl(c.modulus_t)},
      {"modulus.thetas", dbls(c.modulus_thetas)},
      {"lemma42.t", dbl(c.lemma42_t)},
      {"lemma42.thetas", dbls(c.lemma42_thetas)},
      {"equilip.t", dbl(c.equilip_t)},
      {"equilip.theta", dbl(c.equilip_theta)},
      {"equilip.deltas", dbls(c.equilip_deltas)},
      {"cocycle.tau", dbl(c.cocycle_tau)},
      {"cocycle.sigma", dbl(c.cocycle_sigma)},
      {"cocycle.thetas", dbls(c.cocycle_thetas)},
      {"cocycle.reps", size(c.cocycle_reps)},
      {"omega.snapshots", dbls(c.omega_snapshots)},
      {"omega.nmax", size(c.omega_nmax)},
      {"output", [&c](auto, auto v) { c.output = std::string(v); }},
  };
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    try {
      it->second(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace caputo_ms
