#include "caputo_ms/report_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "caputo_ms/errors.hpp"
#include "json.hpp"

namespace caputo_ms {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  if (res.ec != std::errc()) throw NumericError("number formatting failed");
  return std::string(buf, res.ptr);
}

void write_report_csv(std::ostream& os, std::span<const BoundReport> reports) {
  os << "check,t_or_theta,lhs,rhs,se,satisfied\n";
  for (const auto& r : reports)
    for (const auto& row : r.rows)
      os << (row.series.empty() ? r.name : row.series) << ',' << format_number(row.x) << ','
         << format_number(row.lhs) << ',' << format_number(row.rhs) << ',' << format_number(row.se) << ','
         << (row.satisfied ? "true" : "false") << '\n';
}

void write_moments_csv(std::ostream& os, const MomentSeries& m) {
  os << "t,msq,se\n";
  for (std::size_t k = 0; k < m.msq.size(); ++k)
    os << format_number(m.grid.time(k)) << ',' << format_number(m.msq[k]) << ',' << format_number(m.se[k]) << '\n';
}

void write_paths_csv(std::ostream& os, std::span<const SamplePath> paths) {
  const std::size_t dim = paths.empty() ? 1 : paths.front().dim;
  os << "replicate,t";
  for (std::size_t c = 1; c <= dim; ++c) os << ",value_" << c;
  os << '\n';
  for (const auto& p : paths) {
    if (p.dim != dim) throw DomainError("paths of mixed dimension");
    for (std::size_t k = 0; k < p.grid.nodes(); ++k) {
      os << p.replicate << ',' << format_number(p.grid.time(k));
      for (std::size_t c = 0; c < dim; ++c) os << ',' << format_number(p(k, c));
      os << '\n';
    }
  }
}

std::string constants_json(const BoundConstants& c) {
  nlohmann::ordered_json j;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  j["L"] = num(c.lipschitz);
  j["g00_sq"] = num(c.g00_sq);
  j["M"] = num(c.m_assumption2);
  j["M_rho_alpha_H"] = num(c.m_rho);
  j["M_rho_alpha_H_spectral"] = num(c.m_rho_spectral);
  j["noise_constant"] = num(c.noise_constant);
  j["q"] = num(c.q);
  j["series_converges"] = c.applicable;
  j["multiplier"] = num(c.multiplier);
  j["M2"] = num(c.m2);
  j["R_star_sq"] = num(c.r_star_sq);
  j["B_R"] = num(c.b_r);
  j["B_R_g"] = num(c.b_r_g);
  j["R_hat_star_sq"] = num(c.r_hat_sq);
  return j.dump(2);
}

}  // namespace caputo_ms
