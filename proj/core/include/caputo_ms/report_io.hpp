#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "caputo_ms/diagnostics.hpp"
#include "caputo_ms/path.hpp"

namespace caputo_ms {

// 9 significant digits, '.' decimal separator, independent of the global locale.
std::string format_number(double v);

void write_report_csv(std::ostream& os, std::span<const BoundReport> reports);
void write_moments_csv(std::ostream& os, const MomentSeries& m);
// Header replicate,t,value_1..value_d.
void write_paths_csv(std::ostream& os, std::span<const SamplePath> paths);

std::string constants_json(const BoundConstants& c);

}  // namespace caputo_ms
