#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>

#include "caputo_ms/config.hpp"

namespace caputo_ms {

enum class Subcommand { sample, verify, solve, check, all };

Subcommand parse_subcommand(std::string_view name);
const char* to_string(Subcommand s);

// Check names the subcommand may run.
bool subcommand_runs(Subcommand s, std::string_view check);

enum ExitStatus : int { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2, kExitUnsatisfied = 3 };

// Runs the selected checks of `config` into config.output. Writes one CSV per
// check, summary.json when anything ran, and meta.json always. Progress and
// errors go to `log`.
int run_experiment(const ExperimentConfig& config, Subcommand sub, std::size_t workers, std::ostream& log);

}  // namespace caputo_ms
