#pragma once

#include "psgdlab/cli/config.hpp"
#include "psgdlab/cli/table.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace psgdlab::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_verification = 2 };

struct CommandResult {
  Table table;
  int exit_code = exit_ok;
};

/// Generalization error, training loss and bound columns per (d, n, T) cell.
CommandResult cmd_run(const ExperimentConfig& config);
/// Cell rows plus fitted log-log slopes; every swept axis needs 3 or more points.
CommandResult cmd_scaling(const ExperimentConfig& config);
/// Minimizer generalization error per (d, n) and the perturbed-limit rows.
CommandResult cmd_counterexample(const ExperimentConfig& config);
/// Property suites, one row per check. Exit code 2 if any check fails.
CommandResult cmd_verify(const ExperimentConfig& config);
/// Bound values only, no sampling.
CommandResult cmd_bounds(const ExperimentConfig& config);

/// Throws UsageError for unknown names.
CommandResult dispatch(const std::string& command, const ExperimentConfig& config);

/// Writes the rendered table to config.out atomically, or to `fallback` when out is empty.
void emit(const CommandResult& result, const ExperimentConfig& config, std::ostream& fallback);

/// sigma* for the configured family: 0 in closed form for the counterexample
/// families, otherwise the 3-standard-error upper estimate at an empirical
/// minimizer of a large sample.
double sigma_star_for(const ExperimentConfig& config, std::size_t d, const RngStream& rng);

/// Least-squares slope of log y on log x; NaN if any value is nonpositive.
double fit_scaling_slope(const std::vector<double>& x, const std::vector<double>& y);

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
};

std::vector<VerifyCheck> run_property_suites(const ExperimentConfig& config);

}  // namespace psgdlab::cli
