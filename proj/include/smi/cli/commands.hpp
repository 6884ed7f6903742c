#pragma once

#include <exception>
#include <optional>
#include <ostream>

#include "smi/cli/config.hpp"
#include "smi/gaussian.hpp"
#include "smi/model.hpp"

namespace smi::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_runtime = 2, exit_all_failed = 3 };

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

struct Problem {
  TwoModuleModel model;
  TwoModuleData data;
};

/// Model plus data, simulated in memory or read from the configured CSV files.
Problem load_problem(const RunConfig& cfg);

int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_replicate_study(const RunConfig& cfg, std::ostream& log);
/// Rebuilds report.json and plots from the CSV files of an earlier replicate-study.
int cmd_report(const RunConfig& cfg, std::ostream& log);

} // namespace smi::cli
