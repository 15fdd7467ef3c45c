#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pgal/config.hpp"

namespace pgal {

struct CommandOptions {
  std::string config_path;
  /// Overrides output.directory when non-empty.
  std::string out_dir;
  /// Overrides stochastic.seed and verify.seed.
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

/// Exit codes: 0 success, 1 numerical or check failure, 2 configuration error.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2 };

/// verify.json
int cmd_verify(const CommandOptions& opts);
/// run.json, monitors.csv, snapshots.csv
int cmd_solve(const CommandOptions& opts);
/// run.json, ensemble.csv, holder.csv
int cmd_solve_sde(const CommandOptions& opts);
/// run.json, errors.csv
int cmd_convergence(const CommandOptions& opts);

/// Dispatches by name ("verify", "solve", "solve-sde", "convergence") and maps errors to exit codes.
int run_command(const std::string& name, const CommandOptions& opts);

/// "%.16e", with "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double v);

}  // namespace pgal
