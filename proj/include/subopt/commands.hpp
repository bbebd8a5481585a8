#pragma once

#include "subopt/io.hpp"

#include <filesystem>

namespace subopt {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitConfig = 2,
  kExitInfeasible = 3,
  // Fewer than 90% of the points in a record stream succeeded.
  kExitPartial = 4,
};

// Each command writes into `out` (created if missing) and returns an exit code.
// Config errors surface as ConfigError; everything else is reported through the code.
int cmd_modes(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_optimize(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_scaling(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_compare1d(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_oracle(const RunConfig& cfg, const std::filesystem::path& out);

/// Problem described by a config's problem section, with the default confinement radius filled in.
Problem problem_from_config(const RunConfig& cfg);

}  // namespace subopt
