#pragma once

#include <iosfwd>
#include <string>

#include "relsim/config.hpp"
#include "relsim/oracle.hpp"

namespace relsim {

struct RunResult {
  int exit_code = 0;  // 0 ok, 5 verification failure
  Trajectory trajectory;
  std::string diagnostics_json;
  std::string trajectory_path;
  std::string diagnostics_path;
};

// Execute one configured run: integrate, write the trajectory CSV and the
// diagnostics JSON. Integration failures propagate as typed errors carrying
// the parameter value at failure; a failed --verify pass is reported through
// the exit code instead.
RunResult run_simulation(const RunConfig& cfg, const std::string& out_dir = "",
                         bool verify = false);

// Velocity-space section of the constraint surface with qdot3 suppressed:
// unit-scaled samples (x, y, w) of w^2 - x^2 - y^2 = +1 / -1 / 0 on the
// upper sheet, grid_n points per axis over [-range, range].
void write_surface_csv(std::ostream& out, Regime regime, int grid_n, double range);

// Run every *.ini / *.cfg config beneath dir on a pool of worker threads.
// Returns 0 when all runs succeed, otherwise the exit code of the first
// failing config in sorted order.
int sweep_directory(const std::string& dir, const std::string& out_dir, int jobs,
                    bool verify);

// Exit-code mapping shared by the CLI and sweep: 2 config, 3 singularity or
// numerical abort, 4 incompatible fields.
int exit_code_for(ErrorCode code);

}  // namespace relsim
