// Adapter for an external mixed-integer conic solver, wired in through the
// FCAS_BACKEND environment variable. The named executable is run as
//
//     <backend> <model.json> <solution.json>
//
// where model.json is the conic-program serialization plus an "options"
// object, and solution.json is expected to hold at least {"status", "x",
// "objective"}; optional members: "best_bound", "row_duals", "lb_duals",
// "ub_duals", "cone_duals" (presence of row_duals marks the solution as
// carrying duals).
#pragma once

#include "conic/program.hpp"
#include "solve/types.hpp"

namespace fcas {

// True when FCAS_BACKEND names a command.
bool backend_configured();

// Runs the configured backend on p. Throws std::runtime_error when the
// backend is not configured, exits nonzero, or writes an unusable solution.
Solution solve_with_backend(const ConicProgram& p, const SolveOptions& opt);

}  // namespace fcas
