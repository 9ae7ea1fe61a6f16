// Solver entry points.
//
//   solve_conic     continuous conic programs, with duals
//   solve_mip       branch and bound on the binary variables
//   enumerate_mip   exhaustive reference solver for small instances
//   solve           dispatcher: external backend when FCAS_BACKEND is set,
//                   otherwise solve_mip / solve_conic as appropriate
#pragma once

#include "conic/program.hpp"
#include "solve/types.hpp"

namespace fcas {

// Throws std::invalid_argument if the program has binary variables.
Solution solve_conic(const ConicProgram& p, const SolveOptions& opt = {});

// Branch and bound over the binaries; continuous relaxations are solved by
// the interior-point method on a standard form built once (per-node changes
// are bound-value edits only). Programs without binaries fall through to
// solve_conic. Mixed-integer solutions carry no duals.
Solution solve_mip(const ConicProgram& p, const SolveOptions& opt = {});

// Depth-first enumeration of every assignment of the binaries (pruned only
// by bound propagation), solving the continuous leaf problems. Exhaustive by
// construction; used to cross-check solve_mip. Throws std::invalid_argument
// if more than max_free_binaries binaries remain free after propagation.
Solution enumerate_mip(const ConicProgram& p, const SolveOptions& opt = {},
                       int max_free_binaries = 20);

// solve_mip when the FCAS_BACKEND environment variable is unset or empty,
// otherwise the external solver process named by it (see backend.hpp).
Solution solve(const ConicProgram& p, const SolveOptions& opt = {});

}  // namespace fcas
