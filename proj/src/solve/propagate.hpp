// Activity-based bound propagation on the linear rows of a conic program.
//
// Classic bound tightening: for each row, the minimal/maximal activity of all
// but one term bounds that term's variable.  Binary variables get their
// bounds rounded to {0,1}.  Cones are ignored (sound: propagation only ever
// uses a relaxation).  Used as the MIP presolve, as the node-fixing rule
// after branching, and as the "logic repair" step of the rounding heuristic.
#pragma once

#include <vector>

#include "conic/program.hpp"

namespace fcas {

struct PropagationResult {
    bool infeasible = false;
    int tightenings = 0;
};

// Tightens lb/ub in place.  Returns infeasible=true when some variable's
// bounds cross by more than feastol.
PropagationResult propagate_bounds(const ConicProgram& p, std::vector<double>& lb,
                                   std::vector<double>& ub, double feastol,
                                   int max_rounds = 50);

}  // namespace fcas
