// Mechanical Lagrangian dualization of a continuous conic program.
//
// For a minimization program the Lagrangian is
//   L = c'x - sum_i alpha_i g_i(x) - sum_m beta_m h_m(x) - sum_k omega_k' K_k(x)
// with g_i >= 0 the inequality rows (>= rows as written, <= rows negated),
// h_m = 0 the equality rows, and K_k(x) = (u_k(x), w_k(x)) the cone blocks
// paired with multipliers in the (self-dual) second-order cone.  The dual
// maximizes the Lagrangian's infimum: one equality row per primal variable
// (stationarity) plus sign and cone conditions on the multipliers.
//
// Dual variables take the primal rows' dual names; stationarity rows are
// named "stat(<var>)" and carry the primal variable's name as their own dual
// name, so dualizing twice reproduces the primal labels.
#pragma once

#include "conic/program.hpp"

namespace fcas {

struct DualizeResult {
    // Primal with finite bounds realized as rows (what the maps refer to).
    ConicProgram normalized_primal;
    ConicProgram dual;
    std::vector<int> row_to_dual_var;            // normalized primal row -> dual var
    std::vector<int> var_to_stat_row;            // primal var -> dual row
    std::vector<std::vector<int>> cone_to_dual_vars;  // primal cone -> dual vars (u..., w)
};

// Pre: p has no binary variables (throw std::invalid_argument otherwise).
// Works for either sense; the dual has the opposite sense and the same
// optimal value under strong duality.
DualizeResult dualize(const ConicProgram& p);

}  // namespace fcas
