// Shared solver-facing types: options, statistics, and the Solution record
// returned for both continuous and mixed-integer solves.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fcas {

enum class SolveStatus {
    Optimal,
    GapLimit,      // feasible incumbent within the requested MIP gap limits
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
    NumericalTrouble,
};

std::string to_string(SolveStatus s);

enum class Branching { MostFractional, PseudoCost };
enum class SocMode { NativeCone, PolyhedralOuter };

struct SolveOptions {
    double rel_gap = 1e-6;        // MIP relative gap target
    double abs_gap = 1e-8;        // MIP absolute gap target
    double feastol = 1e-7;        // feasibility tolerance (IPM exits, checks)
    double int_tol = 1e-6;        // integrality tolerance
    double time_limit_s = 0.0;    // 0 = no limit
    std::int64_t node_limit = 0;  // 0 = no limit
    // Pseudo-cost scores are seeded by strong branching the first time a
    // variable becomes a candidate, so the rule degenerates gracefully to
    // most-fractional only when the strong-branch budget is spent.
    Branching branching = Branching::PseudoCost;
    SocMode soc_mode = SocMode::NativeCone;
    int oa_cut_budget = 200;      // polyhedral mode: max cuts added overall
    // Degenerate day-scale instances (frozen commitment chains) need ~230
    // iterations to reach full accuracy; well-conditioned ones exit long
    // before the cap.
    int ipm_max_iters = 300;
    std::ostream* log = nullptr;  // node-by-node log when set

    // Optional feasible point (size n_vars) used as the initial incumbent of
    // a mixed-integer solve; ignored if it fails the feasibility check.
    std::vector<double> warm_start;
};

struct IpmStats {
    int iterations = 0;
    double pres = 0.0;     // primal residual at exit
    double dres = 0.0;     // dual residual at exit
    double gap = 0.0;      // absolute duality gap at exit
    double relgap = 0.0;
};

struct BnbStats {
    std::int64_t nodes = 0;
    double best_objective = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;          // relative incumbent/bound gap at exit
    double wall_time_s = 0.0;
    int incumbents = 0;        // number of improving solutions found
    int oa_cuts = 0;           // cuts added in polyhedral mode
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalTrouble;
    double objective = 0.0;   // in the program's own sense
    double best_bound = 0.0;  // proof bound (equals objective when exact)
    std::vector<double> x;

    // Duals are populated for continuous solves, using the row-as-written
    // convention: inequality multipliers are >= 0 for both <= and >= rows,
    // equality multipliers are free, cone duals are (omega_u..., omega_w)
    // with ||omega_u|| <= omega_w.
    bool has_duals = false;
    std::vector<double> row_duals;
    std::vector<double> lb_duals;
    std::vector<double> ub_duals;
    std::vector<std::vector<double>> cone_duals;

    IpmStats ipm;
    BnbStats bnb;

    bool feasible() const {
        return status == SolveStatus::Optimal || status == SolveStatus::GapLimit;
    }
};

}  // namespace fcas
