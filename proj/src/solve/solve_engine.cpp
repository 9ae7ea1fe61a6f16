#include "solve/solve_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <vector>

#include "solve/backend.hpp"
#include "solve/ipm.hpp"
#include "solve/propagate.hpp"
#include "solve/standard_form.hpp"

namespace fcas {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::GapLimit: return "gap_limit";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NodeLimit: return "node_limit";
        case SolveStatus::TimeLimit: return "time_limit";
        case SolveStatus::NumericalTrouble: return "numerical_trouble";
    }
    return "numerical_trouble";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// user objective = obj_sign * (standard-form value) + obj_constant
double to_user(const StandardForm& sf, double minval) {
    return sf.obj_sign * minval + sf.obj_constant;
}

SolveStatus status_from_ipm(IpmExit e) {
    switch (e) {
        case IpmExit::Optimal:
        case IpmExit::OptimalInaccurate:
            return SolveStatus::Optimal;
        case IpmExit::PrimalInfeasible:
        case IpmExit::PrimalInfeasibleInaccurate:
            return SolveStatus::Infeasible;
        case IpmExit::DualInfeasible:
        case IpmExit::DualInfeasibleInaccurate:
            return SolveStatus::Unbounded;
        default:
            return SolveStatus::NumericalTrouble;
    }
}

double unbounded_objective(const ConicProgram& p) {
    return p.sense == Sense::Maximize ? kInf : -kInf;
}

// Scale-relative feasibility of a candidate point.  The IPM converges on
// residuals measured relative to the problem data, so a well-converged point
// on rows that operate at large magnitudes (a MW-scale energy balance, say)
// carries absolute residuals well above feastol while being feasible for
// every practical purpose.  Judge each row, bound, and cone against the
// magnitude of the quantities entering it — the row 1-norm at the point, not
// the row activity, since the terms of a tight equality cancel there — or an
// absolute test would reject valid incumbents on large-scale models and
// misreport them as numerical trouble.
bool point_within_feastol(const ConicProgram& p, const std::vector<double>& x,
                          double tol) {
    for (const LinearRow& r : p.rows) {
        double act = 0.0, mag = 0.0;
        for (const LinTerm& t : r.terms) {
            double v = t.coef * x[t.var];
            act += v;
            mag += std::abs(v);
        }
        double resid = act - r.rhs;
        double viol = 0.0;
        switch (r.sense) {
            case RowSense::EQ: viol = std::abs(resid); break;
            case RowSense::LE: viol = std::max(0.0, resid); break;
            case RowSense::GE: viol = std::max(0.0, -resid); break;
        }
        if (viol > tol * (1.0 + std::abs(r.rhs) + mag)) return false;
    }
    for (size_t j = 0; j < p.vars.size(); ++j) {
        const Variable& v = p.vars[j];
        if (std::isfinite(v.lb) && x[j] < v.lb - tol * (1.0 + std::abs(v.lb)))
            return false;
        if (std::isfinite(v.ub) && x[j] > v.ub + tol * (1.0 + std::abs(v.ub)))
            return false;
    }
    for (const SocCone& c : p.cones) {
        double un2 = 0.0;
        for (const AffineExpr& e : c.u) {
            double v = affine_value(e, x);
            un2 += v * v;
        }
        double un = std::sqrt(un2);
        double w = affine_value(c.w, x);
        if (un - w > tol * (1.0 + std::abs(w) + un)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct BranchStep {
    int parent;  // arena index of the previous step, -1 at the root
    int var;
    int val;  // 0 or 1
};

struct Node {
    double bound = -kInf;  // valid standard-form lower bound (from the parent)
    std::int64_t seq = 0;
    int depth = 0;
    int steps = -1;  // arena index of the last branch step, -1 for the root

    // context for pseudo-cost updates after this node's relaxation solves
    int pvar = -1;      // variable branched on to create this node
    bool up = false;    // true when this is the var = 1 child
    double pfrac = 0.0; // parent relaxation value of pvar
    double pmin = 0.0;  // parent relaxation objective
};

struct NodeWorse {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        // On equal bounds prefer the newest node: degenerate instances have
        // large flat optimal faces, and diving reaches an integral leaf in
        // depth-many solves where breadth-first would grow the frontier
        // exponentially before the first incumbent.
        return a.seq < b.seq;
    }
};

class Bnb {
public:
    Bnb(const ConicProgram& p, const SolveOptions& opt)
        : p_(p),
          opt_(opt),
          relaxed_(relax_binaries(p)),
          sf_(to_standard_form(relaxed_)),
          ipm_(sf_),
          binaries_(p.binary_vars()),
          n_(p.n_vars()) {
        io_.max_iters = opt.ipm_max_iters;
    }

    Solution run();

private:
    using Clock = std::chrono::steady_clock;

    double elapsed() const {
        return std::chrono::duration<double>(Clock::now() - t0_).count();
    }
    double cvalue(const std::vector<double>& x) const {
        double v = 0.0;
        for (int j = 0; j < n_; ++j) v += sf_.c[j] * x[j];
        return v;
    }
    bool has_incumbent() const { return inc_val_ < kInf; }
    double gap_tolerance_base() const {
        return std::max(1.0, std::abs(to_user(sf_, inc_val_)));
    }

    void try_incumbent(const std::vector<double>& x, const char* how);
    bool stop_check(double global_bound);
    void process(const Node& nd);
    void push_children(const Node& nd, int var, double frac, double bound, double minval);
    int pick_branch_var(const std::vector<double>& lb, const std::vector<double>& ub,
                        const Eigen::VectorXd& x, double minval);
    void strong_branch_init(int j, double f, const std::vector<double>& lb,
                            const std::vector<double>& ub, double minval);
    void rounding_heuristic(const Eigen::VectorXd& x);
    void dive_heuristic(Eigen::VectorXd x);
    void log_node(const Node& nd, double bound, const char* note);
    Solution finish();

    const ConicProgram& p_;
    SolveOptions opt_;
    ConicProgram relaxed_;
    StandardForm sf_;
    IpmSolver ipm_;
    std::vector<int> binaries_;
    int n_;
    IpmOptions io_;

    std::vector<double> sf_lb0_, sf_ub0_;      // original bounds (for h edits)
    std::vector<double> prop_lb0_, prop_ub0_;  // root-propagated bounds

    std::vector<BranchStep> arena_;
    std::priority_queue<Node, std::vector<Node>, NodeWorse> heap_;
    std::int64_t seq_ = 0;
    std::int64_t processed_ = 0;

    double inc_val_ = kInf;  // standard-form space
    std::vector<double> inc_x_;
    int incumbents_ = 0;

    double skipped_min_ = kInf;  // bounds of subtrees lost to numerical failures
    bool any_skipped_ = false;
    bool unbounded_ = false;

    // pseudo-costs (per variable, standard-form objective degradation per unit)
    std::vector<double> pc_dn_, pc_up_;
    std::vector<int> cnt_dn_, cnt_up_;
    int sb_budget_ = 100;  // strong-branch initializations left (2 LPs each)

    Clock::time_point t0_;
    SolveStatus stop_status_ = SolveStatus::NumericalTrouble;
    double final_bound_ = -kInf;
    bool stopped_ = false;
    IpmStats root_ipm_;
};

void Bnb::try_incumbent(const std::vector<double>& x, const char* how) {
    std::vector<double> xr = x;
    for (int j : binaries_) {
        double r = std::round(xr[j]);
        if (std::abs(xr[j] - r) > opt_.int_tol) {
            if (opt_.log)
                *opt_.log << "candidate (" << how << ") rejected: var " << j
                          << " fractional " << xr[j] << "\n";
            return;
        }
        xr[j] = r;
    }
    if (!point_within_feastol(p_, xr, opt_.feastol)) {
        if (opt_.log)
            *opt_.log << "candidate (" << how << ") rejected by feasibility check\n";
        return;
    }
    double v = cvalue(xr);
    if (v < inc_val_ - 1e-12 * std::max(1.0, std::abs(v))) {
        inc_val_ = v;
        inc_x_ = std::move(xr);
        ++incumbents_;
        if (opt_.log) {
            *opt_.log << "incumbent " << to_user(sf_, inc_val_) << " (" << how
                      << ", node " << processed_ << ")\n";
        }
    }
}

bool Bnb::stop_check(double global_bound) {
    if (unbounded_) {
        stop_status_ = SolveStatus::Unbounded;
        final_bound_ = -kInf;
        stopped_ = true;
        return true;
    }
    if (has_incumbent()) {
        double absgap = inc_val_ - global_bound;
        double relgap = absgap / gap_tolerance_base();
        if (absgap <= opt_.abs_gap || relgap <= opt_.rel_gap) {
            stop_status_ = relgap <= 1e-9 ? SolveStatus::Optimal : SolveStatus::GapLimit;
            final_bound_ = global_bound;
            stopped_ = true;
            return true;
        }
    }
    if (opt_.time_limit_s > 0 && elapsed() > opt_.time_limit_s) {
        stop_status_ = has_incumbent() ? SolveStatus::GapLimit : SolveStatus::TimeLimit;
        final_bound_ = global_bound;
        stopped_ = true;
        return true;
    }
    if (opt_.node_limit > 0 && processed_ >= opt_.node_limit) {
        stop_status_ = has_incumbent() ? SolveStatus::GapLimit : SolveStatus::NodeLimit;
        final_bound_ = global_bound;
        stopped_ = true;
        return true;
    }
    return false;
}

// Measure the true bound impact of branching on variable j by solving both
// child relaxations once, and record the result as that variable's initial
// pseudo-costs.  A child whose propagation or relaxation is infeasible gets a
// very large degradation: branching there prunes a whole side, which is the
// best possible outcome.  Without this seeding, the relaxation's analytic
// centers make fraction-based scores useless on degenerate instances -- ties
// in a packing row sit at 0.5 forever while the variables that actually move
// the bound hover at mild fractions and never get picked.
void Bnb::strong_branch_init(int j, double f, const std::vector<double>& lb,
                             const std::vector<double>& ub, double minval) {
    const double big = 1e9 * (1.0 + std::abs(minval));
    double delta[2] = {0.0, 0.0};
    for (int val : {0, 1}) {
        std::vector<double> clb = lb, cub = ub;
        clb[j] = cub[j] = static_cast<double>(val);
        if (propagate_bounds(p_, clb, cub, opt_.feastol).infeasible) {
            delta[val] = big;
            continue;
        }
        std::vector<double> cur_lb = sf_lb0_, cur_ub = sf_ub0_;
        for (int b : binaries_) {
            cur_lb[b] = clb[b];
            cur_ub[b] = cub[b];
        }
        update_bound_values(sf_, cur_lb, cur_ub);
        IpmResult r = ipm_.solve(sf_.b, sf_.h, io_);
        if (r.proved_primal_infeasible())
            delta[val] = big;
        else if (r.ok())
            delta[val] = std::max(0.0, r.pobj - minval);
        // other exits: leave 0 (uninformative) but still mark as measured
    }
    pc_dn_[j] = delta[0] / std::max(f, 1e-6);
    cnt_dn_[j] = 1;
    pc_up_[j] = delta[1] / std::max(1.0 - f, 1e-6);
    cnt_up_[j] = 1;
}

int Bnb::pick_branch_var(const std::vector<double>& lb, const std::vector<double>& ub,
                         const Eigen::VectorXd& x, double minval) {
    bool use_pc = opt_.branching == Branching::PseudoCost;

    std::vector<std::pair<double, int>> cand;  // (fractionality, var)
    for (int j : binaries_) {
        if (ub[j] - lb[j] < 0.5) continue;  // fixed at this node
        double f = std::clamp(x[j], 0.0, 1.0);
        double frac = std::min(f, 1.0 - f);
        if (frac <= opt_.int_tol) continue;
        cand.push_back({frac, j});
    }
    if (cand.empty()) return -1;

    if (use_pc && sb_budget_ > 0) {
        // Reliability step: seed pseudo-costs for the most fractional
        // candidates that have no history yet (a handful per node, bounded
        // globally so strong branching stays a startup cost).
        std::sort(cand.begin(), cand.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        int inits = 0;
        for (const auto& [frac, j] : cand) {
            if (inits >= 8 || sb_budget_ <= 0) break;
            if (cnt_dn_[j] > 0 && cnt_up_[j] > 0) continue;
            strong_branch_init(j, std::clamp(x[j], 0.0, 1.0), lb, ub, minval);
            ++inits;
            --sb_budget_;
        }
        // sf_ still holds the last strong-branch child's bounds; callers
        // re-apply their own bounds before any solve, so no restore needed.
    }

    int best = -1;
    double best_score = -1.0;
    for (const auto& [frac, j] : cand) {
        double f = std::clamp(x[j], 0.0, 1.0);
        double score;
        if (use_pc && cnt_dn_[j] > 0 && cnt_up_[j] > 0) {
            double dn = pc_dn_[j] / cnt_dn_[j];
            double up = pc_up_[j] / cnt_up_[j];
            score = std::max(f * dn, 1e-12) * std::max((1.0 - f) * up, 1e-12);
        } else {
            score = frac;
        }
        if (score > best_score + 1e-15) {
            best_score = score;
            best = j;
        }
    }
    return best;
}

void Bnb::push_children(const Node& nd, int var, double frac, double bound,
                        double minval) {
    for (int val : {0, 1}) {
        arena_.push_back({nd.steps, var, val});
        Node child;
        child.bound = bound;
        child.seq = ++seq_;
        child.depth = nd.depth + 1;
        child.steps = static_cast<int>(arena_.size()) - 1;
        child.pvar = var;
        child.up = (val == 1);
        child.pfrac = frac;
        child.pmin = minval;
        heap_.push(child);
    }
}

void Bnb::rounding_heuristic(const Eigen::VectorXd& x) {
    std::vector<double> lb = prop_lb0_, ub = prop_ub0_;
    for (int j : binaries_) {
        // Round half *down*: mode/packing rows (sum of binaries <= 1) are the
        // common source of 0.5-0.5 splits, and rounding both halves up would
        // make the candidate trivially infeasible.
        double r = std::clamp(x[j], 0.0, 1.0) > 0.5 ? 1.0 : 0.0;
        if (r < lb[j] - 0.5 || r > ub[j] + 0.5) return;  // contradicts a root fix
        lb[j] = ub[j] = r;
    }
    if (propagate_bounds(p_, lb, ub, opt_.feastol).infeasible) return;
    std::vector<double> cur_lb = sf_lb0_, cur_ub = sf_ub0_;
    for (int j : binaries_) {
        cur_lb[j] = lb[j];
        cur_ub[j] = ub[j];
    }
    update_bound_values(sf_, cur_lb, cur_ub);
    IpmResult r = ipm_.solve(sf_.b, sf_.h, io_);
    if (!r.ok()) return;
    try_incumbent(std::vector<double>(r.x.data(), r.x.data() + r.x.size()),
                  "rounding");
}

// Fix-and-propagate dive.  The interior-point relaxation returns analytic
// centers, not vertices, so on instances with degenerate binary faces (e.g.
// interchangeable storage modes) branching alone keeps producing fractional
// relaxations and the tree grows without ever reaching an integral leaf.
//
// Each round fixes the free binaries the current relaxation point is
// confident about (within 0.1 of a bound) and otherwise the single most
// decided one, propagates (packing rows switch off the partner of whichever
// mode wins), and re-solves the relaxation.  A center value is a weak signal
// on a degenerate face, so wrong guesses are expected; they surface as an
// infeasible re-solve, and the round is retried once with the last guess
// flipped.  The relaxation sees the whole problem -- cones and storage
// coupling included -- so the flip test is exact where bound propagation is
// blind.  The dive ends when every binary is fixed and the verifying solve
// is feasible; that point is offered as an incumbent.
void Bnb::dive_heuristic(Eigen::VectorXd x) {
    std::vector<double> lb = prop_lb0_, ub = prop_ub0_;
    const double conf = 0.1;
    const int max_rounds = static_cast<int>(binaries_.size()) * 2 + 8;

    // Fix var j to r in (lb, ub) and propagate; on contradiction flip to
    // 1 - r and re-propagate from the snapshot.  False = both sides dead.
    auto fix_with_flip = [&](int j, double r) {
        std::vector<double> lb_snap = lb, ub_snap = ub;
        lb[j] = ub[j] = r;
        if (!propagate_bounds(p_, lb, ub, opt_.feastol).infeasible) return true;
        lb = lb_snap;
        ub = ub_snap;
        lb[j] = ub[j] = 1.0 - r;
        return !propagate_bounds(p_, lb, ub, opt_.feastol).infeasible;
    };

    for (int round = 0; round < max_rounds; ++round) {
        // Fix everything the current point is confident about; otherwise the
        // single var with the strongest lean.
        bool any_free = false;
        int undecided = -1;
        double undecided_lean = -1.0;
        for (int j : binaries_) {
            if (ub[j] - lb[j] < 0.5) continue;
            double v = std::clamp(x[j], 0.0, 1.0);
            if (v <= conf || v >= 1.0 - conf) {
                if (!fix_with_flip(j, v < 0.5 ? 0.0 : 1.0)) {
                    if (opt_.log) *opt_.log << "dive: contradiction on " << j << "\n";
                    return;
                }
            } else if (ub[j] - lb[j] > 0.5) {  // may have been propagated just now
                any_free = true;
                double lean = std::abs(v - 0.5);
                if (lean > undecided_lean) {
                    undecided_lean = lean;
                    undecided = j;
                }
            }
        }
        int guessed = -1;
        double applied = 0.0;
        bool other_side_dead = false;
        std::vector<double> lb_pre, ub_pre;  // state before the guess
        if (any_free && undecided >= 0 && ub[undecided] - lb[undecided] > 0.5) {
            guessed = undecided;
            applied = std::clamp(x[guessed], 0.0, 1.0) >= 0.5 ? 1.0 : 0.0;
            lb_pre = lb;
            ub_pre = ub;
            lb[guessed] = ub[guessed] = applied;
            if (propagate_bounds(p_, lb, ub, opt_.feastol).infeasible) {
                lb = lb_pre;
                ub = ub_pre;
                applied = 1.0 - applied;
                other_side_dead = true;
                lb[guessed] = ub[guessed] = applied;
                if (propagate_bounds(p_, lb, ub, opt_.feastol).infeasible) {
                    if (opt_.log)
                        *opt_.log << "dive: contradiction on " << guessed << "\n";
                    return;
                }
            }
        }

        auto solve_current = [&]() {
            std::vector<double> cur_lb = sf_lb0_, cur_ub = sf_ub0_;
            for (int j : binaries_) {
                cur_lb[j] = lb[j];
                cur_ub[j] = ub[j];
            }
            update_bound_values(sf_, cur_lb, cur_ub);
            return ipm_.solve(sf_.b, sf_.h, io_);
        };
        IpmResult r = solve_current();
        if (!r.ok() && guessed >= 0 && !other_side_dead) {
            // The guess broke something only the relaxation can see (a cone,
            // storage coupling): retry the round with it flipped.
            lb = lb_pre;
            ub = ub_pre;
            lb[guessed] = ub[guessed] = 1.0 - applied;
            if (propagate_bounds(p_, lb, ub, opt_.feastol).infeasible) {
                if (opt_.log) *opt_.log << "dive: flip contradiction\n";
                return;
            }
            r = solve_current();
        }
        if (!r.ok()) {
            if (opt_.log)
                *opt_.log << "dive: relaxation failed ("
                          << static_cast<int>(r.exit) << ") round " << round
                          << "\n";
            return;
        }

        bool all_fixed = true;
        for (int j : binaries_) {
            if (ub[j] - lb[j] > 0.5) {
                all_fixed = false;
                break;
            }
        }
        if (all_fixed) {
            try_incumbent(
                std::vector<double>(r.x.data(), r.x.data() + r.x.size()), "dive");
            return;
        }
        x = r.x;
    }
}

void Bnb::log_node(const Node& nd, double bound, const char* note) {
    if (!opt_.log) return;
    *opt_.log << "node " << processed_ << " depth " << nd.depth << " bound "
              << to_user(sf_, bound) << " inc "
              << (has_incumbent() ? to_user(sf_, inc_val_) : kNaN) << " "
              << note << "\n";
}

void Bnb::process(const Node& nd) {
    ++processed_;

    // Reconstruct this node's branching decisions and propagate.
    std::vector<double> lb = prop_lb0_, ub = prop_ub0_;
    for (int s = nd.steps; s != -1; s = arena_[s].parent) {
        lb[arena_[s].var] = arena_[s].val;
        ub[arena_[s].var] = arena_[s].val;
    }
    if (propagate_bounds(p_, lb, ub, opt_.feastol).infeasible) {
        log_node(nd, nd.bound, "pruned (propagation)");
        return;
    }

    // Only binary bounds are edited in the standard form; propagated
    // continuous tightenings serve the feasibility checks above.
    std::vector<double> cur_lb = sf_lb0_, cur_ub = sf_ub0_;
    int free_binaries = 0;
    for (int j : binaries_) {
        cur_lb[j] = lb[j];
        cur_ub[j] = ub[j];
        if (ub[j] - lb[j] > 0.5) ++free_binaries;
    }
    update_bound_values(sf_, cur_lb, cur_ub);
    IpmResult r = ipm_.solve(sf_.b, sf_.h, io_);
    if (processed_ == 1) root_ipm_ = r.stats;

    if (r.proved_primal_infeasible()) {
        log_node(nd, nd.bound, "pruned (infeasible)");
        return;
    }
    if (r.proved_dual_infeasible()) {
        if (free_binaries == 0) {
            unbounded_ = true;
            log_node(nd, -kInf, "unbounded leaf");
            return;
        }
        int var = -1;
        for (int j : binaries_) {
            if (cur_ub[j] - cur_lb[j] > 0.5) { var = j; break; }
        }
        push_children(nd, var, 0.5, nd.bound, nd.bound);
        log_node(nd, nd.bound, "unbounded relaxation, branched");
        return;
    }
    if (!r.ok()) {
        if (free_binaries == 0) {
            skipped_min_ = std::min(skipped_min_, nd.bound);
            any_skipped_ = true;
            log_node(nd, nd.bound, "leaf skipped (numerical)");
            return;
        }
        int var = -1;
        for (int j : binaries_) {
            if (cur_ub[j] - cur_lb[j] > 0.5) { var = j; break; }
        }
        push_children(nd, var, 0.5, nd.bound, nd.bound);
        log_node(nd, nd.bound, "numerical, branched");
        return;
    }

    double minval = r.pobj;
    double bound = std::max(nd.bound, r.dobj);

    if (nd.pvar >= 0 && std::isfinite(nd.pmin)) {
        double delta = std::max(0.0, minval - nd.pmin);
        if (nd.up) {
            pc_up_[nd.pvar] += delta / std::max(1.0 - nd.pfrac, 1e-6);
            ++cnt_up_[nd.pvar];
        } else {
            pc_dn_[nd.pvar] += delta / std::max(nd.pfrac, 1e-6);
            ++cnt_dn_[nd.pvar];
        }
    }

    if (has_incumbent() && bound >= inc_val_ - 1e-12 * gap_tolerance_base()) {
        log_node(nd, bound, "pruned (bound)");
        return;
    }

    int var = pick_branch_var(lb, ub, r.x, minval);
    if (var < 0) {
        // Integral relaxation optimum: either a new incumbent or (if the
        // rounded point fails the feasibility check) a subtree we must
        // honestly account for in the final bound.
        int before = incumbents_;
        double best_before = inc_val_;
        try_incumbent(std::vector<double>(r.x.data(), r.x.data() + r.x.size()),
                      "relaxation");
        if (incumbents_ == before && minval < best_before - opt_.abs_gap) {
            skipped_min_ = std::min(skipped_min_, bound);
            any_skipped_ = true;
            log_node(nd, bound, "integral leaf rejected by feasibility check");
        } else {
            log_node(nd, bound, "integral");
        }
        return;
    }

    double f = std::clamp(r.x[var], 0.0, 1.0);
    push_children(nd, var, f, bound, minval);
    log_node(nd, bound, "branched");

    if (processed_ == 1 || processed_ % 50 == 0) {
        rounding_heuristic(r.x);
        if (!has_incumbent()) dive_heuristic(r.x);
    }
}

Solution Bnb::finish() {
    Solution s;
    s.has_duals = false;
    s.ipm = root_ipm_;
    s.bnb.nodes = processed_;
    s.bnb.incumbents = incumbents_;
    s.bnb.wall_time_s = elapsed();

    if (unbounded_ || stop_status_ == SolveStatus::Unbounded) {
        s.status = SolveStatus::Unbounded;
        s.objective = unbounded_objective(p_);
        s.best_bound = s.objective;
        s.bnb.best_objective = s.objective;
        s.bnb.best_bound = s.best_bound;
        return s;
    }

    if (!stopped_) {
        // The heap ran out: every subtree was either explored or skipped.
        if (!has_incumbent()) {
            s.status = any_skipped_ ? SolveStatus::NumericalTrouble
                                    : SolveStatus::Infeasible;
            s.objective = s.best_bound = kNaN;
            s.bnb.best_objective = s.bnb.best_bound = kNaN;
            s.bnb.gap = kNaN;
            return s;
        }
        final_bound_ = std::min(inc_val_, skipped_min_);
        double relgap = (inc_val_ - final_bound_) / gap_tolerance_base();
        stop_status_ = relgap <= 1e-9 ? SolveStatus::Optimal : SolveStatus::GapLimit;
    } else if (!has_incumbent()) {
        s.status = stop_status_;
        s.objective = s.best_bound = kNaN;
        s.bnb.best_objective = s.bnb.best_bound = kNaN;
        s.bnb.gap = kNaN;
        return s;
    }

    s.status = stop_status_;
    s.objective = to_user(sf_, inc_val_);
    s.best_bound = to_user(sf_, std::min(final_bound_, inc_val_));
    s.x = inc_x_;
    s.bnb.best_objective = s.objective;
    s.bnb.best_bound = s.best_bound;
    s.bnb.gap = (inc_val_ - std::min(final_bound_, inc_val_)) / gap_tolerance_base();
    return s;
}

Solution Bnb::run() {
    t0_ = Clock::now();
    int nv = n_;
    pc_dn_.assign(nv, 0.0);
    pc_up_.assign(nv, 0.0);
    cnt_dn_.assign(nv, 0);
    cnt_up_.assign(nv, 0);

    sf_lb0_.resize(nv);
    sf_ub0_.resize(nv);
    for (int j = 0; j < nv; ++j) {
        sf_lb0_[j] = p_.vars[j].lb;
        sf_ub0_[j] = p_.vars[j].ub;
    }
    prop_lb0_ = sf_lb0_;
    prop_ub0_ = sf_ub0_;
    if (propagate_bounds(p_, prop_lb0_, prop_ub0_, opt_.feastol).infeasible) {
        Solution s;
        s.status = SolveStatus::Infeasible;
        s.objective = s.best_bound = kNaN;
        s.bnb.best_objective = s.bnb.best_bound = kNaN;
        s.bnb.gap = kNaN;
        s.has_duals = false;
        return s;
    }

    if (static_cast<int>(opt_.warm_start.size()) == nv) {
        try_incumbent(opt_.warm_start, "warm start");
    }

    heap_.push(Node{});
    while (!heap_.empty()) {
        double global_bound = std::min(heap_.top().bound, skipped_min_);
        if (stop_check(global_bound)) break;
        Node nd = heap_.top();
        heap_.pop();
        if (has_incumbent() && nd.bound >= inc_val_ - 1e-12 * gap_tolerance_base()) {
            continue;  // pruned by a newer incumbent; not counted as processed
        }
        process(nd);
        if (unbounded_) {
            stop_check(-kInf);
            break;
        }
    }
    return finish();
}

// ---------------------------------------------------------------------------
// Polyhedral outer approximation of the cones
// ---------------------------------------------------------------------------

std::vector<LinTerm> minus_terms(const std::vector<LinTerm>& a) {
    std::vector<LinTerm> out = a;
    for (auto& t : out) t.coef = -t.coef;
    return out;
}

std::vector<LinTerm> combine(const std::vector<LinTerm>& a, double ca,
                             const std::vector<LinTerm>& b, double cb) {
    std::vector<LinTerm> out;
    out.reserve(a.size() + b.size());
    for (const auto& t : a) out.push_back({t.var, ca * t.coef});
    for (const auto& t : b) out.push_back({t.var, cb * t.coef});
    return out;
}

// Box relaxation of every cone: w >= 0 and +-u_i <= w.
ConicProgram box_outer(const ConicProgram& p) {
    ConicProgram q = p;
    q.cones.clear();
    for (const auto& c : p.cones) {
        q.add_row("oa0(" + c.name + ")", c.w.terms, RowSense::GE, -c.w.constant);
        for (size_t i = 0; i < c.u.size(); ++i) {
            const auto& ui = c.u[i];
            q.add_row("oa+(" + c.name + ")[" + std::to_string(i) + "]",
                      combine(ui.terms, 1.0, c.w.terms, -1.0), RowSense::LE,
                      c.w.constant - ui.constant);
            q.add_row("oa-(" + c.name + ")[" + std::to_string(i) + "]",
                      combine(ui.terms, -1.0, c.w.terms, -1.0), RowSense::LE,
                      c.w.constant + ui.constant);
        }
    }
    return q;
}

Solution solve_outer_approx(const ConicProgram& p, const SolveOptions& opt) {
    ConicProgram wp = box_outer(p);
    SolveOptions inner = opt;
    inner.soc_mode = SocMode::NativeCone;
    int cuts = 0;
    std::int64_t nodes_total = 0;
    auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    for (;;) {
        sol = solve_mip(wp, inner);
        nodes_total += sol.bnb.nodes;
        if (!sol.feasible()) {
            // Infeasibility of the outer relaxation proves infeasibility of
            // the original; an unbounded relaxation proves nothing.
            if (sol.status == SolveStatus::Unbounded) {
                sol.status = SolveStatus::NumericalTrouble;
            }
            break;
        }
        double worst = 0.0;
        std::vector<std::pair<size_t, std::vector<double>>> violated;
        for (size_t ci = 0; ci < p.cones.size(); ++ci) {
            const auto& c = p.cones[ci];
            std::vector<double> uval(c.u.size());
            double norm = 0.0;
            for (size_t i = 0; i < c.u.size(); ++i) {
                uval[i] = affine_value(c.u[i], sol.x);
                norm += uval[i] * uval[i];
            }
            norm = std::sqrt(norm);
            double viol = norm - affine_value(c.w, sol.x);
            worst = std::max(worst, viol);
            if (viol > opt.feastol && norm > 0) violated.push_back({ci, uval});
        }
        if (violated.empty()) break;
        if (cuts + static_cast<int>(violated.size()) > opt.oa_cut_budget) {
            sol.status = SolveStatus::NumericalTrouble;
            if (opt.log) {
                *opt.log << "outer approximation: cut budget exhausted with "
                         << "violation " << worst << "\n";
            }
            break;
        }
        for (const auto& [ci, uval] : violated) {
            const auto& c = p.cones[ci];
            double norm = 0.0;
            for (double v : uval) norm += v * v;
            norm = std::sqrt(norm);
            std::vector<LinTerm> terms = minus_terms(c.w.terms);
            double rhs = c.w.constant;
            for (size_t i = 0; i < c.u.size(); ++i) {
                double d = uval[i] / norm;
                for (const auto& t : c.u[i].terms) terms.push_back({t.var, d * t.coef});
                rhs -= d * c.u[i].constant;
            }
            wp.add_row("oacut(" + c.name + ")[" + std::to_string(cuts) + "]",
                       std::move(terms), RowSense::LE, rhs);
            ++cuts;
        }
    }
    sol.bnb.nodes = nodes_total;
    sol.bnb.oa_cuts = cuts;
    sol.bnb.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Any duals recovered along the way belong to the cut program, not to p.
    sol.has_duals = false;
    sol.row_duals.clear();
    sol.lb_duals.clear();
    sol.ub_duals.clear();
    sol.cone_duals.clear();
    return sol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

Solution solve_conic(const ConicProgram& p, const SolveOptions& opt) {
    if (p.n_binaries() > 0) {
        throw std::invalid_argument("solve_conic: program has binary variables");
    }
    StandardForm sf = to_standard_form(p);
    IpmSolver ipm(sf);
    IpmOptions io;
    io.max_iters = opt.ipm_max_iters;
    IpmResult r = ipm.solve(sf.b, sf.h, io);

    Solution s;
    s.status = status_from_ipm(r.exit);
    s.ipm = r.stats;
    if (r.ok()) {
        s.objective = to_user(sf, r.pobj);
        s.best_bound = to_user(sf, r.dobj);
        s.x.assign(r.x.data(), r.x.data() + r.x.size());
        recover_duals(p, sf, r.y, r.z, s);
        s.has_duals = true;
    } else if (s.status == SolveStatus::Infeasible) {
        s.objective = s.best_bound = kNaN;
    } else if (s.status == SolveStatus::Unbounded) {
        s.objective = s.best_bound = unbounded_objective(p);
    } else {
        s.objective = s.best_bound = kNaN;
    }
    return s;
}

Solution solve_mip(const ConicProgram& p, const SolveOptions& opt) {
    if (opt.soc_mode == SocMode::PolyhedralOuter && !p.cones.empty()) {
        return solve_outer_approx(p, opt);
    }
    if (p.n_binaries() == 0) return solve_conic(p, opt);
    Bnb engine(p, opt);
    return engine.run();
}

Solution enumerate_mip(const ConicProgram& p, const SolveOptions& opt,
                       int max_free_binaries) {
    if (p.n_binaries() == 0) return solve_conic(p, opt);

    ConicProgram relaxed = relax_binaries(p);
    StandardForm sf = to_standard_form(relaxed);
    IpmSolver ipm(sf);
    IpmOptions io;
    io.max_iters = opt.ipm_max_iters;
    const int n = p.n_vars();
    std::vector<int> bins = p.binary_vars();

    std::vector<double> sf_lb0(n), sf_ub0(n);
    for (int j = 0; j < n; ++j) {
        sf_lb0[j] = p.vars[j].lb;
        sf_ub0[j] = p.vars[j].ub;
    }
    std::vector<double> lb0 = sf_lb0, ub0 = sf_ub0;

    Solution s;
    s.has_duals = false;
    if (propagate_bounds(p, lb0, ub0, opt.feastol).infeasible) {
        s.status = SolveStatus::Infeasible;
        s.objective = s.best_bound = kNaN;
        return s;
    }

    int free = 0;
    for (int j : bins) {
        if (ub0[j] - lb0[j] > 0.5) ++free;
    }
    if (free > max_free_binaries) {
        throw std::invalid_argument("enumerate_mip: " + std::to_string(free) +
                                    " free binaries exceed the limit of " +
                                    std::to_string(max_free_binaries));
    }

    double best = kInf;
    std::vector<double> best_x;
    std::int64_t leaves = 0;
    int failed = 0;
    bool unbounded = false;

    auto leaf = [&](const std::vector<double>& lb, const std::vector<double>& ub) {
        ++leaves;
        std::vector<double> cur_lb = sf_lb0, cur_ub = sf_ub0;
        for (int j : bins) {
            cur_lb[j] = lb[j];
            cur_ub[j] = ub[j];
        }
        update_bound_values(sf, cur_lb, cur_ub);
        IpmResult r = ipm.solve(sf.b, sf.h, io);
        if (r.proved_primal_infeasible()) return;
        if (r.proved_dual_infeasible()) {
            unbounded = true;
            return;
        }
        if (!r.ok()) {
            ++failed;
            return;
        }
        std::vector<double> x(r.x.data(), r.x.data() + r.x.size());
        for (int j : bins) x[j] = std::round(lb[j]);
        if (!point_within_feastol(p, x, opt.feastol)) {
            ++failed;
            return;
        }
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += sf.c[j] * x[j];
        if (v < best) {
            best = v;
            best_x = std::move(x);
        }
    };

    // Depth-first over the binaries in index order, 0 before 1.
    auto rec = [&](auto&& self, const std::vector<double>& lb,
                   const std::vector<double>& ub, size_t next) -> void {
        if (unbounded) return;
        size_t k = next;
        while (k < bins.size() && ub[bins[k]] - lb[bins[k]] < 0.5) ++k;
        if (k == bins.size()) {
            leaf(lb, ub);
            return;
        }
        for (int val : {0, 1}) {
            std::vector<double> clb = lb, cub = ub;
            clb[bins[k]] = cub[bins[k]] = val;
            if (!propagate_bounds(p, clb, cub, opt.feastol).infeasible) {
                self(self, clb, cub, k + 1);
            }
        }
    };
    rec(rec, lb0, ub0, 0);

    s.bnb.nodes = leaves;
    if (unbounded) {
        s.status = SolveStatus::Unbounded;
        s.objective = s.best_bound = unbounded_objective(p);
        return s;
    }
    if (failed > 0) {
        // Some leaves could not be certified either way; the enumeration is
        // no longer exhaustive, which defeats its purpose as a reference.
        s.status = SolveStatus::NumericalTrouble;
        s.objective = s.best_bound = best < kInf ? to_user(sf, best) : kNaN;
        s.x = best_x;
        return s;
    }
    if (best == kInf) {
        s.status = SolveStatus::Infeasible;
        s.objective = s.best_bound = kNaN;
        return s;
    }
    s.status = SolveStatus::Optimal;
    s.objective = s.best_bound = to_user(sf, best);
    s.x = best_x;
    s.bnb.best_objective = s.bnb.best_bound = s.objective;
    return s;
}

Solution solve(const ConicProgram& p, const SolveOptions& opt) {
    if (backend_configured()) return solve_with_backend(p, opt);
    return solve_mip(p, opt);
}

}  // namespace fcas
