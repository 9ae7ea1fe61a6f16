#include "solve/propagate.hpp"

#include <algorithm>
#include <cmath>

namespace fcas {

namespace {

// Row activity bookkeeping that separates the finite part from the count of
// infinite contributions, so per-term "activity of the rest" is O(1).
struct Activity {
    double fin_min = 0.0, fin_max = 0.0;
    int inf_min = 0, inf_max = 0;  // number of -inf / +inf contributions

    double min_without(double lo) const {
        if (std::isinf(lo)) return inf_min > 1 ? -kInf : fin_min;
        return inf_min > 0 ? -kInf : fin_min - lo;
    }
    double max_without(double hi) const {
        if (std::isinf(hi)) return inf_max > 1 ? kInf : fin_max;
        return inf_max > 0 ? kInf : fin_max + (-hi);
    }
    double min_full() const { return inf_min > 0 ? -kInf : fin_min; }
    double max_full() const { return inf_max > 0 ? kInf : fin_max; }
};

}  // namespace

PropagationResult propagate_bounds(const ConicProgram& p, std::vector<double>& lb,
                                   std::vector<double>& ub, double feastol,
                                   int max_rounds) {
    PropagationResult res;
    std::vector<double> los, his;
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        for (const auto& r : p.rows) {
            Activity act;
            los.clear();
            his.clear();
            for (const auto& t : r.terms) {
                double lo = t.coef > 0 ? t.coef * lb[t.var] : t.coef * ub[t.var];
                double hi = t.coef > 0 ? t.coef * ub[t.var] : t.coef * lb[t.var];
                los.push_back(lo);
                his.push_back(hi);
                if (std::isinf(lo)) ++act.inf_min; else act.fin_min += lo;
                if (std::isinf(hi)) ++act.inf_max; else act.fin_max += hi;
            }
            if (r.sense != RowSense::GE && act.min_full() > r.rhs + feastol) {
                res.infeasible = true;
                return res;
            }
            if (r.sense != RowSense::LE && act.max_full() < r.rhs - feastol) {
                res.infeasible = true;
                return res;
            }
            for (size_t ti = 0; ti < r.terms.size(); ++ti) {
                const auto& t = r.terms[ti];
                bool binary = p.vars[t.var].kind == VarKind::Binary;
                if (r.sense != RowSense::GE) {
                    double rest_min = act.min_without(los[ti]);
                    if (std::isfinite(rest_min)) {
                        double nb = (r.rhs - rest_min) / t.coef;
                        if (t.coef > 0) {
                            if (binary) nb = std::floor(nb + feastol);
                            if (nb < ub[t.var] - 1e-12) { ub[t.var] = nb; changed = true; ++res.tightenings; }
                        } else {
                            if (binary) nb = std::ceil(nb - feastol);
                            if (nb > lb[t.var] + 1e-12) { lb[t.var] = nb; changed = true; ++res.tightenings; }
                        }
                    }
                }
                if (r.sense != RowSense::LE) {
                    double rest_max = act.max_without(his[ti]);
                    if (std::isfinite(rest_max)) {
                        double nb = (r.rhs - rest_max) / t.coef;
                        if (t.coef > 0) {
                            if (binary) nb = std::ceil(nb - feastol);
                            if (nb > lb[t.var] + 1e-12) { lb[t.var] = nb; changed = true; ++res.tightenings; }
                        } else {
                            if (binary) nb = std::floor(nb + feastol);
                            if (nb < ub[t.var] - 1e-12) { ub[t.var] = nb; changed = true; ++res.tightenings; }
                        }
                    }
                }
                if (lb[t.var] > ub[t.var] + feastol) {
                    res.infeasible = true;
                    return res;
                }
            }
        }
        if (!changed) break;
    }
    return res;
}

}  // namespace fcas
