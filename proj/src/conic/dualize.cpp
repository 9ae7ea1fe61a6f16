#include "conic/dualize.hpp"

#include <stdexcept>

namespace fcas {

namespace {

// Dualize a min-sense program whose variables are all free (bounds already
// realized as rows).
DualizeResult dualize_min(ConicProgram p) {
    DualizeResult res;
    ConicProgram& d = res.dual;
    d.sense = Sense::Maximize;
    d.obj_constant = p.obj_constant;

    // One dual variable per row.  Inequality multipliers are nonnegative,
    // equality multipliers free.  Objective: +rhs for >=, -rhs for <=,
    // +rhs for == (multiplier of the row as written).
    res.row_to_dual_var.reserve(p.rows.size());
    for (const auto& r : p.rows) {
        double lb = r.sense == RowSense::EQ ? -kInf : 0.0;
        double obj = r.sense == RowSense::LE ? -r.rhs : r.rhs;
        res.row_to_dual_var.push_back(d.add_var(r.dual_name, lb, kInf, VarKind::Continuous, obj));
    }
    // One dual variable per cone component; objective -constant (the cone
    // block enters the Lagrangian as -omega'(Ux + p0), so constants flip).
    res.cone_to_dual_vars.reserve(p.cones.size());
    for (const auto& c : p.cones) {
        std::vector<int> ids;
        for (size_t i = 0; i < c.u.size(); ++i)
            ids.push_back(d.add_var(c.dual_names[i], -kInf, kInf, VarKind::Continuous,
                                    -c.u[i].constant));
        ids.push_back(d.add_var(c.dual_names.back(), -kInf, kInf, VarKind::Continuous,
                                -c.w.constant));
        res.cone_to_dual_vars.push_back(std::move(ids));
    }

    // Stationarity: for each primal variable j,
    //   sum_{>= rows} a_ij alpha_i - sum_{<= rows} a_ij alpha_i
    //   + sum_{== rows} a_ij beta_i + sum_cones (U'omega_u + q omega_w)_j
    //   = c_j.
    std::vector<std::vector<LinTerm>> stat(p.n_vars());
    for (size_t i = 0; i < p.rows.size(); ++i) {
        const auto& r = p.rows[i];
        double sgn = r.sense == RowSense::LE ? -1.0 : 1.0;
        for (const auto& t : r.terms)
            stat[t.var].push_back({res.row_to_dual_var[i], sgn * t.coef});
    }
    for (size_t k = 0; k < p.cones.size(); ++k) {
        const auto& c = p.cones[k];
        const auto& ids = res.cone_to_dual_vars[k];
        for (size_t i = 0; i < c.u.size(); ++i)
            for (const auto& t : c.u[i].terms)
                stat[t.var].push_back({ids[i], t.coef});
        for (const auto& t : c.w.terms)
            stat[t.var].push_back({ids.back(), t.coef});
    }
    res.var_to_stat_row.reserve(p.n_vars());
    for (int j = 0; j < p.n_vars(); ++j)
        res.var_to_stat_row.push_back(d.add_row("stat(" + p.vars[j].name + ")",
                                                std::move(stat[j]), RowSense::EQ,
                                                p.vars[j].obj, p.vars[j].name));

    // Multiplier cones: ||omega_u|| <= omega_w.
    for (size_t k = 0; k < p.cones.size(); ++k) {
        const auto& ids = res.cone_to_dual_vars[k];
        std::vector<AffineExpr> u(ids.size() - 1);
        for (size_t i = 0; i + 1 < ids.size(); ++i) u[i].terms = {{ids[i], 1.0}};
        AffineExpr w;
        w.terms = {{ids.back(), 1.0}};
        d.add_cone("dualcone(" + p.cones[k].name + ")", std::move(u), std::move(w));
    }

    res.normalized_primal = std::move(p);
    return res;
}

}  // namespace

DualizeResult dualize(const ConicProgram& p) {
    if (p.n_binaries() > 0)
        throw std::invalid_argument("dualize: program has binary variables; relax first");
    ConicProgram q = bounds_to_rows(p);
    if (q.sense == Sense::Minimize) return dualize_min(std::move(q));
    // max c'x == -min(-c'x); dualize the min form, then negate back so the
    // returned program's optimum equals the primal's.
    for (auto& v : q.vars) v.obj = -v.obj;
    q.obj_constant = -q.obj_constant;
    q.sense = Sense::Minimize;
    DualizeResult res = dualize_min(std::move(q));
    for (auto& v : res.dual.vars) v.obj = -v.obj;
    res.dual.obj_constant = -res.dual.obj_constant;
    res.dual.sense = Sense::Minimize;
    return res;
}

}  // namespace fcas
