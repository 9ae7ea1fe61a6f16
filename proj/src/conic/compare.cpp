#include "compare.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace fcas {
namespace {

bool close(double x, double y, double reltol) {
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= reltol * (1.0 + std::abs(x) + std::abs(y));
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// A row or affine expression reduced to name-keyed coefficients; terms that
// merge to (numerically) zero are dropped so both sides agree on emptiness.
using TermMap = std::map<std::string, double>;

TermMap term_map(const std::vector<LinTerm>& terms,
                 const std::vector<Variable>& vars, double reltol) {
    TermMap m;
    for (const LinTerm& t : terms) m[vars[t.var].name] += t.coef;
    for (auto it = m.begin(); it != m.end();)
        it = std::abs(it->second) <= reltol ? m.erase(it) : std::next(it);
    return m;
}

// Collects differences with a cap, counting the overflow.
struct DiffSink {
    std::vector<std::string>& out;
    int cap;
    int suppressed = 0;
    void add(const std::string& d) {
        if (static_cast<int>(out.size()) < cap)
            out.push_back(d);
        else
            ++suppressed;
    }
};

// A linear row in comparable form: LE-oriented inequalities, equalities
// sign-normalised so the lexicographically first variable has a positive
// coefficient (an equality and its negation are the same constraint).
struct CanonRow {
    TermMap terms;
    RowSense sense = RowSense::EQ;
    double rhs = 0.0;
};

CanonRow canonicalize(const LinearRow& r, const std::vector<Variable>& vars,
                      double reltol) {
    CanonRow c;
    c.terms = term_map(r.terms, vars, reltol);
    c.sense = r.sense;
    c.rhs = r.rhs;
    bool flip = false;
    if (r.sense == RowSense::GE) {
        c.sense = RowSense::LE;
        flip = true;
    } else if (r.sense == RowSense::EQ) {
        flip = c.terms.empty() ? c.rhs < 0.0 : c.terms.begin()->second < 0.0;
    }
    if (flip) {
        for (auto& [name, coef] : c.terms) coef = -coef;
        c.rhs = -c.rhs;
    }
    return c;
}

bool same_terms(const TermMap& x, const TermMap& y, double reltol,
                const std::string& where, DiffSink& sink) {
    bool ok = true;
    for (const auto& [name, coef] : x) {
        auto it = y.find(name);
        if (it == y.end()) {
            sink.add(where + ": term " + num(coef) + "*" + name +
                     " missing from second program");
            ok = false;
        } else if (!close(coef, it->second, reltol)) {
            sink.add(where + ": coefficient of " + name + " differs (" +
                     num(coef) + " vs " + num(it->second) + ")");
            ok = false;
        }
    }
    for (const auto& [name, coef] : y)
        if (!x.count(name)) {
            sink.add(where + ": term " + num(coef) + "*" + name +
                     " missing from first program");
            ok = false;
        }
    return ok;
}

const char* sense_name(RowSense s) {
    switch (s) {
        case RowSense::LE: return "<=";
        case RowSense::GE: return ">=";
        default: return "==";
    }
}

// Name -> index, reporting duplicates (which would make the pairing
// ambiguous and always count as a mismatch).
template <class T, class NameOf>
std::map<std::string, int> index_by_name(const std::vector<T>& xs, NameOf name,
                                         const std::string& what,
                                         const std::string& side,
                                         DiffSink& sink) {
    std::map<std::string, int> m;
    for (int i = 0; i < static_cast<int>(xs.size()); ++i)
        if (!m.emplace(name(xs[i]), i).second)
            sink.add(what + " '" + name(xs[i]) + "' duplicated in " + side);
    return m;
}

}  // namespace

ProgramDiff compare_programs(const ConicProgram& a, const ConicProgram& b,
                             double reltol, int max_diffs) {
    ProgramDiff d;
    DiffSink sink{d.diffs, max_diffs};

    // ---- objective frame ---------------------------------------------------
    d.objective_match = true;
    if (a.sense != b.sense) {
        sink.add(std::string("objective sense differs (") +
                 (a.sense == Sense::Minimize ? "min" : "max") + " vs " +
                 (b.sense == Sense::Minimize ? "min" : "max") + ")");
        d.objective_match = false;
    }
    if (!close(a.obj_constant, b.obj_constant, reltol)) {
        sink.add("objective constant differs (" + num(a.obj_constant) +
                 " vs " + num(b.obj_constant) + ")");
        d.objective_match = false;
    }

    // ---- variables ---------------------------------------------------------
    auto va = index_by_name(a.vars, [](const Variable& v) { return v.name; },
                            "variable", "first program", sink);
    auto vb = index_by_name(b.vars, [](const Variable& v) { return v.name; },
                            "variable", "second program", sink);
    std::set<std::string> var_names;
    for (const auto& [n, i] : va) var_names.insert(n);
    for (const auto& [n, i] : vb) var_names.insert(n);
    d.vars_total = static_cast<int>(var_names.size());
    for (const std::string& n : var_names) {
        auto ia = va.find(n), ib = vb.find(n);
        if (ia == va.end() || ib == vb.end()) {
            sink.add("variable " + n + " only in " +
                     (ia != va.end() ? "first" : "second") + " program");
            continue;
        }
        const Variable& x = a.vars[ia->second];
        const Variable& y = b.vars[ib->second];
        bool ok = true;
        if (x.kind != y.kind) {
            sink.add("variable " + n + ": kind differs");
            ok = false;
        }
        if (!close(x.lb, y.lb, reltol) || !close(x.ub, y.ub, reltol)) {
            sink.add("variable " + n + ": bounds differ ([" + num(x.lb) + "," +
                     num(x.ub) + "] vs [" + num(y.lb) + "," + num(y.ub) + "])");
            ok = false;
        }
        if (!close(x.obj, y.obj, reltol)) {
            sink.add("variable " + n + ": objective coefficient differs (" +
                     num(x.obj) + " vs " + num(y.obj) + ")");
            ok = false;
        }
        if (x.lb_dual != y.lb_dual || x.ub_dual != y.ub_dual) {
            sink.add("variable " + n + ": bound multiplier names differ");
            ok = false;
        }
        if (ok) ++d.vars_matched;
    }

    // ---- rows --------------------------------------------------------------
    auto ra = index_by_name(a.rows, [](const LinearRow& r) { return r.name; },
                            "row", "first program", sink);
    auto rb = index_by_name(b.rows, [](const LinearRow& r) { return r.name; },
                            "row", "second program", sink);
    std::set<std::string> row_names;
    for (const auto& [n, i] : ra) row_names.insert(n);
    for (const auto& [n, i] : rb) row_names.insert(n);
    d.rows_total = static_cast<int>(row_names.size());
    for (const std::string& n : row_names) {
        auto ia = ra.find(n), ib = rb.find(n);
        if (ia == ra.end() || ib == rb.end()) {
            sink.add("row " + n + " only in " +
                     (ia != ra.end() ? "first" : "second") + " program");
            continue;
        }
        const LinearRow& x = a.rows[ia->second];
        const LinearRow& y = b.rows[ib->second];
        CanonRow cx = canonicalize(x, a.vars, reltol);
        CanonRow cy = canonicalize(y, b.vars, reltol);
        bool ok = true;
        if (cx.sense != cy.sense) {
            sink.add("row " + n + ": sense differs (" + sense_name(x.sense) +
                     " vs " + sense_name(y.sense) + ")");
            ok = false;
        }
        if (!same_terms(cx.terms, cy.terms, reltol, "row " + n, sink)) ok = false;
        if (!close(cx.rhs, cy.rhs, reltol)) {
            sink.add("row " + n + ": rhs differs (" + num(cx.rhs) + " vs " +
                     num(cy.rhs) + ")");
            ok = false;
        }
        if (x.dual_name != y.dual_name) {
            sink.add("row " + n + ": multiplier name differs ('" + x.dual_name +
                     "' vs '" + y.dual_name + "')");
            ok = false;
        }
        if (ok) ++d.rows_matched;
    }

    // ---- cones -------------------------------------------------------------
    auto ca = index_by_name(a.cones, [](const SocCone& c) { return c.name; },
                            "cone", "first program", sink);
    auto cb = index_by_name(b.cones, [](const SocCone& c) { return c.name; },
                            "cone", "second program", sink);
    std::set<std::string> cone_names;
    for (const auto& [n, i] : ca) cone_names.insert(n);
    for (const auto& [n, i] : cb) cone_names.insert(n);
    d.cones_total = static_cast<int>(cone_names.size());
    for (const std::string& n : cone_names) {
        auto ia = ca.find(n), ib = cb.find(n);
        if (ia == ca.end() || ib == cb.end()) {
            sink.add("cone " + n + " only in " +
                     (ia != ca.end() ? "first" : "second") + " program");
            continue;
        }
        const SocCone& x = a.cones[ia->second];
        const SocCone& y = b.cones[ib->second];
        bool ok = true;
        if (x.u.size() != y.u.size()) {
            sink.add("cone " + n + ": dimension differs (" +
                     std::to_string(x.u.size()) + " vs " +
                     std::to_string(y.u.size()) + ")");
            ok = false;
        } else {
            auto expr_ok = [&](const AffineExpr& ex, const AffineExpr& ey,
                               const std::string& where) {
                bool e = same_terms(term_map(ex.terms, a.vars, reltol),
                                    term_map(ey.terms, b.vars, reltol), reltol,
                                    where, sink);
                if (!close(ex.constant, ey.constant, reltol)) {
                    sink.add(where + ": constant differs (" + num(ex.constant) +
                             " vs " + num(ey.constant) + ")");
                    e = false;
                }
                return e;
            };
            for (size_t i = 0; i < x.u.size(); ++i)
                if (!expr_ok(x.u[i], y.u[i],
                             "cone " + n + " u[" + std::to_string(i) + "]"))
                    ok = false;
            if (!expr_ok(x.w, y.w, "cone " + n + " w")) ok = false;
        }
        if (x.dual_names != y.dual_names) {
            sink.add("cone " + n + ": dual component names differ");
            ok = false;
        }
        if (ok) ++d.cones_matched;
    }

    if (sink.suppressed > 0)
        d.diffs.push_back("... and " + std::to_string(sink.suppressed) +
                          " further differences suppressed");
    d.match = d.objective_match && d.diffs.empty() &&
              d.vars_matched == d.vars_total && d.rows_matched == d.rows_total &&
              d.cones_matched == d.cones_total;
    return d;
}

}  // namespace fcas
