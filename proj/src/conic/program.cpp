#include "conic/program.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fcas {

namespace {

// Merge duplicate variables and drop exact zeros; order by variable index.
std::vector<LinTerm> merge_terms(std::vector<LinTerm> terms) {
    std::map<int, double> acc;
    for (const auto& t : terms) {
        if (t.var < 0) throw std::invalid_argument("term with negative variable index");
        acc[t.var] += t.coef;
    }
    std::vector<LinTerm> out;
    out.reserve(acc.size());
    for (const auto& [v, c] : acc)
        if (c != 0.0) out.push_back({v, c});
    return out;
}

}  // namespace

int ConicProgram::add_var(const std::string& name, double lb, double ub,
                          VarKind kind, double obj) {
    if (find_var(name) >= 0) throw std::invalid_argument("duplicate variable: " + name);
    Variable v;
    v.name = name;
    v.lb = lb;
    v.ub = ub;
    v.kind = kind;
    v.obj = obj;
    vars.push_back(std::move(v));
    return n_vars() - 1;
}

int ConicProgram::add_binary(const std::string& name) {
    return add_var(name, 0.0, 1.0, VarKind::Binary);
}

int ConicProgram::add_row(const std::string& name, std::vector<LinTerm> terms,
                          RowSense sense, double rhs, const std::string& dual_name) {
    if (find_row(name) >= 0) throw std::invalid_argument("duplicate row: " + name);
    LinearRow r;
    r.name = name;
    r.terms = merge_terms(std::move(terms));
    for (const auto& t : r.terms)
        if (t.var >= n_vars()) throw std::invalid_argument("row " + name + " references unknown variable");
    r.sense = sense;
    r.rhs = rhs;
    r.dual_name = dual_name.empty() ? ("dual(" + name + ")") : dual_name;
    rows.push_back(std::move(r));
    return n_rows() - 1;
}

int ConicProgram::add_cone(const std::string& name, std::vector<AffineExpr> u,
                           AffineExpr w, std::vector<std::string> dual_names) {
    SocCone c;
    c.name = name;
    c.u = std::move(u);
    for (auto& e : c.u) e.terms = merge_terms(std::move(e.terms));
    c.w = std::move(w);
    c.w.terms = merge_terms(std::move(c.w.terms));
    if (dual_names.empty()) {
        for (size_t i = 0; i < c.u.size() + 1; ++i)
            dual_names.push_back("dual(" + name + ")[" + std::to_string(i) + "]");
    }
    if (dual_names.size() != c.u.size() + 1)
        throw std::invalid_argument("cone " + name + ": need one dual name per component");
    c.dual_names = std::move(dual_names);
    cones.push_back(std::move(c));
    return n_cones() - 1;
}

int ConicProgram::find_var(const std::string& name) const {
    for (; vars_indexed_ < vars.size(); ++vars_indexed_)
        var_index_[vars[vars_indexed_].name] = static_cast<int>(vars_indexed_);
    auto it = var_index_.find(name);
    return it == var_index_.end() ? -1 : it->second;
}

int ConicProgram::find_row(const std::string& name) const {
    for (; rows_indexed_ < rows.size(); ++rows_indexed_)
        row_index_[rows[rows_indexed_].name] = static_cast<int>(rows_indexed_);
    auto it = row_index_.find(name);
    return it == row_index_.end() ? -1 : it->second;
}

int ConicProgram::n_binaries() const {
    int n = 0;
    for (const auto& v : vars) n += (v.kind == VarKind::Binary);
    return n;
}

std::vector<int> ConicProgram::binary_vars() const {
    std::vector<int> out;
    for (int j = 0; j < n_vars(); ++j)
        if (vars[j].kind == VarKind::Binary) out.push_back(j);
    return out;
}

double ConicProgram::objective_value(const std::vector<double>& x) const {
    double v = obj_constant;
    for (int j = 0; j < n_vars(); ++j) v += vars[j].obj * x[j];
    return v;
}

double affine_value(const AffineExpr& e, const std::vector<double>& x) {
    double v = e.constant;
    for (const auto& t : e.terms) v += t.coef * x[t.var];
    return v;
}

Evaluation evaluate(const ConicProgram& p, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != p.n_vars())
        throw std::invalid_argument("evaluate: point has wrong dimension");
    Evaluation ev;
    ev.objective = p.objective_value(x);
    ev.row_residuals.reserve(p.rows.size());
    for (const auto& r : p.rows) {
        double act = 0.0;
        for (const auto& t : r.terms) act += t.coef * x[t.var];
        double res = act - r.rhs;
        ev.row_residuals.push_back(res);
        double viol = 0.0;
        switch (r.sense) {
            case RowSense::LE: viol = std::max(0.0, res); break;
            case RowSense::GE: viol = std::max(0.0, -res); break;
            case RowSense::EQ: viol = std::abs(res); break;
        }
        ev.max_row_violation = std::max(ev.max_row_violation, viol);
    }
    for (int j = 0; j < p.n_vars(); ++j) {
        const auto& v = p.vars[j];
        if (v.lb > -kInf) ev.max_bound_violation = std::max(ev.max_bound_violation, v.lb - x[j]);
        if (v.ub < kInf) ev.max_bound_violation = std::max(ev.max_bound_violation, x[j] - v.ub);
        if (v.kind == VarKind::Binary)
            ev.max_integrality_violation =
                std::max(ev.max_integrality_violation, std::abs(x[j] - std::round(x[j])));
    }
    ev.max_bound_violation = std::max(ev.max_bound_violation, 0.0);
    ev.cone_residuals.reserve(p.cones.size());
    for (const auto& c : p.cones) {
        double un2 = 0.0;
        for (const auto& e : c.u) {
            double uv = affine_value(e, x);
            un2 += uv * uv;
        }
        double res = std::sqrt(un2) - affine_value(c.w, x);
        ev.cone_residuals.push_back(res);
        ev.max_cone_violation = std::max(ev.max_cone_violation, res);
    }
    ev.max_cone_violation = std::max(ev.max_cone_violation, 0.0);
    return ev;
}

ConicProgram relax_binaries(const ConicProgram& p) {
    ConicProgram q = p;
    for (auto& v : q.vars) {
        if (v.kind == VarKind::Binary) {
            v.kind = VarKind::Continuous;
            v.lb = std::max(v.lb, 0.0);
            v.ub = std::min(v.ub, 1.0);
        }
    }
    return q;
}

ConicProgram bounds_to_rows(const ConicProgram& p) {
    ConicProgram q = p;
    for (int j = 0; j < q.n_vars(); ++j) {
        Variable& v = q.vars[j];
        if (v.kind == VarKind::Binary)
            throw std::invalid_argument("bounds_to_rows: binary variable " + v.name);
        if (v.lb > -kInf)
            q.add_row("lo(" + v.name + ")", {{j, 1.0}}, RowSense::GE, v.lb,
                      v.lb_dual.empty() ? "lo_dual(" + v.name + ")" : v.lb_dual);
        if (v.ub < kInf)
            q.add_row("up(" + v.name + ")", {{j, 1.0}}, RowSense::LE, v.ub,
                      v.ub_dual.empty() ? "up_dual(" + v.name + ")" : v.ub_dual);
        v.lb = -kInf;
        v.ub = kInf;
    }
    return q;
}

// ---------------------------------------------------------------------------
// JSON serialization.  Deterministic: fixed key order, variables by index,
// rows and cones in insertion order.  Infinite bounds are simply omitted.

namespace {

using nlohmann::ordered_json;

ordered_json expr_to_json(const AffineExpr& e) {
    ordered_json t = ordered_json::array();
    for (const auto& term : e.terms) t.push_back({term.var, term.coef});
    ordered_json j;
    j["terms"] = std::move(t);
    if (e.constant != 0.0) j["constant"] = e.constant;
    return j;
}

AffineExpr expr_from_json(const nlohmann::json& j) {
    AffineExpr e;
    for (const auto& t : j.at("terms"))
        e.terms.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
    e.constant = j.value("constant", 0.0);
    return e;
}

const char* sense_str(RowSense s) {
    switch (s) {
        case RowSense::LE: return "<=";
        case RowSense::GE: return ">=";
        case RowSense::EQ: return "==";
    }
    return "==";
}

RowSense sense_from_str(const std::string& s) {
    if (s == "<=") return RowSense::LE;
    if (s == ">=") return RowSense::GE;
    if (s == "==") return RowSense::EQ;
    throw std::invalid_argument("unknown row sense: " + s);
}

}  // namespace

std::string to_json(const ConicProgram& p, int indent) {
    ordered_json j;
    j["format"] = "conic-program-1";
    j["sense"] = p.sense == Sense::Minimize ? "min" : "max";
    j["objective_constant"] = p.obj_constant;
    ordered_json jv = ordered_json::array();
    for (const auto& v : p.vars) {
        ordered_json e;
        e["name"] = v.name;
        if (v.lb > -kInf) e["lb"] = v.lb;
        if (v.ub < kInf) e["ub"] = v.ub;
        if (v.kind == VarKind::Binary) e["binary"] = true;
        if (v.obj != 0.0) e["obj"] = v.obj;
        if (!v.lb_dual.empty()) e["lb_dual"] = v.lb_dual;
        if (!v.ub_dual.empty()) e["ub_dual"] = v.ub_dual;
        jv.push_back(std::move(e));
    }
    j["variables"] = std::move(jv);
    ordered_json jr = ordered_json::array();
    for (const auto& r : p.rows) {
        ordered_json e;
        e["name"] = r.name;
        ordered_json t = ordered_json::array();
        for (const auto& term : r.terms) t.push_back({term.var, term.coef});
        e["terms"] = std::move(t);
        e["sense"] = sense_str(r.sense);
        e["rhs"] = r.rhs;
        e["dual"] = r.dual_name;
        jr.push_back(std::move(e));
    }
    j["rows"] = std::move(jr);
    ordered_json jc = ordered_json::array();
    for (const auto& c : p.cones) {
        ordered_json e;
        e["name"] = c.name;
        ordered_json u = ordered_json::array();
        for (const auto& ue : c.u) u.push_back(expr_to_json(ue));
        e["u"] = std::move(u);
        e["w"] = expr_to_json(c.w);
        e["duals"] = c.dual_names;
        jc.push_back(std::move(e));
    }
    j["cones"] = std::move(jc);
    return indent >= 0 ? j.dump(indent) : j.dump();
}

ConicProgram program_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "conic-program-1")
        throw std::invalid_argument("unsupported program format");
    ConicProgram p;
    p.sense = j.at("sense").get<std::string>() == "max" ? Sense::Maximize : Sense::Minimize;
    p.obj_constant = j.value("objective_constant", 0.0);
    for (const auto& e : j.at("variables")) {
        int idx = p.add_var(e.at("name").get<std::string>(),
                            e.value("lb", -kInf), e.value("ub", kInf),
                            e.value("binary", false) ? VarKind::Binary : VarKind::Continuous,
                            e.value("obj", 0.0));
        p.vars[idx].lb_dual = e.value("lb_dual", "");
        p.vars[idx].ub_dual = e.value("ub_dual", "");
    }
    for (const auto& e : j.at("rows")) {
        std::vector<LinTerm> terms;
        for (const auto& t : e.at("terms"))
            terms.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
        p.add_row(e.at("name").get<std::string>(), std::move(terms),
                  sense_from_str(e.at("sense").get<std::string>()),
                  e.at("rhs").get<double>(), e.value("dual", ""));
    }
    for (const auto& e : j.at("cones")) {
        std::vector<AffineExpr> u;
        for (const auto& ue : e.at("u")) u.push_back(expr_from_json(ue));
        p.add_cone(e.at("name").get<std::string>(), std::move(u),
                   expr_from_json(e.at("w")),
                   e.value("duals", std::vector<std::string>{}));
    }
    return p;
}

}  // namespace fcas
