// Conic program intermediate representation.
//
// A ConicProgram is a sparse linear objective over named variables, subject to
// named linear rows (<=, >=, ==), variable bounds, and second-order cones
// ||u(x)|| <= w(x) with affine u, w.  Rows and cones carry the names of their
// dual multipliers so that solutions, dual programs, and reports can all speak
// the same language.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace fcas {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class RowSense { LE, GE, EQ };
enum class VarKind { Continuous, Binary };

struct LinTerm {
    int var = -1;
    double coef = 0.0;
};

// sum_i coef_i * x_i + constant
struct AffineExpr {
    std::vector<LinTerm> terms;
    double constant = 0.0;
};

struct Variable {
    std::string name;
    double lb = -kInf;
    double ub = kInf;
    VarKind kind = VarKind::Continuous;
    double obj = 0.0;
    // Multiplier names used when a finite bound is dualized as a row.
    // Empty means an automatic name ("lo(<var>)" / "up(<var>)").
    std::string lb_dual;
    std::string ub_dual;
};

struct LinearRow {
    std::string name;
    std::vector<LinTerm> terms;  // merged, ordered by variable index
    RowSense sense = RowSense::EQ;
    double rhs = 0.0;
    std::string dual_name;
};

struct SocCone {
    std::string name;
    std::vector<AffineExpr> u;  // vector part
    AffineExpr w;               // scalar part
    // One name per dual component: u duals first, then the w dual.
    std::vector<std::string> dual_names;
};

class ConicProgram {
public:
    Sense sense = Sense::Minimize;
    double obj_constant = 0.0;
    std::vector<Variable> vars;
    std::vector<LinearRow> rows;
    std::vector<SocCone> cones;

    int add_var(const std::string& name, double lb, double ub,
                VarKind kind = VarKind::Continuous, double obj = 0.0);
    int add_binary(const std::string& name);
    void set_obj(int var, double coef) { vars.at(var).obj = coef; }
    void add_obj(int var, double coef) { vars.at(var).obj += coef; }

    // Terms are merged by variable; zero coefficients are dropped.
    int add_row(const std::string& name, std::vector<LinTerm> terms,
                RowSense sense, double rhs, const std::string& dual_name = "");
    int add_cone(const std::string& name, std::vector<AffineExpr> u,
                 AffineExpr w, std::vector<std::string> dual_names = {});

    int find_var(const std::string& name) const;   // -1 if absent
    int find_row(const std::string& name) const;   // -1 if absent
    int n_vars() const { return static_cast<int>(vars.size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }
    int n_cones() const { return static_cast<int>(cones.size()); }
    int n_binaries() const;
    std::vector<int> binary_vars() const;

    double objective_value(const std::vector<double>& x) const;

private:
    mutable std::unordered_map<std::string, int> var_index_;
    mutable std::unordered_map<std::string, int> row_index_;
    mutable size_t vars_indexed_ = 0;
    mutable size_t rows_indexed_ = 0;
};

// Largest violation of rows, bounds, cones, and integrality at x,
// as produced by evaluate().
struct Evaluation {
    double objective = 0.0;
    double max_row_violation = 0.0;
    double max_bound_violation = 0.0;
    double max_cone_violation = 0.0;
    double max_integrality_violation = 0.0;
    // Signed per-row residuals: activity - rhs (EQ keeps the sign,
    // LE positive means violated, GE negative means violated).
    std::vector<double> row_residuals;
    // Signed cone residuals ||u|| - w; positive means violated.
    std::vector<double> cone_residuals;

    double max_violation() const {
        double v = max_row_violation;
        if (max_bound_violation > v) v = max_bound_violation;
        if (max_cone_violation > v) v = max_cone_violation;
        return v;
    }
};

Evaluation evaluate(const ConicProgram& p, const std::vector<double>& x);

double affine_value(const AffineExpr& e, const std::vector<double>& x);

// Binary variables become continuous in [0,1]; idempotent.
ConicProgram relax_binaries(const ConicProgram& p);

// Returns a copy whose finite variable bounds have been appended as linear
// rows (per variable in index order: lower bound first, then upper), leaving
// every variable free.  Bound rows are named "lo(<var>)" / "up(<var>)" and
// take their dual names from the variable's lb_dual/ub_dual when set.
ConicProgram bounds_to_rows(const ConicProgram& p);

std::string to_json(const ConicProgram& p, int indent = -1);
ConicProgram program_from_json(const std::string& text);

}  // namespace fcas
