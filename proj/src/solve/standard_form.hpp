// Conversion of a continuous ConicProgram to the solver's standard form
//
//   min c'x   s.t.  A x = b,   G x + s = h,   s in R+^l x SOC(d1) x ... ,
//
// together with the bookkeeping needed to report duals back in the
// program's row-as-written convention.
//
// Layout of G (fixed, deterministic):
//   - one row per <= / >= program row, in program order
//       <= row  a'x <= b   ->  G row  a, h  b
//       >= row  a'x >= b   ->  G row -a, h -b
//   - then per variable (index order): lower bound (as >=), then upper (<=)
//   - then per cone, in program order: the scalar row w first, then u_1..u_m
//       (G rows -w.terms / -u_i.terms, h entries the affine constants).
// Equality rows map to A in program order.
//
// Per-node bound changes in the MIP search only tighten root-finite bounds,
// so they are value edits on b/h; the sparsity pattern never changes.
#pragma once

#include <Eigen/SparseCore>

#include "conic/program.hpp"
#include "solve/types.hpp"

namespace fcas {

struct StandardForm {
    int n = 0;  // number of variables
    Eigen::SparseMatrix<double> A;  // p x n
    Eigen::SparseMatrix<double> G;  // m x n
    Eigen::VectorXd b, h, c;
    double obj_constant = 0.0;
    double obj_sign = 1.0;  // -1 when the program maximizes (c is negated)
    int n_lp = 0;           // leading LP rows of G
    std::vector<int> soc_dims;

    // recovery maps
    struct RowRef {
        bool eq = false;
        int idx = -1;
    };
    std::vector<RowRef> row_refs;       // per program row
    std::vector<int> lb_slot, ub_slot;  // per variable: G row or -1
    std::vector<int> cone_start;        // per cone: index of its w row in G

    int m() const { return static_cast<int>(G.rows()); }
    int p() const { return static_cast<int>(A.rows()); }
};

// Throws std::invalid_argument if p still has binary variables.
// `lb` / `ub` override the program bounds when non-null (size n).
StandardForm to_standard_form(const ConicProgram& p,
                              const std::vector<double>* lb = nullptr,
                              const std::vector<double>* ub = nullptr);

// Write updated bound values into sf.h (pattern from the root build must
// contain every finite bound; tightening only).
void update_bound_values(StandardForm& sf, const std::vector<double>& lb,
                         const std::vector<double>& ub);

// Translate standard-form duals (y for A, z for G) into the Solution's
// row/bound/cone dual fields for program `p`.
void recover_duals(const ConicProgram& p, const StandardForm& sf,
                   const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                   Solution& out);

}  // namespace fcas
