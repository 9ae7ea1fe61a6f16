// Primal-dual interior-point solver for second-order cone programs in
// standard form
//
//   min c'x   s.t.  A x = b,   G x + s = h,   s in K = R+^l x SOC(d1) x ...
//
// Homogeneous self-dual embedding with Nesterov-Todd scalings and a Mehrotra
// predictor-corrector, in the style of the ECOS solver family.  The KKT
// system is solved by a sign-regularized sparse LDL' factorization (fixed
// fill-in pattern, so the symbolic analysis is done once per instance even
// when bound values change between solves) with iterative refinement.
// Second-order cone scaling blocks are kept dense: W^2 = eta^2 (2 w w' - J),
// which is exact and cheap for the low-dimensional cones this project
// produces.  Infeasibility certificates follow the standard HSDE criteria.
#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "solve/types.hpp"

namespace fcas {

struct StandardForm;

enum class IpmExit {
    Optimal,
    OptimalInaccurate,
    PrimalInfeasible,
    PrimalInfeasibleInaccurate,
    DualInfeasible,
    DualInfeasibleInaccurate,
    MaxIters,
    NumericalTrouble,
};

std::string to_string(IpmExit e);

struct IpmOptions {
    int max_iters = 100;
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    double feastol_inacc = 1e-4;
    double abstol_inacc = 5e-5;
    double reltol_inacc = 5e-5;
    bool equilibrate = true;
};

struct IpmResult {
    IpmExit exit = IpmExit::NumericalTrouble;
    Eigen::VectorXd x, y, z, s;
    double pobj = 0.0;  // c'x
    double dobj = 0.0;  // -(b'y + h'z)
    IpmStats stats;

    bool ok() const { return exit == IpmExit::Optimal || exit == IpmExit::OptimalInaccurate; }
    bool proved_primal_infeasible() const {
        return exit == IpmExit::PrimalInfeasible || exit == IpmExit::PrimalInfeasibleInaccurate;
    }
    bool proved_dual_infeasible() const {
        return exit == IpmExit::DualInfeasible || exit == IpmExit::DualInfeasibleInaccurate;
    }
};

class IpmSolver {
public:
    IpmSolver(Eigen::SparseMatrix<double> A, Eigen::SparseMatrix<double> G,
              Eigen::VectorXd c, int n_lp, std::vector<int> soc_dims,
              bool equilibrate = true);
    explicit IpmSolver(const StandardForm& sf, bool equilibrate = true);
    ~IpmSolver();

    // b and h may change between calls; the matrices are fixed.
    IpmResult solve(const Eigen::VectorXd& b, const Eigen::VectorXd& h,
                    const IpmOptions& opt = IpmOptions());

    int n() const;
    int p() const;
    int m() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fcas
