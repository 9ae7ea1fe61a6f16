#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "conic/program.hpp"
#include "solve/propagate.hpp"
#include "solve/solve_engine.hpp"

using namespace fcas;

namespace {

ConicProgram knapsack(const std::vector<double>& value,
                      const std::vector<double>& weight, double cap) {
    ConicProgram p;
    p.sense = Sense::Maximize;
    std::vector<LinTerm> terms;
    for (size_t i = 0; i < value.size(); ++i) {
        int b = p.add_binary("item" + std::to_string(i));
        p.set_obj(b, value[i]);
        terms.push_back({b, weight[i]});
    }
    p.add_row("capacity", terms, RowSense::LE, cap);
    return p;
}

// Random mixed-binary program, feasible by construction at a sampled point;
// optionally with a second-order cone block.
ConicProgram random_misocp(std::mt19937& rng, int nb, int nc, bool with_cone) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    ConicProgram p;
    p.sense = (rng() % 2) ? Sense::Maximize : Sense::Minimize;
    p.obj_constant = U(rng);

    std::vector<double> xhat;
    for (int i = 0; i < nc; ++i) {
        int v = p.add_var("x" + std::to_string(i), -2.0, 3.0,
                          VarKind::Continuous, U(rng));
        xhat.push_back(-2.0 + 5.0 * U01(rng));
        (void)v;
    }
    for (int i = 0; i < nb; ++i) {
        int v = p.add_binary("b" + std::to_string(i));
        p.set_obj(v, U(rng));
        xhat.push_back(rng() % 2 ? 1.0 : 0.0);
        (void)v;
    }
    int n = p.n_vars();

    int nr = 3 + static_cast<int>(rng() % 4);
    for (int r = 0; r < nr; ++r) {
        std::vector<LinTerm> terms;
        int nt = 2 + static_cast<int>(rng() % 3);
        for (int t = 0; t < nt; ++t) {
            terms.push_back({static_cast<int>(rng() % n), U(rng)});
        }
        double act = 0.0;
        for (const auto& t : terms) act += t.coef * xhat[t.var];
        int kind = static_cast<int>(rng() % 3);
        if (kind == 0) {
            p.add_row("r" + std::to_string(r), terms, RowSense::LE,
                      act + 0.3 + 0.5 * U01(rng));
        } else if (kind == 1) {
            p.add_row("r" + std::to_string(r), terms, RowSense::GE,
                      act - 0.3 - 0.5 * U01(rng));
        } else {
            p.add_row("r" + std::to_string(r), terms, RowSense::EQ, act);
        }
    }

    if (with_cone) {
        int wv = p.add_var("w", 0.0, 6.0);
        std::vector<AffineExpr> u;
        double norm2 = 0.0;
        for (int i = 0; i < 2; ++i) {
            AffineExpr e;
            e.terms.push_back({static_cast<int>(rng() % n), U(rng)});
            e.constant = 0.5 * U(rng);
            double v = e.constant;
            for (const auto& t : e.terms) v += t.coef * xhat[t.var];
            norm2 += v * v;
            u.push_back(e);
        }
        // keep the sampled point inside the cone with w at most 5
        double scale = std::min(1.0, 4.0 / (std::sqrt(norm2) + 1e-9));
        for (auto& e : u) {
            for (auto& t : e.terms) t.coef *= scale;
            e.constant *= scale;
        }
        p.add_cone("cone", u, AffineExpr{{{wv, 1.0}}, 0.0});
        xhat.push_back(5.0);
        // small pressure to close the cone so the relaxation is not trivially tight
        p.add_obj(wv, p.sense == Sense::Minimize ? 0.05 : -0.05);
    }
    return p;
}

void check_agreement(const ConicProgram& p, const SolveOptions& opt, int trial) {
    Solution ref = enumerate_mip(p, opt);
    Solution got = solve_mip(p, opt);
    INFO("trial ", trial, " ref ", to_string(ref.status), " got ",
         to_string(got.status));
    REQUIRE(ref.status == SolveStatus::Optimal);
    REQUIRE(got.status == SolveStatus::Optimal);
    double tol = 1e-6 * std::max(1.0, std::abs(ref.objective));
    CHECK(std::abs(got.objective - ref.objective) <= tol);
    CHECK(evaluate(p, got.x).max_violation() <= 1e-6);
    Evaluation ev = evaluate(p, got.x);
    CHECK(ev.max_integrality_violation <= 1e-9);
}

}  // namespace

TEST_CASE("knapsack agrees with enumeration") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(1.0, 10.0);
    for (int trial = 0; trial < 8; ++trial) {
        int items = 8 + static_cast<int>(rng() % 4);
        std::vector<double> v(items), w(items);
        double tot = 0.0;
        for (int i = 0; i < items; ++i) {
            v[i] = U(rng);
            w[i] = U(rng);
            tot += w[i];
        }
        ConicProgram p = knapsack(v, w, 0.45 * tot);
        check_agreement(p, SolveOptions{}, trial);
    }
}

TEST_CASE("random mixed-binary conic programs agree with enumeration") {
    std::mt19937 rng(20260816);
    for (int trial = 0; trial < 20; ++trial) {
        int nb = 4 + static_cast<int>(rng() % 6);
        int nc = 2 + static_cast<int>(rng() % 3);
        bool cone = trial % 2 == 0;
        ConicProgram p = random_misocp(rng, nb, nc, cone);
        check_agreement(p, SolveOptions{}, trial);
    }
}

TEST_CASE("pseudo-cost branching reaches the same optimum") {
    std::mt19937 rng(99);
    SolveOptions opt;
    opt.branching = Branching::PseudoCost;
    for (int trial = 0; trial < 6; ++trial) {
        ConicProgram p = random_misocp(rng, 7, 3, trial % 2 == 0);
        check_agreement(p, opt, trial);
    }
}

TEST_CASE("propagation fixes forced binaries") {
    ConicProgram p;
    int b0 = p.add_binary("b0");
    int b1 = p.add_binary("b1");
    p.set_obj(b0, 1.0);
    p.set_obj(b1, 1.0);
    p.add_row("force", {{b0, 2.0}}, RowSense::GE, 1.2);   // => b0 = 1
    p.add_row("cap", {{b0, 1.0}, {b1, 1.0}}, RowSense::LE, 1.0);  // => b1 = 0

    std::vector<double> lb = {0, 0}, ub = {1, 1};
    PropagationResult pr = propagate_bounds(p, lb, ub, 1e-7);
    CHECK(!pr.infeasible);
    CHECK(lb[b0] == doctest::Approx(1.0));
    CHECK(ub[b1] == doctest::Approx(0.0));

    Solution s = solve_mip(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(1.0));
    CHECK(s.x[b0] == doctest::Approx(1.0));
    CHECK(s.x[b1] == doctest::Approx(0.0));
}

TEST_CASE("infeasible and unbounded mixed-binary programs") {
    ConicProgram p;
    int a = p.add_binary("a");
    int b = p.add_binary("b");
    p.add_row("impossible", {{a, 1.0}, {b, 1.0}}, RowSense::GE, 3.0);
    CHECK(solve_mip(p).status == SolveStatus::Infeasible);

    ConicProgram q;
    int x = q.add_var("x", -kInf, kInf, VarKind::Continuous, -1.0);
    int flag = q.add_binary("flag");
    q.add_row("tie", {{x, 0.0}, {flag, 1.0}}, RowSense::LE, 1.0);
    (void)x;
    Solution s = solve_mip(q);
    CHECK(s.status == SolveStatus::Unbounded);
    CHECK(s.objective == -kInf);
}

TEST_CASE("warm start seeds the incumbent") {
    std::vector<double> v = {6, 5, 4, 3}, w = {3, 2, 2, 1};
    ConicProgram p = knapsack(v, w, 4.0);
    Solution ref = enumerate_mip(p);
    REQUIRE(ref.status == SolveStatus::Optimal);

    SolveOptions opt;
    opt.warm_start = ref.x;
    Solution s = solve_mip(p, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(ref.objective));
    CHECK(s.bnb.incumbents >= 1);
}

TEST_CASE("node limit and gap limit statuses") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> U(1.0, 10.0);
    int items = 14;
    std::vector<double> v(items), w(items);
    double tot = 0;
    for (int i = 0; i < items; ++i) {
        v[i] = U(rng);
        w[i] = U(rng);
        tot += w[i];
    }
    ConicProgram p = knapsack(v, w, 0.5 * tot);

    SolveOptions nl;
    nl.node_limit = 1;
    Solution s1 = solve_mip(p, nl);
    CHECK((s1.status == SolveStatus::GapLimit || s1.status == SolveStatus::NodeLimit ||
           s1.status == SolveStatus::Optimal));

    SolveOptions gl;
    gl.rel_gap = 0.9;
    Solution s2 = solve_mip(p, gl);
    REQUIRE(s2.feasible());
    // for a maximization the proof bound lies above the incumbent
    CHECK(s2.best_bound >= s2.objective - 1e-9);
    if (s2.status == SolveStatus::GapLimit) {
        CHECK(s2.bnb.gap <= 0.9 + 1e-12);
    }
}

TEST_CASE("warm start that violates a row is ignored") {
    std::vector<double> v = {5, 4}, w = {2, 2};
    ConicProgram p = knapsack(v, w, 2.0);
    SolveOptions opt;
    opt.warm_start = {1.0, 1.0};  // weight 4 > capacity 2
    Solution s = solve_mip(p, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(5.0));
}

TEST_CASE("polyhedral outer approximation matches the native cone solver") {
    std::mt19937 rng(31415);
    for (int trial = 0; trial < 6; ++trial) {
        ConicProgram p = random_misocp(rng, 5, 3, true);
        Solution native = solve_mip(p);
        SolveOptions oa;
        oa.soc_mode = SocMode::PolyhedralOuter;
        Solution outer = solve_mip(p, oa);
        INFO("trial ", trial);
        REQUIRE(native.status == SolveStatus::Optimal);
        REQUIRE(outer.feasible());
        CHECK(outer.objective ==
              doctest::Approx(native.objective)
                  .epsilon(2e-5)
                  .scale(std::max(1.0, std::abs(native.objective))));
        CHECK(!outer.has_duals);
        CHECK(evaluate(p, outer.x).max_violation() <= 1e-6);
    }
}

TEST_CASE("outer approximation of a continuous SOCP") {
    ConicProgram p;
    int x = p.add_var("x", -kInf, kInf, VarKind::Continuous, -1.0);
    p.add_cone("ball", {AffineExpr{{{x, 1.0}}, 0.0}, AffineExpr{{}, 1.0}},
               AffineExpr{{}, 2.0});
    SolveOptions oa;
    oa.soc_mode = SocMode::PolyhedralOuter;
    Solution s = solve_mip(p, oa);
    REQUIRE(s.feasible());
    CHECK(s.objective == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-5));
    CHECK(!s.has_duals);
}

TEST_CASE("enumerate_mip refuses oversized instances") {
    ConicProgram p;
    for (int i = 0; i < 25; ++i) p.add_binary("b" + std::to_string(i));
    p.set_obj(0, 1.0);
    CHECK_THROWS_AS(enumerate_mip(p), std::invalid_argument);

    // ...but instances whose binaries are mostly fixed by propagation pass
    ConicProgram q;
    std::vector<LinTerm> all;
    for (int i = 0; i < 25; ++i) {
        int b = q.add_binary("c" + std::to_string(i));
        q.set_obj(b, 1.0 + i);
        all.push_back({b, 1.0});
    }
    q.add_row("all_on", all, RowSense::GE, 25.0);  // forces every binary to 1
    Solution s = enumerate_mip(q);
    REQUIRE(s.status == SolveStatus::Optimal);
    double expect = 0.0;
    for (int i = 0; i < 25; ++i) expect += 1.0 + i;
    CHECK(s.objective == doctest::Approx(expect));
}
