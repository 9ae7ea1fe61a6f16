// Duality layer: the closed-form dual transcription, the mechanical
// dualization, and the structural comparison that ties them together.
//
// The load-bearing property is that two disjoint code paths — the dual
// assembled symbol by symbol from the multiplier equations, and
// dualize(relax(primal)) — produce the identical conic program, and that
// both solve to the relaxed primal's optimum (strong duality holds: the
// fixtures are strictly feasible, see fixtures.hpp).

#include <string>
#include <vector>

#include "doctest.h"

#include "build/dual_builder.hpp"
#include "build/uc_builder.hpp"
#include "conic/compare.hpp"
#include "conic/dualize.hpp"
#include "fixtures.hpp"
#include "model/scenario.hpp"
#include "solve/solve_engine.hpp"

using namespace fcas;

namespace {

ConicProgram mechanical_dual(const Scenario& s, const StrategicPolicy& k) {
    return dualize(relax_binaries(build_primal_uc(s, k))).dual;
}

// A policy that varies by hour and product while staying inside the caps,
// so the k-scaling of strategic offers is visible in both duals.
StrategicPolicy nontrivial_policy(const Scenario& s) {
    StrategicPolicy k = uniform_policy(s);
    for (auto& [id, series] : k.units)
        for (int t = 0; t < s.horizon; ++t) {
            series.k_e[t] = 1.0 + 0.5 * ((t + 1) % 3);  // 1.5, 2.0, 1.0, ...
            series.k_h[t] = 3.0 - (t % 3);              // 3, 2, 1, ...
            series.k_pfr[t] = t % 3 == 2 ? 3.0 : 1.25;
        }
    return k;
}

void require_identical(const Scenario& s, const StrategicPolicy& k) {
    ConicProgram closed = build_closed_form_dual(s, k);
    ConicProgram mech = mechanical_dual(s, k);
    ProgramDiff diff = compare_programs(closed, mech);
    for (const std::string& d : diff.diffs) MESSAGE(d);
    CHECK(diff.match);
    CHECK(diff.vars_matched == diff.vars_total);
    CHECK(diff.rows_matched == diff.rows_total);
    CHECK(diff.cones_matched == diff.cones_total);
    CHECK(diff.objective_match);
    // The pairing is total: every primal variable got a stationarity row.
    CHECK(diff.rows_total ==
          static_cast<int>(build_primal_uc(s, k).vars.size()));
}

struct DualityCheck {
    double primal = 0.0;
    double closed = 0.0;
    double mech = 0.0;
};

DualityCheck solve_both_sides(const Scenario& s, const StrategicPolicy& k) {
    DualityCheck r;
    Solution sp = solve_conic(relax_binaries(build_primal_uc(s, k)));
    REQUIRE(sp.status == SolveStatus::Optimal);
    r.primal = sp.objective;

    Solution sc = solve_conic(build_closed_form_dual(s, k));
    REQUIRE(sc.status == SolveStatus::Optimal);
    r.closed = sc.objective;

    Solution sm = solve_conic(mechanical_dual(s, k));
    REQUIRE(sm.status == SolveStatus::Optimal);
    r.mech = sm.objective;
    return r;
}

double rel_diff(double a, double b) {
    return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("closed-form dual coincides with the mechanical dual") {
    for (const Scenario& s :
         {fixtures::one_unit_one_hour(), fixtures::two_unit_three_hour(),
          fixtures::mixed_fleet_three_hour()}) {
        require_identical(s, uniform_policy(s));
        require_identical(s, nontrivial_policy(s));
    }
}

TEST_CASE("closed-form dual coincides with the mechanical dual at scale") {
    Scenario g = gb2030_default();
    Scenario s = scale_scenario(g, 0.05, g.horizon);
    require_identical(s, uniform_policy(s));
    require_identical(s, nontrivial_policy(s));
}

TEST_CASE("strong duality on the hand-checkable instance") {
    // One committed unit, one hour: the relaxation pins the commitment, the
    // clearing buys 100 MW at offer 10, and the dual settles lambda_E = 10.
    Scenario s = fixtures::one_unit_one_hour();
    DualityCheck r = solve_both_sides(s, uniform_policy(s));
    CHECK(r.primal == doctest::Approx(1000.0));
    CHECK(r.closed == doctest::Approx(1000.0));
    CHECK(r.mech == doctest::Approx(1000.0));

    // Scaling the strategic energy offer by k flows through both duals.
    StrategicPolicy k = nontrivial_policy(s);  // k_e = 1.5 in hour 1
    DualityCheck rk = solve_both_sides(s, k);
    CHECK(rk.primal == doctest::Approx(1500.0));
    CHECK(rk.closed == doctest::Approx(1500.0));
    CHECK(rk.mech == doctest::Approx(1500.0));
}

TEST_CASE("strong duality across fixtures and policies") {
    for (const Scenario& s :
         {fixtures::one_unit_one_hour(), fixtures::two_unit_three_hour(),
          fixtures::mixed_fleet_three_hour()}) {
        for (const StrategicPolicy& k :
             {uniform_policy(s), nontrivial_policy(s)}) {
            DualityCheck r = solve_both_sides(s, k);
            // Weak duality, allowing only for solver convergence error.
            CHECK(r.closed <= r.primal + 1e-6 * (1.0 + std::abs(r.primal)));
            // Strong duality: both dual constructions close the gap.
            CHECK(rel_diff(r.closed, r.primal) < 1e-6);
            CHECK(rel_diff(r.mech, r.primal) < 1e-6);
            CHECK(rel_diff(r.closed, r.mech) < 1e-6);
        }
    }
}

TEST_CASE("strong duality at scale") {
    Scenario g = gb2030_default();
    Scenario s = scale_scenario(g, 0.05, g.horizon);
    DualityCheck r = solve_both_sides(s, uniform_policy(s));
    CHECK(r.closed <= r.primal + 1e-6 * (1.0 + std::abs(r.primal)));
    CHECK(rel_diff(r.closed, r.primal) < 1e-6);
    CHECK(rel_diff(r.mech, r.primal) < 1e-6);
}

TEST_CASE("planted transcription defects are caught") {
    Scenario s = fixtures::two_unit_three_hour();
    StrategicPolicy k = nontrivial_policy(s);  // k != 1 so rhs scaling shows
    ConicProgram mech = mechanical_dual(s, k);
    for (DualFault f :
         {DualFault::kChargeSocSign, DualFault::kDropHeadroomTerm,
          DualFault::kMissingBoundaryConstant, DualFault::kUnscaledStrategicRhs}) {
        ConicProgram bad = build_closed_form_dual(s, k, f);
        ProgramDiff diff = compare_programs(bad, mech);
        CHECK_FALSE(diff.match);
        CHECK_FALSE(diff.diffs.empty());
    }
    // And the healthy build still matches after exercising the fault paths.
    CHECK(compare_programs(build_closed_form_dual(s, k), mech).match);
}

TEST_CASE("comparison is symmetric and self-identical") {
    Scenario s = fixtures::two_unit_three_hour();
    ConicProgram closed = build_closed_form_dual(s);
    ConicProgram mech = mechanical_dual(s, uniform_policy(s));
    CHECK(compare_programs(closed, closed).match);
    CHECK(compare_programs(mech, closed).match);
}

TEST_CASE("dual structure spot checks") {
    Scenario s = fixtures::two_unit_three_hour();
    ConicProgram d = build_closed_form_dual(s);

    // Security multipliers exist exactly on the secured hours (2 and 3).
    CHECK(d.find_var("omega_loss(1)") < 0);
    CHECK(d.find_var("omega_loss(2)") >= 0);
    CHECK(d.find_var("omega_n2(3)") >= 0);
    CHECK(static_cast<int>(d.cones.size()) == 2);

    // The energy-balance multiplier is free and earns the hourly demand.
    int le = d.find_var("lambda_E(2)");
    REQUIRE(le >= 0);
    CHECK(d.vars[le].lb == -kInf);
    CHECK(d.vars[le].obj == doctest::Approx(200.0));

    // A binary upper-bound multiplier pays 1 per unit.
    int mm = d.find_var("mu_max(gen,2)");
    REQUIRE(mm >= 0);
    CHECK(d.vars[mm].lb == 0.0);
    CHECK(d.vars[mm].obj == doctest::Approx(-1.0));

    // The hour-1 SoC multiplier carries the -E_ini boundary constant.
    int ur = d.find_var("upsilon_rel(st,1)");
    REQUIRE(ur >= 0);
    CHECK(d.vars[ur].obj == doctest::Approx(-100.0));

    // Stationarity rows carry the primal variable as their dual name, so
    // dualizing back recovers primal labels.
    int pc = d.find_row("stat(Pc(st,2))");
    REQUIRE(pc >= 0);
    CHECK(d.rows[pc].dual_name == "Pc(st,2)");
    CHECK(d.rows[pc].sense == RowSense::EQ);
}
