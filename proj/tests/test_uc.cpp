// Frequency-secured UC builder: cone equivalence, fleet expansion, the exact
// integer semantics of the printed commitment logic, and end-to-end solves.
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "build/uc_builder.hpp"
#include "doctest.h"
#include "solve/solve_engine.hpp"

using namespace fcas;

namespace {

// One secured thermal unit, security rows disabled; the smallest model with a
// hand-checkable optimum.
Scenario one_unit_scenario() {
    Scenario s;
    s.horizon = 1;
    s.demand = {100.0};
    ThermalUnitSpec g;
    g.id = "u";
    g.p_max = 200;
    g.p_msg = 0;
    g.inertia_const = 4;
    g.pfr_max = 0;
    g.provides_pfr = false;
    g.t_mdt = g.t_mut = g.t_st = 1;
    g.offer_e = 10;
    g.offer_h = 0;
    g.offer_pfr = 0;
    g.initial_commitment = true;
    s.thermal.push_back(g);
    s.freq.p_loss_cap = {0.0};
    return s;
}

double soc_margin(const NadirCoefs& c, double h, double efr, double pfr,
                  double ploss) {
    auto dot = [&](const std::array<double, 4>& a) {
        return a[0] * h + a[1] * efr + a[2] * pfr + a[3] * ploss;
    };
    return dot(c.w) - std::hypot(dot(c.u1), dot(c.u2));
}

double rotated_margin(const FrequencyParams& f, double h, double efr,
                      double pfr, double ploss) {
    const double lhs_a = h / f.f0 - f.t_efr * efr / (4.0 * f.df_max);
    const double lhs_b = pfr / f.t_pfr;
    const double rhs = (ploss - efr) * (ploss - efr) / (4.0 * f.df_max);
    // Rotated-cone membership needs both factors nonnegative and the product
    // above the square term; the margin is the worst of the three.
    return std::min({lhs_a, lhs_b, lhs_a * lhs_b - rhs});
}

}  // namespace

TEST_CASE("nadir cone membership matches the rotated inequality") {
    FrequencyParams f;
    f.p_loss_cap = {1800.0};
    const NadirCoefs c = nadir_cone_coefs(f);

    // Coefficient spot checks against the printed definitions.
    CHECK(c.u1[0] == doctest::Approx(1.0 / 50));
    CHECK(c.u1[1] == doctest::Approx(-0.3125));
    CHECK(c.u1[2] == doctest::Approx(-0.1));
    CHECK(c.u1[3] == 0.0);
    CHECK(c.u2[0] == 0.0);
    CHECK(c.u2[1] == doctest::Approx(-1.0 / std::sqrt(0.8)));
    CHECK(c.u2[3] == doctest::Approx(1.0 / std::sqrt(0.8)));
    CHECK(c.w[2] == doctest::Approx(0.1));

    std::mt19937_64 rng(20260816);
    std::uniform_real_distribution<double> uh(0.0, 4000.0), ue(-100.0, 700.0),
        up(-200.0, 2600.0), ul(0.0, 2200.0);
    int checked = 0, disagreements = 0;
    for (int i = 0; i < 1000; ++i) {
        const double h = uh(rng), efr = ue(rng), pfr = up(rng), pl = ul(rng);
        const double ms = soc_margin(c, h, efr, pfr, pl);
        const double mr = rotated_margin(f, h, efr, pfr, pl);
        if (std::abs(ms) <= 1e-9) continue;  // exact boundary: either answer ok
        ++checked;
        if ((ms > 0) != (mr > 0)) ++disagreements;
    }
    CHECK(disagreements == 0);
    CHECK(checked >= 990);  // random reals essentially never sit on the boundary

    SUBCASE("algebraic identity behind the equivalence") {
        // w^2 - u1^2 = 4 * (H/f0 - T_EFR*EFR/(4 df)) * PFR / T_PFR.
        std::mt19937_64 r2(7);
        std::uniform_real_distribution<double> d(-500.0, 3000.0);
        for (int i = 0; i < 200; ++i) {
            const double h = d(r2), efr = d(r2), pfr = d(r2);
            auto dot = [&](const std::array<double, 4>& a) {
                return a[0] * h + a[1] * efr + a[2] * pfr;
            };
            const double w = dot(c.w), u1 = dot(c.u1);
            const double lhs = w * w - u1 * u1;
            const double rhs = 4.0 *
                               (h / f.f0 - f.t_efr * efr / (4.0 * f.df_max)) *
                               pfr / f.t_pfr;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }

    SUBCASE("bad frequency parameters are rejected") {
        FrequencyParams bad = f;
        bad.df_max = 0;
        CHECK_THROWS_AS(nadir_cone_coefs(bad), std::invalid_argument);
        bad = f;
        bad.t_pfr = -1;
        CHECK_THROWS_AS(nadir_cone_coefs(bad), std::invalid_argument);
    }
}

TEST_CASE("fleet expansion: counts, aggregation, and effective ratings") {
    Scenario s = gb2030_default();
    FleetInstances f = expand_units(s);

    // 1 + 2 + 1 (aggregated) + 7 + 40 thermal instances.
    CHECK(f.thermal.size() == 51);
    CHECK(f.res.size() == 3);
    CHECK(f.storage.size() == 13);  // 12 PHES + 1 aggregated BESS

    auto thermal = [&](const std::string& id) -> const ThermalInst& {
        for (const auto& g : f.thermal)
            if (g.id == id) return g;
        throw std::runtime_error("missing " + id);
    };
    auto storage = [&](const std::string& id) -> const StorageInst& {
        for (const auto& u : f.storage)
            if (u.id == id) return u;
        throw std::runtime_error("missing " + id);
    };

    // The strategic CCGT fleet is one pseudo-unit with extensive ratings
    // scaled by the count and intensive ones per-unit.
    const ThermalInst& sc = thermal("ccgt_strategic");
    CHECK(sc.strategic);
    CHECK(sc.p_max == doctest::Approx(17500));
    CHECK(sc.p_msg == doctest::Approx(250));
    CHECK(sc.pfr_max == doctest::Approx(875));
    CHECK(sc.h_const == 5);
    CHECK(sc.offer_e == 130);
    CHECK(sc.y0 == 1.0);

    // Expanded groups get numbered ids with per-unit ratings.
    CHECK(thermal("ccgt_1").p_max == 500);
    CHECK(thermal("ccgt_7").p_max == 500);
    CHECK(thermal("ocgt_40").p_max == 100);
    CHECK(thermal("big_nuclear").p_max == 1800);
    // Units that do not offer PFR expand with zero capability.
    CHECK(thermal("nuclear_1").pfr_max == 0.0);

    const StorageInst& bess = storage("bess");
    CHECK(bess.p_max == doctest::Approx(20000));
    CHECK(bess.e_max == doctest::Approx(20000));  // 400 * 50 MWh
    CHECK(bess.e_ini == doctest::Approx(10000));
    CHECK(bess.efr_max == doctest::Approx(500));
    CHECK(bess.p_msg == 0);
    CHECK(storage("phes_12").p_max == 400);
    CHECK(storage("phes_1").e_max == doctest::Approx(800));

    SUBCASE("colliding expanded ids are rejected") {
        Scenario t = s;
        ThermalUnitSpec g = t.thermal[3];  // "ccgt", count 7, expanded
        g.id = "ccgt_2";
        g.count = 1;
        t.thermal.push_back(g);
        CHECK_THROWS_AS(expand_units(t), std::invalid_argument);
    }
}

TEST_CASE("strategic policy construction and validation") {
    Scenario s = scale_scenario(gb2030_default(), 0.1, 6);
    StrategicPolicy pol = uniform_policy(s, 2.0, 1.5, 3.0);
    REQUIRE(pol.units.size() == 1);
    const StrategicSeries& ser = pol.units.at("ccgt_strategic");
    CHECK(ser.k_e.size() == 6);
    CHECK(ser.k_e[3] == 2.0);
    CHECK(ser.k_h[0] == 1.5);
    CHECK(ser.k_pfr[5] == 3.0);
    CHECK_NOTHROW(validate_policy(s, pol));

    SUBCASE("missing strategic unit") {
        StrategicPolicy bad;
        CHECK_THROWS_WITH_AS(validate_policy(s, bad),
                             doctest::Contains("missing strategic instance"),
                             std::invalid_argument);
    }
    SUBCASE("unknown unit named") {
        StrategicPolicy bad = pol;
        bad.units["ocgt_1"] = ser;
        CHECK_THROWS_WITH_AS(validate_policy(s, bad),
                             doctest::Contains("not a strategic instance"),
                             std::invalid_argument);
    }
    SUBCASE("series length") {
        StrategicPolicy bad = pol;
        bad.units.at("ccgt_strategic").k_h.pop_back();
        CHECK_THROWS_WITH_AS(validate_policy(s, bad),
                             doctest::Contains("expected 6"),
                             std::invalid_argument);
    }
    SUBCASE("multiplier outside the cap") {
        StrategicPolicy bad = pol;
        bad.units.at("ccgt_strategic").k_e[2] = 3.5;  // cap is 3
        CHECK_THROWS_AS(validate_policy(s, bad), std::invalid_argument);
        bad.units.at("ccgt_strategic").k_e[2] = 0.5;  // below 1
        CHECK_THROWS_AS(validate_policy(s, bad), std::invalid_argument);
    }
    SUBCASE("builder refuses an invalid policy") {
        StrategicPolicy bad;
        CHECK_THROWS_AS(build_primal_uc(s, bad), std::invalid_argument);
    }
}

TEST_CASE("one-unit, one-hour model solves to the hand optimum") {
    Scenario s = one_unit_scenario();
    ConicProgram p = build_primal_uc(s);

    // 4 commitment binaries + P/H/PFR + the three system totals; no security
    // rows or cone because the contingency size is zero.
    CHECK(p.n_vars() == 10);
    CHECK(p.n_cones() == 0);
    CHECK(p.find_var("Ploss(1)") == -1);
    CHECK(p.n_rows() == 14);

    Solution sol = solve_mip(p);
    REQUIRE(sol.feasible());
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1000.0).epsilon(1e-7));

    Dispatch d = extract_dispatch(p, sol, s, 1e-5);
    REQUIRE(d.thermal.size() == 1);
    CHECK(d.thermal[0].y[0] == 1);
    CHECK(d.thermal[0].p[0] == doctest::Approx(100.0));
    CHECK(d.thermal[0].h[0] == doctest::Approx(800.0));  // 4 s * 200 MW
    CHECK(d.h_total[0] == doctest::Approx(800.0));
    CHECK(d.p_loss[0] == 0.0);
    CHECK(std::abs(d.balance_residual[0]) < 1e-6);

    // The pricing relaxation has the same optimum (commitment cost is zero).
    ConicProgram r = bounds_to_rows(relax_binaries(p));
    Solution rsol = solve_conic(r);
    REQUIRE(rsol.feasible());
    CHECK(rsol.objective == doctest::Approx(1000.0).epsilon(1e-7));
    CHECK(rsol.has_duals);

    SUBCASE("extract_dispatch rejects bad inputs") {
        Solution bad = sol;
        bad.x.pop_back();
        CHECK_THROWS_AS(extract_dispatch(p, bad, s), std::invalid_argument);
        Solution inf = sol;
        inf.status = SolveStatus::Infeasible;
        CHECK_THROWS_AS(extract_dispatch(p, inf, s), std::invalid_argument);
    }
}

TEST_CASE("printed commitment logic: exhaustive integer semantics") {
    // One unit, four hours, zero demand, zero msg: every commitment pattern
    // can carry a feasible dispatch, so feasibility is decided purely by the
    // commitment-logic rows.  The printed min-up/min-down windows include the
    // current hour, which freezes y at its initial state: a start violates
    // min-up at the start hour and a shutdown violates min-down at the
    // shutdown hour.  The only slack left is y^st in the final T^st hours of
    // an initially-off unit (its paired y^sg falls beyond the horizon).
    const int T = 4;
    auto make = [&](bool on, int t_st) {
        Scenario s;
        s.horizon = T;
        s.demand.assign(T, 0.0);
        ThermalUnitSpec g;
        g.id = "u";
        g.p_max = 100;
        g.p_msg = 0;
        g.inertia_const = 1;
        g.pfr_max = 0;
        g.provides_pfr = false;
        g.t_mdt = 2;
        g.t_mut = 2;
        g.t_st = t_st;
        g.offer_e = 1;
        g.initial_commitment = on;
        s.thermal.push_back(g);
        s.freq.p_loss_cap.assign(T, 0.0);
        return s;
    };

    auto feasible_patterns = [&](const Scenario& s) {
        ConicProgram p = build_primal_uc(s);
        std::vector<std::vector<int>> out;
        std::vector<double> x(static_cast<size_t>(p.n_vars()), 0.0);
        for (int mask = 0; mask < (1 << (4 * T)); ++mask) {
            // bits: y_t, yst_t, ysg_t, ysd_t per hour.
            std::vector<int> bits(4 * T);
            for (int b = 0; b < 4 * T; ++b) bits[b] = (mask >> b) & 1;
            for (int t = 1; t <= T; ++t) {
                const int y = bits[4 * (t - 1)];
                x[static_cast<size_t>(p.find_var(uc_key("y", "u", t)))] = y;
                x[static_cast<size_t>(p.find_var(uc_key("yst", "u", t)))] =
                    bits[4 * (t - 1) + 1];
                x[static_cast<size_t>(p.find_var(uc_key("ysg", "u", t)))] =
                    bits[4 * (t - 1) + 2];
                x[static_cast<size_t>(p.find_var(uc_key("ysd", "u", t)))] =
                    bits[4 * (t - 1) + 3];
                // Dispatch consistent with the commitment bit.
                x[static_cast<size_t>(p.find_var(uc_key("P", "u", t)))] = 0.0;
                x[static_cast<size_t>(p.find_var(uc_key("H", "u", t)))] =
                    100.0 * y;
                x[static_cast<size_t>(p.find_var(uc_key("PFR", "u", t)))] = 0.0;
                x[static_cast<size_t>(p.find_var(uc_key("Htot", t)))] = 100.0 * y;
                x[static_cast<size_t>(p.find_var(uc_key("PFRtot", t)))] = 0.0;
                x[static_cast<size_t>(p.find_var(uc_key("EFRtot", t)))] = 0.0;
            }
            if (evaluate(p, x).max_violation() <= 1e-9) out.push_back(bits);
        }
        return out;
    };

    SUBCASE("initially committed: y stays 1, no transitions") {
        auto pats = feasible_patterns(make(true, 1));
        REQUIRE(pats.size() == 1);
        for (int t = 0; t < T; ++t) {
            CHECK(pats[0][4 * t] == 1);      // y
            CHECK(pats[0][4 * t + 1] == 0);  // yst
            CHECK(pats[0][4 * t + 2] == 0);  // ysg
            CHECK(pats[0][4 * t + 3] == 0);  // ysd
        }
    }
    SUBCASE("initially off, T^st = 1: y stays 0, trailing yst is free") {
        auto pats = feasible_patterns(make(false, 1));
        REQUIRE(pats.size() == 2);  // yst_4 in {0, 1}
        for (const auto& b : pats) {
            for (int t = 0; t < T; ++t) {
                CHECK(b[4 * t] == 0);
                CHECK(b[4 * t + 2] == 0);
                CHECK(b[4 * t + 3] == 0);
            }
            CHECK(b[4 * 0 + 1] == 0);
            CHECK(b[4 * 1 + 1] == 0);
            CHECK(b[4 * 2 + 1] == 0);
        }
    }
    SUBCASE("initially off, T^st = 2: the last two yst are free") {
        auto pats = feasible_patterns(make(false, 2));
        CHECK(pats.size() == 4);  // yst_3, yst_4 free
    }
}

TEST_CASE("a competitive build is byte-identical to a non-strategic one") {
    Scenario s = scale_scenario(gb2030_default(), 0.1, 3);
    ConicProgram strategic = build_primal_uc(s, uniform_policy(s));

    Scenario plain = s;
    for (auto& g : plain.thermal) g.is_strategic = false;
    ConicProgram competitive = build_primal_uc(plain, uniform_policy(plain));

    CHECK(to_json(strategic) == to_json(competitive));
}

TEST_CASE("strategic multipliers scale exactly the strategic offer columns") {
    Scenario s = scale_scenario(gb2030_default(), 0.1, 3);
    StrategicPolicy pol = uniform_policy(s, 2.0, 1.5, 3.0);
    pol.units.at("ccgt_strategic").k_e[1] = 2.5;  // hour 2 differs
    ConicProgram p = build_primal_uc(s, pol);

    CHECK(p.vars[p.find_var("P(ccgt_strategic,1)")].obj ==
          doctest::Approx(130 * 2.0));
    CHECK(p.vars[p.find_var("P(ccgt_strategic,2)")].obj ==
          doctest::Approx(130 * 2.5));
    CHECK(p.vars[p.find_var("H(ccgt_strategic,3)")].obj ==
          doctest::Approx(1.8 * 1.5));
    CHECK(p.vars[p.find_var("PFR(ccgt_strategic,1)")].obj ==
          doctest::Approx(15 * 3.0));
    // Competitive units are untouched.
    CHECK(p.vars[p.find_var("P(ccgt,1)")].obj == doctest::Approx(130));
    CHECK(p.vars[p.find_var("PFR(ocgt_2,2)")].obj == doctest::Approx(50));

    // Raising offers can only raise the as-offered clearing cost.
    ConicProgram base = bounds_to_rows(relax_binaries(build_primal_uc(s)));
    ConicProgram markup = bounds_to_rows(relax_binaries(p));
    Solution s1 = solve_conic(base);
    Solution s2 = solve_conic(markup);
    REQUIRE(s1.feasible());
    REQUIRE(s2.feasible());
    CHECK(s2.objective >= s1.objective - 1e-6 * std::abs(s1.objective));
}

TEST_CASE("desk-scale day: security rows bind and the books balance") {
    Scenario s = scale_scenario(gb2030_default(), 0.1, 4);
    ConicProgram p = build_primal_uc(s);
    SolveOptions opt;
    opt.rel_gap = 1e-8;
    Solution sol = solve_mip(p, opt);
    REQUIRE(sol.feasible());

    Dispatch d = extract_dispatch(p, sol, s, 1e-4);
    const NadirCoefs nc = nadir_cone_coefs(s.freq);
    for (int t = 0; t < 4; ++t) {
        CHECK(std::abs(d.balance_residual[t]) < 1e-5);
        // Largest secured infeed and RoCoF floor: H >= 180 * 50 / 2 = 4500.
        CHECK(d.p_loss[t] >= 180.0 - 1e-6);
        CHECK(d.h_total[t] >= 4500.0 - 1e-6);
        CHECK(d.h_total[t] >=
              d.p_loss[t] * 25.0 - 1e-6);  // f0 / (2 rocof_max) = 25
        // Quasi-steady-state and the nadir cone hold at the dispatch.
        CHECK(d.efr_total[t] + d.pfr_total[t] >= d.p_loss[t] - 1e-6);
        CHECK(soc_margin(nc, d.h_total[t], d.efr_total[t], d.pfr_total[t],
                         d.p_loss[t]) >= -1e-7);
    }

    // The committed thermal fleet never moves (frozen by the printed logic).
    for (const auto& g : d.thermal)
        for (int t = 0; t < 4; ++t) {
            CHECK(g.y[t] == 1);
            CHECK(g.ysg[t] == 0);
            CHECK(g.ysd[t] == 0);
        }

    // Storage stays inside its energy window and honours the boundary pins.
    const FleetInstances fleet = expand_units(s);
    for (const auto& u : d.storage) {
        StorageInst inst;
        bool found = false;
        for (const auto& cand : fleet.storage)
            if (cand.id == u.id) {
                inst = cand;
                found = true;
            }
        REQUIRE(found);
        CHECK(u.e.back() == doctest::Approx(inst.e_end).epsilon(1e-6));
        for (int t = 0; t < 4; ++t) {
            CHECK(u.e[t] >= inst.e_min - 1e-5);
            CHECK(u.e[t] <= inst.e_max + 1e-5);
            CHECK(u.yc[t] + u.yd[t] <= 1);
        }
    }
}
