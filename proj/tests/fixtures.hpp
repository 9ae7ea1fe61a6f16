// Miniature market instances shared across the test suites: small enough to
// reason about by hand, rich enough to touch the row families under test.
#pragma once

#include "model/scenario.hpp"

namespace fcas::fixtures {

// One committed thermal unit serving one hour, security off.  The clearing
// optimum is hand-checkable: P = 100 at an energy offer of 10 costs 1000;
// commitment is pinned at the initial state, so the relaxation is an LP with
// the same optimum.
inline Scenario one_unit_one_hour() {
    Scenario s;
    s.horizon = 1;
    s.demand = {100.0};
    ThermalUnitSpec g;
    g.id = "u";
    g.is_strategic = true;
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
    s.caps = {3.0, 3.0, 3.0};
    return s;
}

// A committed thermal unit plus a pumped-storage unit over three hours, with
// hour 1 unsecured and hours 2-3 carrying a 15 MW secured contingency.
// Exercises the commitment chain across hours, every storage row family
// except EFR, and the frequency-security rows on a strict subset of hours.
//
// Feasibility margin (hand check): the evening hours need the store to
// discharge (demand 200 and 160 against 200 MW of thermal with PFR headroom
// to spare), hour 1 recharges it within the 100 MW charge limit, and the
// state of charge swings between 100 and ~167 MWh inside [20, 200] while
// returning to 100 MWh at the end.  Strictly feasible points exist: every
// inequality above keeps slack and the nadir cone holds strictly at, e.g.,
// H_tot = 1300 MWs, PFR = 35, P_loss = 15.
inline Scenario two_unit_three_hour() {
    Scenario s;
    s.horizon = 3;
    s.demand = {120.0, 200.0, 160.0};
    ThermalUnitSpec g;
    g.id = "gen";
    g.is_strategic = true;
    g.p_max = 200;
    g.p_msg = 50;
    g.inertia_const = 5;
    g.pfr_max = 40;
    g.provides_pfr = true;
    g.t_mdt = 2;
    g.t_mut = 2;
    g.t_st = 2;
    g.offer_e = 30;
    g.offer_h = 0.5;
    g.offer_pfr = 4;
    g.initial_commitment = true;
    s.thermal.push_back(g);
    StorageUnitSpec u;
    u.id = "st";
    u.kind = StorageKind::PHES;
    u.p_max = 100;
    u.p_msg = 0;
    u.e_min = 20;
    u.e_max = 200;
    u.e_ini = 100;
    u.e_end = 100;
    u.eff_c = 0.9;
    u.eff_d = 0.9;
    u.inertia_const = 3;
    u.pfr_max = 20;
    u.efr_max = 0;
    u.offer_e = 45;
    u.offer_h = 1;
    u.offer_pfr = 3;
    u.offer_efr = 0;
    s.storage.push_back(u);
    s.freq.p_loss_cap = {0.0, 15.0, 15.0};
    s.caps = {3.0, 3.0, 3.0};
    return s;
}

// two_unit_three_hour extended with an initially-off thermal unit, a wind
// block, and a battery: covers the y0 = 0 boundary constants, the RES rows,
// and the EFR family.  The extra units only add supply, so feasibility
// carries over from the base instance.
inline Scenario mixed_fleet_three_hour() {
    Scenario s = two_unit_three_hour();
    ThermalUnitSpec g;
    g.id = "peaker";
    g.is_strategic = false;
    g.p_max = 80;
    g.p_msg = 20;
    g.inertia_const = 4;
    g.pfr_max = 16;
    g.provides_pfr = true;
    g.t_mdt = 2;
    g.t_mut = 2;
    g.t_st = 2;
    g.offer_e = 60;
    g.offer_h = 1;
    g.offer_pfr = 6;
    g.initial_commitment = false;
    s.thermal.push_back(g);
    ResUnitSpec r;
    r.id = "wind";
    r.p_max = 100;
    r.offer_e = 5;
    r.capacity_factor = {0.5, 0.8, 0.3};
    s.res.push_back(r);
    StorageUnitSpec b;
    b.id = "batt";
    b.kind = StorageKind::BESS;
    b.p_max = 30;
    b.p_msg = 0;
    b.e_min = 0;
    b.e_max = 30;
    b.e_ini = 15;
    b.e_end = 15;
    b.eff_c = 0.92;
    b.eff_d = 0.92;
    b.inertia_const = 0;
    b.pfr_max = 0;
    b.efr_max = 10;
    b.offer_e = 55;
    b.offer_h = 0;
    b.offer_pfr = 0;
    b.offer_efr = 8;
    s.storage.push_back(b);
    return s;
}

}  // namespace fcas::fixtures
