// Market-instance data model: unit fleets, offers, profiles, frequency
// security parameters, and the GB-2030 default case with deterministic
// desk-scale reductions.
//
// All quantities are MW / MWh / pounds; hours are 1-based in files and
// 0-based in the in-memory series. Scenarios are read-only after
// construction and safe to share across workers.
#pragma once

#include <string>
#include <vector>

namespace fcas {

struct ThermalUnitSpec {
    std::string id;
    bool is_strategic = false;
    int count = 1;           // identical-unit multiplier
    bool aggregate = false;  // one scaled pseudo-unit instead of `count` units
    double p_max = 0.0;      // MW per unit
    double p_msg = 0.0;      // minimum stable generation, MW per unit
    double inertia_const = 0.0;  // s
    double pfr_max = 0.0;        // MW per unit
    int t_mdt = 1;               // minimum down time, h
    int t_mut = 1;               // minimum up time, h
    int t_st = 1;                // startup delay, h
    double offer_e = 0.0;    // pounds/MWh
    double offer_h = 0.0;    // pounds/MW s
    double offer_pfr = 0.0;  // pounds/MW
    bool provides_pfr = true;
    bool initial_commitment = false;
};

struct ResUnitSpec {
    std::string id;
    double p_max = 0.0;    // MW (technology block)
    double offer_e = 0.0;  // pounds/MWh
    std::vector<double> capacity_factor;  // per hour, in [0, 1]
};

enum class StorageKind { PHES, BESS };

struct StorageUnitSpec {
    std::string id;
    StorageKind kind = StorageKind::PHES;
    int count = 1;
    bool aggregate = false;
    double p_max = 0.0;  // MW per unit
    double p_msg = 0.0;
    double e_min = 0.0, e_max = 0.0, e_ini = 0.0, e_end = 0.0;  // MWh per unit
    double eff_c = 1.0, eff_d = 1.0;
    double inertia_const = 0.0;  // s (0 for BESS)
    double pfr_max = 0.0;        // MW per unit (0 for BESS)
    double efr_max = 0.0;        // MW per unit (0 for PHES)
    double offer_e = 0.0, offer_h = 0.0, offer_pfr = 0.0, offer_efr = 0.0;
};

struct FrequencyParams {
    double f0 = 50.0;        // Hz
    double rocof_max = 1.0;  // Hz/s
    double df_max = 0.8;     // Hz
    double t_efr = 1.0;      // s
    double t_pfr = 10.0;     // s
    std::vector<double> p_loss_cap;  // MW per hour; 0 disables the hour's
                                     // frequency-security constraints
};

struct StrategicCaps {
    double k_e = 1.0, k_h = 1.0, k_pfr = 1.0;
};

struct Scenario {
    int horizon = 0;
    std::vector<double> demand;  // MW per hour
    std::vector<ThermalUnitSpec> thermal;
    std::vector<ResUnitSpec> res;
    std::vector<StorageUnitSpec> storage;
    FrequencyParams freq;
    StrategicCaps caps;
};

// Every violated invariant, one message per violation naming the unit.
// Empty result means the scenario is valid.
std::vector<std::string> validate_scenario(const Scenario& s);

std::string scenario_to_json(const Scenario& s, int indent = 2);
Scenario scenario_from_json(const std::string& text);

// Throws std::runtime_error with a parse message or the full validation
// report. A sibling "<stem>_profiles.csv" is NOT loaded implicitly; use
// load_profiles_csv for that.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

// Replace demand and RES capacity factors from a CSV with header
//   hour,demand,cf_<res_id>[,cf_<res_id>...]
// Hours are 1-based and must cover 1..s.horizon exactly once.
void load_profiles_csv(Scenario& s, const std::string& path);

// The GB-2030 case study: fleets, offers, and frequency limits from the
// published characteristics table, with deterministic synthetic 24 h
// demand/RES profiles (high RES and low demand before hour 17, inverse
// after).
Scenario gb2030_default();

// Deterministic reduction: unit counts (rounded up, minimum 1), demand,
// loss cap, and RES block sizes scale by `factor`; the horizon truncates
// every series.  Per-unit extensive ratings (power, energy, reserve caps)
// shrink by count*factor/new_count so each group's total rating scales by
// exactly `factor` despite the rounding.  Offers, efficiencies, and
// frequency limits are unchanged, so the scaled instance keeps the full
// system's must-run shares, storage durations, and security geometry.
// factor must lie in (0, 1]; horizon in [1, s.horizon].
Scenario scale_scenario(const Scenario& s, double factor, int horizon);

}  // namespace fcas
