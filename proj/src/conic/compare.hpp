// Structural comparison of two conic programs up to presentation order.
//
// Two programs are considered the same problem when their variables, rows,
// and cones correspond by name with identical data: bounds, objective
// coefficients, senses, merged term lists, right-hand sides, multiplier
// names, and cone layouts.  Row and variable order, term order, and an
// overall sign flip of an equality row are presentation choices and are
// normalised away; everything else is a reported difference.
//
// The main client is the duality layer: the dual assembled symbol by symbol
// from the closed-form multiplier equations must coincide with the dual
// derived mechanically from the primal, and this check is what "coincide"
// means.  The comparison is generic, though — any two ConicPrograms can be
// diffed.
#pragma once

#include <string>
#include <vector>

#include "program.hpp"

namespace fcas {

struct ProgramDiff {
    bool match = false;       // no differences found anywhere
    int vars_total = 0;       // union of variable names
    int vars_matched = 0;     // present in both with identical data
    int rows_total = 0;
    int rows_matched = 0;
    int cones_total = 0;
    int cones_matched = 0;
    bool objective_match = false;  // sense and constant term
    // Human-readable discrepancies, at most `max_diffs` of them (a final
    // entry notes how many were suppressed).
    std::vector<std::string> diffs;
};

// Coefficients and bounds compare as |x - y| <= reltol * (1 + |x| + |y|);
// infinities must agree in sign exactly.
ProgramDiff compare_programs(const ConicProgram& a, const ConicProgram& b,
                             double reltol = 1e-9, int max_diffs = 40);

}  // namespace fcas
