#pragma once

#include <vector>

#include "scr/circuit.hpp"
#include "scr/constants.hpp"

namespace scr::testing {

inline CircuitDesign table_row(const char* name, double length_mm, double c_a, double c_b,
                               double c_x, double c_ca, double c_cb, double l_nh) {
    using namespace units;
    CircuitDesign d;
    d.name = name;
    d.length = length_mm * mm;
    d.width = 1.6 * um;
    d.c_a = c_a * fF;
    d.c_b = c_b * fF;
    d.c_x = c_x * fF;
    d.c_ca = c_ca * fF;
    d.c_cb = c_cb * fF;
    d.inductance = l_nh * nH;
    d.tail_inductance = 6.5 * nH;
    return d;
}

inline std::vector<CircuitDesign> meander_family() {
    return {
        table_row("R1", 1.08, 21.6, 21.8, 1.70, 0.6, 0.3, 117.1),
        table_row("R2", 1.02, 20.8, 20.9, 1.68, 0.5, 0.3, 110.1),
        table_row("R3", 0.96, 19.9, 20.3, 1.68, 0.7, 0.4, 103.8),
        table_row("R4", 0.90, 19.3, 19.5, 1.62, 0.6, 0.4, 97.4),
        table_row("R5", 0.84, 18.0, 18.5, 1.55, 1.0, 0.5, 91.0),
        table_row("R6", 0.78, 17.5, 17.9, 1.49, 0.9, 0.4, 84.7),
        table_row("R7", 0.72, 16.2, 16.9, 1.47, 1.3, 0.6, 77.7),
        table_row("R8", 0.66, 15.5, 16.3, 1.40, 1.2, 0.5, 71.3),
        table_row("R9", 0.60, 13.8, 15.0, 1.33, 2.0, 0.7, 64.9),
    };
}

/// Symmetric stand-in for R1: mean folded ground capacitance on both sides,
/// no separate feedline terms.
inline CircuitDesign symmetric_r1() {
    using namespace units;
    CircuitDesign d;
    d.name = "R1-sym";
    d.length = 1.08 * mm;
    d.width = 1.6 * um;
    d.c_a = d.c_b = 0.5 * (21.6 + 0.6 + 21.8 + 0.3) * fF;
    d.c_x = 1.70 * fF;
    d.inductance = 117.1 * nH;
    d.tail_inductance = 6.5 * nH;
    return d;
}

inline CircuitDesign symmetric(double l, double c, double l_t, double c_x) {
    CircuitDesign d;
    d.name = "sym";
    d.length = 1e-3;
    d.width = 1e-6;
    d.c_a = d.c_b = c;
    d.c_x = c_x;
    d.inductance = l;
    d.tail_inductance = l_t;
    return d;
}

}  // namespace scr::testing
