#pragma once

#include <numbers>

namespace scr {

// CODATA 2018 values, SI units.
struct PhysicalConstants {
    double elementary_charge;   // C
    double electron_mass;       // kg
    double vacuum_permittivity; // F/m
    double hbar;                // J s
    double boltzmann;           // J/K

    /// e^2 / (4 pi eps0), in J m.
    constexpr double coulomb_constant() const {
        return elementary_charge * elementary_charge /
               (4.0 * std::numbers::pi * vacuum_permittivity);
    }
};

inline constexpr PhysicalConstants kCodata2018{
    1.602176634e-19,
    9.1093837015e-31,
    8.8541878128e-12,
    1.054571817e-34,
    1.380649e-23,
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Engineering-unit multipliers used by the file formats.
namespace units {
inline constexpr double fF = 1e-15;
inline constexpr double nH = 1e-9;
inline constexpr double pH = 1e-12;
inline constexpr double GHz = 1e9;
inline constexpr double MHz = 1e6;
inline constexpr double mm = 1e-3;
inline constexpr double um = 1e-6;
}  // namespace units

}  // namespace scr
