#pragma once

// Thin-film kinetic inductance and geometric scaling of meander resonators.

#include <cstddef>
#include <utility>
#include <vector>

namespace scr {

inline constexpr double kBcsGapRatio = 1.76;

struct FilmProperties {
    double sheet_resistance = 0.0;  // ohm per square, normal state
    double critical_temperature = 0.0;  // K

    /// Kinetic sheet inductance hbar R / (1.76 pi k_B T_c), H per square.
    double sheet_inductance() const;
};

double sheet_inductance(double sheet_resistance, double critical_temperature);

/// Kinetic inductance of a wire of the given length and width, L_sq * l / w.
/// Geometric and mutual inductance are neglected.
double wire_inductance(double sheet_inductance, double length, double width);

struct Geometry {
    double length = 0.0;
    double width = 0.0;
};

struct ScalingBase {
    Geometry geometry;
    double frequency = 0.0;  // Hz
    double impedance = 0.0;  // ohm
};

struct ScalingPrediction {
    double frequency = 0.0;
    double impedance = 0.0;
    double frequency_ratio = 0.0;
    double impedance_ratio = 0.0;          // quarter-power form
    double impedance_ratio_product = 0.0;  // (l'/l)(w/w')(f'/f)
};

/// Kinetic-inductance dominated scaling: f ~ (w / l^3)^(1/4), Z ~ (l / w^3)^(1/4).
ScalingPrediction scaling_predict(const ScalingBase& base, const Geometry& target);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double residual_rms = 0.0;  // RMS of natural-log residuals
};

/// Unweighted least-squares fit of log y = log A + p log x.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

}  // namespace scr
