#pragma once

// =============================================================================
// Two-node lumped model of a symmetrically coupled resonator (SCR)
// =============================================================================
// Two meander inductors L (nodes a and b) share an inductive tail L_t to ground.
// The tail's internal node is removed with a star-to-delta transform, leaving a
// two-node circuit described by a capacitance matrix and an inverse-inductance
// matrix. Its eigenmodes are the common (in-phase) and differential
// (out-of-phase) modes.
//
// All quantities are SI.
// =============================================================================

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace scr {

/// Lumped parameters of one resonator.
struct CircuitDesign {
    std::string name;
    double length = 0.0;          // meander length per half, m
    double width = 0.0;           // wire width, m
    double c_a = 0.0;             // meander a to ground, F
    double c_b = 0.0;             // meander b to ground, F
    double c_x = 0.0;             // cross capacitance a-b (shunt + dot), F
    double c_ca = 0.0;            // feedline coupling to a, F
    double c_cb = 0.0;            // feedline coupling to b, F
    double inductance = 0.0;      // per meander half, H
    double tail_inductance = 0.0; // H

    /// Throws ValidationError naming the first offending field.
    void validate() const;
};

enum class ModeLabel { common, differential, electron_like };

std::string_view to_string(ModeLabel label) noexcept;
ModeLabel parse_mode_label(std::string_view text);

/// One normal mode.
///
/// The eigenvector is expressed in energy-normalised coordinates ordered as
/// (q_a, q_b, electron displacements...): the node-charge and displacement
/// amplitudes rescaled by the square root of the inverse inductance (or mass),
/// so that squared entries are energy participation fractions. Unit length,
/// first nonzero entry positive.
struct Mode {
    double frequency = 0.0;  // Hz
    Eigen::VectorXd eigenvector;
    ModeLabel label = ModeLabel::common;
    std::optional<double> impedance;  // ohm, set for differential modes
};

/// Result of the star-to-delta transform.
///
/// Branches: 1 is node a to ground, 2 is node b to ground, 3 couples a and b.
/// The inverse inductances are always finite; inductance_3 is +inf when the
/// tail inductance is zero.
struct DeltaNetwork {
    double inductance_1 = 0.0;
    double inductance_2 = 0.0;
    double inductance_3 = 0.0;
    double inverse_1 = 0.0;
    double inverse_2 = 0.0;
    double inverse_3 = 0.0;
};

DeltaNetwork ydelta_transform(double l_a, double l_b, double l_tail);

struct TwoNodeMatrices {
    Eigen::Matrix2d capacitance;        // F
    Eigen::Matrix2d inverse_inductance; // 1/H
};

struct MatrixOptions {
    bool include_feedline = true;  // fold C_ca, C_cb into C_a, C_b
    double gamma = 1.0;            // capacitance discount
    bool discount_feedline = true; // apply gamma to the folded feedline terms too
};

inline constexpr double kGammaMin = 0.40528473456935108578;  // (2/pi)^2
inline constexpr double kGammaMax = 1.0;

TwoNodeMatrices build_matrices(const CircuitDesign& design, const MatrixOptions& options);
TwoNodeMatrices build_matrices(const CircuitDesign& design, bool include_feedline, double gamma);

/// Inductance seen by a pure differential excitation, 1 / (d^T L^-1 d) with
/// d = (1, -1)/sqrt(2). Equals L for a symmetric circuit, independent of L_t.
double differential_inductance(const Eigen::Matrix2d& inverse_inductance);

/// Both circuit modes, sorted by frequency.
std::vector<Mode> eigenmodes(const TwoNodeMatrices& matrices);

ModeLabel classify_mode(const Eigen::VectorXd& eigenvector);

struct ModePair {
    double common = 0.0;       // Hz
    double differential = 0.0; // Hz
};

/// Closed-form frequencies of a fully symmetric circuit.
ModePair symmetric_frequencies(double inductance, double capacitance, double tail_inductance,
                               double cross_capacitance);

/// Picks the common- and differential-labelled entries out of eigenmodes().
struct CircuitModes {
    Mode common;
    Mode differential;
};
CircuitModes split_modes(const std::vector<Mode>& modes);

struct Splitting {
    double exact = 0.0;  // f_c - f_d from the eigen-solve, Hz
    double approx = 0.0; // small-coupling estimate, Hz
};

Splitting mode_splitting(const CircuitDesign& design, double gamma);

struct Impedance {
    double dynamic = 0.0;     // L * 2 pi f_d
    double closed_form = 0.0; // sqrt(L / (C + 2 C_x))
};

Impedance differential_impedance(const CircuitDesign& design, double f_d, double gamma,
                                 bool include_feedline = true);

/// Common-mode characteristic impedance (L + 2 L_t) * 2 pi f_c.
double common_impedance(const CircuitDesign& design, double f_c);

}  // namespace scr
