#pragma once

// =============================================================================
// Electrons trapped in the dot between the two SCR plates
// =============================================================================
// Classical, linearised treatment: electrons sit at the minimum of the
// confinement + Coulomb energy; small excursions couple to the node charges
// through the plate lever-arm gradients. The joint normal modes solve
//     omega^2 (q, dr) = Ltilde^-1 Ctilde^-1 (q, dr)
// with a block-diagonal Ltilde^-1 (circuit inverse inductance, 1/m_e) and a
// symmetric Ctilde^-1 (circuit inverse capacitance, -e beta couplings, electron
// stiffness).
// =============================================================================

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "scr/circuit.hpp"
#include "scr/constants.hpp"

namespace scr {

struct DotPotential {
    enum class Kind { harmonic_1d, quadratic_2d };

    Kind kind = Kind::harmonic_1d;
    double omega_dot = 0.0; // rad/s, harmonic_1d
    double v_xx = 0.0;      // V/m^2, quadratic_2d curvatures of V_dc
    double v_yy = 0.0;
    double v_xy = 0.0;

    static DotPotential harmonic(double omega_dot);
    static DotPotential quadratic(double v_xx, double v_yy, double v_xy);

    int dims() const noexcept { return kind == Kind::harmonic_1d ? 1 : 2; }

    /// Hessian of the confinement energy -e V_dc in J/m^2. For harmonic_1d only
    /// the xx entry is used.
    Eigen::Matrix2d energy_hessian() const;

    /// Throws InvalidParameter unless the potential is confining.
    void validate() const;
};

struct ElectronConfiguration {
    int dims = 1;
    std::vector<Eigen::Vector2d> positions; // m; y is zero for dims == 1

    std::size_t size() const noexcept { return positions.size(); }
};

/// Gradients of the plate lever arms at one electron, in 1/m.
struct PlateArms {
    double da_dx = 0.0;
    double da_dy = 0.0;
    double db_dx = 0.0;
    double db_dy = 0.0;
};

struct LeverArms {
    std::vector<PlateArms> electrons;

    /// Centred-dot idealisation: da/dx = -db/dx = field_x for every electron.
    static LeverArms antisymmetric(std::size_t n, double field_x);

    std::size_t size() const noexcept { return electrons.size(); }
};

struct CoulombCouplings {
    Eigen::MatrixXd k_plus;  // N/m
    Eigen::MatrixXd k_minus; // N/m
    Eigen::MatrixXd l;       // N/m
};

struct Beta {
    double x_a = 0.0;
    double x_b = 0.0;
    double y_a = 0.0;
    double y_b = 0.0;
};

/// How pairwise Coulomb coefficients enter the electron stiffness block.
///
/// pair_coefficient uses k+ / k- / l once per pair, which reproduces the
/// usual n = 2 block [[3/2, -1/2], [-1/2, 3/2]] m_e omega_dot^2.
/// full_hessian uses twice those values, the exact second derivative of the
/// Coulomb energy (n = 2 breathing mode at sqrt(3) omega_dot).
enum class CoulombStiffness { pair_coefficient, full_hessian };

struct CoupledSystemMatrices {
    Eigen::MatrixXd inverse_inductance;  // (2 + d n) square
    Eigen::MatrixXd inverse_capacitance; // (2 + d n) square
    int dims = 1;
    std::size_t electrons = 0;
};

struct CouplingOptions {
    bool include_feedline = true;
    CoulombStiffness stiffness = CoulombStiffness::pair_coefficient;
};

/// Minimum-energy arrangement of n electrons in the dot.
ElectronConfiguration equilibrium_positions(std::size_t n, const DotPotential& potential);

/// Largest force component at the configuration divided by the force scale
/// k_min * d (k_min the softest confinement curvature, d the two-electron
/// separation in that curvature).
double equilibrium_residual(const ElectronConfiguration& config, const DotPotential& potential);

/// Two-electron separation in a harmonic well of the given stiffness (J/m^2).
double pair_separation(double stiffness);

CoulombCouplings coulomb_coefficients(const ElectronConfiguration& config);

std::vector<Beta> beta_coefficients(const TwoNodeMatrices& matrices, const LeverArms& arms);

CoupledSystemMatrices coupled_matrices(const TwoNodeMatrices& circuit,
                                       const DotPotential& potential,
                                       const ElectronConfiguration& config, const LeverArms& arms,
                                       CoulombStiffness stiffness = CoulombStiffness::pair_coefficient);

CoupledSystemMatrices coupled_matrices(const CircuitDesign& design, double gamma,
                                       const DotPotential& potential,
                                       const ElectronConfiguration& config, const LeverArms& arms,
                                       const CouplingOptions& options = {});

/// All 2 + d n modes, sorted by frequency. Throws an unstable error if the
/// inverse-capacitance matrix is not positive definite.
std::vector<Mode> coupled_eigenmodes(const CoupledSystemMatrices& matrices);

/// Frequency change of the differential mode caused by n electrons, Hz.
double dispersive_shift(const CircuitDesign& design, double gamma, const DotPotential& potential,
                        std::size_t n, const LeverArms& arms, const CouplingOptions& options = {});

struct DotSweep {
    double omega_min = 0.0; // rad/s
    double omega_max = 0.0; // rad/s
    std::size_t points = 0;
};

struct CrossingGap {
    double gap = 0.0;       // Hz
    double omega_dot = 0.0; // rad/s at the minimum
};

/// Minimum splitting between the single-electron motional mode and the
/// differential mode over a harmonic-dot sweep.
CrossingGap avoided_crossing_gap(const CircuitDesign& design, double gamma, const LeverArms& arms,
                                 const DotSweep& sweep, const CouplingOptions& options = {});

/// g/2pi in Hz, optionally including the sqrt(2) symmetric-coupling factor.
double coupling_strength_analytic(double field_x, double f0, double z_res, double f_e,
                                  bool scr_factor);

struct SweepPoint {
    double omega_dot = 0.0;
    std::vector<double> frequencies; // Hz, one per tracked mode
    std::vector<ModeLabel> labels;
};

/// Coupled spectrum over a harmonic-dot sweep. Modes are tracked from point to
/// point by maximum eigenvector overlap, so column k follows one physical mode
/// through crossings.
std::vector<SweepPoint> sweep_coupled_modes(const CircuitDesign& design, double gamma,
                                            std::size_t n, const LeverArms& arms,
                                            const DotSweep& sweep,
                                            const CouplingOptions& options = {});

}  // namespace scr
