#pragma once

// Hanger-geometry transmission resonances:
//     S21(f) = 1 / (1 + (Qi/Qc) e^{i phi} / (1 + 2i Qi (f - f0)/f0))
// synthesis, least-squares fitting, coupling-Q prediction and photon number.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "scr/circuit.hpp"
#include "scr/errors.hpp"

namespace scr {

struct S21Trace {
    std::vector<double> frequencies;  // Hz, strictly increasing
    std::vector<std::complex<double>> values;
    std::optional<double> power_in;  // W at the device input

    std::size_t size() const noexcept { return frequencies.size(); }

    /// Throws ValidationError on fewer than 32 samples, mismatched lengths,
    /// non-finite values or a frequency column that is not strictly increasing.
    void validate() const;
};

inline constexpr std::size_t kMinTraceSamples = 32;

struct ResonanceParams {
    double f0 = 0.0;  // Hz
    double qi = 0.0;
    double qc = 0.0;
    double phi = 0.0;  // rad
};

struct ResonanceFit {
    ResonanceParams params;
    ResonanceParams uncertainty;  // one-sigma standard errors
    double delay = 0.0;  // s, nonzero only when the delay term was fitted
    double delay_uncertainty = 0.0;
    double residual_rms = 0.0;  // RMS complex residual
    int iterations = 0;
};

struct FitOptions {
    std::optional<ResonanceParams> init;
    bool normalize_baseline = false;
    bool fit_delay = false;
    int max_iterations = 200;
    double step_tolerance = 1e-10;
};

/// Raised when the optimiser stops without meeting the step tolerance. Carries
/// the best parameters reached.
class FitConvergenceError : public ComputationError {
public:
    FitConvergenceError(const std::string& message, ResonanceFit best)
        : ComputationError(ErrorKind::convergence, message), best_(std::move(best)) {}

    const ResonanceFit& best() const noexcept { return best_; }

private:
    ResonanceFit best_;
};

std::complex<double> s21_model(double f, const ResonanceParams& params);

/// n_points evenly spaced samples over [f0 - span/2, f0 + span/2] with complex
/// Gaussian noise of total RMS noise_rms (noise_rms/sqrt(2) per quadrature).
S21Trace synth_trace(const ResonanceParams& params, double span, std::size_t n_points,
                     double noise_rms, std::uint64_t seed);

/// Divides the trace by a complex baseline: magnitude is the median |S21| of
/// the outer 10% of samples, phase the argument of their mean.
S21Trace normalize_baseline(const S21Trace& trace);

/// Initial guess used when FitOptions::init is empty.
ResonanceParams estimate_resonance(const S21Trace& trace);

ResonanceFit fit_resonance(const S21Trace& trace, const FitOptions& options = {});

/// Coupling quality factor 1 / (Z_res Z0 C_c^2 w0^2) with C_c the mode-weighted
/// feedline capacitance. Empty when the mode does not couple (C_c = 0).
std::optional<double> qc_from_circuit(double z_res, double z0, double c_ca, double c_cb,
                                      ModeLabel mode, double f0);

/// Mean intra-cavity photon number for input power p_in (W).
double photon_number(double p_in, const ResonanceParams& params);

double dbm_to_watts(double dbm);

}  // namespace scr
