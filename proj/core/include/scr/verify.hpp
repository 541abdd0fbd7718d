#pragma once

// Family-level model verification: predict both circuit modes for a set of
// designs under a single capacitance discount gamma, fit gamma to reference
// frequencies and tabulate the errors and mode splittings.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scr/circuit.hpp"

namespace scr {

struct FamilyModes {
    std::string name;
    Mode common;
    Mode differential;
};

struct VerifyOptions {
    bool include_feedline = true;
    bool discount_feedline = true;
    double feedline_impedance = 50.0;  // ohm, for the coupling-Q column
};

std::vector<FamilyModes> predict_family(const std::vector<CircuitDesign>& designs, double gamma,
                                        const VerifyOptions& options = {});

using ReferenceKey = std::pair<std::string, ModeLabel>;
using ReferenceMap = std::map<ReferenceKey, double>;

struct VerificationRow {
    std::string name;
    ModeLabel label = ModeLabel::common;
    double predicted = 0.0;  // Hz
    std::optional<double> reference;  // Hz
    std::optional<double> relative_error;  // (predicted - reference) / reference
    std::optional<double> qc;  // empty when the mode does not couple to the feedline
};

struct SplittingRow {
    std::string name;
    double exact = 0.0;   // Hz
    double approx = 0.0;  // Hz
};

struct VerificationReport {
    double gamma = 0.0;
    double objective = 0.0;  // sum of squared relative errors at gamma
    bool multiple_minima = false;
    std::vector<VerificationRow> rows;
    std::vector<SplittingRow> splittings;
    double max_abs_error = 0.0;
    double rms_error = 0.0;
};

std::vector<SplittingRow> splitting_report(const std::vector<CircuitDesign>& designs, double gamma);

/// Report at a fixed gamma. Reference columns are filled where available.
VerificationReport evaluate_family(const std::vector<CircuitDesign>& designs, double gamma,
                                   const ReferenceMap& references = {},
                                   const VerifyOptions& options = {});

/// Minimises the summed squared relative frequency error over
/// gamma in [(2/pi)^2, 1].
VerificationReport fit_gamma(const std::vector<CircuitDesign>& designs,
                             const ReferenceMap& references, const VerifyOptions& options = {});

}  // namespace scr
