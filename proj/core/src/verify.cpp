#include "scr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "parallel.hpp"
#include "scr/errors.hpp"
#include "scr/resonance.hpp"

namespace scr {

namespace {

constexpr std::size_t kCoarseGammaPoints = 61;
constexpr double kGammaTolerance = 1e-7;

MatrixOptions to_matrix_options(double gamma, const VerifyOptions& options) {
    MatrixOptions m;
    m.gamma = gamma;
    m.include_feedline = options.include_feedline;
    m.discount_feedline = options.discount_feedline;
    return m;
}

void check_references(const std::vector<CircuitDesign>& designs, const ReferenceMap& references) {
    std::set<std::string> names;
    for (const auto& d : designs) {
        names.insert(d.name);
    }
    for (const auto& [key, value] : references) {
        if (!names.contains(key.first)) {
            throw InvalidParameter("reference resonator '" + key.first +
                                   "' does not match any design");
        }
        if (key.second == ModeLabel::electron_like) {
            throw InvalidParameter("reference for '" + key.first +
                                   "' must be a common or differential mode");
        }
        require(std::isfinite(value) && value > 0.0,
                "reference frequency for '" + key.first + "' must be positive");
    }
}

double objective(const std::vector<CircuitDesign>& designs, const ReferenceMap& references,
                 double gamma, const VerifyOptions& options) {
    double sum = 0.0;
    for (const auto& design : designs) {
        const auto c = references.find({design.name, ModeLabel::common});
        const auto d = references.find({design.name, ModeLabel::differential});
        if (c == references.end() && d == references.end()) {
            continue;
        }
        const auto modes = split_modes(eigenmodes(build_matrices(design, to_matrix_options(gamma, options))));
        if (c != references.end()) {
            sum += std::pow((modes.common.frequency - c->second) / c->second, 2);
        }
        if (d != references.end()) {
            sum += std::pow((modes.differential.frequency - d->second) / d->second, 2);
        }
    }
    return sum;
}

double golden_section(const auto& f, double a, double b, double tolerance) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tolerance) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

}  // namespace

std::vector<FamilyModes> predict_family(const std::vector<CircuitDesign>& designs, double gamma,
                                        const VerifyOptions& options) {
    std::vector<FamilyModes> out(designs.size());
    detail::parallel_for(designs.size(), [&](std::size_t i) {
        const auto modes =
            split_modes(eigenmodes(build_matrices(designs[i], to_matrix_options(gamma, options))));
        out[i] = {designs[i].name, modes.common, modes.differential};
    });
    return out;
}

std::vector<SplittingRow> splitting_report(const std::vector<CircuitDesign>& designs, double gamma) {
    std::vector<SplittingRow> rows;
    rows.reserve(designs.size());
    for (const auto& design : designs) {
        const Splitting s = mode_splitting(design, gamma);
        rows.push_back({design.name, s.exact, s.approx});
    }
    return rows;
}

VerificationReport evaluate_family(const std::vector<CircuitDesign>& designs, double gamma,
                                   const ReferenceMap& references, const VerifyOptions& options) {
    check_references(designs, references);
    require(options.feedline_impedance > 0.0, "feedline impedance must be positive");

    VerificationReport report;
    report.gamma = gamma;
    const auto family = predict_family(designs, gamma, options);

    double sum_sq = 0.0;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const CircuitDesign& design = designs[i];
        for (const Mode* mode : {&family[i].common, &family[i].differential}) {
            const ModeLabel label = mode == &family[i].common ? ModeLabel::common
                                                              : ModeLabel::differential;
            VerificationRow row;
            row.name = design.name;
            row.label = label;
            row.predicted = mode->frequency;

            const double z = label == ModeLabel::differential
                                 ? differential_impedance(design, mode->frequency, gamma,
                                                          options.include_feedline)
                                       .dynamic
                                 : common_impedance(design, mode->frequency);
            row.qc = qc_from_circuit(z, options.feedline_impedance, design.c_ca, design.c_cb, label,
                                     mode->frequency);

            const auto ref = references.find({design.name, label});
            if (ref != references.end()) {
                row.reference = ref->second;
                row.relative_error = (row.predicted - ref->second) / ref->second;
                sum_sq += *row.relative_error * *row.relative_error;
                report.max_abs_error = std::max(report.max_abs_error, std::abs(*row.relative_error));
                ++compared;
            }
            report.rows.push_back(std::move(row));
        }
    }
    report.objective = sum_sq;
    report.rms_error = compared > 0 ? std::sqrt(sum_sq / static_cast<double>(compared)) : 0.0;
    report.splittings = splitting_report(designs, gamma);
    return report;
}

VerificationReport fit_gamma(const std::vector<CircuitDesign>& designs,
                             const ReferenceMap& references, const VerifyOptions& options) {
    check_references(designs, references);
    require(references.size() >= 2, "gamma fit needs at least two reference frequencies");

    const auto f = [&](double gamma) { return objective(designs, references, gamma, options); };

    std::vector<double> grid(kCoarseGammaPoints);
    std::vector<double> values(kCoarseGammaPoints);
    for (std::size_t i = 0; i < kCoarseGammaPoints; ++i) {
        grid[i] = kGammaMin + (kGammaMax - kGammaMin) * static_cast<double>(i) /
                                  static_cast<double>(kCoarseGammaPoints - 1);
        values[i] = f(grid[i]);
    }

    // Local minima of the coarse scan, endpoints included.
    std::size_t local_minima = 0;
    for (std::size_t i = 0; i < kCoarseGammaPoints; ++i) {
        const bool left = i == 0 || values[i] < values[i - 1];
        const bool right = i + 1 == kCoarseGammaPoints || values[i] <= values[i + 1];
        if (left && right) {
            ++local_minima;
        }
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(values.begin(), values.end()) - values.begin());
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, kCoarseGammaPoints - 1)];
    double gamma = golden_section(f, lo, hi, kGammaTolerance);

    // The golden-section interior never reaches the boundary itself.
    for (double edge : {kGammaMin, kGammaMax}) {
        if (f(edge) <= f(gamma)) {
            gamma = edge;
        }
    }

    VerificationReport report = evaluate_family(designs, gamma, references, options);
    report.multiple_minima = local_minima > 1;
    return report;
}

}  // namespace scr
