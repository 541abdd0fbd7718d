#include "scr/circuit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "normal_modes.hpp"
#include "scr/constants.hpp"
#include "scr/errors.hpp"

namespace scr {

namespace {

bool positive(double value) { return std::isfinite(value) && value > 0.0; }
bool nonnegative(double value) { return std::isfinite(value) && value >= 0.0; }

void check_field(bool ok, std::string_view field, double value, std::string_view rule) {
    if (!ok) {
        std::ostringstream msg;
        msg << "field '" << field << "' must be " << rule << " (got " << value << ")";
        throw ValidationError(msg.str());
    }
}

}  // namespace

void CircuitDesign::validate() const {
    check_field(positive(length), "length", length, "positive");
    check_field(positive(width), "width", width, "positive");
    check_field(positive(c_a), "c_a", c_a, "positive");
    check_field(positive(c_b), "c_b", c_b, "positive");
    check_field(nonnegative(c_x), "c_x", c_x, "non-negative");
    check_field(nonnegative(c_ca), "c_ca", c_ca, "non-negative");
    check_field(nonnegative(c_cb), "c_cb", c_cb, "non-negative");
    check_field(positive(inductance), "inductance", inductance, "positive");
    check_field(nonnegative(tail_inductance), "tail_inductance", tail_inductance,
                "non-negative");
}

std::string_view to_string(ModeLabel label) noexcept {
    switch (label) {
    case ModeLabel::common:
        return "common";
    case ModeLabel::differential:
        return "differential";
    case ModeLabel::electron_like:
        return "electron-like";
    }
    return "unknown";
}

ModeLabel parse_mode_label(std::string_view text) {
    if (text == "common" || text == "c") {
        return ModeLabel::common;
    }
    if (text == "differential" || text == "d") {
        return ModeLabel::differential;
    }
    if (text == "electron-like" || text == "electron") {
        return ModeLabel::electron_like;
    }
    throw ParseError("unknown mode label '" + std::string(text) + "'");
}

DeltaNetwork ydelta_transform(double l_a, double l_b, double l_tail) {
    require(positive(l_a) && positive(l_b), "star inductances L_a and L_b must be positive");
    require(nonnegative(l_tail), "tail inductance must be non-negative");

    // Sum of pairwise products of the star arms; each delta branch is this sum
    // divided by the star arm opposite to it.
    const double products = l_a * l_b + l_a * l_tail + l_b * l_tail;

    DeltaNetwork delta;
    delta.inverse_1 = l_b / products;
    delta.inverse_2 = l_a / products;
    delta.inverse_3 = l_tail / products;
    delta.inductance_1 = products / l_b;
    delta.inductance_2 = products / l_a;
    delta.inductance_3 =
        l_tail > 0.0 ? products / l_tail : std::numeric_limits<double>::infinity();
    return delta;
}

TwoNodeMatrices build_matrices(const CircuitDesign& design, const MatrixOptions& options) {
    design.validate();
    const double gamma = options.gamma;
    require(std::isfinite(gamma) && gamma >= kGammaMin * (1.0 - 1e-12) &&
                gamma <= kGammaMax * (1.0 + 1e-12),
            "gamma must lie in [(2/pi)^2, 1]");

    const double feed_scale = options.discount_feedline ? gamma : 1.0;
    double c_a = gamma * design.c_a;
    double c_b = gamma * design.c_b;
    if (options.include_feedline) {
        c_a += feed_scale * design.c_ca;
        c_b += feed_scale * design.c_cb;
    }
    const double c_x = gamma * design.c_x;

    TwoNodeMatrices mats;
    mats.capacitance << c_a + c_x, -c_x, -c_x, c_b + c_x;

    const DeltaNetwork delta =
        ydelta_transform(design.inductance, design.inductance, design.tail_inductance);
    mats.inverse_inductance << delta.inverse_1 + delta.inverse_3, -delta.inverse_3,
        -delta.inverse_3, delta.inverse_2 + delta.inverse_3;
    return mats;
}

TwoNodeMatrices build_matrices(const CircuitDesign& design, bool include_feedline, double gamma) {
    MatrixOptions options;
    options.include_feedline = include_feedline;
    options.gamma = gamma;
    return build_matrices(design, options);
}

double differential_inductance(const Eigen::Matrix2d& inverse_inductance) {
    const Eigen::Vector2d d(std::numbers::sqrt2 / 2.0, -std::numbers::sqrt2 / 2.0);
    return 1.0 / d.dot(inverse_inductance * d);
}

ModeLabel classify_mode(const Eigen::VectorXd& eigenvector) {
    require(eigenvector.size() >= 2, "eigenvector needs at least the two circuit entries");
    const double total = eigenvector.squaredNorm();
    require(std::isfinite(total) && total > 0.0, "cannot classify a zero eigenvector");

    const double qa = eigenvector[0];
    const double qb = eigenvector[1];
    if (eigenvector.size() > 2 && (qa * qa + qb * qb) < 0.5 * total) {
        return ModeLabel::electron_like;
    }
    const double common = std::abs(qa + qb);
    const double differential = std::abs(qa - qb);
    return common >= differential ? ModeLabel::common : ModeLabel::differential;
}

std::vector<Mode> eigenmodes(const TwoNodeMatrices& matrices) {
    const Eigen::Matrix2d& c = matrices.capacitance;
    Eigen::LLT<Eigen::Matrix2d> llt(c);
    require(llt.info() == Eigen::Success && (c - c.transpose()).norm() <= 1e-12 * c.norm(),
            "capacitance matrix must be symmetric positive definite");

    const Eigen::Matrix2d inverse_c = llt.solve(Eigen::Matrix2d::Identity());
    auto raw = detail::solve_normal_modes(matrices.inverse_inductance, inverse_c);

    const double scale = std::max(std::abs(raw.front().omega_sq), std::abs(raw.back().omega_sq));
    for (auto& mode : raw) {
        if (mode.omega_sq < -1e-9 * scale) {
            throw ComputationError(ErrorKind::unstable,
                                   "circuit has a negative squared eigenfrequency");
        }
        mode.omega_sq = std::max(mode.omega_sq, 0.0);
    }

    // Degenerate pair: any basis of the eigenspace is valid, use the symmetric one.
    if (raw[1].omega_sq - raw[0].omega_sq <= 1e-12 * raw[1].omega_sq) {
        const double h = std::numbers::sqrt2 / 2.0;
        raw[0].vector = Eigen::Vector2d(h, h);
        raw[1].vector = Eigen::Vector2d(h, -h);
    }

    const double l_diff = differential_inductance(matrices.inverse_inductance);
    std::vector<Mode> modes;
    modes.reserve(raw.size());
    for (auto& r : raw) {
        Mode mode;
        const double omega = std::sqrt(r.omega_sq);
        mode.frequency = omega / kTwoPi;
        mode.eigenvector = std::move(r.vector);
        mode.label = classify_mode(mode.eigenvector);
        if (mode.label == ModeLabel::differential) {
            mode.impedance = l_diff * omega;
        }
        modes.push_back(std::move(mode));
    }
    return modes;
}

CircuitModes split_modes(const std::vector<Mode>& modes) {
    require(modes.size() >= 2, "need at least two modes");
    const auto projection = [](const Mode& m, double sign) {
        return std::abs(m.eigenvector[0] + sign * m.eigenvector[1]);
    };

    std::size_t diff = 0;
    for (std::size_t k = 1; k < modes.size(); ++k) {
        if (projection(modes[k], -1.0) > projection(modes[diff], -1.0)) {
            diff = k;
        }
    }
    std::size_t common = diff == 0 ? 1 : 0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (k != diff && projection(modes[k], 1.0) > projection(modes[common], 1.0)) {
            common = k;
        }
    }
    return {modes[common], modes[diff]};
}

ModePair symmetric_frequencies(double inductance, double capacitance, double tail_inductance,
                               double cross_capacitance) {
    require(positive(inductance) && positive(capacitance), "L and C must be positive");
    require(nonnegative(tail_inductance) && nonnegative(cross_capacitance),
            "L_t and C_x must be non-negative");
    ModePair pair;
    pair.common = 1.0 / (kTwoPi * std::sqrt((inductance + 2.0 * tail_inductance) * capacitance));
    pair.differential =
        1.0 / (kTwoPi * std::sqrt(inductance * (capacitance + 2.0 * cross_capacitance)));
    return pair;
}

namespace {

// Mean of the (optionally feedline-folded) gamma-discounted ground capacitances.
double mean_ground_capacitance(const CircuitDesign& design, double gamma, bool include_feedline) {
    double sum = design.c_a + design.c_b;
    if (include_feedline) {
        sum += design.c_ca + design.c_cb;
    }
    return 0.5 * gamma * sum;
}

}  // namespace

Splitting mode_splitting(const CircuitDesign& design, double gamma) {
    const auto modes = eigenmodes(build_matrices(design, true, gamma));
    const auto split = split_modes(modes);

    const double c = mean_ground_capacitance(design, gamma, true);
    const double c_x = gamma * design.c_x;
    const double l = design.inductance;

    Splitting s;
    s.exact = split.common.frequency - split.differential.frequency;
    s.approx = (c_x / c - design.tail_inductance / l) / (kTwoPi * std::sqrt(l * c));
    return s;
}

Impedance differential_impedance(const CircuitDesign& design, double f_d, double gamma,
                                 bool include_feedline) {
    require(positive(f_d), "differential frequency must be positive");
    design.validate();
    const double c = mean_ground_capacitance(design, gamma, include_feedline);
    Impedance z;
    z.dynamic = design.inductance * kTwoPi * f_d;
    z.closed_form = std::sqrt(design.inductance / (c + 2.0 * gamma * design.c_x));
    return z;
}

double common_impedance(const CircuitDesign& design, double f_c) {
    require(positive(f_c), "common frequency must be positive");
    return (design.inductance + 2.0 * design.tail_inductance) * kTwoPi * f_c;
}

}  // namespace scr
