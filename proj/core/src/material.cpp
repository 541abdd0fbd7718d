#include "scr/material.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "scr/constants.hpp"
#include "scr/errors.hpp"

namespace scr {

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double sheet_inductance(double sheet_resistance, double critical_temperature) {
    require(positive(sheet_resistance), "sheet resistance must be positive");
    require(positive(critical_temperature), "critical temperature must be positive");
    return kCodata2018.hbar * sheet_resistance /
           (kBcsGapRatio * std::numbers::pi * kCodata2018.boltzmann * critical_temperature);
}

double FilmProperties::sheet_inductance() const {
    return scr::sheet_inductance(sheet_resistance, critical_temperature);
}

double wire_inductance(double sheet_inductance, double length, double width) {
    require(positive(sheet_inductance), "sheet inductance must be positive");
    require(positive(length) && positive(width), "wire length and width must be positive");
    return sheet_inductance * length / width;
}

ScalingPrediction scaling_predict(const ScalingBase& base, const Geometry& target) {
    require(positive(base.geometry.length) && positive(base.geometry.width),
            "base geometry must be positive");
    require(positive(target.length) && positive(target.width), "target geometry must be positive");
    require(positive(base.frequency) && positive(base.impedance),
            "base frequency and impedance must be positive");

    const double rl = target.length / base.geometry.length;
    const double rw = target.width / base.geometry.width;

    ScalingPrediction p;
    p.frequency_ratio = std::pow(rw / (rl * rl * rl), 0.25);
    p.impedance_ratio = std::pow(rl / (rw * rw * rw), 0.25);
    p.impedance_ratio_product = rl / rw * p.frequency_ratio;
    p.frequency = base.frequency * p.frequency_ratio;
    p.impedance = base.impedance * p.impedance_ratio;
    return p;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    require(points.size() >= 3, "power-law fit needs at least three points");
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto [x, y] = points[static_cast<std::size_t>(i)];
        require(positive(x) && positive(y), "power-law data must be strictly positive");
        a(i, 0) = 1.0;
        a(i, 1) = std::log(x);
        b[i] = std::log(y);
    }
    require((a.col(1).array() - a(0, 1)).abs().maxCoeff() > 0.0,
            "power-law fit needs at least two distinct x values");

    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
    PowerLawFit fit;
    fit.exponent = coef[1];
    fit.prefactor = std::exp(coef[0]);
    fit.residual_rms = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(n));
    return fit;
}

}  // namespace scr
