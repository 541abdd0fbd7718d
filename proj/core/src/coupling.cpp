#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "normal_modes.hpp"
#include "parallel.hpp"
#include "scr/electrons.hpp"
#include "scr/errors.hpp"

namespace scr {

namespace {

Eigen::Index electron_index(std::size_t electron, int axis, int dims) {
    return 2 + static_cast<Eigen::Index>(electron) * dims + axis;
}

Eigen::Matrix2d inverse_capacitance(const TwoNodeMatrices& circuit) {
    Eigen::LLT<Eigen::Matrix2d> llt(circuit.capacitance);
    require(llt.info() == Eigen::Success, "capacitance matrix must be positive definite");
    return llt.solve(Eigen::Matrix2d::Identity());
}

MatrixOptions matrix_options(double gamma, const CouplingOptions& options) {
    MatrixOptions m;
    m.gamma = gamma;
    m.include_feedline = options.include_feedline;
    return m;
}

}  // namespace

LeverArms LeverArms::antisymmetric(std::size_t n, double field_x) {
    require(std::isfinite(field_x), "field must be finite");
    LeverArms arms;
    arms.electrons.assign(n, PlateArms{field_x, 0.0, -field_x, 0.0});
    return arms;
}

CoulombCouplings coulomb_coefficients(const ElectronConfiguration& config) {
    const std::size_t n = config.size();
    require(n >= 2, "Coulomb couplings need at least two electrons");
    const double kc = kCodata2018.coulomb_constant();

    CoulombCouplings c;
    const auto size = static_cast<Eigen::Index>(n);
    c.k_plus = Eigen::MatrixXd::Zero(size, size);
    c.k_minus = Eigen::MatrixXd::Zero(size, size);
    c.l = Eigen::MatrixXd::Zero(size, size);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Eigen::Vector2d rho = config.positions[i] - config.positions[j];
            const double r2 = rho.squaredNorm();
            if (!(r2 > 0.0)) {
                std::ostringstream msg;
                msg << "electrons " << i << " and " << j << " coincide";
                throw ComputationError(ErrorKind::singularity, msg.str());
            }
            const double r3 = r2 * std::sqrt(r2);
            const double cos2 = (rho.x() * rho.x() - rho.y() * rho.y()) / r2;
            const double sin2 = 2.0 * rho.x() * rho.y() / r2;
            const double scale = 0.25 * kc / r3;

            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            c.k_plus(a, b) = c.k_plus(b, a) = scale * (1.0 + 3.0 * cos2);
            c.k_minus(a, b) = c.k_minus(b, a) = scale * (1.0 - 3.0 * cos2);
            c.l(a, b) = c.l(b, a) = scale * 3.0 * sin2;
        }
    }
    return c;
}

std::vector<Beta> beta_coefficients(const TwoNodeMatrices& matrices, const LeverArms& arms) {
    const Eigen::Matrix2d inv = inverse_capacitance(matrices);
    std::vector<Beta> out;
    out.reserve(arms.size());
    for (const auto& arm : arms.electrons) {
        require(std::isfinite(arm.da_dx) && std::isfinite(arm.da_dy) && std::isfinite(arm.db_dx) &&
                    std::isfinite(arm.db_dy),
                "lever-arm gradients must be finite");
        const Eigen::Vector2d bx = inv * Eigen::Vector2d(arm.da_dx, arm.db_dx);
        const Eigen::Vector2d by = inv * Eigen::Vector2d(arm.da_dy, arm.db_dy);
        out.push_back(Beta{bx[0], bx[1], by[0], by[1]});
    }
    return out;
}

CoupledSystemMatrices coupled_matrices(const TwoNodeMatrices& circuit,
                                       const DotPotential& potential,
                                       const ElectronConfiguration& config, const LeverArms& arms,
                                       CoulombStiffness stiffness) {
    potential.validate();
    const int d = potential.dims();
    const std::size_t n = config.size();
    require(n >= 1, "need at least one electron");
    require(config.dims == d, "configuration and potential dimensions differ");
    if (arms.size() != n) {
        std::ostringstream msg;
        msg << "lever arms given for " << arms.size() << " electrons, configuration has " << n;
        throw InvalidParameter(msg.str());
    }

    const double e = kCodata2018.elementary_charge;
    const double m = kCodata2018.electron_mass;
    const auto size = static_cast<Eigen::Index>(2 + d * n);

    CoupledSystemMatrices out;
    out.dims = d;
    out.electrons = n;
    out.inverse_inductance = Eigen::MatrixXd::Zero(size, size);
    out.inverse_inductance.topLeftCorner<2, 2>() = circuit.inverse_inductance;
    out.inverse_inductance.bottomRightCorner(size - 2, size - 2).diagonal().setConstant(1.0 / m);

    Eigen::MatrixXd& k = out.inverse_capacitance;
    k = Eigen::MatrixXd::Zero(size, size);
    k.topLeftCorner<2, 2>() = inverse_capacitance(circuit);

    const auto betas = beta_coefficients(circuit, arms);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index ix = electron_index(i, 0, d);
        k(0, ix) = k(ix, 0) = -e * betas[i].x_a;
        k(1, ix) = k(ix, 1) = -e * betas[i].x_b;
        if (d == 2) {
            const Eigen::Index iy = electron_index(i, 1, d);
            k(0, iy) = k(iy, 0) = -e * betas[i].y_a;
            k(1, iy) = k(iy, 1) = -e * betas[i].y_b;
        }
    }

    const Eigen::Matrix2d confinement = potential.energy_hessian();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index oi = electron_index(i, 0, d);
        k.block(oi, oi, d, d) += confinement.topLeftCorner(d, d);
    }

    if (n >= 2) {
        const CoulombCouplings c = coulomb_coefficients(config);
        const double f = stiffness == CoulombStiffness::full_hessian ? 2.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) {
                    continue;
                }
                const auto a = static_cast<Eigen::Index>(i);
                const auto b = static_cast<Eigen::Index>(j);
                Eigen::Matrix2d pair;
                pair << c.k_plus(a, b), c.l(a, b), c.l(a, b), c.k_minus(a, b);
                pair *= f;
                const Eigen::Index oi = electron_index(i, 0, d);
                const Eigen::Index oj = electron_index(j, 0, d);
                k.block(oi, oi, d, d) += pair.topLeftCorner(d, d);
                k.block(oi, oj, d, d) -= pair.topLeftCorner(d, d);
            }
        }
    }
    return out;
}

CoupledSystemMatrices coupled_matrices(const CircuitDesign& design, double gamma,
                                       const DotPotential& potential,
                                       const ElectronConfiguration& config, const LeverArms& arms,
                                       const CouplingOptions& options) {
    return coupled_matrices(build_matrices(design, matrix_options(gamma, options)), potential,
                            config, arms, options.stiffness);
}

std::vector<Mode> coupled_eigenmodes(const CoupledSystemMatrices& matrices) {
    const Eigen::MatrixXd& k = matrices.inverse_capacitance;
    require(k.rows() == matrices.inverse_inductance.rows() && k.rows() >= 2,
            "coupled matrices have inconsistent sizes");
    require((k - k.transpose()).norm() <= 1e-12 * k.norm(),
            "inverse-capacitance matrix must be symmetric");

    const Eigen::MatrixXd reduced = detail::reduced_matrix(matrices.inverse_inductance, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
    if (solver.info() != Eigen::Success) {
        throw ComputationError(ErrorKind::convergence, "coupled eigen-solve did not converge");
    }
    const auto& values = solver.eigenvalues();
    if (values.minCoeff() <= 1e-12 * values.cwiseAbs().maxCoeff()) {
        throw ComputationError(ErrorKind::unstable,
                               "coupled system is unstable: electron-circuit coupling too strong "
                               "for the dot confinement");
    }

    const double l_diff = differential_inductance(matrices.inverse_inductance.topLeftCorner<2, 2>());
    std::vector<Mode> modes;
    modes.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index col = 0; col < values.size(); ++col) {
        Mode mode;
        const double omega = std::sqrt(values[col]);
        mode.frequency = omega / kTwoPi;
        mode.eigenvector = solver.eigenvectors().col(col).normalized();
        detail::canonical_sign(mode.eigenvector);
        mode.label = classify_mode(mode.eigenvector);
        if (mode.label == ModeLabel::differential) {
            mode.impedance = l_diff * omega;
        }
        modes.push_back(std::move(mode));
    }
    return modes;
}

double dispersive_shift(const CircuitDesign& design, double gamma, const DotPotential& potential,
                        std::size_t n, const LeverArms& arms, const CouplingOptions& options) {
    require(n >= 1, "need at least one electron");
    const TwoNodeMatrices circuit = build_matrices(design, matrix_options(gamma, options));
    const Mode bare = split_modes(eigenmodes(circuit)).differential;

    const ElectronConfiguration config = equilibrium_positions(n, potential);
    const CoupledSystemMatrices mats =
        coupled_matrices(circuit, potential, config, arms, options.stiffness);
    const auto modes = coupled_eigenmodes(mats);

    const auto size = mats.inverse_capacitance.rows();
    Eigen::VectorXd reference = Eigen::VectorXd::Zero(size);
    reference.head<2>() = bare.eigenvector;

    std::size_t best = 0;
    double best_overlap = -1.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const double o = std::pow(reference.dot(modes[k].eigenvector), 2);
        if (o > best_overlap) {
            best_overlap = o;
            best = k;
        }
    }
    if (best_overlap < 0.5) {
        throw ComputationError(ErrorKind::near_resonance,
                               "differential mode is strongly hybridised with the electrons; "
                               "detune the dot further from resonance");
    }

    // An electron mode inside the coupling gap of the differential mode makes
    // the tracked frequency ill-defined even if the overlap test passes.
    const Eigen::MatrixXd reduced = detail::reduced_matrix(mats.inverse_inductance,
                                                           mats.inverse_capacitance);
    const Eigen::Index ne = size - 2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> electrons(reduced.bottomRightCorner(ne, ne));
    const double omega_d = kTwoPi * bare.frequency;
    const Eigen::RowVectorXd couple =
        bare.eigenvector.transpose() * reduced.topRightCorner(2, ne);
    for (Eigen::Index k = 0; k < ne; ++k) {
        const double lambda = electrons.eigenvalues()[k];
        if (lambda <= 0.0) {
            continue;
        }
        const double f_k = std::sqrt(lambda) / kTwoPi;
        const double kappa = couple.dot(electrons.eigenvectors().col(k));
        const double gap = std::abs(kappa) / (kTwoPi * omega_d);
        if (gap > 0.0 && std::abs(f_k - bare.frequency) <= gap) {
            throw ComputationError(ErrorKind::near_resonance,
                                   "an electron mode lies within the coupling gap of the "
                                   "differential mode");
        }
    }
    return modes[best].frequency - bare.frequency;
}

namespace {

// Splitting of the two modes that hybridise at the crossing: everything
// except the mode with the largest common-mode projection.
double crossing_splitting(const TwoNodeMatrices& circuit, double omega_dot,
                          const LeverArms& arms, CoulombStiffness stiffness) {
    const DotPotential potential = DotPotential::harmonic(omega_dot);
    ElectronConfiguration config;
    config.dims = 1;
    config.positions.assign(1, Eigen::Vector2d::Zero());
    const auto modes =
        coupled_eigenmodes(coupled_matrices(circuit, potential, config, arms, stiffness));

    std::size_t common = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const double p = std::abs(modes[k].eigenvector[0] + modes[k].eigenvector[1]);
        if (p > best) {
            best = p;
            common = k;
        }
    }
    std::vector<double> rest;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (k != common) {
            rest.push_back(modes[k].frequency);
        }
    }
    return std::abs(rest[1] - rest[0]);
}

constexpr double kGoldenTolerance = 1e-6;  // relative, on omega_dot

void check_sweep(const DotSweep& sweep, std::size_t min_points) {
    require(std::isfinite(sweep.omega_min) && sweep.omega_min > 0.0 &&
                std::isfinite(sweep.omega_max) && sweep.omega_max > sweep.omega_min,
            "dot sweep needs 0 < omega_min < omega_max");
    require(sweep.points >= min_points, "dot sweep has too few points");
}

double sweep_point(const DotSweep& sweep, std::size_t i) {
    if (sweep.points == 1) {
        return sweep.omega_min;
    }
    const double t = static_cast<double>(i) / static_cast<double>(sweep.points - 1);
    return sweep.omega_min + t * (sweep.omega_max - sweep.omega_min);
}

}  // namespace

CrossingGap avoided_crossing_gap(const CircuitDesign& design, double gamma, const LeverArms& arms,
                                 const DotSweep& sweep, const CouplingOptions& options) {
    check_sweep(sweep, 3);
    require(arms.size() == 1, "avoided-crossing search uses a single electron");
    const TwoNodeMatrices circuit = build_matrices(design, matrix_options(gamma, options));
    const double omega_d = kTwoPi * split_modes(eigenmodes(circuit)).differential.frequency;
    require(sweep.omega_min < omega_d && omega_d < sweep.omega_max,
            "dot sweep does not bracket the differential-mode frequency");

    std::vector<double> gaps(sweep.points);
    detail::parallel_for(sweep.points, [&](std::size_t i) {
        gaps[i] = crossing_splitting(circuit, sweep_point(sweep, i), arms, options.stiffness);
    });

    const auto min_it = std::min_element(gaps.begin(), gaps.end());
    const auto imin = static_cast<std::size_t>(min_it - gaps.begin());
    require(imin != 0 && imin + 1 != sweep.points,
            "gap minimum lies at the sweep boundary; widen the sweep");

    const auto objective = [&](double omega) {
        return crossing_splitting(circuit, omega, arms, options.stiffness);
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = sweep_point(sweep, imin - 1);
    double b = sweep_point(sweep, imin + 1);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (b - a > kGoldenTolerance * 0.5 * (a + b)) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        }
    }

    CrossingGap result;
    if (f1 < f2) {
        result = {f1, x1};
    } else {
        result = {f2, x2};
    }
    if (*min_it < result.gap) {
        result = {*min_it, sweep_point(sweep, imin)};
    }
    return result;
}

double coupling_strength_analytic(double field_x, double f0, double z_res, double f_e,
                                  bool scr_factor) {
    require(field_x > 0.0 && f0 > 0.0 && z_res > 0.0 && f_e > 0.0,
            "coupling-strength inputs must be positive");
    const double e = kCodata2018.elementary_charge;
    const double m = kCodata2018.electron_mass;
    const double omega0 = kTwoPi * f0;
    const double omega_e = kTwoPi * f_e;
    double g = 0.5 * e * field_x * omega0 * std::sqrt(z_res / (m * omega_e));
    if (scr_factor) {
        g *= std::numbers::sqrt2;
    }
    return g / kTwoPi;
}

std::vector<SweepPoint> sweep_coupled_modes(const CircuitDesign& design, double gamma,
                                            std::size_t n, const LeverArms& arms,
                                            const DotSweep& sweep,
                                            const CouplingOptions& options) {
    check_sweep(sweep, 1);
    require(n >= 1, "need at least one electron");
    const TwoNodeMatrices circuit = build_matrices(design, matrix_options(gamma, options));

    std::vector<std::vector<Mode>> spectra(sweep.points);
    detail::parallel_for(sweep.points, [&](std::size_t i) {
        const DotPotential potential = DotPotential::harmonic(sweep_point(sweep, i));
        const ElectronConfiguration config = equilibrium_positions(n, potential);
        spectra[i] = coupled_eigenmodes(
            coupled_matrices(circuit, potential, config, arms, options.stiffness));
    });

    // order[k] is the index, at the current point, of the mode tracked in column k.
    const std::size_t count = spectra.front().size();
    std::vector<std::size_t> order(count);
    for (std::size_t k = 0; k < count; ++k) {
        order[k] = k;
    }

    std::vector<SweepPoint> out(sweep.points);
    for (std::size_t i = 0; i < sweep.points; ++i) {
        if (i > 0) {
            const auto& prev = spectra[i - 1];
            const auto& cur = spectra[i];
            // Greedy assignment by descending overlap.
            std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
            for (std::size_t k = 0; k < count; ++k) {
                for (std::size_t j = 0; j < count; ++j) {
                    pairs.emplace_back(std::abs(prev[order[k]].eigenvector.dot(cur[j].eigenvector)),
                                       k, j);
                }
            }
            std::sort(pairs.begin(), pairs.end(),
                      [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
            std::vector<bool> column_done(count, false);
            std::vector<bool> mode_used(count, false);
            std::vector<std::size_t> next(count);
            for (const auto& [overlap, k, j] : pairs) {
                if (!column_done[k] && !mode_used[j]) {
                    next[k] = j;
                    column_done[k] = true;
                    mode_used[j] = true;
                }
            }
            order = std::move(next);
        }
        SweepPoint& point = out[i];
        point.omega_dot = sweep_point(sweep, i);
        for (std::size_t k = 0; k < count; ++k) {
            point.frequencies.push_back(spectra[i][order[k]].frequency);
            point.labels.push_back(spectra[i][order[k]].label);
        }
    }
    return out;
}

}  // namespace scr
