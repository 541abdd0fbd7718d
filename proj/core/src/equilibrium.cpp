// Equilibrium arrangement of electrons in the dot.
//
// Works in reduced units: lengths in l0 = (K / k_min)^(1/3) and energies in
// K / l0, where K = e^2 / 4 pi eps0 and k_min is the softest curvature of the
// confinement energy. The reduced energy is
//     E(s) = 1/2 sum_i s_i^T H s_i + sum_{i<j} 1 / |s_i - s_j|
// with H the confinement Hessian divided by k_min.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "scr/electrons.hpp"
#include "scr/errors.hpp"

namespace scr {

namespace {

constexpr double kCubeRootTwo = 1.2599210498948731648;  // reduced pair separation
constexpr double kGradientTolerance = 1e-9;             // relative to the force scale
constexpr int kMaxNewtonIterations = 400;

struct Reduced {
    int dims = 1;
    std::size_t n = 0;
    Eigen::MatrixXd hessian;  // dims x dims, smallest eigenvalue 1
};

double energy(const Reduced& sys, const Eigen::VectorXd& s) {
    const int d = sys.dims;
    double e = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) {
        const auto si = s.segment(static_cast<Eigen::Index>(i) * d, d);
        e += 0.5 * si.dot(sys.hessian * si);
        for (std::size_t j = i + 1; j < sys.n; ++j) {
            const auto sj = s.segment(static_cast<Eigen::Index>(j) * d, d);
            const double r = (si - sj).norm();
            if (r <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            e += 1.0 / r;
        }
    }
    return e;
}

Eigen::VectorXd gradient(const Reduced& sys, const Eigen::VectorXd& s) {
    const int d = sys.dims;
    Eigen::VectorXd g(s.size());
    for (std::size_t i = 0; i < sys.n; ++i) {
        const Eigen::Index oi = static_cast<Eigen::Index>(i) * d;
        Eigen::VectorXd gi = sys.hessian * s.segment(oi, d);
        for (std::size_t j = 0; j < sys.n; ++j) {
            if (j == i) {
                continue;
            }
            const Eigen::VectorXd rho = s.segment(oi, d) - s.segment(static_cast<Eigen::Index>(j) * d, d);
            const double r = rho.norm();
            gi -= rho / (r * r * r);
        }
        g.segment(oi, d) = gi;
    }
    return g;
}

Eigen::MatrixXd hessian(const Reduced& sys, const Eigen::VectorXd& s) {
    const int d = sys.dims;
    const Eigen::Index size = s.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
    for (std::size_t i = 0; i < sys.n; ++i) {
        const Eigen::Index oi = static_cast<Eigen::Index>(i) * d;
        h.block(oi, oi, d, d) += sys.hessian;
        for (std::size_t j = i + 1; j < sys.n; ++j) {
            const Eigen::Index oj = static_cast<Eigen::Index>(j) * d;
            const Eigen::VectorXd rho = s.segment(oi, d) - s.segment(oj, d);
            const double r = rho.norm();
            const double r3 = r * r * r;
            const Eigen::MatrixXd t =
                3.0 * rho * rho.transpose() / (r3 * r * r) - Eigen::MatrixXd::Identity(d, d) / r3;
            h.block(oi, oi, d, d) += t;
            h.block(oj, oj, d, d) += t;
            h.block(oi, oj, d, d) -= t;
            h.block(oj, oi, d, d) -= t;
        }
    }
    return h;
}

struct Candidate {
    Eigen::VectorXd s;
    double energy = 0.0;
    bool minimum = false;
};

// Newton iteration on |H| (eigenvalues replaced by their magnitudes), which
// moves away from saddles, with Armijo backtracking on the energy.
std::optional<Candidate> descend(const Reduced& sys, Eigen::VectorXd s) {
    const double tolerance = kGradientTolerance * kCubeRootTwo;
    const double max_step = 0.5 * kCubeRootTwo;
    double e = energy(sys, s);
    if (!std::isfinite(e)) {
        return std::nullopt;
    }
    for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
        const Eigen::VectorXd g = gradient(sys, s);
        if (g.cwiseAbs().maxCoeff() < tolerance) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(sys, s));
            return Candidate{s, e, es.eigenvalues().minCoeff() > -1e-9};
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(sys, s));
        const Eigen::VectorXd lambda =
            es.eigenvalues().cwiseAbs().cwiseMax(1e-8 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()));
        Eigen::VectorXd step =
            -es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(lambda);
        if (step.norm() > max_step) {
            step *= max_step / step.norm();
        }

        const double slope = g.dot(step);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            const Eigen::VectorXd trial = s + t * step;
            const double et = energy(sys, trial);
            if (std::isfinite(et) && et <= e + 1e-4 * t * slope) {
                s = trial;
                e = et;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Roundoff floor: accept the point if the gradient is already tiny.
            if (g.cwiseAbs().maxCoeff() < 1e3 * tolerance) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> final_es(hessian(sys, s));
                return Candidate{s, e, final_es.eigenvalues().minCoeff() > -1e-9};
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::vector<Eigen::VectorXd> seeds(const Reduced& sys) {
    const std::size_t n = sys.n;
    const int d = sys.dims;
    const double spacing = kCubeRootTwo;
    std::vector<Eigen::VectorXd> out;

    Eigen::Vector2d weak(1.0, 0.0);
    Eigen::Vector2d strong(0.0, 1.0);
    if (d == 2) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.hessian);
        weak = es.eigenvectors().col(0);
        strong = es.eigenvectors().col(1);
    }

    // Chain along the weak axis, slightly zig-zagged in 2D so it can buckle.
    for (double stretch : {1.0, 0.5, 2.0}) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * d);
        for (std::size_t i = 0; i < n; ++i) {
            const double along = stretch * spacing * (static_cast<double>(i) - 0.5 * (n - 1.0));
            if (d == 1) {
                s[static_cast<Eigen::Index>(i)] = along;
            } else {
                const double across = (i % 2 == 0 ? 1.0 : -1.0) * 0.05 * spacing;
                s.segment<2>(static_cast<Eigen::Index>(i) * 2) = along * weak + across * strong;
            }
        }
        out.push_back(std::move(s));
    }
    if (d == 1) {
        return out;
    }

    // Rings, with and without a central electron.
    const auto ring = [&](std::size_t on_ring, bool centre) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * 2);
        const double radius = std::max(spacing * on_ring / (2.0 * std::numbers::pi), 0.5 * spacing);
        std::size_t idx = 0;
        if (centre) {
            s.segment<2>(0) = Eigen::Vector2d(0.01 * spacing, -0.01 * spacing);
            idx = 1;
        }
        for (std::size_t k = 0; k < on_ring; ++k, ++idx) {
            const double phi = 2.0 * std::numbers::pi * k / on_ring + 0.1;
            s.segment<2>(static_cast<Eigen::Index>(idx) * 2) =
                radius * (std::cos(phi) * weak + std::sin(phi) * strong);
        }
        return s;
    };
    out.push_back(ring(n, false));
    if (n >= 4) {
        out.push_back(ring(n - 1, true));
    }
    return out;
}

}  // namespace

DotPotential DotPotential::harmonic(double omega_dot) {
    DotPotential p;
    p.kind = Kind::harmonic_1d;
    p.omega_dot = omega_dot;
    p.validate();
    return p;
}

DotPotential DotPotential::quadratic(double v_xx, double v_yy, double v_xy) {
    DotPotential p;
    p.kind = Kind::quadratic_2d;
    p.v_xx = v_xx;
    p.v_yy = v_yy;
    p.v_xy = v_xy;
    p.validate();
    return p;
}

Eigen::Matrix2d DotPotential::energy_hessian() const {
    const double e = kCodata2018.elementary_charge;
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    if (kind == Kind::harmonic_1d) {
        h(0, 0) = kCodata2018.electron_mass * omega_dot * omega_dot;
    } else {
        h << -e * v_xx, -e * v_xy, -e * v_xy, -e * v_yy;
    }
    return h;
}

void DotPotential::validate() const {
    if (kind == Kind::harmonic_1d) {
        require(std::isfinite(omega_dot) && omega_dot > 0.0, "dot curvature omega_dot must be positive");
        return;
    }
    const Eigen::Matrix2d h = energy_hessian();
    require(h.allFinite(), "dot curvature coefficients must be finite");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    require(es.eigenvalues().minCoeff() > 0.0,
            "dot potential is not confining (Hessian of -e V_dc must be positive definite)");
}

double pair_separation(double stiffness) {
    require(stiffness > 0.0, "stiffness must be positive");
    return std::cbrt(2.0 * kCodata2018.coulomb_constant() / stiffness);
}

namespace {

double softest_curvature(const DotPotential& potential) {
    const Eigen::Matrix2d h = potential.energy_hessian();
    if (potential.dims() == 1) {
        return h(0, 0);
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues().minCoeff();
}

}  // namespace

ElectronConfiguration equilibrium_positions(std::size_t n, const DotPotential& potential) {
    require(n >= 1, "need at least one electron");
    potential.validate();

    ElectronConfiguration config;
    config.dims = potential.dims();
    if (n == 1) {
        config.positions.assign(1, Eigen::Vector2d::Zero());
        return config;
    }

    const double k_min = softest_curvature(potential);
    if (n == 2 && potential.kind == DotPotential::Kind::harmonic_1d) {
        const double d = pair_separation(k_min);
        config.positions = {Eigen::Vector2d(-0.5 * d, 0.0), Eigen::Vector2d(0.5 * d, 0.0)};
        return config;
    }

    Reduced sys;
    sys.dims = config.dims;
    sys.n = n;
    sys.hessian = potential.energy_hessian().topLeftCorner(sys.dims, sys.dims) / k_min;

    std::optional<Candidate> best;
    for (const auto& seed : seeds(sys)) {
        auto found = descend(sys, seed);
        if (!found) {
            continue;
        }
        const bool better = !best || (found->minimum && !best->minimum) ||
                            (found->minimum == best->minimum && found->energy < best->energy - 1e-12);
        if (better) {
            best = std::move(found);
        }
    }
    if (!best) {
        throw ComputationError(ErrorKind::convergence,
                               "electron equilibrium search did not converge from any seed");
    }

    const double length_unit = std::cbrt(kCodata2018.coulomb_constant() / k_min);
    config.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Vector2d p = Eigen::Vector2d::Zero();
        p.head(sys.dims) = best->s.segment(static_cast<Eigen::Index>(i) * sys.dims, sys.dims);
        config.positions[i] = p * length_unit;
    }
    std::sort(config.positions.begin(), config.positions.end(),
              [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                  return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
              });
    return config;
}

double equilibrium_residual(const ElectronConfiguration& config, const DotPotential& potential) {
    potential.validate();
    const double k_min = softest_curvature(potential);
    const double kc = kCodata2018.coulomb_constant();
    const Eigen::Matrix2d h = potential.energy_hessian();
    const int d = config.dims;

    double worst = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        Eigen::Vector2d force = h * config.positions[i];
        for (std::size_t j = 0; j < config.size(); ++j) {
            if (j == i) {
                continue;
            }
            const Eigen::Vector2d rho = config.positions[i] - config.positions[j];
            const double r = rho.norm();
            force -= kc * rho / (r * r * r);
        }
        worst = std::max(worst, force.head(d).cwiseAbs().maxCoeff());
    }
    return worst / (k_min * pair_separation(k_min));
}

}  // namespace scr
