// Acceptance checks. One PASS/FAIL line per criterion, each with its
// tolerance and wall-clock limit. Exit status is nonzero if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "scr/circuit.hpp"
#include "scr/constants.hpp"
#include "scr/electrons.hpp"
#include "scr/material.hpp"
#include "scr/resonance.hpp"
#include "scr/verify.hpp"

using namespace scr;
using namespace scr::units;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

constexpr double kGamma = 0.61;
constexpr double kField = 0.25 / um;

CircuitModes circuit_modes(const CircuitDesign& d, double gamma = kGamma) {
    return split_modes(eigenmodes(build_matrices(d, true, gamma)));
}

Outcome r1_anchor() {
    const double fd = circuit_modes(testing::meander_family()[0]).differential.frequency;
    const double err = rel(fd, 3.62 * GHz);
    return {err < 0.05, fmt("f_d = %.4f GHz, rel err %.3f (tol 0.05)", fd / GHz, err)};
}

Outcome closed_form() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> l(20, 200), c(5, 40), lt(0, 20), cx(0, 5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double L = l(rng) * nH, C = c(rng) * fF, Lt = lt(rng) * nH, Cx = cx(rng) * fF;
        const auto m = split_modes(eigenmodes(build_matrices(testing::symmetric(L, C, Lt, Cx), false, 1.0)));
        const double fc = 1.0 / (kTwoPi * std::sqrt((L + 2 * Lt) * C));
        const double fd = 1.0 / (kTwoPi * std::sqrt(L * (C + 2 * Cx)));
        worst = std::max({worst, rel(m.common.frequency, fc), rel(m.differential.frequency, fd)});
    }
    return {worst < 1e-10, fmt("max rel err %.2e over 100 circuits (tol 1e-10)", worst)};
}

Outcome tail_invariance() {
    auto d = testing::symmetric_r1();
    d.tail_inductance = 0.0;
    const double f0 = circuit_modes(d).differential.frequency;
    double worst = 0.0;
    for (int i = 1; i <= 40; ++i) {
        d.tail_inductance = 0.5 * i * nH;
        worst = std::max(worst, rel(circuit_modes(d).differential.frequency, f0));
    }
    return {worst < 1e-10, fmt("max rel change %.2e for L_t in 0..20 nH (tol 1e-10)", worst)};
}

Outcome impedance_band() {
    double lo = 1e300, hi = 0.0;
    for (const auto& d : testing::meander_family()) {
        const double z = *circuit_modes(d).differential.impedance;
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    return {lo >= 2300 && hi <= 3000, fmt("Z_dyn in [%.0f, %.0f] ohm (band 2300..3000)", lo, hi)};
}

Outcome scaling_exponents() {
    std::vector<std::pair<double, double>> f, z;
    for (const auto& d : testing::meander_family()) {
        const auto m = circuit_modes(d);
        f.emplace_back(d.length, m.differential.frequency);
        z.emplace_back(d.length, *m.differential.impedance);
    }
    const double pf = fit_power_law(f).exponent;
    const double pz = fit_power_law(z).exponent;
    return {std::abs(pf + 0.75) <= 0.05 && std::abs(pz - 0.25) <= 0.05,
            fmt("f exponent %.3f (-0.75 +- 0.05), Z exponent %.3f (0.25 +- 0.05)", pf, pz)};
}

Outcome impedance_boost() {
    const ScalingBase base{{1.08 * mm, 1.6 * um}, 3.62 * GHz, 2700.0};
    const auto p = scaling_predict(base, {0.54 * mm, 0.2 * um});
    const bool ok = std::abs(p.frequency_ratio - 1.0) < 1e-12 && std::abs(p.impedance_ratio - 4.0) < 1e-12 &&
                    std::abs(p.impedance_ratio_product - 4.0) < 1e-12;
    return {ok, fmt("f ratio %.12f, Z ratio %.12f (tol 1e-12)", p.frequency_ratio, p.impedance_ratio)};
}

Outcome sheet() {
    const double lsq = sheet_inductance(361.0, 2.80) / pH;
    return {std::abs(lsq - 178.0) <= 1.0, fmt("L_sq = %.2f pH/sq (178 +- 1)", lsq)};
}

Outcome dispersive_doubling() {
    const auto d = testing::symmetric_r1();
    const double fd = circuit_modes(d).differential.frequency;
    const DotSweep sweep{kTwoPi * 0.95 * fd, kTwoPi * 1.05 * fd, 41};
    const double gap = avoided_crossing_gap(d, kGamma, LeverArms::antisymmetric(1, kField), sweep).gap;
    double worst = 0.0;
    double worst_at = 0.0;
    for (double k : {10.0, -10.0, 30.0, 100.0}) {
        const double f_dot = fd + k * gap;
        const auto pot = DotPotential::harmonic(kTwoPi * f_dot);
        const double one = dispersive_shift(d, kGamma, pot, 1, LeverArms::antisymmetric(1, kField));
        const double two = dispersive_shift(d, kGamma, pot, 2, LeverArms::antisymmetric(2, kField));
        const double dev = std::abs(two / one - 2.0) / 2.0;
        if (dev > worst) {
            worst = dev;
            worst_at = k;
        }
    }
    return {worst <= 1e-6, fmt("max |shift2/(2 shift1) - 1| = %.2e at %+.0fx gap (gap %.1f MHz, tol 1e-6)",
                               worst, worst_at, gap / MHz)};
}

Outcome dispersive_magnitude() {
    const auto d = testing::symmetric_r1();
    const double fd = circuit_modes(d).differential.frequency;
    const auto pot = DotPotential::harmonic(kTwoPi * (fd + 5 * GHz));
    const double shift = dispersive_shift(d, kGamma, pot, 1, LeverArms::antisymmetric(1, kField));
    const double mhz = std::abs(shift) / MHz;
    return {mhz >= 0.02 && mhz <= 0.5, fmt("|shift| = %.4f MHz at +5 GHz detuning (band 0.02..0.5)", mhz)};
}

Outcome avoided_crossing() {
    const auto d = testing::symmetric_r1();
    const auto m = circuit_modes(d).differential;
    const DotSweep sweep{kTwoPi * 0.9 * m.frequency, kTwoPi * 1.1 * m.frequency, 41};
    const double gap = avoided_crossing_gap(d, kGamma, LeverArms::antisymmetric(1, kField), sweep).gap;
    const double g = coupling_strength_analytic(kField, m.frequency, *m.impedance, m.frequency, true);
    const double err = rel(gap, 2 * g);
    const bool ok = err <= 0.02 && g >= 35 * MHz && g <= 50 * MHz;
    return {ok, fmt("gap %.2f MHz vs 2g %.2f MHz (rel %.4f, tol 0.02); g/2pi %.2f MHz (band 35..50)",
                    gap / MHz, 2 * g / MHz, err, g / MHz)};
}

Outcome common_immunity() {
    double worst = 0.0;
    for (double gamma : {0.61, 1.0}) {
        const auto d = testing::symmetric_r1();
        const double fc = circuit_modes(d, gamma).common.frequency;
        for (std::size_t n : {1u, 2u}) {
            const DotSweep sweep{kTwoPi * 1 * GHz, kTwoPi * 10 * GHz, 181};
            const auto pts = sweep_coupled_modes(d, gamma, n, LeverArms::antisymmetric(n, kField), sweep);
            for (const auto& p : pts) {
                bool found = false;
                for (std::size_t k = 0; k < p.labels.size(); ++k) {
                    if (p.labels[k] == ModeLabel::common) {
                        worst = std::max(worst, rel(p.frequencies[k], fc));
                        found = true;
                    }
                }
                if (!found) {
                    return {false, "common mode lost during the sweep"};
                }
            }
        }
    }
    return {worst < 1e-10, fmt("max rel change %.2e over 1..10 GHz dot sweeps (tol 1e-10)", worst)};
}

Outcome boost_ratio() {
    const double f = 4 * GHz;
    const double r = coupling_strength_analytic(kField, f, 2500, f, true) /
                     coupling_strength_analytic(kField, f, 50, f, true);
    const double err = std::abs(r - std::sqrt(50.0));
    return {err <= 1e-10, fmt("ratio %.12f vs sqrt(50), abs err %.1e (tol 1e-10)", r, err)};
}

Outcome s21_round_trip() {
    const ResonanceParams truth{5.025 * GHz, 3.9e5, 1.0e5, 0.1};
    const double ql = truth.qi * truth.qc / (truth.qi + truth.qc);
    const double span = 10.0 * truth.f0 / ql;
    auto err = [&](const ResonanceParams& p) {
        return std::max({rel(p.f0, truth.f0), rel(p.qi, truth.qi), rel(p.qc, truth.qc), rel(p.phi, truth.phi)});
    };
    const double clean = err(fit_resonance(synth_trace(truth, span, 2001, 0.0, 1)).params);
    double worst = 0.0;
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        try {
            const double e = err(fit_resonance(synth_trace(truth, span, 2001, 0.01, seed)).params);
            worst = std::max(worst, e);
            failures += e > 0.02;
        } catch (const Error&) {
            ++failures;
        }
    }
    return {clean <= 1e-6 && failures == 0,
            fmt("noiseless %.1e (tol 1e-6); 1%% noise worst %.4f, %d/100 seeds outside 0.02", clean,
                worst, failures)};
}

Outcome qc_ordering() {
    int ok = 0;
    for (const auto& d : testing::meander_family()) {
        const auto m = circuit_modes(d);
        const auto qc = qc_from_circuit(common_impedance(d, m.common.frequency), 50.0, d.c_ca, d.c_cb,
                                        ModeLabel::common, m.common.frequency);
        const auto qd = qc_from_circuit(*m.differential.impedance, 50.0, d.c_ca, d.c_cb,
                                        ModeLabel::differential, m.differential.frequency);
        ok += qc && qd && *qd > *qc;
    }
    return {ok == 9, fmt("Qc(differential) > Qc(common) for %d/9 designs", ok)};
}

Outcome gamma_recovery() {
    double worst = 0.0;
    for (double gamma : {0.45, 0.61, 0.90}) {
        ReferenceMap refs;
        for (const auto& m : predict_family(testing::meander_family(), gamma)) {
            refs[{m.name, ModeLabel::common}] = m.common.frequency;
            refs[{m.name, ModeLabel::differential}] = m.differential.frequency;
        }
        worst = std::max(worst, std::abs(fit_gamma(testing::meander_family(), refs).gamma - gamma));
    }
    return {worst <= 1e-4, fmt("max |gamma error| %.1e (tol 1e-4)", worst)};
}

Outcome splitting_sign() {
    const auto rows = splitting_report(testing::meander_family(), kGamma);
    double largest = 0.0;
    for (const auto& r : rows) {
        largest = std::max(largest, std::abs(r.exact));
    }
    const bool ok = rows.front().exact > 0 && rows.back().exact < 0 && largest < 200 * MHz;
    return {ok, fmt("R1 %+.1f MHz, R9 %+.1f MHz, max |split| %.1f MHz (< 200)", rows.front().exact / MHz,
                    rows.back().exact / MHz, largest / MHz)};
}

Outcome coulomb_identity() {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> r(0.05, 5.0), th(-std::numbers::pi, std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double dist = r(rng) * um;
        const double a = th(rng);
        ElectronConfiguration c;
        c.dims = 2;
        const Eigen::Vector2d origin(r(rng) * um, r(rng) * um);
        c.positions = {origin, origin + dist * Eigen::Vector2d(std::cos(a), std::sin(a))};
        const auto k = coulomb_coefficients(c);
        const double lhs = std::pow(0.5 * (k.k_plus(0, 1) - k.k_minus(0, 1)), 2) + std::pow(k.l(0, 1), 2);
        const double rhs = std::pow(0.75 * kCodata2018.coulomb_constant() / std::pow(dist, 3), 2);
        worst = std::max(worst, rel(lhs, rhs));
    }
    return {worst <= 1e-10, fmt("max rel err %.1e over 1000 pairs (tol 1e-10)", worst)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "R1 anchor", 1, r1_anchor},
        {2, "closed-form symmetric modes", 1, closed_form},
        {3, "tail invariance", 1, tail_invariance},
        {4, "impedance band", 1, impedance_band},
        {5, "scaling exponents", 1, scaling_exponents},
        {6, "impedance boost identity", 1, impedance_boost},
        {7, "sheet inductance", 1, sheet},
        {8, "dispersive doubling", 5, dispersive_doubling},
        {9, "dispersive magnitude", 5, dispersive_magnitude},
        {10, "avoided crossing", 10, avoided_crossing},
        {11, "common-mode immunity", 5, common_immunity},
        {12, "coupling boost ratio", 1, boost_ratio},
        {13, "S21 round trip", 30, s21_round_trip},
        {14, "Qc ordering", 1, qc_ordering},
        {15, "gamma recovery", 5, gamma_recovery},
        {16, "splitting sign change", 1, splitting_sign},
        {17, "Coulomb identity", 1, coulomb_identity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed <= c.limit_s;
        const bool pass = out.pass && in_time;
        failed += !pass;
        std::printf("%s %2d %-28s %s [%.3f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), elapsed, c.limit_s, in_time ? "" : ", too slow");
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
