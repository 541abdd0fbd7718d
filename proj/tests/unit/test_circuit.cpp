#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "scr/circuit.hpp"
#include "scr/errors.hpp"

using namespace scr;
using namespace scr::units;
using scr::testing::symmetric;
using scr::testing::meander_family;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Admittance matrix of the star network (a, b to the centre node, centre to
// ground via the tail) with the centre node eliminated.
Eigen::Matrix2d star_inverse_inductance(double la, double lb, double lt) {
    const double ya = 1.0 / la;
    const double yb = 1.0 / lb;
    const double yt = 1.0 / lt;
    const double s = ya + yb + yt;
    Eigen::Matrix2d m;
    m << ya - ya * ya / s, -ya * yb / s, -ya * yb / s, yb - yb * yb / s;
    return m;
}

}  // namespace

TEST(YDelta, SymmetricR1Values) {
    const auto d = ydelta_transform(117.1 * nH, 117.1 * nH, 6.5 * nH);
    EXPECT_NEAR(d.inductance_1 / nH, 130.1, 1e-9);
    EXPECT_NEAR(d.inductance_2 / nH, 130.1, 1e-9);
    EXPECT_NEAR(d.inductance_3 / nH, 117.1 * 130.1 / 6.5, 1e-9);
    EXPECT_NEAR(d.inductance_3 / nH, 2343.8, 0.05);
}

TEST(YDelta, NoTailGivesZeroCouplingBranch) {
    const auto d = ydelta_transform(100 * nH, 100 * nH, 0.0);
    EXPECT_DOUBLE_EQ(d.inductance_1, 100 * nH);
    EXPECT_DOUBLE_EQ(d.inductance_2, 100 * nH);
    EXPECT_EQ(d.inverse_3, 0.0);
    EXPECT_TRUE(std::isinf(d.inductance_3));
}

TEST(YDelta, AsymmetricMatchesStarAdmittance) {
    const double la = 100 * nH, lb = 120 * nH, lt = 10 * nH;
    const auto d = ydelta_transform(la, lb, lt);
    const double omega = kTwoPi * 4 * GHz;
    // Delta network admittance at one frequency.
    Eigen::Matrix2cd delta;
    const std::complex<double> j(0.0, 1.0);
    const auto y = [&](double l) { return 1.0 / (j * omega * l); };
    delta << y(d.inductance_1) + y(d.inductance_3), -y(d.inductance_3), -y(d.inductance_3),
        y(d.inductance_2) + y(d.inductance_3);
    const Eigen::Matrix2cd star = star_inverse_inductance(la, lb, lt).cast<std::complex<double>>() /
                                  (j * omega);
    EXPECT_LT((delta - star).norm() / star.norm(), 1e-12);
}

TEST(YDelta, SchurComplementProperty) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(1.0, 200.0);
    for (int i = 0; i < 200; ++i) {
        const double la = u(rng) * nH, lb = u(rng) * nH, lt = 0.1 * u(rng) * nH;
        const auto d = ydelta_transform(la, lb, lt);
        Eigen::Matrix2d delta;
        delta << d.inverse_1 + d.inverse_3, -d.inverse_3, -d.inverse_3, d.inverse_2 + d.inverse_3;
        const Eigen::Matrix2d star = star_inverse_inductance(la, lb, lt);
        EXPECT_LT((delta - star).norm() / star.norm(), 1e-12);
    }
}

TEST(YDelta, RejectsNonPositiveArms) {
    EXPECT_THROW(ydelta_transform(0.0, 1e-9, 1e-9), InvalidParameter);
    EXPECT_THROW(ydelta_transform(1e-9, -1e-9, 1e-9), InvalidParameter);
    EXPECT_THROW(ydelta_transform(1e-9, 1e-9, -1e-9), InvalidParameter);
}

TEST(BuildMatrices, R1AtUnitGamma) {
    const auto m = build_matrices(meander_family()[0], true, 1.0);
    EXPECT_NEAR(m.capacitance(0, 0) / fF, 23.9, 1e-9);
    EXPECT_NEAR(m.capacitance(1, 1) / fF, 23.8, 1e-9);
    EXPECT_NEAR(m.capacitance(0, 1) / fF, -1.70, 1e-12);
    EXPECT_NEAR(m.capacitance(1, 0) / fF, -1.70, 1e-12);
}

TEST(BuildMatrices, GammaScalesEveryEntry) {
    const auto one = build_matrices(meander_family()[0], true, 1.0);
    const auto scaled = build_matrices(meander_family()[0], true, 0.61);
    EXPECT_LT((scaled.capacitance - 0.61 * one.capacitance).norm(), 1e-30);
    EXPECT_EQ(scaled.inverse_inductance, one.inverse_inductance);
}

TEST(BuildMatrices, FeedlineSwitches) {
    const auto d = meander_family()[0];
    const auto without = build_matrices(d, false, 1.0);
    EXPECT_NEAR(without.capacitance(0, 0) / fF, 23.3, 1e-9);
    MatrixOptions opt;
    opt.gamma = 0.5;
    opt.discount_feedline = false;
    const auto m = build_matrices(d, opt);
    EXPECT_NEAR(m.capacitance(0, 0) / fF, 0.5 * (21.6 + 1.7) + 0.6, 1e-9);
}

TEST(BuildMatrices, ZeroCrossCapacitanceDecouples) {
    auto d = meander_family()[0];
    d.c_x = 0.0;
    const auto m = build_matrices(d, true, 0.61);
    EXPECT_EQ(m.capacitance(0, 1), 0.0);
    EXPECT_EQ(m.capacitance(1, 0), 0.0);
}

TEST(BuildMatrices, GammaBounds) {
    const auto d = meander_family()[0];
    EXPECT_THROW(build_matrices(d, true, 0.40), InvalidParameter);
    EXPECT_THROW(build_matrices(d, true, 1.01), InvalidParameter);
    EXPECT_NO_THROW(build_matrices(d, true, kGammaMin));
    EXPECT_NO_THROW(build_matrices(d, true, 1.0));
}

TEST(Design, ValidationNamesField) {
    auto d = meander_family()[0];
    d.c_a = -1 * fF;
    try {
        d.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("c_a"), std::string::npos);
    }
    d = meander_family()[0];
    d.tail_inductance = -1.0;
    EXPECT_THROW(d.validate(), ValidationError);
}

TEST(Eigenmodes, RowOneDifferentialNearAnchor) {
    const auto modes = split_modes(eigenmodes(build_matrices(meander_family()[0], true, 0.61)));
    EXPECT_LT(rel(modes.differential.frequency, 3.62 * GHz), 0.05);
    EXPECT_NEAR(modes.differential.frequency / GHz, 3.7253, 1e-3);
    EXPECT_EQ(modes.differential.label, ModeLabel::differential);
    EXPECT_EQ(modes.common.label, ModeLabel::common);
}

TEST(Eigenmodes, DegenerateSymmetricCase) {
    const auto modes = eigenmodes(build_matrices(symmetric(100 * nH, 20 * fF, 0, 0), false, 1.0));
    const double f = 1.0 / (kTwoPi * std::sqrt(100 * nH * 20 * fF));
    EXPECT_NEAR(f / GHz, 3.559, 1e-3);
    EXPECT_LT(rel(modes[0].frequency, f), 1e-12);
    EXPECT_LT(rel(modes[1].frequency, f), 1e-12);
    EXPECT_EQ(modes[0].label, ModeLabel::common);
    EXPECT_EQ(modes[1].label, ModeLabel::differential);
}

TEST(Eigenmodes, SymmetricTailExample) {
    const auto d = symmetric(100 * nH, 20 * fF, 6.5 * nH, 1.7 * fF);
    const auto m = split_modes(eigenmodes(build_matrices(d, false, 1.0)));
    EXPECT_NEAR(m.common.frequency / GHz, 3.3478, 1e-4);
    EXPECT_NEAR(m.differential.frequency / GHz, 3.2902, 1e-4);
    const auto closed = symmetric_frequencies(100 * nH, 20 * fF, 6.5 * nH, 1.7 * fF);
    EXPECT_LT(rel(m.common.frequency, closed.common), 1e-10);
    EXPECT_LT(rel(m.differential.frequency, closed.differential), 1e-10);
}

TEST(Eigenmodes, SymmetricEigenvectors) {
    const auto d = symmetric(80 * nH, 15 * fF, 4 * nH, 1 * fF);
    const auto m = split_modes(eigenmodes(build_matrices(d, false, 1.0)));
    const double h = std::numbers::sqrt2 / 2.0;
    EXPECT_LT((m.common.eigenvector - Eigen::Vector2d(h, h)).norm(), 1e-10);
    EXPECT_LT((m.differential.eigenvector - Eigen::Vector2d(h, -h)).norm(), 1e-10);
}

TEST(Eigenmodes, SortedUnitNormSignConvention) {
    for (const auto& d : meander_family()) {
        const auto modes = eigenmodes(build_matrices(d, true, 0.61));
        ASSERT_EQ(modes.size(), 2u);
        EXPECT_LE(modes[0].frequency, modes[1].frequency);
        for (const auto& m : modes) {
            EXPECT_NEAR(m.eigenvector.norm(), 1.0, 1e-12);
            EXPECT_GT(m.eigenvector[0], 0.0);
            EXPECT_GT(m.frequency, 0.0);
        }
    }
}

TEST(Eigenmodes, CapacitanceScalingLaw) {
    const auto d = meander_family()[4];
    const auto base = eigenmodes(build_matrices(d, true, 1.0));
    for (double s : {0.5, 0.61, 0.8}) {
        const auto scaled = eigenmodes(build_matrices(d, true, s));
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_LT(rel(scaled[k].frequency, base[k].frequency / std::sqrt(s)), 1e-12);
        }
    }
}

TEST(Eigenmodes, TailInvarianceOfDifferentialMode) {
    const double reference =
        split_modes(eigenmodes(build_matrices(symmetric(110 * nH, 21 * fF, 0, 1.6 * fF), false, 1.0)))
            .differential.frequency;
    for (int i = 0; i <= 20; ++i) {
        const auto d = symmetric(110 * nH, 21 * fF, i * nH, 1.6 * fF);
        const double f = split_modes(eigenmodes(build_matrices(d, false, 1.0))).differential.frequency;
        EXPECT_LT(rel(f, reference), 1e-10);
    }
}

TEST(Eigenmodes, RejectsIndefiniteCapacitance) {
    TwoNodeMatrices m;
    m.capacitance << 1e-15, -2e-15, -2e-15, 1e-15;
    m.inverse_inductance = Eigen::Matrix2d::Identity() * 1e7;
    EXPECT_THROW(eigenmodes(m), InvalidParameter);
}

TEST(Classify, Definitions) {
    const double h = std::numbers::sqrt2 / 2.0;
    EXPECT_EQ(classify_mode(Eigen::Vector2d(h, h)), ModeLabel::common);
    EXPECT_EQ(classify_mode(Eigen::Vector2d(h, -h)), ModeLabel::differential);
    Eigen::VectorXd v(3);
    v << 0.1, -0.1, 0.99;
    EXPECT_EQ(classify_mode(v.normalized()), ModeLabel::electron_like);
    EXPECT_THROW(classify_mode(Eigen::Vector2d::Zero()), InvalidParameter);
    EXPECT_THROW(classify_mode(Eigen::VectorXd::Ones(1)), InvalidParameter);
}

TEST(ModeLabels, RoundTrip) {
    for (auto l : {ModeLabel::common, ModeLabel::differential, ModeLabel::electron_like}) {
        EXPECT_EQ(parse_mode_label(to_string(l)), l);
    }
    EXPECT_THROW(parse_mode_label("sideways"), ParseError);
}

TEST(Splitting, SignChangeAcrossFamily) {
    const auto rows = meander_family();
    const auto first = mode_splitting(rows.front(), 0.61);
    const auto last = mode_splitting(rows.back(), 0.61);
    EXPECT_GT(first.exact, 50e6);
    EXPECT_LT(first.exact, 100e6);
    EXPECT_LT(last.exact, 0.0);
    EXPECT_GT(first.approx, 0.0);
    EXPECT_LT(last.approx, 0.0);
}

TEST(Splitting, ApproximationCancels) {
    // C_x / C = L_t / L
    const auto d = symmetric(100 * nH, 20 * fF, 5 * nH, 1 * fF);
    const auto s = mode_splitting(d, 1.0);
    EXPECT_NEAR(s.approx, 0.0, 1e-6);
    EXPECT_LT(std::abs(s.exact), 5e6);
}

TEST(Impedance, Ranges) {
    for (const auto& d : meander_family()) {
        const auto m = split_modes(eigenmodes(build_matrices(d, true, 0.61)));
        const auto z = differential_impedance(d, m.differential.frequency, 0.61);
        EXPECT_GT(z.dynamic, 2.3e3);
        EXPECT_LT(z.dynamic, 3.0e3);
        ASSERT_TRUE(m.differential.impedance.has_value());
        EXPECT_LT(rel(*m.differential.impedance, z.dynamic), 1e-12);
    }
    const auto z = differential_impedance(meander_family()[0], 3.62 * GHz, 0.61);
    EXPECT_NEAR(z.dynamic, 2663.5, 1.0);
}

TEST(Impedance, SymmetricClosedFormAgrees) {
    const auto d = symmetric(100 * nH, 20 * fF, 6.5 * nH, 1.7 * fF);
    const auto f = symmetric_frequencies(100 * nH, 20 * fF, 6.5 * nH, 1.7 * fF);
    const auto z = differential_impedance(d, f.differential, 1.0, false);
    EXPECT_LT(rel(z.dynamic, z.closed_form), 1e-10);
    EXPECT_THROW(differential_impedance(d, 0.0, 1.0), InvalidParameter);
}

TEST(SymmetricFrequencies, DegenerateAndValidation) {
    const auto p = symmetric_frequencies(50 * nH, 10 * fF, 0, 0);
    EXPECT_DOUBLE_EQ(p.common, p.differential);
    EXPECT_THROW(symmetric_frequencies(0, 1, 0, 0), InvalidParameter);
    EXPECT_THROW(symmetric_frequencies(1, 1, -1, 0), InvalidParameter);
}
