#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "scr/errors.hpp"
#include "scr/verify.hpp"

using namespace scr;
using namespace scr::units;
using scr::testing::meander_family;

namespace {

ReferenceMap self_references(double gamma) {
    ReferenceMap refs;
    for (const auto& m : predict_family(meander_family(), gamma)) {
        refs[{m.name, ModeLabel::common}] = m.common.frequency;
        refs[{m.name, ModeLabel::differential}] = m.differential.frequency;
    }
    return refs;
}

}  // namespace

TEST(Family, PredictsBothModes) {
    const auto family = predict_family(meander_family(), 0.61);
    ASSERT_EQ(family.size(), 9u);
    EXPECT_EQ(family[0].name, "R1");
    EXPECT_NEAR(family[0].differential.frequency / GHz, 3.62, 0.05 * 3.62);
    for (const auto& m : family) {
        EXPECT_EQ(m.common.label, ModeLabel::common);
        EXPECT_EQ(m.differential.label, ModeLabel::differential);
        EXPECT_TRUE(m.differential.impedance);
    }
    // Shorter meanders resonate higher.
    for (std::size_t i = 1; i < family.size(); ++i) {
        EXPECT_GT(family[i].differential.frequency, family[i - 1].differential.frequency);
    }
}

TEST(Family, SplittingSignChange) {
    const auto rows = splitting_report(meander_family(), 0.61);
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_GT(rows.front().exact, 0.0);
    EXPECT_LT(rows.back().exact, 0.0);
    for (const auto& r : rows) {
        EXPECT_LT(std::abs(r.exact), 200 * MHz) << r.name;
    }
}

TEST(Evaluate, FillsReferenceColumns) {
    ReferenceMap refs;
    refs[{"R1", ModeLabel::differential}] = 3.62 * GHz;
    const auto report = evaluate_family(meander_family(), 0.61, refs);
    EXPECT_EQ(report.rows.size(), 18u);
    int with_ref = 0;
    for (const auto& r : report.rows) {
        if (r.reference) {
            ++with_ref;
            EXPECT_EQ(r.name, "R1");
            EXPECT_NEAR(*r.relative_error, r.predicted / (3.62 * GHz) - 1.0, 1e-15);
        } else {
            EXPECT_FALSE(r.relative_error);
        }
        EXPECT_TRUE(r.qc);
    }
    EXPECT_EQ(with_ref, 1);
    EXPECT_NEAR(report.max_abs_error, std::abs(report.rows[1].predicted / (3.62 * GHz) - 1.0), 0.1);
    EXPECT_EQ(report.splittings.size(), 9u);
}

TEST(Evaluate, UnknownReferenceRejected) {
    ReferenceMap refs;
    refs[{"R10", ModeLabel::common}] = 4 * GHz;
    EXPECT_THROW(evaluate_family(meander_family(), 0.61, refs), InvalidParameter);
    ReferenceMap electron;
    electron[{"R1", ModeLabel::electron_like}] = 4 * GHz;
    EXPECT_THROW(evaluate_family(meander_family(), 0.61, electron), InvalidParameter);
}

TEST(GammaFit, RecoversSelfGenerated) {
    for (double gamma : {0.45, 0.61, 0.90}) {
        const auto report = fit_gamma(meander_family(), self_references(gamma));
        EXPECT_NEAR(report.gamma, gamma, 1e-4);
        EXPECT_LT(report.max_abs_error, 1e-6);
        EXPECT_FALSE(report.multiple_minima);
    }
}

TEST(GammaFit, EdgeOfRange) {
    const auto report = fit_gamma(meander_family(), self_references(1.0));
    EXPECT_NEAR(report.gamma, 1.0, 1e-4);
    const auto low = fit_gamma(meander_family(), self_references(kGammaMin));
    EXPECT_NEAR(low.gamma, kGammaMin, 1e-4);
}

TEST(GammaFit, NeedsTwoReferences) {
    ReferenceMap refs;
    refs[{"R1", ModeLabel::differential}] = 3.62 * GHz;
    EXPECT_THROW(fit_gamma(meander_family(), refs), InvalidParameter);
}

TEST(GammaFit, ObjectiveIsMinimal) {
    auto refs = self_references(0.7);
    for (auto& [key, f] : refs) {
        f *= key.second == ModeLabel::common ? 1.01 : 0.995;
    }
    const auto best = fit_gamma(meander_family(), refs);
    for (double dg : {-1e-3, 1e-3}) {
        const auto nearby = evaluate_family(meander_family(), best.gamma + dg, refs);
        EXPECT_GE(nearby.objective, best.objective);
    }
}
