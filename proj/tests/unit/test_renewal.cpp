#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/renewal.hpp"

namespace flagwalk {
namespace {

TEST(Renewal, TestFunctions) {
    const TestFunction bump = TestFunction::bump();
    // integral of exp(-1 / (1 - x^2)) over (-1, 1)
    EXPECT_NEAR(bump.integral_from(-5.0), std::exp(1.0) * 0.44399381616807943, 1e-10);
    EXPECT_NEAR(bump.integral_from(0.0), 0.5 * bump.integral_from(-1.0), 1e-12);
    EXPECT_EQ(bump(1.0), 0.0);
    const TestFunction b = TestFunction::cubic_bspline();
    EXPECT_NEAR(b.integral_from(-2.0), 1.0, 1e-12);
    for (double x : {0.0, 0.3, 0.77}) {
        double s = 0.0;
        for (int k = -3; k <= 3; ++k) s += b(x + k);
        EXPECT_NEAR(s, 1.0, 1e-14);
    }
}

TEST(Renewal, DeterministicOracle) {
    const MeasureSpec spec = test::shipped("diag_oracle");
    const Vector x = Vector::Unit(2, 0);
    for (const TestFunction& f : {TestFunction::bump(), TestFunction::cubic_bspline()}) {
        for (double t : {0.0, 2.5, 7.3, 20.0}) {
            double exact = 0.0;
            for (int n = 0; n < 100; ++n) exact += f(n - t);
            const RenewalResult r = renewal_sum(spec, f, x, t, 1.0, {4, 1, 1});
            EXPECT_NEAR(r.estimate, exact, 1e-10) << f.name << " t=" << t;
            EXPECT_EQ(r.stdErr, 0.0);
        }
    }
}

TEST(Renewal, NeedsExponent) {
    const MeasureSpec spec = test::shipped("sl2");
    EXPECT_THROW(renewal_sum(spec, TestFunction::bump(), Vector::Unit(2, 0), 5.0, std::nullopt, {10, 1, 1}),
                 MustEstimateFirst);
}

TEST(Renewal, SharedTrajectoriesAndWorkers) {
    const MeasureSpec spec = test::shipped("sl2");
    const TestFunction f = TestFunction::bump();
    const Vector x = Vector::Unit(2, 0);
    const McOptions one{3000, 8, 1}, three{3000, 8, 3};
    const auto many = renewal_sums(spec, f, x, {5.0, 10.0}, 0.1856, one);
    const RenewalResult single = renewal_sum(spec, f, x, 10.0, 0.1856, three);
    EXPECT_EQ(many[1].estimate, single.estimate);
    EXPECT_EQ(many[1].stdErr, single.stdErr);
    EXPECT_NEAR(many[1].limit, f.integral_from(-10.0) / 0.1856, 1e-12);
    EXPECT_GT(many[1].nMax, static_cast<std::size_t>(10.0 / 0.1856));
}

TEST(Renewal, ErrorFitReports) {
    const MeasureSpec spec = test::shipped("sl2");
    const RenewalFit fit = renewal_error_fit(spec, TestFunction::bump(), Vector::Unit(2, 0), {1, 2, 3, 4, 6, 8}, 0.1856,
                                             {4000, 2, 0});
    EXPECT_EQ(fit.points.size(), 6u);
    EXPECT_FALSE(fit.report.empty());
    EXPECT_TRUE(fit.fit.has_value() || fit.belowNoiseFloor);
}

}  // namespace
}  // namespace flagwalk
