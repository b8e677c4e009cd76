#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/fourier.hpp"
#include "presets.hpp"

namespace flagwalk {
namespace {

TEST(Fourier, ZeroFrequencyAndConjugates) {
    const MeasureSpec spec = test::shipped("sl2");
    const auto c = fourier_coefficients(spec, {0, 3, -3}, {2000, 5, 0});
    EXPECT_NEAR(std::abs(c[0].value - Complex(1.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(c[1].value - std::conj(c[2].value)), 0.0, 1e-14);
    EXPECT_THROW(decay_exponent_fit(spec, {0, 1, 2}, {100, 1, 1}), DegenerateFit);
}

TEST(Fourier, WorkerInvariant) {
    const MeasureSpec spec = test::shipped("sl2");
    const FourierCoefficient a = fourier_coefficient(spec, 7, {5000, 6, 1});
    const FourierCoefficient b = fourier_coefficient(spec, 7, {5000, 6, 4});
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.stdErr, b.stdErr);
}

TEST(Fourier, AnglePhaseReproducesCoefficient) {
    const MeasureSpec spec = test::shipped("sl2");
    const McOptions opts{4000, 9, 0};
    const OscillatorySpec osc = tools::oscillatory_preset("angle", "one", 1, 5.0, 2.0);
    const OscillatoryResult r = oscillatory_integral(spec, osc, opts);
    const FourierCoefficient c = fourier_coefficient(spec, 5, opts);
    EXPECT_LT(std::abs(r.value - c.value), 1e-9);
}

TEST(Fourier, GoodnessIsMonotoneInC) {
    const OscillatorySpec loose = tools::oscillatory_preset("quadratic", "bump", 2, 1.0, 50.0);
    const OscillatorySpec tight = tools::oscillatory_preset("quadratic", "bump", 2, 1.0, 1.5);
    const GoodnessReport a = cr_goodness_check(loose, 2, {2000, 3, 0});
    const GoodnessReport b = cr_goodness_check(tight, 2, {2000, 3, 0});
    EXPECT_LE(a.g1.worst, b.g1.worst);
    EXPECT_LE(a.g3.worst, b.g3.worst);
    if (b.all_pass()) EXPECT_TRUE(a.all_pass());
    EXPECT_FALSE(describe(a).empty());
}

TEST(Fourier, ConstantPhaseHasNoOscillation) {
    const MeasureSpec spec = test::shipped("sl3");
    const OscillatorySpec osc = tools::oscillatory_preset("constant", "one", 2, 40.0, 2.0);
    EXPECT_NEAR(std::abs(oscillatory_integral(spec, osc, {500, 1, 0}).value - Complex(1.0)), 0.0, 1e-14);
}

}  // namespace
}  // namespace flagwalk
