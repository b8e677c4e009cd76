#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/spectral.hpp"

namespace flagwalk {
namespace {

TEST(Spectral, KrylovFindsDominantEigenvalue) {
    const int n = 300;
    CVector d(n);
    for (int i = 0; i < n; ++i) d(i) = std::polar(0.9 * (1.0 - i / double(n)), 0.3 * i);
    d(17) = Complex(0.0, 0.95);
    const LinearOperator op = [&](const CVector& in, CVector& out) { out = d.cwiseProduct(in); };
    const EigenEstimate e = dominant_eigenvalue(op, n);
    EXPECT_NEAR(std::abs(e.eigenvalue - Complex(0.0, 0.95)), 0.0, 1e-9);
    EXPECT_NEAR(e.radius, 0.95, 1e-9);
}

TEST(Spectral, ConstantsAreFixedAtZero) {
    const MeasureSpec spec = test::shipped("sl2");
    const TransferDiscretization t = build_transfer(spec, Complex(0.0), 256);
    CVector ones = CVector::Ones(256), out;
    t.apply(ones, out);
    EXPECT_LT((out - ones).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(spectral_radius(t).radius, 1.0, 1e-6);
}

TEST(Spectral, ApplyMatchesDenseAndTranspose) {
    const MeasureSpec spec = test::shipped("sl2");
    const TransferDiscretization t = build_transfer(spec, Complex(0.01, 3.0), 64);
    const CMatrix m = t.dense();
    const CVector x = CVector::Random(64);
    CVector y, yt;
    t.apply(x, y);
    t.apply_transpose(x, yt);
    EXPECT_LT((y - m * x).norm(), 1e-12);
    EXPECT_LT((yt - m.transpose() * x).norm(), 1e-12);
}

TEST(Spectral, GridOperatorConvergesToDirectTransfer) {
    const MeasureSpec spec = test::shipped("sl2");
    const Complex z(0.0, 2.0);
    auto f = [](double theta) { return Complex(std::cos(2 * theta), std::sin(4 * theta)); };
    double previous = 1.0;
    for (int n : {128, 512}) {
        const TransferDiscretization t = build_transfer(spec, z, n);
        CVector fv(n), out;
        for (int j = 0; j < n; ++j) fv(j) = f(t.theta()[j]);
        t.apply(fv, out);
        double err = 0.0;
        for (int j = 0; j < n; ++j) err = std::max(err, std::abs(out(j) - transfer_direct(spec, z, f, t.theta()[j])));
        EXPECT_LT(err, previous / 8.0);  // linear interpolation: error ~ N^-2
        previous = err;
    }
}

TEST(Spectral, RadiusAtRealZStraddlesOne) {
    const MeasureSpec spec = test::shipped("sl2");
    const double up = spectral_radius(build_transfer(spec, Complex(0.05), 256)).radius;
    const double down = spectral_radius(build_transfer(spec, Complex(-0.05), 256)).radius;
    EXPECT_GT(up, 1.0);
    EXPECT_LT(down, 1.0);
}

TEST(Spectral, StationaryWeightsAndGridLyapunov) {
    const MeasureSpec spec = test::shipped("sl2");
    const Vector w = stationary_grid_weights(spec, 512);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), -1e-12);
    EXPECT_NEAR(grid_lyapunov(spec, 512), grid_lyapunov(spec, 2048), 1e-4);
}

TEST(Spectral, IteratesOfOneAtZeroStayOne) {
    const MeasureSpec spec = test::shipped("sl2");
    const IterateNorms it =
        iterate_norm_estimate(spec, Complex(0.0), [](const FlagPoint&) { return Complex(1.0); }, 8, FlagPoint::base(1));
    for (const Complex& v : it.values) EXPECT_NEAR(std::abs(v - Complex(1.0)), 0.0, 1e-12);
    EXPECT_THROW(iterate_norm_estimate(spec, Complex(0.0), [](const FlagPoint&) { return Complex(1.0); }, 12,
                                       FlagPoint::base(1), 1000),
                 TreeTooLarge);
}

TEST(Spectral, ResolventGuardsAndPole) {
    const MeasureSpec spec = test::shipped("sl2");
    auto one = [](double) { return 1.0; };
    EXPECT_THROW(resolvent_pole_check(spec, {Complex(1e-4)}, 256, one), SolveRefused);
    EXPECT_THROW(resolvent_pole_check(spec, {Complex(0.5)}, 256, one), InvalidArgument);
    const auto rows = resolvent_pole_check(spec, {Complex(0.01), Complex(0.0, 0.01)}, 512, one);
    for (const ResolventRow& r : rows) EXPECT_LT(r.relativeDeviation, 0.05);
}

TEST(Spectral, AbelianContrastFindsReturns) {
    const AbelianContrast ac = abelian_contrast(test::shipped("sl2"), 1.0, 200.0, 0.05);
    ASSERT_FALSE(ac.b.empty());
    for (std::size_t i = 0; i < ac.b.size(); ++i) {
        EXPECT_LT(ac.gap[i], 0.05);
        if (i > 0) EXPECT_GT(ac.b[i], ac.b[i - 1]);
    }
}

}  // namespace
}  // namespace flagwalk
