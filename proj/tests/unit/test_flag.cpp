#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/flag.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/rng.hpp"

namespace flagwalk {
namespace {

class FlagProperties : public ::testing::TestWithParam<int> {};

TEST_P(FlagProperties, CocycleIsAdditiveAndActionComposes) {
    const int dim = GetParam();
    Rng rng(21, static_cast<std::uint64_t>(dim));
    for (int i = 0; i < 300; ++i) {
        const GroupElement g(random_unimodular(dim, rng, 1.5)), h(random_unimodular(dim, rng, 1.5));
        const FlagPoint eta(random_rotation(dim, rng));
        const Vector lhs = iwasawa_cocycle(g * h, eta);
        const Vector rhs = iwasawa_cocycle(g, act(h, eta)) + iwasawa_cocycle(h, eta);
        EXPECT_LT((lhs - rhs).norm(), 1e-9);
        EXPECT_NEAR(lhs.sum(), 0.0, 1e-12);
        EXPECT_LT(dist_flag(act(g * h, eta), act(g, act(h, eta))), 1e-9);
    }
}

TEST_P(FlagProperties, DistancesAreRotationInvariantMetrics) {
    const int dim = GetParam();
    const int m = dim - 1;
    Rng rng(22, static_cast<std::uint64_t>(dim));
    for (int i = 0; i < 300; ++i) {
        const FlagPoint a(random_rotation(dim, rng)), b(random_rotation(dim, rng)), c(random_rotation(dim, rng));
        const GroupElement k(random_rotation(dim, rng));
        for (int d = 1; d <= m; ++d) {
            const double ab = dist_alpha(a, b, d);
            EXPECT_GE(ab, 0.0);
            EXPECT_LE(ab, 1.0 + 1e-12);
            EXPECT_NEAR(ab, dist_alpha(b, a, d), 1e-12);
            EXPECT_LE(ab, dist_alpha(a, c, d) + dist_alpha(c, b, d) + 1e-12);
            EXPECT_NEAR(ab, dist_alpha(act(k, a), act(k, b), d), 1e-12);
            const double del = delta_alpha(a, b, d);
            EXPECT_GE(del, 0.0);
            EXPECT_LE(del, 1.0 + 1e-12);
        }
        EXPECT_LE(delta(a, b), 1.0 + 1e-12);
    }
}

TEST_P(FlagProperties, DerivativeMatchesCentralDifference) {
    const int dim = GetParam();
    Rng rng(23, static_cast<std::uint64_t>(dim));
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const GroupElement g(random_unimodular(dim, rng, 1.0));
        const SignedFlag z(random_rotation(dim, rng));
        for (int d = 1; d < dim; ++d) {
            auto chi = [&](double t) { return iwasawa_cocycle(g, FlagPoint(alpha_circle_point(z, d, t))).head(d).sum(); };
            const double fd = (chi(h) - chi(-h)) / (2 * h);
            const double an = cocycle_derivative(g, z, d);
            EXPECT_LE(std::abs(an - fd), 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Dims, FlagProperties, ::testing::Values(2, 3, 4));

TEST(Flag, AttractingFlagIsFixedByLongPowers) {
    Rng rng(24);
    const Matrix k = random_rotation(3, rng);
    const GroupElement g(Matrix(k * test::diag({5.0, 1.0, 0.2}) * k.transpose()));
    const FlagPoint a = attracting_flag(g);
    EXPECT_LT(dist_flag(act(g, a), a), 1e-12);
    const FlagPoint eta(random_rotation(3, rng));
    FlagPoint x = eta;
    for (int i = 0; i < 40; ++i) x = act(g, x);
    EXPECT_LT(dist_flag(x, a), 1e-10);
}

TEST(Flag, SignElementsMultiply) {
    Rng rng(25);
    for (int i = 0; i < 100; ++i) {
        const SignedFlag a(random_rotation(3, rng)), b(random_rotation(3, rng));
        const SignElement ab = sign_m(a, b);
        if (ab.zero) continue;
        EXPECT_EQ(ab.diag.prod(), 1);
        EXPECT_TRUE((ab * ab).is_identity());
        EXPECT_TRUE(sign_m(a, a).is_identity());
    }
}

TEST(Flag, ArcDistanceAlongCircles) {
    Rng rng(26);
    for (int i = 0; i < 50; ++i) {
        const SignedFlag z(random_rotation(4, rng));
        for (int d = 1; d <= 3; ++d) {
            const double t = rng.uniform() * std::numbers::pi;
            EXPECT_NEAR(arc_distance(z, alpha_circle_point(z, d, t), d), std::min(t, std::numbers::pi - t), 1e-9);
        }
    }
    const SignedFlag z(random_rotation(3, rng));
    EXPECT_THROW(arc_distance(z, SignedFlag(random_rotation(3, rng)), 1), NotOnCircle);
}

TEST(Flag, ChangeFlagsMeetsTargetsOnSl3) {
    Rng rng(27);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        const GroupElement g(Matrix(random_rotation(3, rng) * test::diag({40.0, 1.0, 1.0 / 40.0}) * random_rotation(3, rng)));
        const FlagPoint eta(random_rotation(3, rng)), etaPrime(random_rotation(3, rng));
        try {
            const ChangeFlagsResult r = change_flags(eta, etaPrime, g, 0.05);
            ++checked;
            EXPECT_TRUE(std::isfinite(r.moveConstant));
            EXPECT_TRUE(std::isfinite(r.endpointConstant));
            EXPECT_EQ(r.endpointDistance.size(), 2u);
        } catch (const PreconditionViolated&) {
        }
    }
    EXPECT_GT(checked, 0);
}

}  // namespace
}  // namespace flagwalk
