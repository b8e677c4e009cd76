#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "flagwalk/exterior.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/rng.hpp"

namespace flagwalk {
namespace {

TEST(Exterior, DimensionsAndTopDegreeIsDeterminant) {
    Rng rng(3);
    const Matrix a = random_unimodular(4, rng);
    for (int d = 1; d <= 4; ++d) EXPECT_EQ(exterior_power(a, d).dim(), binomial(4, d));
    EXPECT_NEAR(exterior_power(a, 4).entries(0, 0), a.determinant(), 1e-12);
    EXPECT_LT((exterior_power(a, 1).entries - a).norm(), 1e-15);
}

TEST(Exterior, Functorial) {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const Matrix a = random_unimodular(4, rng), b = random_unimodular(4, rng);
        for (int d = 2; d <= 3; ++d) {
            const Matrix lhs = exterior_power(Matrix(a * b), d).entries;
            const Matrix rhs = exterior_power(a, d).entries * exterior_power(b, d).entries;
            EXPECT_LT((lhs - rhs).norm() / rhs.norm(), 1e-12);
        }
    }
}

TEST(Exterior, NormIsSumOfTopKappas) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const GroupElement g(random_unimodular(3, rng, 2.0));
        for (int d = 1; d <= 2; ++d) EXPECT_LT(operator_norm_identity_check(g, d), 1e-10);
    }
}

TEST(Exterior, WedgeMatchesMinorsAndAntisymmetry) {
    Rng rng(9);
    const Matrix v = Matrix::Random(3, 2);
    const Vector w = wedge(v);
    EXPECT_LT((w - wedge2(v.col(0), v.col(1))).norm(), 1e-14);
    Matrix swapped = v;
    swapped.col(0).swap(swapped.col(1));
    EXPECT_LT((wedge(swapped) + w).norm(), 1e-14);
    const Matrix k = random_rotation(3, rng);
    EXPECT_NEAR(leading_wedge(k, 2).norm(), 1.0, 1e-14);
}

TEST(Exterior, Gamma12AndDensityPoints) {
    const GroupElement g(test::diag({4.0, 1.0, 0.25}));
    EXPECT_NEAR(gamma12(g.matrix()), 0.25, 1e-14);
    const DensityPair p = density_points(g, 1);
    EXPECT_FALSE(p.degenerate);
    EXPECT_NEAR(std::abs(p.xM(0)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(p.ym(0)), 1.0, 1e-14);
    EXPECT_TRUE(linear_density_points(Matrix::Identity(2, 2)).degenerate);
}

}  // namespace
}  // namespace flagwalk
