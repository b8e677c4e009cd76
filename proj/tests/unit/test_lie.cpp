#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/lie.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/rng.hpp"

namespace flagwalk {
namespace {

using test::diag;
using test::mat2;

TEST(Lie, ConstructionChecksDeterminant) {
    EXPECT_THROW(GroupElement(diag({2.0, 1.0})), InvalidArgument);
    EXPECT_THROW(GroupElement::normalized(diag({-1.0, 1.0})), InvalidArgument);
    EXPECT_NEAR(GroupElement::normalized(diag({4.0, 1.0})).matrix().determinant(), 1.0, 1e-14);
}

TEST(Lie, CartanOracles) {
    const Vector k = cartan_decompose(GroupElement(diag({2.0, 0.5}))).kappa;
    EXPECT_NEAR(k(0), std::log(2.0), 1e-14);
    EXPECT_NEAR(k(1), -std::log(2.0), 1e-14);
    EXPECT_NEAR(cartan_decompose(GroupElement(mat2(1, 1, 0, 1))).kappa(0), std::log((1 + std::sqrt(5.0)) / 2), 1e-14);
    EXPECT_NEAR(cartan_decompose(GroupElement(plane_rotation(3, 0, 1, 0.4))).kappa.norm(), 0.0, 1e-14);
    EXPECT_NEAR(gap(GroupElement(diag({4.0, 1.0, 0.25}))), 0.25, 1e-14);
}

TEST(Lie, RandomReconstructionsAndInverse) {
    for (int dim : {2, 3, 4}) {
        Rng rng(11, static_cast<std::uint64_t>(dim));
        for (int i = 0; i < 200; ++i) {
            const GroupElement g(random_unimodular(dim, rng, 2.0));
            const CartanTriple c = cartan_decompose(g);
            const IwasawaTriple w = iwasawa_decompose(g);
            const double scale = g.matrix().norm();
            EXPECT_LT((c.reconstruct() - g.matrix()).norm() / scale, 1e-12);
            EXPECT_LT((w.reconstruct() - g.matrix()).norm() / scale, 1e-12);
            EXPECT_NEAR(c.k.determinant(), 1.0, 1e-12);
            EXPECT_NEAR(c.l.determinant(), 1.0, 1e-12);
            EXPECT_NEAR(w.k.determinant(), 1.0, 1e-12);
            for (int j = 0; j + 1 < dim; ++j) EXPECT_GE(c.kappa(j), c.kappa(j + 1));
            EXPECT_NEAR(c.kappa.sum(), 0.0, 1e-12);
            EXPECT_NEAR(w.sigma.sum(), 0.0, 1e-12);
            EXPECT_LT((Matrix(w.n.triangularView<Eigen::StrictlyLower>())).norm(), 1e-15);
            EXPECT_LT((w.n.diagonal() - Vector::Ones(dim)).norm(), 1e-15);
            EXPECT_LT((cartan_projection(g.inverse()) - opposition_involution(c.kappa)).norm(), 1e-10);
        }
    }
}

TEST(Lie, IwasawaAcceptsLostLastPivot) {
    // Rank-deficient up to round-off: the last pivot only carries a sign.
    Matrix a(2, 2);
    a << 1.0, 2.0, 0.5, 1.0;
    const IwasawaTriple w = iwasawa_decompose(a, 0.0);
    EXPECT_TRUE(w.k.allFinite());
    EXPECT_NEAR(w.k.determinant(), 1.0, 1e-12);
}

TEST(Lie, StructuralConstants) {
    const RootData r = structural_constants(2);
    EXPECT_EQ(r.L(0, 0), -2);
    EXPECT_EQ(r.L(0, 1), 1);
    EXPECT_EQ(r.L(1, 0), 1);
    EXPECT_EQ(r.L(1, 1), -2);
    EXPECT_GT(r.C1, 0.0);
    EXPECT_GT(r.CA, 0.0);
    Vector x(3);
    x << 0.5, 0.2, -0.7;
    EXPECT_DOUBLE_EQ(r.simple_root(1, x), 0.3);
    EXPECT_DOUBLE_EQ(r.weight(2, x), 0.7);
}

}  // namespace
}  // namespace flagwalk
