#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/noncon.hpp"
#include "lemma_suite.hpp"

namespace flagwalk {
namespace {

TEST(Noncon, YIsEdOfX) {
    Rng rng(31);
    for (int m : {1, 2, 3}) {
        for (int i = 0; i < 200; ++i) {
            Vector s(m + 1);
            for (int j = 0; j <= m; ++j) s(j) = 4.0 * rng.normal();
            s.array() -= s.mean();
            const Vector y = y_from_offset(s);
            const Vector viaX = e_d_map(x_from_offset(s), m);
            EXPECT_LT(((y - viaX).array() / y.array()).abs().maxCoeff(), 1e-8);
        }
    }
    EXPECT_THROW(e_d_map(Vector::Constant(2, -1.0), 2), DomainError);
}

TEST(Noncon, ClampingIsCounted) {
    Vector s(2);
    s << 400.0, -400.0;
    std::size_t clamped = 0;
    const Vector y = y_from_offset(s, &clamped);
    EXPECT_EQ(clamped, 1u);
    EXPECT_TRUE(y.allFinite());
}

// Y^{2n}_g(h1 h2, eta) = Y^n_g(h1, h2 eta) Y^n_e(h2, eta), componentwise.
TEST(Noncon, YSplitsOverProducts) {
    const MeasureSpec spec = test::shipped("sl3");
    Rng rng(32);
    Vector sigma(3);
    sigma << 0.17, 0.0, -0.17;
    const std::size_t n = 6;
    for (int i = 0; i < 200; ++i) {
        const GroupElement g(random_unimodular(3, rng));
        const GroupElement h1 = sample_product(spec, n, rng).element();
        const GroupElement h2 = sample_product(spec, n, rng).element();
        const FlagPoint eta(random_rotation(3, rng));
        const Vector whole = y_vector(g, h1 * h2, eta, 2 * n, sigma);
        const Vector split = y_vector(g, h1, act(h2, eta), n, sigma).cwiseProduct(
            y_vector(GroupElement::identity(2), h2, eta, n, sigma));
        EXPECT_LT(((whole - split).array() / whole.array()).abs().maxCoeff(), 1e-8);
    }
}

TEST(Noncon, WalkOffsetMatchesMatrixOffsetOnShortWalks) {
    const MeasureSpec spec = test::shipped("sl3");
    Rng rng(33);
    Vector sigma(3);
    sigma << 0.17, 0.0, -0.17;
    for (int i = 0; i < 100; ++i) {
        const GroupElement g(random_unimodular(3, rng));
        const WalkState h = sample_product(spec, 15, rng);
        const FlagPoint eta(random_rotation(3, rng));
        const Vector a = cocycle_offset(g, h, eta, 15, sigma);
        const Vector b = cocycle_offset(g, h.product(), h.log_scale(), eta, 15, sigma);
        EXPECT_LT((a - b).norm(), 1e-9);
    }
}

TEST(Noncon, AffineDeterminantAndVolumes) {
    std::vector<Vector> tri{Vector::Zero(2), Vector::Unit(2, 0), Vector::Unit(2, 1)};
    EXPECT_NEAR(std::abs(affine_det(tri)), 1.0, 1e-15);
    const AffineVolume v = affine_volume(tri);
    EXPECT_NEAR(v.wedgeSum, 1.0, 1e-15);
    EXPECT_NEAR(v.radius, 1.0, 1e-15);
    EXPECT_LE(v.nearHyperplane, v.spanDistance + 1e-15);
    std::vector<Vector> line{Vector::Zero(2), Vector::Unit(2, 0), 2.0 * Vector::Unit(2, 0)};
    const AffineVolume flat = affine_volume(line);
    EXPECT_NEAR(flat.wedgeSum, 0.0, 1e-15);
    EXPECT_NEAR(flat.nearHyperplane, 0.0, 1e-15);
    EXPECT_NEAR(flat.spanDistance, 0.0, 1e-15);
}

TEST(Noncon, AffineVolumeImplicationsAgainstOracles) {
    const auto results = tools::affine_volume_suite(100, 3);
    for (const auto& r : results) EXPECT_TRUE(r.pass) << r.name << " worst " << r.worst << ' ' << r.detail;
}

TEST(Noncon, SlabFraction) {
    std::vector<Vector> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(Vector::Constant(2, 0.1 * i));
    Vector diagonal(2);
    diagonal << 1.0, -1.0;
    diagonal.normalize();
    EXPECT_DOUBLE_EQ(max_slab_fraction(pts, {diagonal}, 1e-12), 1.0);
    EXPECT_LE(max_slab_fraction(pts, {Vector::Unit(2, 0)}, 0.01), 0.2);
    const auto dirs = slab_directions(3, 20, 1);
    ASSERT_EQ(dirs.size(), 20u);
    for (const Vector& d : dirs) EXPECT_NEAR(d.norm(), 1.0, 1e-14);
}

TEST(Noncon, EstimatesAreMonotoneAndWorkerInvariant) {
    const MeasureSpec spec = test::shipped("sl3");
    Vector sigma(3);
    sigma << 0.17, 0.0, -0.17;
    const FlagPoint eta = FlagPoint::base(2);
    const GroupElement g = GroupElement::identity(2);
    const NonconEstimate narrow = pnc_estimate(spec, 10, eta, g, sigma, 0.05, {600, 1, 1}, 64);
    const NonconEstimate wide = pnc_estimate(spec, 10, eta, g, sigma, 0.5, {600, 1, 1}, 64);
    const NonconEstimate wideThreads = pnc_estimate(spec, 10, eta, g, sigma, 0.5, {600, 1, 3}, 64);
    EXPECT_LE(narrow.estimate, wide.estimate);
    EXPECT_EQ(wide.estimate, wideThreads.estimate);
    const NonconEstimate s1 = snc_estimate(spec, 10, eta, 2, sigma, 0.01, {3000, 1, 1});
    const NonconEstimate s2 = snc_estimate(spec, 10, eta, 2, sigma, 0.1, {3000, 1, 1});
    const NonconEstimate s3 = snc_estimate(spec, 10, eta, 2, sigma, 1e300, {3000, 1, 2});
    EXPECT_LE(s1.estimate, s2.estimate);
    EXPECT_DOUBLE_EQ(s3.estimate, 1.0);
}

TEST(Noncon, MultiscaleMassesGrowWithScale) {
    const MeasureSpec spec = test::shipped("sl2");
    Vector sigma(2);
    sigma << 0.1856, -0.1856;
    const auto rho = log_grid(1e-4, 0.5, 6);
    const MultiscaleResult r =
        multiscale_noncon(spec, 20, FlagPoint::base(1), GroupElement::identity(1), sigma, 0.5, rho, {1000, 1, 0}, 64);
    ASSERT_EQ(r.mass.size(), rho.size());
    for (std::size_t i = 1; i < r.mass.size(); ++i) EXPECT_LE(r.mass[i - 1], r.mass[i]);
    EXPECT_LE(r.good, r.samples);
}

}  // namespace
}  // namespace flagwalk
