#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "common.hpp"
#include "flagwalk/error.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/spectral.hpp"
#include "flagwalk/walk.hpp"
#include "lemma_suite.hpp"

namespace flagwalk {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;
using BigMatrix = std::vector<std::vector<Big>>;

BigMatrix big_product(const BigMatrix& a, const BigMatrix& b) {
    const std::size_t n = a.size();
    BigMatrix c(n, std::vector<Big>(n, Big(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// Power iteration on a^T a; the product is strongly proximal so this converges fast.
Big big_top_singular(const BigMatrix& a) {
    const std::size_t n = a.size();
    BigMatrix ata(n, std::vector<Big>(n, Big(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) ata[i][j] += a[k][i] * a[k][j];
    std::vector<Big> v(n, Big(1));
    Big lambda = 0;
    for (int it = 0; it < 300; ++it) {
        std::vector<Big> w(n, Big(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w[i] += ata[i][j] * v[j];
        Big s = 0;
        for (const Big& x : w) s += x * x;
        s = sqrt(s);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / s;
        lambda = s;
    }
    return sqrt(lambda);
}

BigMatrix big_wedge2(const BigMatrix& p) {
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    BigMatrix w(3, std::vector<Big>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int a = pairs[i][0], b = pairs[i][1], c = pairs[j][0], d = pairs[j][1];
            w[i][j] = p[a][c] * p[b][d] - p[a][d] * p[b][c];
        }
    return w;
}

TEST(Walk, KappaAgreesWithFiftyDigitProduct) {
    const MeasureSpec spec = test::shipped("sl3");
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 12; ++i) {
        Rng rng(7, i), replay(7, i);
        const WalkState w = sample_product(spec, 200, rng);
        BigMatrix p(3, std::vector<Big>(3, Big(0)));
        for (int j = 0; j < 3; ++j) p[j][j] = 1;
        for (int s = 0; s < 200; ++s) {
            const Matrix& a = spec.sample(replay);
            BigMatrix am(3, std::vector<Big>(3));
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) am[r][c] = a(r, c);
            p = big_product(p, am);
        }
        const double chi1 = static_cast<double>(log(big_top_singular(p)));
        const double chi2 = static_cast<double>(log(big_top_singular(big_wedge2(p))));
        const Vector k = w.kappa();
        worst = std::max({worst, std::abs(k(0) - chi1), std::abs(k(0) + k(1) - chi2)});
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(Walk, StepUsesGeneratorLikeSample) {
    const MeasureSpec spec = test::shipped("sl3");
    Rng a(5, 3), b(5, 3);
    WalkState w(2);
    Matrix p = Matrix::Identity(3, 3);
    for (int i = 0; i < 25; ++i) {
        w.step(spec, a);
        p = p * spec.sample(b);
    }
    EXPECT_EQ(a(), b());
    EXPECT_LT((w.full_matrix() - p).norm() / p.norm(), 1e-13);
}

TEST(Walk, TracksMatchPlainDecompositionOnShortWalks) {
    const MeasureSpec spec = test::shipped("sl3");
    for (std::uint64_t i = 0; i < 300; ++i) {
        Rng rng(3, i);
        const WalkState w = sample_product(spec, 12, rng);
        const FlagPoint eta(random_rotation(3, rng));
        const CartanTriple a = w.cartan(), b = cartan_decompose(w.product(), w.log_scale());
        EXPECT_LT((a.kappa - b.kappa).norm(), 1e-12);
        EXPECT_LT(dist_flag(attracting_flag(a), attracting_flag(b)), 1e-10);
        EXPECT_LT(dist_flag(repelling_flag(a), repelling_flag(b)), 1e-10);
        EXPECT_LT((w.cocycle(eta) - iwasawa_cocycle(w.product(), w.log_scale(), eta)).norm(), 1e-10);
        EXPECT_LT(dist_flag(w.act(eta), act(w.product(), eta)), 1e-10);
    }
}

TEST(Walk, LongSl3ProductsStayFinite) {
    const MeasureSpec spec = test::shipped("sl3");
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const CartanTriple c = sample_product(spec, 400, 9, i).cartan();
        ASSERT_TRUE(c.kappa.allFinite() && c.k.allFinite() && c.l.allFinite());
        EXPECT_NEAR(c.kappa.sum(), 0.0, 1e-9);
        EXPECT_NEAR(c.k.determinant(), 1.0, 1e-9);
        EXPECT_NEAR(c.l.determinant(), 1.0, 1e-9);
    }
}

TEST(Walk, LyapunovDeterministicAndWorkerInvariant) {
    const MeasureSpec det({{GroupElement(test::diag({2.0, 0.5})), 1.0}}, "det");
    EXPECT_NEAR(lyapunov_vector(det, 50, {100, 1, 1}).sigma(0), std::log(2.0), 1e-12);
    const MeasureSpec spec = test::shipped("sl3");
    const LyapunovEstimate a = lyapunov_vector(spec, 30, {5000, 4, 1});
    const LyapunovEstimate b = lyapunov_vector(spec, 30, {5000, 4, 3});
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.stdErr, b.stdErr);
    EXPECT_GT(a.margin, 0.0);
    EXPECT_NEAR(a.sigma.sum(), 0.0, 1e-12);
}

TEST(Walk, TopExponentMatchesGridIntegral) {
    const MeasureSpec spec = test::shipped("sl2");
    const TopExponentEstimate e = top_exponent_estimate(spec, 100, 500, {4000, 2, 0});
    EXPECT_LT(std::abs(e.value - grid_lyapunov(spec, 2048)), 4.0 * e.stdErr);
}

TEST(Walk, EmptyPositionEventAndDeviationSanity) {
    const MeasureSpec spec = test::shipped("sl2");
    const DeviationCurve none = position_deviation_curve(spec, std::numeric_limits<double>::infinity(), {5, 10},
                                                         FlagPoint::base(1), PositionMode::LineRepelling, {500, 1, 1});
    for (double p : none.probability) EXPECT_EQ(p, 0.0);
    const DeviationCurve ld = large_deviation_curve(spec, lyapunov_vector(spec, 200, {2000, 1, 0}).sigma, 0.1,
                                                    {10, 20, 40}, {4000, 1, 0});
    ASSERT_EQ(ld.probability.size(), 3u);
    for (double p : ld.probability) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_GT(ld.probability.front(), ld.probability.back());
}

TEST(Walk, StationaryLawForgetsStart) {
    const MeasureSpec spec = test::shipped("sl2");
    const McOptions opts{4000, 3, 0};
    auto angle = [](const Matrix& k) { return std::atan2(std::abs(k(1, 0)), std::abs(k(0, 0))); };
    const auto a = stationary_statistic(spec, 100, opts, Matrix::Identity(2, 2), angle);
    const auto b = stationary_statistic(spec, 100, {4000, 4, 0}, plane_rotation(2, 0, 1, 1.0), angle);
    // two-sample KS at 4000 each: 1.95 sqrt(2 / 4000) is about 0.044 at the 0.1% level
    EXPECT_LT(ks_statistic(a, b), 0.044);
}

TEST(Walk, GoodElementsOnSl2) {
    const MeasureSpec spec = test::shipped("sl2");
    const Vector sigma = lyapunov_vector(spec, 200, {4000, 1, 0}).sigma;
    const auto results = tools::good_element_suite(spec, sigma, 200, 0.1, 300, 5);
    EXPECT_TRUE(tools::all_pass(results));
    EXPECT_GT(results.front().instances, 0u);
}

TEST(Walk, GoodElementsOnSl3) {
    const MeasureSpec spec = test::shipped("sl3");
    const Vector sigma = lyapunov_vector(spec, 200, {4000, 1, 0}).sigma;
    const auto results = tools::good_element_suite(spec, sigma, 600, 0.034, 300, 5);
    EXPECT_TRUE(tools::all_pass(results));
    EXPECT_GT(results.front().instances, 0u);
    EXPECT_THROW(tools::good_element_suite(spec, sigma, 600, 0.1, 10, 5), InvalidArgument);
}

TEST(Walk, SpecParsing) {
    EXPECT_THROW(parse_measure_spec("{"), InvalidArgument);
    EXPECT_THROW(parse_measure_spec(R"({"m":1,"atoms":[{"matrix":[[2,0],[0,1]],"weight":1}]})"), InvalidArgument);
    EXPECT_THROW(parse_measure_spec(R"({"m":1,"atoms":[{"matrix":[[1,0],[0,1]],"weight":-1}]})"), InvalidArgument);
    const MeasureSpec s = test::shipped("sl3");
    const MeasureSpec back = parse_measure_spec(to_json(s));
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        EXPECT_LT((back.atoms()[i].g.matrix() - s.atoms()[i].g.matrix()).norm(), 1e-15);
    EXPECT_TRUE(zariski_density_heuristic(s).dense());
    EXPECT_TRUE(zariski_density_heuristic(test::shipped("sl2")).dense());
    EXPECT_FALSE(zariski_density_heuristic(test::shipped("diag_oracle")).dense());
}

}  // namespace
}  // namespace flagwalk
