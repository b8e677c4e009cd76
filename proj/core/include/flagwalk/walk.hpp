#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "flagwalk/flag.hpp"
#include "flagwalk/measure.hpp"
#include "flagwalk/parallel.hpp"
#include "flagwalk/stats.hpp"

namespace flagwalk {

// Running product X_1 ... X_n kept as e^{logScale} * product, with product
// rescaled by its largest entry after every step.
//
// For m >= 2 the exterior powers of the product in degrees 2..m are carried
// along as separate rescaled products. Once kappa_1 - kappa_2 passes about 37
// the lower singular directions of the single matrix are round-off, while
// the top singular value of each exterior product stays accurate; cartan()
// and cocycle() are read off those.
class WalkState {
public:
    explicit WalkState(int m);

    const Matrix& product() const { return product_; }
    double log_scale() const { return logScale_; }
    std::size_t steps() const { return steps_; }
    int rank() const { return static_cast<int>(product_.rows()) - 1; }

    // product <- product * a
    void multiply_right(const Matrix& a);
    // product <- a * product
    void multiply_left(const Matrix& a);
    // Same, with the exterior powers of a (degrees 2..m) supplied.
    void multiply_right(const Matrix& a, const std::vector<Matrix>& wedges);
    void multiply_left(const Matrix& a, const std::vector<Matrix>& wedges);
    // Multiplies on the right by an atom drawn from spec; uses the generator
    // exactly as spec.sample(rng).
    void step(const MeasureSpec& spec, Rng& rng);

    // Unrenormalized matrix; overflows for long walks, meant for tests.
    Matrix full_matrix() const;
    GroupElement element() const { return GroupElement::normalized(product_); }
    CartanTriple cartan() const;
    Vector kappa() const;
    Vector cocycle(const FlagPoint& eta) const;
    // The flag product . eta.
    FlagPoint act(const FlagPoint& eta) const;

private:
    struct Track {
        Matrix product;
        double logScale = 0.0;
    };
    static void renormalize(Matrix& a, double& logScale);

    Matrix product_;
    double logScale_ = 0.0;
    std::size_t steps_ = 0;
    std::vector<Track> wedges_;  // degrees 2..m
};

// X_1 ... X_n drawn from stream `stream` of `seed`.
WalkState sample_product(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);
WalkState sample_product(const MeasureSpec& spec, std::size_t n, Rng& rng);

struct LyapunovEstimate {
    Vector sigma;
    Vector stdErr;
    std::size_t n = 0;
    std::size_t samples = 0;
    double margin = 0.0;        // min over simple roots of alpha(sigma)
    double marginStderr = 0.0;  // standard error of the minimizing root value
    bool positivityWarning = false;  // some alpha(sigma) <= 2 stdErr
};

LyapunovEstimate lyapunov_vector(const MeasureSpec& spec, std::size_t n, const McOptions& opts);

struct TopExponentEstimate {
    double value = 0.0;
    double stdErr = 0.0;
    std::size_t samples = 0;
    std::size_t steps = 0;
};
// Top exponent as the mean cocycle increment log ||X v|| along the forward
// line walk, after burnIn steps. Unlike kappa_1 / n it carries no O(1/n)
// offset from the starting point.
TopExponentEstimate top_exponent_estimate(const MeasureSpec& spec, std::size_t burnIn, std::size_t steps,
                                          const McOptions& opts);

// Stored Lyapunov vector of the spec, or a fresh estimate with n = 200.
Vector lyapunov_or_estimate(const MeasureSpec& spec, const McOptions& opts);

struct DeviationCurve {
    std::vector<std::size_t> n;
    std::vector<double> probability;
    std::vector<double> stdErr;
    std::optional<LineFit> fit;  // log probability against n, over points with hits
};

// P(||kappa(X_1...X_n) - n sigma|| >= n eps) for each n in nList. One
// trajectory per sample is followed to max(nList).
DeviationCurve large_deviation_curve(const MeasureSpec& spec, const Vector& sigma, double eps,
                                     const std::vector<std::size_t>& nList, const McOptions& opts);

enum class PositionMode {
    LineRepelling,   // delta(x, y^m_g), x = first column of the target
    LineAttracting,  // delta(x^M_g, y), y = first column of the target
    FlagRepelling,   // delta(eta, zeta^m_g)
    FlagAttracting,  // delta(eta^M_g, zeta)
};

// P(delta <= e^{-n eps}); eps = infinity is allowed and gives an empty event.
DeviationCurve position_deviation_curve(const MeasureSpec& spec, double eps, const std::vector<std::size_t>& nList,
                                        const FlagPoint& target, PositionMode mode, const McOptions& opts);

// Forward iteration k <- X k, with QR every few steps. Returns an
// orthonormal representative of X_n ... X_1 start, which has the law of
// X_1 ... X_n start.
Matrix stationary_frame(const MeasureSpec& spec, std::size_t n, Rng& rng, const Matrix& start);
FlagPoint stationary_sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);
FlagPoint stationary_sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream,
                            const FlagPoint& start);

inline constexpr std::size_t kDefaultBurnIn = 100;

// Values stat(k) over opts.samples stationary frames, in trajectory order.
template <class Stat>
std::vector<double> stationary_statistic(const MeasureSpec& spec, std::size_t burnIn, const McOptions& opts,
                                         const Matrix& start, Stat&& stat) {
    auto chunks = map_chunks<std::vector<double>>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> out;
        out.reserve(e - b);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(opts.seed, i);
            out.push_back(stat(stationary_frame(spec, burnIn, rng, start)));
        }
        return out;
    });
    std::vector<double> all;
    all.reserve(opts.samples);
    for (auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
    return all;
}

struct RegularityFit {
    std::vector<double> r;
    std::vector<double> mass;
    LineFit fit;  // log mass against log r; the slope is the exponent
};

// nu{x in P(R^{m+1}) : delta(x, y) <= r} for r in rGrid, y a functional.
RegularityFit holder_regularity(const MeasureSpec& spec, const Vector& y, const std::vector<double>& rGrid,
                                const McOptions& opts, std::size_t burnIn = kDefaultBurnIn);

struct GoodnessParts {
    double kappaDeviation = 0.0;    // ||kappa(h) - n sigma||
    double kappaThreshold = 0.0;    // eps n / C_A
    double repellingDelta = 0.0;    // delta(eta, zeta^m_h)
    double attractingDelta = 0.0;   // delta(eta^M_h, zeta)
    double deltaThreshold = 0.0;    // 2 e^{-eps n / C_A}
    bool good() const {
        return kappaDeviation <= kappaThreshold && repellingDelta > deltaThreshold && attractingDelta > deltaThreshold;
    }
};

// (n, eps, eta, zeta) goodness of h = e^{logScale} a.
GoodnessParts good_element_parts(const CartanTriple& h, std::size_t n, double eps, const FlagPoint& eta,
                                 const FlagPoint& zeta, const Vector& sigma);
GoodnessParts good_element_parts(const Matrix& a, double logScale, std::size_t n, double eps, const FlagPoint& eta,
                                 const FlagPoint& zeta, const Vector& sigma);
bool is_good_element(const GroupElement& h, std::size_t n, double eps, const FlagPoint& eta, const FlagPoint& zeta,
                     const Vector& sigma);

struct Frequency {
    double estimate = 0.0;
    double stdErr = 0.0;
    std::size_t samples = 0;
};

// Fraction of h ~ mu^{*n} that are not (n, eps, eta, zeta) good.
Frequency good_failure_frequency(const MeasureSpec& spec, std::size_t n, double eps, const FlagPoint& eta,
                                 const FlagPoint& zeta, const Vector& sigma, const McOptions& opts);

}  // namespace flagwalk
