#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "flagwalk/flag.hpp"
#include "flagwalk/measure.hpp"
#include "flagwalk/stats.hpp"

namespace flagwalk {

// Grid discretization of f -> sum_i p_i e^{z sigma(g_i, theta)} f(g_i theta)
// on P^1, with theta_j = j pi / N and periodic linear interpolation of f.
class TransferDiscretization {
public:
    int size() const { return n_; }
    Complex z() const { return z_; }
    const std::vector<double>& theta() const { return theta_; }
    int row_width() const { return width_; }
    // Row j occupies slots [j * row_width, (j + 1) * row_width).
    const std::vector<int>& columns() const { return cols_; }
    const std::vector<Complex>& values() const { return vals_; }

    // out = M in
    void apply(const CVector& in, CVector& out) const;
    // out^T = in^T M
    void apply_transpose(const CVector& in, CVector& out) const;
    CMatrix dense() const;

private:
    friend TransferDiscretization build_transfer(const MeasureSpec& spec, Complex z, int n);
    int n_ = 0;
    Complex z_{};
    int width_ = 0;
    std::vector<double> theta_;
    std::vector<int> cols_;      // n_ * width_
    std::vector<Complex> vals_;  // n_ * width_
};

TransferDiscretization build_transfer(const MeasureSpec& spec, Complex z, int n);

// sigma(g, theta) = log ||g (cos theta, sin theta)|| and the image angle in [0, pi).
struct LineImage {
    double sigma;
    double angle;
};
LineImage act_on_angle(const Matrix& g, double theta);

// (P_z f)(theta) evaluated exactly, without the grid.
Complex transfer_direct(const MeasureSpec& spec, Complex z, const std::function<Complex(double)>& f, double theta);

struct KrylovOptions {
    int krylovDim = 40;
    int keep = 16;
    double tol = 1e-10;
    std::size_t maxMatvecs = 100000;
    std::uint64_t seed = 1;
};

struct EigenEstimate {
    Complex eigenvalue{};
    double radius = 0.0;
    CVector vector;
    double residual = 0.0;
    std::size_t matvecs = 0;
};

using LinearOperator = std::function<void(const CVector&, CVector&)>;

// Eigenvalue of largest modulus by Krylov-Schur restarted Arnoldi. Throws
// EstimationFailed when the relative residual stays above tol after
// maxMatvecs applications.
EigenEstimate dominant_eigenvalue(const LinearOperator& op, Eigen::Index n, const KrylovOptions& opts = {});

EigenEstimate spectral_radius(const TransferDiscretization& t, const KrylovOptions& opts = {});

struct RefinedRadius {
    double radius = 0.0;
    double radiusRefined = 0.0;  // on the 2N grid
    double refinementDelta = 0.0;
    std::size_t matvecs = 0;
};
RefinedRadius spectral_radius_refined(const MeasureSpec& spec, Complex z, int n, const KrylovOptions& opts = {});

struct ScanRow {
    double a = 0.0;
    double b = 0.0;
    int n = 0;
    double radius = 0.0;
    std::optional<double> radiusRefined;
    std::optional<double> refinementDelta;
};

struct GapScan {
    std::vector<ScanRow> rows;
    double maxRadius = 0.0;  // over rows with |b| >= bMin
    double minGap = 1.0;     // 1 - maxRadius
    double maxDelta = 0.0;
};

GapScan spectral_gap_scan(const MeasureSpec& spec, const std::vector<double>& aGrid, const std::vector<double>& bGrid,
                          int n, bool refine, double bMin = 1.0, const KrylovOptions& opts = {});

struct IterateNorms {
    std::vector<Complex> values;  // (P_z^k f)(x0), k = 0..nIter
    std::optional<LineFit> fit;   // log |value| against k for k >= 1
    double slope = 0.0;
    std::size_t words = 0;
};

inline constexpr std::size_t kMaxWordTree = std::size_t{1} << 24;

// Exact iterates over the full word tree, with weight exp(z log||g v||/||v||)
// for v spanning the line of x0. Throws TreeTooLarge past maxWords nodes.
IterateNorms iterate_norm_estimate(const MeasureSpec& spec, Complex z, const std::function<Complex(const FlagPoint&)>& f,
                                   int nIter, const FlagPoint& x0, std::size_t maxWords = kMaxWordTree);

// Grid estimate of the stationary measure: the normalized left fixed vector of P_0.
Vector stationary_grid_weights(const MeasureSpec& spec, int n);
// sum_j w_j sum_i p_i sigma(g_i, theta_j) for the weights above.
double grid_lyapunov(const MeasureSpec& spec, int n);

struct ResolventRow {
    Complex z{};
    Complex value{};        // z u(theta_0)
    double deviation = 0.0;  // sup_j |z u_j - pole|
    double relativeDeviation = 0.0;
    double pole = 0.0;       // -(1/sigma) sum_j w_j f_j
};

// Solves (I - P_z) u = f on the grid. The pole of the resolvent at z = 0 has
// residue -(1/sigma) times the projection onto constants for this sign
// convention of P_z. |z| < 1e-3 is refused, |z| > 0.2 rejected.
std::vector<ResolventRow> resolvent_pole_check(const MeasureSpec& spec, const std::vector<Complex>& zList, int n,
                                               const std::function<double(double)>& f);

struct AbelianContrast {
    std::vector<double> b;    // increasing frequencies with |1 - lambda(ib)| below the tolerance
    std::vector<double> gap;  // the values |1 - lambda(ib)| there
};

// lambda = law of log ||g|| for g ~ mu, whose characteristic function
// returns close to 1 along a sequence of b tending to infinity.
AbelianContrast abelian_contrast(const MeasureSpec& spec, double bMin, double bMax, double tol);

}  // namespace flagwalk
