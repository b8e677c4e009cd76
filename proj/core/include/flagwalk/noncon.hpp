#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "flagwalk/flag.hpp"
#include "flagwalk/measure.hpp"
#include "flagwalk/parallel.hpp"
#include "flagwalk/stats.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk {

// s = sigma(g h, eta) - kappa(g) - n sigma_mu, with h = e^{logScale} a.
Vector cocycle_offset(const GroupElement& g, const Matrix& a, double logScale, const FlagPoint& eta, std::size_t n,
                      const Vector& sigma);
// The same for a walk product h, through sigma(g, h eta) + sigma(h, eta); stays
// accurate when h is too ill-conditioned to handle as one matrix.
Vector cocycle_offset(const GroupElement& g, const WalkState& h, const FlagPoint& eta, std::size_t n,
                      const Vector& sigma);

// Exponents are clamped to [-700, 700]; each clamped component bumps *clamped.
// (exp(-alpha_1 s), ..., exp(-alpha_m s))
Vector y_from_offset(const Vector& s, std::size_t* clamped = nullptr);
// (exp(chi_1 s), ..., exp(chi_m s))
Vector x_from_offset(const Vector& s, std::size_t* clamped = nullptr);

Vector y_vector(const GroupElement& g, const GroupElement& h, const FlagPoint& eta, std::size_t n,
                const Vector& sigma);
Vector x_vector(const GroupElement& g, const GroupElement& h, const FlagPoint& eta, std::size_t n,
                const Vector& sigma);

// y_i = prod_j x_j^{L_ij} for i = 1..d. Throws DomainError unless x > 0.
Vector e_d_map(const Vector& x, int d);

// Determinant of the (d+1) x (d+1) matrix with columns (y^i, 1). Returns 1
// for d = 0.
double affine_det(const std::vector<Vector>& points);

// The three affine-volume quantities of d+1 points u_1..u_{d+1} in R^d:
//   near-hyperplane: min over affine hyperplanes l of max_i d(u_i, l)
//   wedge sum:      || sum_i (-1)^i u_1 ^ .. (omit i) .. ^ u_{d+1} || = |affine_det|
//   span distance:  min_{i<=d} d(u_i, affine span of u_{d+1}, u_1, .., u_{i-1})
struct AffineVolume {
    double nearHyperplane = 0.0;
    double wedgeSum = 0.0;
    double spanDistance = 0.0;
    double radius = 0.0;  // max_i ||u_i||
};

AffineVolume affine_volume(const std::vector<Vector>& points);

// Largest fraction of points in a slab |<v, y> - a| <= halfWidth, searched
// over the given unit directions and all offsets. An under-estimate of the
// true sup when directions do not include the optimum.
double max_slab_fraction(const std::vector<Vector>& points, const std::vector<Vector>& directions, double halfWidth);

// Coordinate axes followed by random unit directions (auxiliary stream of seed).
std::vector<Vector> slab_directions(int dim, std::size_t count, std::uint64_t seed);

inline constexpr std::size_t kSlabDirections = 512;

struct NonconEstimate {
    double estimate = 0.0;
    double stdErr = 0.0;
    std::size_t samples = 0;
    std::size_t clamped = 0;
};

NonconEstimate pnc_estimate(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta, const GroupElement& g,
                            const Vector& sigma, double slabWidth, const McOptions& opts,
                            std::size_t directions = kSlabDirections);

// P(|A_d(E_d X^1, ..., E_d X^{d+1})| <= threshold) over independent tuples.
// With averaged set, every tuple uses its own flag l eta, l ~ mu^{*n}.
NonconEstimate snc_estimate(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta, int d, const Vector& sigma,
                            double threshold, const McOptions& opts, bool averaged = false,
                            const std::optional<GroupElement>& g = std::nullopt);

struct MultiscaleResult {
    std::vector<double> rho;
    std::vector<double> mass;  // sup slab mass among good samples, over all samples
    std::size_t good = 0;
    std::size_t samples = 0;
    std::size_t clamped = 0;
    std::optional<LineFit> fit;  // log mass against log rho
};

// Slab masses of the Y-cloud restricted to (n, eps, eta, zeta^m_g) good samples.
MultiscaleResult multiscale_noncon(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta,
                                   const GroupElement& g, const Vector& sigma, double eps,
                                   const std::vector<double>& rhoGrid, const McOptions& opts,
                                   std::size_t directions = kSlabDirections);

}  // namespace flagwalk
