#pragma once

#include <string>
#include <vector>

#include "flagwalk/exterior.hpp"
#include "flagwalk/lie.hpp"
#include "flagwalk/linalg.hpp"

namespace flagwalk {

// Point of the sign cover: an element k of SO(m+1), i.e. the flag together
// with orientations of its successive quotients.
class SignedFlag {
public:
    explicit SignedFlag(Matrix k);
    static SignedFlag base(int m);

    const Matrix& k() const { return k_; }
    int rank() const { return static_cast<int>(k_.rows()) - 1; }

private:
    Matrix k_;
};

// Point of the full flag variety, represented by any k in SO(m+1) whose
// leading columns span the flag. Only sign-invariant quantities are exported.
// The same representation is used for points on the dual side, where the
// pairing with a flag is <wedge^d k e_{1..d}, wedge^d k'' e_{1..d}>.
class FlagPoint {
public:
    explicit FlagPoint(Matrix k);
    FlagPoint(const SignedFlag& z) : FlagPoint(z.k()) {}  // NOLINT: projection to the flag variety

    static FlagPoint base(int m);
    // Image of the base flag under the longest Weyl element (reversed basis).
    static FlagPoint opposite(int m);

    const Matrix& k() const { return k_; }
    int rank() const { return static_cast<int>(k_.rows()) - 1; }
    Vector wedge(int d) const { return leading_wedge(k_, d); }

private:
    Matrix k_;
};

// Attracting flag k_g eta_o and repelling dual point (l_g)^T zeta_o.
FlagPoint attracting_flag(const GroupElement& g);
FlagPoint repelling_flag(const GroupElement& g);
FlagPoint attracting_flag(const CartanTriple& c);
FlagPoint repelling_flag(const CartanTriple& c);

double dist_alpha(const FlagPoint& a, const FlagPoint& b, int d);
double dist_flag(const FlagPoint& a, const FlagPoint& b);
double delta_alpha(const FlagPoint& eta, const FlagPoint& zeta, int d);
double delta(const FlagPoint& eta, const FlagPoint& zeta);

// g eta for an invertible matrix with positive determinant.
FlagPoint act(const Matrix& a, const FlagPoint& eta);
FlagPoint act(const GroupElement& g, const FlagPoint& eta);
SignedFlag act(const GroupElement& g, const SignedFlag& z);

// sigma(g, eta): log-diagonal of the triangular factor of g k.
Vector iwasawa_cocycle(const GroupElement& g, const FlagPoint& eta);
Vector iwasawa_cocycle(const Matrix& a, double logScale, const FlagPoint& eta);

// Derivative along the alpha_d-circle of t -> chi_d sigma(g, k R_{d,d+1}(t)) at t = 0.
double cocycle_derivative(const GroupElement& g, const SignedFlag& z, int d);

// Element of the sign group M (diagonal +-1, det 1), or zero on the boundary
// of the big Bruhat cell.
struct SignElement {
    bool zero = false;
    Eigen::VectorXi diag;

    bool is_identity() const { return !zero && (diag.array() == 1).all(); }
    SignElement operator*(const SignElement& o) const;
    bool operator==(const SignElement& o) const;
    Matrix matrix() const;
};

SignElement sign_m(const Matrix& g, const Matrix& h);
SignElement sign_m(const GroupElement& g, const GroupElement& h);
SignElement sign_m(const SignedFlag& a, const SignedFlag& b);

// k R_{d,d+1}(t); d is 1-based.
SignedFlag alpha_circle_point(const SignedFlag& z, int d, double t);
// arcsin of the projective distance of two points on a common alpha_d-circle.
double arc_distance(const SignedFlag& a, const SignedFlag& b, int d);

// Distances on SO(m+1): max_d ||k v_d - k' v_d|| / sqrt 2 and the
// bi-invariant distance ||log(k^T k')||_F.
double lift_distance_d0(const SignedFlag& a, const SignedFlag& b);
double lift_distance_d1(const SignedFlag& a, const SignedFlag& b);

// Chains of flags moving along alpha-circles so that their g-images meet.
struct FlagMove {
    int degree = 1;
    double angle = 0.0;
    double stepDistance = 0.0;    // d(g eta_j, g eta_{j+1})
    double stepAlpha = 0.0;       // d_alpha(g eta_j, g eta_{j+1})
    double targetDistance = 0.0;  // d_alpha(g eta, g eta')
    double scale = 0.0;           // gap(g) e^{-alpha kappa(g)}
};

struct ChangeFlagsResult {
    std::vector<FlagPoint> chain;       // starts at eta, uses odd-indexed roots
    std::vector<FlagPoint> chainPrime;  // starts at eta', uses even-indexed roots
    std::vector<FlagMove> moves;
    std::vector<FlagMove> movesPrime;
    std::vector<double> endpointDistance;  // d_alpha(g eta_end, g eta'_end), per degree
    std::vector<double> endpointScale;     // gap(g) e^{-alpha kappa(g)}, per degree
    // Smallest C with |step - target| <= C * scale and endpoint <= C * scale.
    double moveConstant = 0.0;
    double endpointConstant = 0.0;
};

// Throws PreconditionViolated naming the separation conditions that fail.
ChangeFlagsResult change_flags(const FlagPoint& eta, const FlagPoint& etaPrime,
                               const GroupElement& g, double separation);

}  // namespace flagwalk
