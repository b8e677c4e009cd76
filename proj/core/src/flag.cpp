#include "flagwalk/flag.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <vector>

#include "flagwalk/error.hpp"

namespace flagwalk {

namespace {

constexpr double kOrthoTolerance = 1e-10;
constexpr double kSignZero = 1e-12;
constexpr double kSignAmbiguous = 1e-9;

void check_orthogonal(const Matrix& k) {
    if (k.rows() != k.cols() || k.rows() < 2) throw InvalidArgument("flag representative must be square, size >= 2");
    if (!k.allFinite()) throw InvalidArgument("flag representative has non-finite entries");
    const double err = (k.transpose() * k - Matrix::Identity(k.rows(), k.cols())).cwiseAbs().maxCoeff();
    if (err > kOrthoTolerance * static_cast<double>(k.rows()))
        throw InvalidArgument("flag representative is not orthogonal");
}

void check_degree(int m, int d) {
    if (d < 1 || d > m) throw InvalidArgument("degree must lie in 1..m");
}

void check_same_rank(int a, int b) {
    if (a != b) throw InvalidArgument("rank mismatch between flags");
}

}  // namespace

SignedFlag::SignedFlag(Matrix k) : k_(std::move(k)) {
    check_orthogonal(k_);
    if (k_.determinant() < 0) throw InvalidArgument("signed flag needs determinant +1");
}

SignedFlag SignedFlag::base(int m) { return SignedFlag(Matrix::Identity(m + 1, m + 1)); }

FlagPoint::FlagPoint(Matrix k) : k_(std::move(k)) {
    check_orthogonal(k_);
    if (k_.determinant() < 0) k_.col(k_.cols() - 1) = -k_.col(k_.cols() - 1);
}

FlagPoint FlagPoint::base(int m) { return FlagPoint(Matrix::Identity(m + 1, m + 1)); }

FlagPoint FlagPoint::opposite(int m) {
    const int n = m + 1;
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) w(n - 1 - i, i) = 1.0;
    return FlagPoint(w);
}

FlagPoint attracting_flag(const CartanTriple& c) { return FlagPoint(c.k); }
FlagPoint repelling_flag(const CartanTriple& c) { return FlagPoint(c.l.transpose()); }
FlagPoint attracting_flag(const GroupElement& g) { return attracting_flag(cartan_decompose(g)); }
FlagPoint repelling_flag(const GroupElement& g) { return repelling_flag(cartan_decompose(g)); }

double dist_alpha(const FlagPoint& a, const FlagPoint& b, int d) {
    check_same_rank(a.rank(), b.rank());
    check_degree(a.rank(), d);
    return proj_distance(a.wedge(d), b.wedge(d));
}

double dist_flag(const FlagPoint& a, const FlagPoint& b) {
    double best = 0.0;
    for (int d = 1; d <= a.rank(); ++d) best = std::max(best, dist_alpha(a, b, d));
    return best;
}

double delta_alpha(const FlagPoint& eta, const FlagPoint& zeta, int d) {
    check_same_rank(eta.rank(), zeta.rank());
    check_degree(eta.rank(), d);
    return proj_delta(eta.wedge(d), zeta.wedge(d));
}

double delta(const FlagPoint& eta, const FlagPoint& zeta) {
    double best = 1.0;
    for (int d = 1; d <= eta.rank(); ++d) best = std::min(best, delta_alpha(eta, zeta, d));
    return best;
}

FlagPoint act(const Matrix& a, const FlagPoint& eta) {
    return FlagPoint(iwasawa_decompose(a * eta.k(), 0.0).k);
}

FlagPoint act(const GroupElement& g, const FlagPoint& eta) { return act(g.matrix(), eta); }

SignedFlag act(const GroupElement& g, const SignedFlag& z) {
    return SignedFlag(iwasawa_decompose(g.matrix() * z.k(), 0.0).k);
}

Vector iwasawa_cocycle(const Matrix& a, double logScale, const FlagPoint& eta) {
    if (a.rows() != eta.k().rows()) throw InvalidArgument("rank mismatch between group element and flag");
    return iwasawa_decompose(a * eta.k(), logScale).sigma;
}

Vector iwasawa_cocycle(const GroupElement& g, const FlagPoint& eta) {
    return iwasawa_cocycle(g.matrix(), 0.0, eta);
}

double cocycle_derivative(const GroupElement& g, const SignedFlag& z, int d) {
    check_same_rank(g.rank(), z.rank());
    check_degree(g.rank(), d);
    const Matrix a = g.matrix() * z.k();
    std::vector<int> cols(d);
    for (int i = 0; i < d - 1; ++i) cols[i] = i;
    cols[d - 1] = d;
    const Vector v = leading_wedge(a, d);
    const Vector u = wedge_columns(a, cols);
    return v.dot(u) / v.squaredNorm();
}

SignElement SignElement::operator*(const SignElement& o) const {
    SignElement out;
    if (zero || o.zero) {
        out.zero = true;
        return out;
    }
    out.diag = diag.cwiseProduct(o.diag);
    return out;
}

bool SignElement::operator==(const SignElement& o) const {
    if (zero || o.zero) return zero == o.zero;
    return diag == o.diag;
}

Matrix SignElement::matrix() const {
    if (zero) return Matrix::Zero(diag.size(), diag.size());
    return diag.cast<double>().asDiagonal();
}

SignElement sign_m(const Matrix& g, const Matrix& h) {
    if (g.rows() != h.rows() || g.rows() != g.cols() || h.rows() != h.cols())
        throw InvalidArgument("sign_m: shape mismatch");
    const auto n = static_cast<int>(g.rows());
    const int m = n - 1;
    std::vector<double> inner(m);
    for (int d = 1; d <= m; ++d) {
        const Vector a = leading_wedge(g, d);
        const Vector b = leading_wedge(h, d);
        inner[d - 1] = a.dot(b) / (a.norm() * b.norm());
    }
    SignElement out;
    for (double c : inner)
        if (std::abs(c) <= kSignZero) {
            out.zero = true;
            out.diag = Eigen::VectorXi::Zero(n);
            return out;
        }
    for (double c : inner)
        if (std::abs(c) < kSignAmbiguous)
            throw AmbiguousSign("sign_m: pairing too close to zero to decide its sign; perturb the input");
    out.diag.resize(n);
    int prev = 1;
    for (int d = 1; d <= m; ++d) {
        const int s = inner[d - 1] > 0 ? 1 : -1;
        out.diag(d - 1) = s * prev;
        prev = s;
    }
    out.diag(m) = prev;
    return out;
}

SignElement sign_m(const GroupElement& g, const GroupElement& h) { return sign_m(g.matrix(), h.matrix()); }
SignElement sign_m(const SignedFlag& a, const SignedFlag& b) { return sign_m(a.k(), b.k()); }

SignedFlag alpha_circle_point(const SignedFlag& z, int d, double t) {
    check_degree(z.rank(), d);
    return SignedFlag(z.k() * plane_rotation(z.rank() + 1, d - 1, d, t));
}

double arc_distance(const SignedFlag& a, const SignedFlag& b, int d) {
    check_same_rank(a.rank(), b.rank());
    check_degree(a.rank(), d);
    const Matrix rel = a.k().transpose() * b.k();
    const double t = std::atan2(rel(d, d - 1), rel(d - 1, d - 1));
    const double residual = (rel - plane_rotation(a.rank() + 1, d - 1, d, t)).cwiseAbs().maxCoeff();
    if (residual > 1e-8) throw NotOnCircle("arc_distance: points are not on a common alpha-circle");
    return std::asin(std::min(1.0, dist_alpha(FlagPoint(a), FlagPoint(b), d)));
}

double lift_distance_d0(const SignedFlag& a, const SignedFlag& b) {
    check_same_rank(a.rank(), b.rank());
    double best = 0.0;
    for (int d = 1; d <= a.rank(); ++d)
        best = std::max(best, (leading_wedge(a.k(), d) - leading_wedge(b.k(), d)).norm());
    return best / std::numbers::sqrt2;
}

double lift_distance_d1(const SignedFlag& a, const SignedFlag& b) {
    check_same_rank(a.rank(), b.rank());
    const Matrix rel = a.k().transpose() * b.k();
    const Matrix logRel = rel.log();
    return logRel.norm();
}

}  // namespace flagwalk
