#include "flagwalk/lie.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "flagwalk/error.hpp"

namespace flagwalk {

namespace {

constexpr double kDetTolerance = 1e-9;

void require_square(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() < 2)
        throw InvalidArgument("group element must be a square matrix of size >= 2");
    if (!a.allFinite()) throw InvalidArgument("group element has non-finite entries");
}

// Replaces the last component by minus the sum of the others, clamped so
// that the vector stays non-increasing when `sorted` is set.
void close_trace(Vector& v, bool sorted) {
    const Eigen::Index n = v.size();
    double last = -v.head(n - 1).sum();
    if (sorted && last > v(n - 2)) last = v(n - 2);
    v(n - 1) = last;
}

// True when det(a) = 1 within the round-off of computing it. For an
// ill-conditioned product of unimodular matrices the computed determinant
// is mostly noise, of relative size about eps * cond(a).
bool unimodular_within_roundoff(const Matrix& a, double det) {
    if (std::abs(det - 1.0) <= kDetTolerance) return true;
    const Vector s = Eigen::JacobiSVD<Matrix>(a).singularValues();
    const double smallest = s(s.size() - 1);
    if (!(smallest > 0.0)) return false;
    const double noise = 8.0 * static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * s(0) / smallest;
    return std::abs(det - 1.0) <= noise;
}

}  // namespace

GroupElement::GroupElement(Matrix entries) : a_(std::move(entries)) {
    require_square(a_);
    const double det = a_.determinant();
    if (!unimodular_within_roundoff(a_, det))
        throw InvalidArgument("group element determinant " + std::to_string(det) + " is not 1");
}

GroupElement GroupElement::normalized(const Matrix& entries) {
    require_square(entries);
    const double det = entries.determinant();
    // Rescaling by a noisy determinant would shift every log singular value.
    if (unimodular_within_roundoff(entries, det)) return GroupElement(entries, Unchecked{});
    if (!(det > 0.0))
        throw InvalidArgument("cannot normalize a matrix with non-positive determinant");
    const double scale = std::pow(det, -1.0 / static_cast<double>(entries.rows()));
    return GroupElement(entries * scale, Unchecked{});
}

GroupElement GroupElement::identity(int m) {
    if (m < 1) throw InvalidArgument("rank must be at least 1");
    return GroupElement(Matrix::Identity(m + 1, m + 1), Unchecked{});
}

GroupElement GroupElement::diagonal(const Vector& logEntries) {
    if (logEntries.size() < 2) throw InvalidArgument("diagonal element needs size >= 2");
    if (std::abs(logEntries.sum()) > kDetTolerance * std::max(1.0, logEntries.norm()))
        throw InvalidArgument("diagonal exponent must be trace-zero");
    return GroupElement(Matrix(logEntries.array().exp().matrix().asDiagonal()), Unchecked{});
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
    if (dim() != other.dim()) throw InvalidArgument("rank mismatch in product");
    return normalized(a_ * other.a_);
}

GroupElement GroupElement::inverse() const { return normalized(a_.inverse()); }

GroupElement GroupElement::transpose() const { return GroupElement(a_.transpose(), Unchecked{}); }

Matrix CartanTriple::reconstruct() const { return k * kappa.array().exp().matrix().asDiagonal() * l; }

Matrix IwasawaTriple::reconstruct() const { return k * sigma.array().exp().matrix().asDiagonal() * n; }

namespace {
constexpr double kSignFloor = 1e-12;
}  // namespace

CartanTriple cartan_decompose(const Matrix& a, double logScale) {
    require_square(a);
    const Eigen::Index n = a.rows();
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw DecompositionFailed("singular value factorization failed");
    const Vector& s = svd.singularValues();
    CartanTriple out;
    out.k = svd.matrixU();
    out.l = svd.matrixV().transpose();
    if (out.k.determinant() < 0) {
        out.k.col(n - 1) = -out.k.col(n - 1);
        out.l.row(n - 1) = -out.l.row(n - 1);
    }
    if (out.l.determinant() < 0) {
        // Below round-off the sign of the last singular direction is noise;
        // the input is unimodular up to scale, so its determinant is positive.
        if (s(n - 1) > kSignFloor * s(0)) throw InvalidArgument("matrix has negative determinant");
        out.l.row(n - 1) = -out.l.row(n - 1);
    }
    out.kappa.resize(n);
    for (Eigen::Index i = 0; i < n - 1; ++i) {
        if (!(s(i) > 0.0) || !std::isfinite(s(i)))
            throw DecompositionFailed("degenerate singular value in Cartan decomposition");
        out.kappa(i) = std::log(s(i)) + logScale;
    }
    close_trace(out.kappa, true);
    return out;
}

CartanTriple cartan_decompose(const GroupElement& g) { return cartan_decompose(g.matrix(), 0.0); }

IwasawaTriple iwasawa_decompose(const Matrix& a, double logScale) {
    require_square(a);
    const Eigen::Index n = a.rows();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    const double top = r.cwiseAbs().maxCoeff();
    // The last diagonal entry only carries a sign (the projection is closed by
    // the trace). Long products push it below round-off, even to exactly 0, and
    // then the orientation of q decides it.
    const bool lastLost = std::abs(r(n - 1, n - 1)) <= kSignFloor * top;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == n - 1 && lastLost) break;
        if (r(j, j) == 0.0 || !std::isfinite(r(j, j)))
            throw DecompositionFailed("singular matrix in Iwasawa decomposition");
        if (r(j, j) < 0) {
            q.col(j) = -q.col(j);
            r.row(j) = -r.row(j);
        }
    }
    if (q.determinant() < 0) {
        if (!lastLost) throw InvalidArgument("matrix has negative determinant");
        q.col(n - 1) = -q.col(n - 1);
        r.row(n - 1) = -r.row(n - 1);
    }
    IwasawaTriple out;
    out.k = std::move(q);
    out.sigma.resize(n);
    for (Eigen::Index i = 0; i < n - 1; ++i) out.sigma(i) = std::log(r(i, i)) + logScale;
    close_trace(out.sigma, false);
    out.n = r.diagonal().cwiseInverse().asDiagonal() * r;
    out.n.row(n - 1).setZero();
    for (Eigen::Index i = 0; i < n; ++i) out.n(i, i) = 1.0;
    return out;
}

IwasawaTriple iwasawa_decompose(const GroupElement& g) { return iwasawa_decompose(g.matrix(), 0.0); }

Vector cartan_projection(const GroupElement& g) { return cartan_decompose(g).kappa; }

double gap_of(const Vector& kappa) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i + 1 < kappa.size(); ++i)
        worst = std::max(worst, std::exp(-(kappa(i) - kappa(i + 1))));
    return std::min(worst, 1.0);
}

double gap(const GroupElement& g) { return gap_of(cartan_projection(g)); }

Vector opposition_involution(const Vector& kappa) {
    if (kappa.size() < 2) throw InvalidArgument("opposition involution needs size >= 2");
    if (std::abs(kappa.sum()) > 1e-9 * std::max(1.0, kappa.norm()))
        throw InvalidArgument("opposition involution expects a trace-zero vector");
    return -kappa.reverse();
}

RootData structural_constants(int m) {
    if (m < 1) throw InvalidArgument("rank must be at least 1");
    RootData rd;
    rd.m = m;
    rd.L = Eigen::MatrixXi::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        rd.L(i, i) = -2;
        if (i + 1 < m) rd.L(i, i + 1) = rd.L(i + 1, i) = 1;
    }

    // A linear functional f on R^{m+1} restricted to the trace-zero subspace
    // attains its maximum on the unit sphere at the projection of f.
    const int n = m + 1;
    auto restricted_norm = [n](const Vector& f) {
        return (f.array() - f.mean()).matrix().norm();
    };
    double rootSup = 0.0;
    double weightSup = 0.0;
    for (int i = 0; i < m; ++i) {
        Vector alpha = Vector::Zero(n);
        alpha(i) = 1.0;
        alpha(i + 1) = -1.0;
        rootSup = std::max(rootSup, restricted_norm(alpha));
        Vector chi = Vector::Zero(n);
        chi.head(i + 1).setOnes();
        weightSup = std::max(weightSup, restricted_norm(chi));
    }

    // Reciprocal bound: the largest norm on {X : max_d |chi_d(X)| <= 1} is
    // reached at a vertex, i.e. at the X with prescribed partial sums y in
    // {-1, 1}^m.
    double reciprocal = 0.0;
    for (unsigned long mask = 0; mask < (1UL << m); ++mask) {
        Vector y(m);
        for (int d = 0; d < m; ++d) y(d) = (mask >> d) & 1UL ? 1.0 : -1.0;
        Vector x(n);
        x(0) = y(0);
        for (int d = 1; d < m; ++d) x(d) = y(d) - y(d - 1);
        x(m) = -y(m - 1);
        reciprocal = std::max(reciprocal, x.norm());
    }

    rd.C1prime = rootSup;
    rd.C1 = std::max(weightSup, reciprocal);
    rd.CA = 3.0 * rd.C1 + rd.C1prime;
    return rd;
}

}  // namespace flagwalk
