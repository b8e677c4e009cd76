#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "flagwalk/error.hpp"
#include "flagwalk/spectral.hpp"

namespace flagwalk {

namespace {

// Swaps the adjacent diagonal entries p, p+1 of the upper triangular t by a
// unitary similarity, accumulated into q.
void swap_schur(CMatrix& t, CMatrix& q, Eigen::Index p) {
    const Complex x0 = t(p, p + 1);
    const Complex x1 = t(p + 1, p + 1) - t(p, p);
    const double r = std::hypot(std::abs(x0), std::abs(x1));
    if (r == 0.0) return;
    Eigen::Matrix2cd g;
    g << x0 / r, -std::conj(x1) / r, x1 / r, std::conj(x0) / r;
    t.middleRows(p, 2) = g.adjoint() * t.middleRows(p, 2);
    t.middleCols(p, 2) = t.middleCols(p, 2) * g;
    q.middleCols(p, 2) = q.middleCols(p, 2) * g;
    t(p + 1, p) = Complex{};
}

// Reorders the Schur form by decreasing modulus of the diagonal.
void sort_schur(CMatrix& t, CMatrix& q) {
    const Eigen::Index m = t.rows();
    for (Eigen::Index pass = 0; pass < m; ++pass) {
        bool swapped = false;
        for (Eigen::Index p = 0; p + 1 < m - pass; ++p) {
            if (std::abs(t(p + 1, p + 1)) > std::abs(t(p, p))) {
                swap_schur(t, q, p);
                swapped = true;
            }
        }
        if (!swapped) break;
    }
}

CVector random_start(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed, kAuxStream + 2);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v / v.norm();
}

}  // namespace

EigenEstimate dominant_eigenvalue(const LinearOperator& op, Eigen::Index n, const KrylovOptions& opts) {
    if (n < 1) throw InvalidArgument("eigen solver: empty operator");
    if (opts.krylovDim < 3 || opts.keep < 1) throw InvalidArgument("eigen solver: bad Krylov dimensions");
    const Eigen::Index big = std::min<Eigen::Index>(opts.krylovDim, n);
    const Eigen::Index keep = std::max<Eigen::Index>(1, std::min<Eigen::Index>(opts.keep, big - 2));

    CMatrix v(n, big + 1);
    CMatrix h = CMatrix::Zero(big + 1, big);
    v.col(0) = random_start(n, opts.seed);
    CVector w(n);
    Eigen::Index start = 0;
    EigenEstimate out;

    while (true) {
        Eigen::Index size = big;
        bool breakdown = false;
        for (Eigen::Index j = start; j < big; ++j) {
            op(v.col(j), w);
            ++out.matvecs;
            // Classical Gram-Schmidt, applied twice.
            CVector coef = v.leftCols(j + 1).adjoint() * w;
            w -= v.leftCols(j + 1) * coef;
            const CVector again = v.leftCols(j + 1).adjoint() * w;
            w -= v.leftCols(j + 1) * again;
            coef += again;
            h.col(j).head(j + 1) += coef;
            const double beta = w.norm();
            h(j + 1, j) = beta;
            if (beta <= 1e-14 * std::max(1.0, coef.norm())) {
                size = j + 1;
                breakdown = true;
                break;
            }
            v.col(j + 1) = w / beta;
        }

        Eigen::ComplexSchur<CMatrix> schur(h.topLeftCorner(size, size));
        if (schur.info() != Eigen::Success) throw EstimationFailed("eigen solver: Schur factorization failed");
        CMatrix t = schur.matrixT().triangularView<Eigen::Upper>();
        CMatrix q = schur.matrixU();
        sort_schur(t, q);

        const Complex lambda = t(0, 0);
        const double tail = breakdown ? 0.0 : std::abs(h(size, size - 1));
        out.residual = tail * std::abs(q(size - 1, 0));
        if (breakdown || out.residual <= opts.tol * std::max(std::abs(lambda), 1e-300)) {
            out.eigenvalue = lambda;
            out.radius = std::abs(lambda);
            out.vector = v.leftCols(size) * q.col(0);
            out.vector /= out.vector.norm();
            return out;
        }
        if (out.matvecs >= opts.maxMatvecs)
            throw EstimationFailed("eigen solver: no convergence after " + std::to_string(out.matvecs) +
                                   " operator applications (residual " + std::to_string(out.residual) + ")");

        // Keep the leading Schur vectors and continue the Krylov-Schur relation.
        const CVector tailRow = tail * q.row(size - 1).head(keep).transpose();
        const CMatrix kept = v.leftCols(size) * q.leftCols(keep);
        v.leftCols(keep) = kept;
        v.col(keep) = v.col(size);
        h.setZero();
        h.topLeftCorner(keep, keep) = t.topLeftCorner(keep, keep);
        h.row(keep).head(keep) = tailRow.transpose();
        start = keep;
    }
}

}  // namespace flagwalk
