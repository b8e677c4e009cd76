#include "flagwalk/exterior.hpp"

#include <cmath>

#include "flagwalk/error.hpp"

namespace flagwalk {

namespace {

double minor_det(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
    const auto d = static_cast<Eigen::Index>(rows.size());
    if (d == 1) return a(rows[0], cols[0]);
    if (d == 2) return a(rows[0], cols[0]) * a(rows[1], cols[1]) - a(rows[0], cols[1]) * a(rows[1], cols[0]);
    Matrix sub(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) sub(i, j) = a(rows[i], cols[j]);
    return sub.determinant();
}

void check_degree(int m, int d) {
    if (d < 1 || d > m) throw InvalidArgument("exterior degree must lie in 1..m");
}

}  // namespace

ExteriorMatrix exterior_power(const Matrix& a, int d) {
    if (a.rows() != a.cols()) throw InvalidArgument("exterior power of a non-square matrix");
    const auto n = static_cast<int>(a.rows());
    if (d < 1 || d > n) throw InvalidArgument("exterior degree out of range");
    ExteriorMatrix out;
    out.degree = d;
    out.basis = subsets(n, d);
    const auto dim = static_cast<Eigen::Index>(out.basis.size());
    out.entries.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            out.entries(i, j) = minor_det(a, out.basis[i], out.basis[j]);
    return out;
}

ExteriorMatrix exterior_power(const GroupElement& g, int d) {
    check_degree(g.rank(), d);
    return exterior_power(g.matrix(), d);
}

Vector wedge(const Matrix& v) {
    const auto n = static_cast<int>(v.rows());
    const auto d = static_cast<int>(v.cols());
    if (d == 1) return v.col(0);
    const auto basis = subsets(n, d);
    std::vector<int> cols(d);
    for (int j = 0; j < d; ++j) cols[j] = j;
    Vector out(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) out(static_cast<Eigen::Index>(i)) = minor_det(v, basis[i], cols);
    return out;
}

Vector wedge_columns(const Matrix& k, std::span<const int> cols) {
    Matrix v(k.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = k.col(cols[j]);
    return wedge(v);
}

Vector leading_wedge(const Matrix& k, int d) { return wedge(k.leftCols(d)); }

double gamma12(const Matrix& a) {
    const double top = spectral_norm(a);
    if (a.rows() < 2) return 0.0;
    const double second = spectral_norm(exterior_power(a, 2).entries);
    return second / (top * top);
}

double gamma12(const GroupElement& g, int d) {
    check_degree(g.rank(), d);
    return gamma12(exterior_power(g.matrix(), d).entries);
}

DensityPair linear_density_points(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw DecompositionFailed("singular value factorization failed");
    DensityPair out;
    out.xM = svd.matrixU().col(0);
    out.ym = svd.matrixV().col(0);
    const Vector& s = svd.singularValues();
    out.degenerate = s.size() > 1 && (s(1) <= 0.0 || std::log(s(0)) - std::log(s(1)) <= 1e-10);
    return out;
}

DensityPair density_points(const GroupElement& g, int d) {
    check_degree(g.rank(), d);
    const CartanTriple c = cartan_decompose(g);
    DensityPair out;
    out.xM = leading_wedge(c.k, d);
    out.ym = leading_wedge(c.l.transpose(), d);
    out.degenerate = c.kappa(d - 1) - c.kappa(d) <= 1e-10;
    return out;
}

double operator_norm_identity_check(const GroupElement& g, int d) {
    check_degree(g.rank(), d);
    const CartanTriple c = cartan_decompose(g);
    const double lhs = std::log(spectral_norm(exterior_power(g.matrix(), d).entries));
    return std::abs(lhs - c.kappa.head(d).sum());
}

}  // namespace flagwalk
