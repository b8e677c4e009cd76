#include "flagwalk/linalg.hpp"

#include <cmath>

#include "flagwalk/error.hpp"

namespace flagwalk {

std::vector<std::vector<int>> subsets(int n, int d) {
    std::vector<std::vector<int>> out;
    if (d < 0 || d > n) return out;
    std::vector<int> cur(d);
    for (int i = 0; i < d; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = d - 1;
        while (i >= 0 && cur[i] == n - d + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < d; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

long binomial(int n, int d) {
    if (d < 0 || d > n) return 0;
    long r = 1;
    for (int i = 1; i <= d; ++i) r = r * (n - d + i) / i;
    return r;
}

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    if (a.rows() == 1 || a.cols() == 1) return a.norm();
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

Matrix plane_rotation(int n, int i, int j, double t) {
    Matrix r = Matrix::Identity(n, n);
    const double c = std::cos(t);
    const double s = std::sin(t);
    r(i, i) = c;
    r(j, j) = c;
    r(j, i) = s;
    r(i, j) = -s;
    return r;
}

Matrix orthonormalize(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

Matrix random_rotation(int n, Rng& rng) {
    Matrix g(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
    Matrix q = orthonormalize(g);
    if (q.determinant() < 0) q.col(n - 1) = -q.col(n - 1);
    return q;
}

Matrix random_unimodular(int n, Rng& rng, double spread) {
    Matrix g(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = spread * rng.normal();
    double det = g.determinant();
    if (det < 0) {
        g.col(0) = -g.col(0);
        det = -det;
    }
    if (!(det > 0)) return Matrix::Identity(n, n);
    return g / std::pow(det, 1.0 / n);
}

Vector random_unit_vector(int n, Rng& rng) {
    Vector v(n);
    do {
        for (int i = 0; i < n; ++i) v(i) = rng.normal();
    } while (v.norm() == 0.0);
    return v / v.norm();
}

double proj_distance(const Vector& v, const Vector& w) {
    const double nv = v.norm();
    const double nw = w.norm();
    if (nv == 0.0 || nw == 0.0) throw DomainError("projective distance of a zero vector");
    const Vector u = v / nv;
    const Vector x = w / nw;
    const double d = (x - u.dot(x) * u).norm();
    return std::min(1.0, d);
}

double proj_delta(const Vector& v, const Vector& f) {
    const double nv = v.norm();
    const double nf = f.norm();
    if (nv == 0.0 || nf == 0.0) throw DomainError("projective delta of a zero vector");
    return std::min(1.0, std::abs(f.dot(v)) / (nv * nf));
}

Vector wedge2(const Vector& v, const Vector& w) {
    const auto n = static_cast<int>(v.size());
    Vector out(binomial(n, 2));
    Eigen::Index idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out(idx++) = v(i) * w(j) - v(j) * w(i);
    return out;
}

}  // namespace flagwalk
