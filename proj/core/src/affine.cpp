#include <algorithm>
#include <cmath>
#include <limits>

#include "flagwalk/error.hpp"
#include "flagwalk/noncon.hpp"

namespace flagwalk {

Vector e_d_map(const Vector& x, int d) {
    const auto m = static_cast<int>(x.size());
    if (m < 1) throw InvalidArgument("e_d_map: empty input");
    if (d < 0 || d > m) throw InvalidArgument("e_d_map: degree must lie in 0..m");
    for (int j = 0; j < m; ++j)
        if (!(x(j) > 0.0) || !std::isfinite(x(j))) throw DomainError("e_d_map: input must be strictly positive");
    const RootData roots = structural_constants(m);
    Vector y(d);
    for (int i = 0; i < d; ++i) {
        double logY = 0.0;
        for (int j = 0; j < m; ++j) logY += roots.L(i, j) * std::log(x(j));
        y(i) = std::exp(logY);
    }
    return y;
}

namespace {

int check_cloud(const std::vector<Vector>& points) {
    if (points.empty()) throw InvalidArgument("affine: need d+1 points");
    const auto d = static_cast<int>(points.size()) - 1;
    for (const Vector& p : points)
        if (p.size() != d) throw InvalidArgument("affine: need d+1 points in R^d");
    return d;
}

double width_along(const std::vector<Vector>& points, const Vector& w) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Vector& p : points) {
        const double t = w.dot(p);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    return hi - lo;
}

}  // namespace

double affine_det(const std::vector<Vector>& points) {
    const int d = check_cloud(points);
    if (d == 0) return 1.0;
    Matrix a(d + 1, d + 1);
    for (int i = 0; i <= d; ++i) {
        a.col(i).head(d) = points[i];
        a(d, i) = 1.0;
    }
    return a.partialPivLu().determinant();
}

AffineVolume affine_volume(const std::vector<Vector>& points) {
    const int d = check_cloud(points);
    if (d == 0) throw InvalidArgument("affine_volume: dimension must be positive");
    AffineVolume out;
    for (const Vector& p : points) out.radius = std::max(out.radius, p.norm());
    out.wedgeSum = std::abs(affine_det(points));

    Matrix v(d, d);
    for (int i = 0; i < d; ++i) v.col(i) = points[i] - points[d];
    const Eigen::HouseholderQR<Matrix> qr(v);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    out.spanDistance = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) out.spanDistance = std::min(out.spanDistance, std::abs(r(i, i)));

    // The thinnest slab around a simplex has every vertex on one of its two
    // faces, so it is found by splitting the vertices in two groups.
    double best = std::numeric_limits<double>::infinity();
    const int count = d + 1;
    for (unsigned mask = 1; mask < (1u << count) - 1; ++mask) {
        if (mask & 1u) continue;  // each split once: vertex 0 always in the second group
        std::vector<int> s, t;
        for (int i = 0; i < count; ++i) ((mask >> i) & 1u ? s : t).push_back(i);
        Matrix diffs(d - 1, d);
        int row = 0;
        for (std::size_t i = 1; i < s.size(); ++i) diffs.row(row++) = (points[s[i]] - points[s[0]]).transpose();
        for (std::size_t i = 1; i < t.size(); ++i) diffs.row(row++) = (points[t[i]] - points[t[0]]).transpose();
        Vector w;
        if (d == 1) {
            w = Vector::Ones(1);
        } else {
            Eigen::JacobiSVD<Matrix> svd(diffs, Eigen::ComputeFullV);
            w = svd.matrixV().col(d - 1);
        }
        best = std::min(best, width_along(points, w));
    }
    // Best-fit normal, which covers affinely dependent clouds.
    Matrix centered(count, d);
    Vector mean = Vector::Zero(d);
    for (const Vector& p : points) mean += p;
    mean /= count;
    for (int i = 0; i < count; ++i) centered.row(i) = (points[i] - mean).transpose();
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullV);
    best = std::min(best, width_along(points, svd.matrixV().col(d - 1)));
    out.nearHyperplane = 0.5 * best;
    return out;
}

double max_slab_fraction(const std::vector<Vector>& points, const std::vector<Vector>& directions, double halfWidth) {
    if (points.empty()) return 0.0;
    if (!(halfWidth >= 0.0)) throw InvalidArgument("slab width must be non-negative");
    std::vector<double> proj(points.size());
    std::size_t best = 0;
    for (const Vector& v : directions) {
        for (std::size_t i = 0; i < points.size(); ++i) proj[i] = v.dot(points[i]);
        std::sort(proj.begin(), proj.end());
        std::size_t lo = 0;
        for (std::size_t hi = 0; hi < proj.size(); ++hi) {
            while (proj[hi] - proj[lo] > 2.0 * halfWidth) ++lo;
            best = std::max(best, hi - lo + 1);
        }
    }
    return static_cast<double>(best) / static_cast<double>(points.size());
}

std::vector<Vector> slab_directions(int dim, std::size_t count, std::uint64_t seed) {
    if (dim < 1) throw InvalidArgument("slab directions: dimension must be positive");
    std::vector<Vector> out;
    if (dim == 1) {
        out.push_back(Vector::Ones(1));
        return out;
    }
    for (int i = 0; i < dim && out.size() < count; ++i) out.push_back(Vector::Unit(dim, i));
    Rng rng(seed, kAuxStream + 1);
    while (out.size() < count) out.push_back(random_unit_vector(dim, rng));
    return out;
}

}  // namespace flagwalk
