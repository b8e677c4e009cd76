#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flagwalk/error.hpp"
#include "flagwalk/spectral.hpp"

namespace flagwalk {

LineImage act_on_angle(const Matrix& g, double theta) {
    const double x = g(0, 0) * std::cos(theta) + g(0, 1) * std::sin(theta);
    const double y = g(1, 0) * std::cos(theta) + g(1, 1) * std::sin(theta);
    double angle = std::atan2(y, x);
    if (angle < 0.0) angle += std::numbers::pi;
    if (angle >= std::numbers::pi) angle -= std::numbers::pi;
    return {std::log(std::hypot(x, y)), angle};
}

TransferDiscretization build_transfer(const MeasureSpec& spec, Complex z, int n) {
    if (spec.rank() != 1) throw InvalidArgument("build_transfer: grid discretization needs an SL(2) spec");
    if (n < 64) throw InvalidArgument("build_transfer: grid size must be at least 64");
    TransferDiscretization t;
    t.n_ = n;
    t.z_ = z;
    t.width_ = 2 * static_cast<int>(spec.size());
    t.theta_.resize(n);
    t.cols_.resize(static_cast<std::size_t>(n) * t.width_);
    t.vals_.resize(t.cols_.size());
    const double h = std::numbers::pi / n;
    for (int j = 0; j < n; ++j) {
        const double theta = j * h;
        t.theta_[j] = theta;
        std::size_t slot = static_cast<std::size_t>(j) * t.width_;
        for (const Atom& a : spec.atoms()) {
            const LineImage img = act_on_angle(a.g.matrix(), theta);
            const double pos = img.angle / h;
            const double base = std::floor(pos);
            const double frac = pos - base;
            const int j0 = static_cast<int>(base) % n;
            const int j1 = (j0 + 1) % n;
            const Complex w = a.weight * std::exp(z * img.sigma);
            t.cols_[slot] = j0;
            t.vals_[slot++] = w * (1.0 - frac);
            t.cols_[slot] = j1;
            t.vals_[slot++] = w * frac;
        }
    }
    return t;
}

void TransferDiscretization::apply(const CVector& in, CVector& out) const {
    out.resize(n_);
    for (int j = 0; j < n_; ++j) {
        Complex acc{};
        const std::size_t base = static_cast<std::size_t>(j) * width_;
        for (int s = 0; s < width_; ++s) acc += vals_[base + s] * in(cols_[base + s]);
        out(j) = acc;
    }
}

void TransferDiscretization::apply_transpose(const CVector& in, CVector& out) const {
    out = CVector::Zero(n_);
    for (int j = 0; j < n_; ++j) {
        const std::size_t base = static_cast<std::size_t>(j) * width_;
        for (int s = 0; s < width_; ++s) out(cols_[base + s]) += vals_[base + s] * in(j);
    }
}

CMatrix TransferDiscretization::dense() const {
    CMatrix m = CMatrix::Zero(n_, n_);
    for (int j = 0; j < n_; ++j) {
        const std::size_t base = static_cast<std::size_t>(j) * width_;
        for (int s = 0; s < width_; ++s) m(j, cols_[base + s]) += vals_[base + s];
    }
    return m;
}

Complex transfer_direct(const MeasureSpec& spec, Complex z, const std::function<Complex(double)>& f, double theta) {
    if (spec.rank() != 1) throw InvalidArgument("transfer_direct: needs an SL(2) spec");
    Complex acc{};
    for (const Atom& a : spec.atoms()) {
        const LineImage img = act_on_angle(a.g.matrix(), theta);
        acc += a.weight * std::exp(z * img.sigma) * f(img.angle);
    }
    return acc;
}

EigenEstimate spectral_radius(const TransferDiscretization& t, const KrylovOptions& opts) {
    return dominant_eigenvalue([&t](const CVector& in, CVector& out) { t.apply(in, out); }, t.size(), opts);
}

RefinedRadius spectral_radius_refined(const MeasureSpec& spec, Complex z, int n, const KrylovOptions& opts) {
    const EigenEstimate coarse = spectral_radius(build_transfer(spec, z, n), opts);
    const EigenEstimate fine = spectral_radius(build_transfer(spec, z, 2 * n), opts);
    RefinedRadius out;
    out.radius = coarse.radius;
    out.radiusRefined = fine.radius;
    out.refinementDelta = std::abs(coarse.radius - fine.radius);
    out.matvecs = coarse.matvecs + fine.matvecs;
    return out;
}

GapScan spectral_gap_scan(const MeasureSpec& spec, const std::vector<double>& aGrid, const std::vector<double>& bGrid,
                          int n, bool refine, double bMin, const KrylovOptions& opts) {
    if (aGrid.empty() || bGrid.empty()) throw InvalidArgument("spectral scan: empty grid");
    GapScan scan;
    for (double a : aGrid) {
        for (double b : bGrid) {
            ScanRow row;
            row.a = a;
            row.b = b;
            row.n = n;
            const Complex z(a, b);
            if (refine) {
                const RefinedRadius r = spectral_radius_refined(spec, z, n, opts);
                row.radius = r.radius;
                row.radiusRefined = r.radiusRefined;
                row.refinementDelta = r.refinementDelta;
                scan.maxDelta = std::max(scan.maxDelta, r.refinementDelta);
            } else {
                row.radius = spectral_radius(build_transfer(spec, z, n), opts).radius;
            }
            if (std::abs(b) >= bMin) scan.maxRadius = std::max(scan.maxRadius, row.radius);
            scan.rows.push_back(row);
        }
    }
    scan.minGap = 1.0 - scan.maxRadius;
    return scan;
}

IterateNorms iterate_norm_estimate(const MeasureSpec& spec, Complex z, const std::function<Complex(const FlagPoint&)>& f,
                                   int nIter, const FlagPoint& x0, std::size_t maxWords) {
    if (nIter < 0 || nIter > 20) throw InvalidArgument("iterate_norm_estimate: nIter must lie in 0..20");
    if (x0.rank() != spec.rank()) throw InvalidArgument("iterate_norm_estimate: rank mismatch");
    std::size_t nodes = 1;
    std::size_t level = 1;
    for (int k = 1; k <= nIter; ++k) {
        level *= spec.size();
        nodes += level;
        if (nodes > maxWords) throw TreeTooLarge("iterate_norm_estimate: word tree exceeds the node cap");
    }

    IterateNorms out;
    out.values.assign(nIter + 1, Complex{});
    out.words = nodes;
    // Depth-first walk; the flag is carried as an unnormalized frame and
    // re-orthonormalized at every node.
    struct Frame {
        Matrix k;
        Complex weight;
    };
    std::vector<Frame> stack;
    stack.push_back({x0.k(), Complex(1.0)});
    std::vector<int> depth{0};
    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        const int dpt = depth.back();
        depth.pop_back();
        out.values[dpt] += fr.weight * f(FlagPoint(fr.k));
        if (dpt == nIter) continue;
        for (const Atom& a : spec.atoms()) {
            const Matrix moved = a.g.matrix() * fr.k;
            const double growth = moved.col(0).norm();
            stack.push_back({orthonormalize(moved), fr.weight * a.weight * std::exp(z * std::log(growth))});
            depth.push_back(dpt + 1);
        }
    }
    std::vector<double> xs, ys;
    for (int k = 1; k <= nIter; ++k) {
        const double mod = std::abs(out.values[k]);
        if (mod > 0.0) {
            xs.push_back(k);
            ys.push_back(std::log(mod));
        }
    }
    if (xs.size() >= 3) {
        out.fit = fit_line(xs, ys);
        out.slope = out.fit->slope;
    }
    return out;
}

Vector stationary_grid_weights(const MeasureSpec& spec, int n) {
    const TransferDiscretization t = build_transfer(spec, Complex(0.0), n);
    KrylovOptions opts;
    const EigenEstimate e =
        dominant_eigenvalue([&t](const CVector& in, CVector& out) { t.apply_transpose(in, out); }, n, opts);
    const Complex phase = e.vector.sum();
    if (std::abs(phase) == 0.0) throw EstimationFailed("stationary grid weights vanished");
    Vector w = (e.vector * (std::conj(phase) / std::abs(phase))).real();
    w /= w.sum();
    return w;
}

double grid_lyapunov(const MeasureSpec& spec, int n) {
    const Vector w = stationary_grid_weights(spec, n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double theta = j * std::numbers::pi / n;
        double mean = 0.0;
        for (const Atom& a : spec.atoms()) mean += a.weight * act_on_angle(a.g.matrix(), theta).sigma;
        acc += w(j) * mean;
    }
    return acc;
}

std::vector<ResolventRow> resolvent_pole_check(const MeasureSpec& spec, const std::vector<Complex>& zList, int n,
                                               const std::function<double(double)>& f) {
    for (Complex z : zList) {
        if (std::abs(z) > 0.2) throw InvalidArgument("resolvent: |z| must be at most 0.2");
        if (std::abs(z) < 1e-3) throw SolveRefused("resolvent: |z| < 1e-3 is too close to the pole");
    }
    const Vector w = stationary_grid_weights(spec, n);
    const double sigma = grid_lyapunov(spec, n);
    if (!(sigma > 0.0)) throw EstimationFailed("resolvent: grid Lyapunov exponent is not positive");
    CVector rhs(n);
    double mean = 0.0;
    for (int j = 0; j < n; ++j) {
        const double v = f(j * std::numbers::pi / n);
        rhs(j) = v;
        mean += w(j) * v;
    }
    const double pole = -mean / sigma;

    std::vector<ResolventRow> rows;
    for (Complex z : zList) {
        const TransferDiscretization t = build_transfer(spec, z, n);
        Eigen::SparseMatrix<Complex> a(n, n);
        std::vector<Eigen::Triplet<Complex>> trip;
        for (int i = 0; i < n; ++i) {
            trip.emplace_back(i, i, Complex(1.0));
            const std::size_t base = static_cast<std::size_t>(i) * t.row_width();
            for (int s = 0; s < t.row_width(); ++s) trip.emplace_back(i, t.columns()[base + s], -t.values()[base + s]);
        }
        a.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) throw EstimationFailed("resolvent: sparse factorization failed");
        const CVector u = lu.solve(rhs);
        ResolventRow row;
        row.z = z;
        row.value = z * u(0);
        row.pole = pole;
        for (int j = 0; j < n; ++j) row.deviation = std::max(row.deviation, std::abs(z * u(j) - pole));
        row.relativeDeviation = pole != 0.0 ? row.deviation / std::abs(pole) : row.deviation;
        rows.push_back(row);
    }
    return rows;
}

AbelianContrast abelian_contrast(const MeasureSpec& spec, double bMin, double bMax, double tol) {
    if (!(bMax > bMin) || !(bMin > 0.0)) throw InvalidArgument("abelian contrast: need 0 < bMin < bMax");
    std::vector<double> x, p;
    for (const Atom& a : spec.atoms()) {
        x.push_back(std::log(spectral_norm(a.g.matrix())));
        p.push_back(a.weight);
    }
    auto gap = [&](double b) {
        Complex acc{};
        for (std::size_t i = 0; i < x.size(); ++i) acc += p[i] * std::exp(Complex(0.0, b * x[i]));
        return std::abs(1.0 - acc);
    };
    double spread = 0.0;
    for (double v : x) spread = std::max(spread, std::abs(v));
    // Resolve the fastest oscillation with ~50 points per period.
    const double step = spread > 0.0 ? 2.0 * std::numbers::pi / spread / 50.0 : (bMax - bMin);
    AbelianContrast out;
    double prev2 = gap(bMin);
    double prev = gap(bMin + step);
    for (double b = bMin + 2.0 * step; b <= bMax + step; b += step) {
        const double cur = gap(b);
        if (prev <= prev2 && prev <= cur) {
            // Golden-section refinement of the local minimum in [b - 2 step, b].
            double lo = b - 2.0 * step, hi = b;
            const double r = (std::sqrt(5.0) - 1.0) / 2.0;
            for (int it = 0; it < 80; ++it) {
                const double c = hi - r * (hi - lo);
                const double d = lo + r * (hi - lo);
                if (gap(c) < gap(d))
                    hi = d;
                else
                    lo = c;
            }
            const double bStar = 0.5 * (lo + hi);
            const double v = gap(bStar);
            if (v < tol && bStar >= bMin && bStar <= bMax) {
                out.b.push_back(bStar);
                out.gap.push_back(v);
            }
        }
        prev2 = prev;
        prev = cur;
    }
    return out;
}

}  // namespace flagwalk
