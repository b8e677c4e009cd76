#include "flagwalk/walk.hpp"

#include <algorithm>
#include <cmath>

#include "flagwalk/error.hpp"
#include "flagwalk/exterior.hpp"

namespace flagwalk {

namespace {

std::vector<Matrix> wedges_of(const Matrix& a) {
    std::vector<Matrix> w;
    for (int d = 2; d < a.rows(); ++d) w.push_back(exterior_power(a, d).entries);
    return w;
}

// Nested orthonormal frame whose first d columns span the decomposable
// d-vector top[d], d = 1..n-1, with the orientation of top[d]. The new
// column in degree d is the contraction of top[d] with the previous d - 1
// columns: <k_1 ^ ... ^ k_{d-1} ^ x, omega> = <x, k_d>.
Matrix frame_from_wedges(const std::vector<Vector>& top, const Matrix& fallback) {
    const auto n = static_cast<int>(fallback.rows());
    Matrix k = Matrix::Zero(n, n);
    k.col(0) = top[1].normalized();
    std::vector<int> cols;
    for (int d = 2; d < n; ++d) {
        cols.assign(1, 0);
        for (int i = 1; i < d - 1; ++i) cols.push_back(i);
        const auto lower = exterior_power(Matrix::Identity(n, n), d - 1).basis;
        const auto upper = exterior_power(Matrix::Identity(n, n), d).basis;
        const Vector alpha = wedge_columns(k, std::span<const int>(cols.data(), static_cast<std::size_t>(d - 1)));
        Vector c = Vector::Zero(n);
        for (std::size_t J = 0; J < lower.size(); ++J) {
            for (int j = 0; j < n; ++j) {
                const auto& s = lower[J];
                if (std::find(s.begin(), s.end(), j) != s.end()) continue;
                std::vector<int> merged = s;
                merged.insert(std::upper_bound(merged.begin(), merged.end(), j), j);
                const auto I = std::find(upper.begin(), upper.end(), merged) - upper.begin();
                const auto above = std::count_if(s.begin(), s.end(), [j](int i) { return i > j; });
                c(j) += (above % 2 ? -1.0 : 1.0) * alpha(J) * top[d](I);
            }
        }
        const Matrix prev = k.leftCols(d - 1);
        c -= prev * (prev.transpose() * c);
        if (c.norm() < 1e-8) {
            // top[d] is not decomposable over the previous columns (a tie in
            // the singular values); any direction from the plain SVD will do.
            c = fallback.col(d - 1) - prev * (prev.transpose() * fallback.col(d - 1));
        }
        k.col(d - 1) = c.normalized();
        cols.push_back(d - 1);
        if (wedge_columns(k, std::span<const int>(cols.data(), static_cast<std::size_t>(d))).dot(top[d]) < 0.0)
            k.col(d - 1) = -k.col(d - 1);
    }
    Eigen::HouseholderQR<Matrix> qr(k.leftCols(n - 1));
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    k.col(n - 1) = q.col(n - 1);
    if (k.determinant() < 0.0) k.col(n - 1) = -k.col(n - 1);
    return k;
}

// Differences of chi_d = kappa_1 + ... + kappa_d, with chi_0 = chi_n = 0.
Vector from_partial_sums(const Vector& chi) {
    const Eigen::Index n = chi.size() - 1;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = chi(i + 1) - chi(i);
    return v;
}

}  // namespace

WalkState::WalkState(int m) : product_(Matrix::Identity(m + 1, m + 1)) {
    if (m < 1) throw InvalidArgument("rank must be at least 1");
    for (const Matrix& w : wedges_of(product_)) wedges_.push_back({w, 0.0});
}

void WalkState::renormalize(Matrix& a, double& logScale) {
    const double s = a.cwiseAbs().maxCoeff();
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalFailure("walk product degenerated");
    a /= s;
    logScale += std::log(s);
}

void WalkState::multiply_right(const Matrix& a) { multiply_right(a, wedges_of(a)); }

void WalkState::multiply_left(const Matrix& a) { multiply_left(a, wedges_of(a)); }

void WalkState::multiply_right(const Matrix& a, const std::vector<Matrix>& wedges) {
    if (wedges.size() != wedges_.size()) throw InvalidArgument("exterior powers do not match the rank");
    product_ = product_ * a;
    renormalize(product_, logScale_);
    for (std::size_t i = 0; i < wedges_.size(); ++i) {
        wedges_[i].product = wedges_[i].product * wedges[i];
        renormalize(wedges_[i].product, wedges_[i].logScale);
    }
    ++steps_;
}

void WalkState::multiply_left(const Matrix& a, const std::vector<Matrix>& wedges) {
    if (wedges.size() != wedges_.size()) throw InvalidArgument("exterior powers do not match the rank");
    product_ = a * product_;
    renormalize(product_, logScale_);
    for (std::size_t i = 0; i < wedges_.size(); ++i) {
        wedges_[i].product = wedges[i] * wedges_[i].product;
        renormalize(wedges_[i].product, wedges_[i].logScale);
    }
    ++steps_;
}

void WalkState::step(const MeasureSpec& spec, Rng& rng) {
    const std::size_t i = spec.sample_index(rng);
    multiply_right(spec.atoms()[i].g.matrix(), spec.atom_wedges(i));
}

Matrix WalkState::full_matrix() const { return product_ * std::exp(logScale_); }

Vector WalkState::kappa() const {
    if (wedges_.empty()) return cartan_decompose(product_, logScale_).kappa;
    const Eigen::Index n = product_.rows();
    Vector chi = Vector::Zero(n + 1);
    chi(1) = std::log(spectral_norm(product_)) + logScale_;
    for (Eigen::Index d = 2; d < n; ++d)
        chi(d) = std::log(spectral_norm(wedges_[d - 2].product)) + wedges_[d - 2].logScale;
    Vector kappa = from_partial_sums(chi);
    // Equal singular values can come out a round-off apart in the wrong order.
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        if (kappa(i + 1) > kappa(i)) kappa(i) = kappa(i + 1) = 0.5 * (kappa(i) + kappa(i + 1));
    return kappa;
}

CartanTriple WalkState::cartan() const {
    if (wedges_.empty()) return cartan_decompose(product_, logScale_);
    const Eigen::Index n = product_.rows();
    std::vector<Vector> left(n), right(n);
    Matrix plainU, plainV;
    for (Eigen::Index d = 1; d < n; ++d) {
        const Matrix& a = d == 1 ? product_ : wedges_[d - 2].product;
        Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        left[d] = svd.matrixU().col(0);
        right[d] = svd.matrixV().col(0);
        if (d == 1) {
            plainU = svd.matrixU();
            plainV = svd.matrixV();
        }
    }
    CartanTriple out;
    out.kappa = kappa();
    out.k = frame_from_wedges(left, plainU);
    out.l = frame_from_wedges(right, plainV).transpose();
    return out;
}

Vector WalkState::cocycle(const FlagPoint& eta) const {
    if (wedges_.empty()) return iwasawa_cocycle(product_, logScale_, eta);
    const Eigen::Index n = product_.rows();
    Vector chi = Vector::Zero(n + 1);
    chi(1) = std::log((product_ * eta.k().col(0)).norm()) + logScale_;
    for (Eigen::Index d = 2; d < n; ++d)
        chi(d) = std::log((wedges_[d - 2].product * leading_wedge(eta.k(), static_cast<int>(d))).norm()) +
                 wedges_[d - 2].logScale;
    return from_partial_sums(chi);
}

FlagPoint WalkState::act(const FlagPoint& eta) const {
    if (wedges_.empty()) return flagwalk::act(product_, eta);
    const Eigen::Index n = product_.rows();
    std::vector<Vector> top(n);
    top[1] = product_ * eta.k().col(0);
    for (Eigen::Index d = 2; d < n; ++d) top[d] = wedges_[d - 2].product * leading_wedge(eta.k(), static_cast<int>(d));
    for (Eigen::Index d = 1; d < n; ++d) top[d].normalize();
    return FlagPoint(frame_from_wedges(top, orthonormalize(product_ * eta.k())));
}

WalkState sample_product(const MeasureSpec& spec, std::size_t n, Rng& rng) {
    WalkState w(spec.rank());
    for (std::size_t i = 0; i < n; ++i) w.step(spec, rng);
    return w;
}

WalkState sample_product(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    return sample_product(spec, n, rng);
}

LyapunovEstimate lyapunov_vector(const MeasureSpec& spec, std::size_t n, const McOptions& opts) {
    if (n == 0) throw InvalidArgument("lyapunov_vector: n must be positive");
    if (opts.samples < 2) throw InvalidArgument("lyapunov_vector: need at least two samples");
    const int m = spec.rank();
    const RootData roots = structural_constants(m);
    // Per component of kappa / n, then per simple root.
    using Acc = std::vector<Moments>;
    auto chunks = map_chunks<Acc>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        Acc acc(2 * m + 1);
        for (std::size_t i = b; i < e; ++i) {
            const Vector k = sample_product(spec, n, opts.seed, i).kappa() / static_cast<double>(n);
            for (int j = 0; j <= m; ++j) acc[j].add(k(j));
            for (int j = 1; j <= m; ++j) acc[m + j].add(roots.simple_root(j, k));
        }
        return acc;
    });
    Acc total(2 * m + 1);
    for (const Acc& c : chunks)
        for (std::size_t j = 0; j < total.size(); ++j) total[j].merge(c[j]);

    LyapunovEstimate out;
    out.n = n;
    out.samples = opts.samples;
    out.sigma.resize(m + 1);
    out.stdErr.resize(m + 1);
    for (int j = 0; j <= m; ++j) {
        out.sigma(j) = total[j].mean();
        out.stdErr(j) = total[j].stderror();
    }
    out.margin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= m; ++j) {
        const double v = roots.simple_root(j, out.sigma);
        const double se = total[m + j].stderror();
        if (v < out.margin) {
            out.margin = v;
            out.marginStderr = se;
        }
        if (v <= 2.0 * se) out.positivityWarning = true;
    }
    return out;
}

TopExponentEstimate top_exponent_estimate(const MeasureSpec& spec, std::size_t burnIn, std::size_t steps,
                                          const McOptions& opts) {
    if (steps == 0) throw InvalidArgument("top_exponent_estimate: steps must be positive");
    if (opts.samples < 2) throw InvalidArgument("top_exponent_estimate: need at least two samples");
    const int dim = spec.dim();
    auto chunks = map_chunks<Moments>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        Moments acc;
        Vector v(dim);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(opts.seed, i);
            v = Vector::Unit(dim, 0);
            double s = 0.0;
            for (std::size_t k = 0; k < burnIn + steps; ++k) {
                v = spec.sample(rng) * v;
                const double r = v.norm();
                if (k >= burnIn) s += std::log(r);
                v /= r;
            }
            acc.add(s / static_cast<double>(steps));
        }
        return acc;
    });
    Moments total;
    for (const Moments& c : chunks) total.merge(c);
    return {total.mean(), total.stderror(), opts.samples, steps};
}

Vector lyapunov_or_estimate(const MeasureSpec& spec, const McOptions& opts) {
    if (spec.lyapunov()) return *spec.lyapunov();
    return lyapunov_vector(spec, 200, opts).sigma;
}

namespace {

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Runs one trajectory per sample through the sorted n list and counts the
// samples for which event(state, n) holds at each n.
template <class Event>
DeviationCurve event_curve(const MeasureSpec& spec, const std::vector<std::size_t>& nListIn, const McOptions& opts,
                           Event&& event) {
    if (nListIn.empty()) throw InvalidArgument("n list is empty");
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    const auto nList = sorted_unique(nListIn);
    using Counts = std::vector<double>;
    auto chunks = map_chunks<Counts>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        Counts hits(nList.size(), 0.0);
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(opts.seed, i);
            WalkState w(spec.rank());
            for (std::size_t j = 0; j < nList.size(); ++j) {
                while (w.steps() < nList[j]) w.step(spec, rng);
                if (event(w, nList[j])) hits[j] += 1.0;
            }
        }
        return hits;
    });
    DeviationCurve out;
    out.n = nList;
    const double total = static_cast<double>(opts.samples);
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < nList.size(); ++j) {
        double h = 0.0;
        for (const Counts& c : chunks) h += c[j];
        const double p = h / total;
        out.probability.push_back(p);
        out.stdErr.push_back(std::sqrt(p * (1.0 - p) / total));
        if (h > 0.0) {
            xs.push_back(static_cast<double>(nList[j]));
            ys.push_back(std::log(p));
        }
    }
    if (xs.size() >= 3) out.fit = fit_line(xs, ys);
    return out;
}

}  // namespace

DeviationCurve large_deviation_curve(const MeasureSpec& spec, const Vector& sigma, double eps,
                                     const std::vector<std::size_t>& nList, const McOptions& opts) {
    if (sigma.size() != spec.dim()) throw InvalidArgument("Lyapunov vector has wrong size");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    return event_curve(spec, nList, opts, [&](const WalkState& w, std::size_t n) {
        const double dn = static_cast<double>(n);
        return (w.kappa() - dn * sigma).norm() >= dn * eps;
    });
}

DeviationCurve position_deviation_curve(const MeasureSpec& spec, double eps, const std::vector<std::size_t>& nList,
                                        const FlagPoint& target, PositionMode mode, const McOptions& opts) {
    if (target.rank() != spec.rank()) throw InvalidArgument("target flag has wrong rank");
    if (!(eps >= 0.0)) throw InvalidArgument("eps must be non-negative");
    const Vector line = target.k().col(0);
    return event_curve(spec, nList, opts, [&](const WalkState& w, std::size_t n) {
        const double threshold = std::isinf(eps) ? 0.0 : std::exp(-eps * static_cast<double>(n));
        const CartanTriple c = w.cartan();
        double d = 1.0;
        switch (mode) {
            case PositionMode::LineRepelling: d = proj_delta(line, c.l.row(0).transpose()); break;
            case PositionMode::LineAttracting: d = proj_delta(c.k.col(0), line); break;
            case PositionMode::FlagRepelling: d = delta(target, repelling_flag(c)); break;
            case PositionMode::FlagAttracting: d = delta(attracting_flag(c), target); break;
        }
        return d <= threshold;
    });
}

Matrix stationary_frame(const MeasureSpec& spec, std::size_t n, Rng& rng, const Matrix& start) {
    if (start.rows() != spec.dim()) throw InvalidArgument("start flag has wrong rank");
    if (spec.rank() == 1) {
        Eigen::Vector2d v = start.col(0);
        for (std::size_t i = 0; i < n; ++i) {
            v = Eigen::Map<const Eigen::Matrix2d>(spec.sample(rng).data()) * v;
            v /= v.cwiseAbs().maxCoeff();
        }
        v.normalize();
        Matrix k(2, 2);
        k << v(0), -v(1), v(1), v(0);
        return k;
    }
    Matrix k = start;
    for (std::size_t i = 0; i < n; ++i) {
        k = spec.sample(rng) * k;
        if (i % 4 == 3) k = orthonormalize(k);
    }
    return orthonormalize(k);
}

FlagPoint stationary_sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream,
                            const FlagPoint& start) {
    Rng rng(seed, stream);
    return FlagPoint(stationary_frame(spec, n, rng, start.k()));
}

FlagPoint stationary_sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    return stationary_sample(spec, n, seed, stream, FlagPoint::base(spec.rank()));
}

RegularityFit holder_regularity(const MeasureSpec& spec, const Vector& y, const std::vector<double>& rGrid,
                                const McOptions& opts, std::size_t burnIn) {
    if (y.size() != spec.dim()) throw InvalidArgument("functional has wrong size");
    if (rGrid.size() < 3) throw InvalidArgument("holder_regularity: need at least three radii");
    for (double r : rGrid)
        if (!(r >= 1e-4 && r <= 0.5)) throw InvalidArgument("holder_regularity: radii must lie in [1e-4, 0.5]");
    const Matrix start = Matrix::Identity(spec.dim(), spec.dim());
    std::vector<double> deltas =
        stationary_statistic(spec, burnIn, opts, start, [&](const Matrix& k) { return proj_delta(k.col(0), y); });
    std::sort(deltas.begin(), deltas.end());

    RegularityFit out;
    out.r = rGrid;
    std::sort(out.r.begin(), out.r.end());
    const double total = static_cast<double>(deltas.size());
    std::vector<double> xs, ys;
    for (double r : out.r) {
        const auto hits = static_cast<double>(std::upper_bound(deltas.begin(), deltas.end(), r) - deltas.begin());
        out.mass.push_back(hits / total);
        if (hits > 0) {
            xs.push_back(std::log(r));
            ys.push_back(std::log(hits / total));
        }
    }
    if (out.mass.back() * total < 100.0)
        throw InsufficientMass("holder_regularity: fewer than 100 samples within the largest radius");
    if (xs.size() < 3) throw InsufficientMass("holder_regularity: too few radii with any mass");
    out.fit = fit_line(xs, ys);
    return out;
}

GoodnessParts good_element_parts(const Matrix& a, double logScale, std::size_t n, double eps, const FlagPoint& eta,
                                 const FlagPoint& zeta, const Vector& sigma) {
    return good_element_parts(cartan_decompose(a, logScale), n, eps, eta, zeta, sigma);
}

GoodnessParts good_element_parts(const CartanTriple& c, std::size_t n, double eps, const FlagPoint& eta,
                                 const FlagPoint& zeta, const Vector& sigma) {
    const int m = static_cast<int>(c.kappa.size()) - 1;
    if (eta.rank() != m || zeta.rank() != m || sigma.size() != m + 1)
        throw InvalidArgument("good element: rank mismatch");
    const double ca = structural_constants(m).CA;
    const double scaled = eps * static_cast<double>(n) / ca;
    GoodnessParts p;
    p.kappaDeviation = (c.kappa - static_cast<double>(n) * sigma).norm();
    p.kappaThreshold = scaled;
    p.repellingDelta = delta(eta, repelling_flag(c));
    p.attractingDelta = delta(attracting_flag(c), zeta);
    p.deltaThreshold = 2.0 * std::exp(-scaled);
    return p;
}

bool is_good_element(const GroupElement& h, std::size_t n, double eps, const FlagPoint& eta, const FlagPoint& zeta,
                     const Vector& sigma) {
    return good_element_parts(h.matrix(), 0.0, n, eps, eta, zeta, sigma).good();
}

Frequency good_failure_frequency(const MeasureSpec& spec, std::size_t n, double eps, const FlagPoint& eta,
                                 const FlagPoint& zeta, const Vector& sigma, const McOptions& opts) {
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    auto chunks = map_chunks<double>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        double bad = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const WalkState w = sample_product(spec, n, opts.seed, i);
            if (!good_element_parts(w.cartan(), n, eps, eta, zeta, sigma).good()) bad += 1.0;
        }
        return bad;
    });
    double bad = 0.0;
    for (double c : chunks) bad += c;
    Frequency f;
    f.samples = opts.samples;
    f.estimate = bad / static_cast<double>(opts.samples);
    f.stdErr = std::sqrt(f.estimate * (1.0 - f.estimate) / static_cast<double>(opts.samples));
    return f;
}

}  // namespace flagwalk
