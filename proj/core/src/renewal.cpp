#include "flagwalk/renewal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flagwalk/error.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk {

double TestFunction::integral_from(double a) const {
    const double lo = std::max(a, -support);
    if (lo >= support) return 0.0;
    auto g = [this](double x) { return (*this)(x); };
    // Split at the integers inside the range so piecewise-polynomial
    // functions are integrated exactly.
    double total = 0.0;
    double left = lo;
    for (double knot = std::floor(lo) + 1.0; left < support; knot += 1.0) {
        const double right = std::min(knot, support);
        if (right > left)
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, left, right, 10, 1e-14);
        left = right;
    }
    return total;
}

TestFunction TestFunction::bump(double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("bump radius must be positive");
    TestFunction t;
    t.support = radius;
    t.supNorm = 1.0;
    t.name = "bump";
    t.f = [radius](double x) {
        const double u = x / radius;
        return std::exp(1.0 - 1.0 / (1.0 - u * u));
    };
    return t;
}

TestFunction TestFunction::cubic_bspline() {
    TestFunction t;
    t.support = 2.0;
    t.supNorm = 2.0 / 3.0;
    t.name = "bspline3";
    t.f = [](double x) {
        const double a = std::abs(x);
        if (a < 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
        const double b = 2.0 - a;
        return b * b * b / 6.0;
    };
    return t;
}

namespace {

double normal_tail_below(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void require_proximal(const MeasureSpec& spec) {
    if (!zariski_density_heuristic(spec).proximal)
        throw InvalidArgument("renewal: spec has no proximal element; the renewal sum diverges or is degenerate");
}

double require_sigma(std::optional<double> sigma) {
    if (!sigma) throw MustEstimateFirst("renewal: estimate the Lyapunov exponent first (pass --sigma or a spec with one)");
    if (!(*sigma > 0.0)) throw InvalidArgument("renewal: Lyapunov exponent must be positive");
    return *sigma;
}

// Per-step spread of the additive process from a short pilot run.
template <class Step>
double pilot_deviation(std::uint64_t seed, Step&& runLength) {
    constexpr std::size_t kPilot = 256;
    constexpr std::size_t kLength = 64;
    Moments mom;
    for (std::size_t i = 0; i < kPilot; ++i) {
        Rng rng(seed, kAuxStream + 16 + i);
        mom.add(runLength(rng, kLength));
    }
    return std::sqrt(std::max(0.0, mom.variance()) / static_cast<double>(kLength));
}

std::size_t first_clear_step(double sigma, double dev, double level) {
    std::size_t n = 1;
    while (static_cast<double>(n) * sigma - 5.0 * std::sqrt(static_cast<double>(n)) * dev <= level) ++n;
    return n;
}

// sup|f| * sum_{n > nMax} P(S_n <= level) under a Gaussian envelope.
double truncation_bound(double sigma, double dev, double level, std::size_t nMax, double supNorm) {
    double total = 0.0;
    for (std::size_t n = nMax + 1;; ++n) {
        const double dn = static_cast<double>(n);
        double term = 0.0;
        if (dev > 0.0)
            term = normal_tail_below((level - dn * sigma) / (dev * std::sqrt(dn)));
        else
            term = dn * sigma <= level ? 1.0 : 0.0;
        total += term;
        if (dn * sigma > level && term < 1e-30) break;
    }
    return supNorm * total;
}

// Shared Monte Carlo loop: path(rng, nMax, out) fills S_0..S_nMax.
template <class Path>
std::vector<RenewalResult> run_renewal(const TestFunction& f, const std::vector<double>& ts,
                                       double sigma, const McOptions& opts, Path&& path) {
    if (ts.empty()) throw InvalidArgument("renewal: empty t list");
    if (opts.samples < 2) throw InvalidArgument("renewal: need at least two trajectories");
    const double tMax = *std::max_element(ts.begin(), ts.end());
    const double level = tMax + f.support;
    const double dev = pilot_deviation(opts.seed, [&](Rng& rng, std::size_t len) {
        std::vector<double> s(len + 1);
        path(rng, len, s);
        return s[len];
    });
    std::size_t nMax = 2 * first_clear_step(sigma, dev, level);

    while (true) {
        using Acc = std::vector<Moments>;
        auto chunks = map_chunks<Acc>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
            Acc acc(ts.size());
            std::vector<double> s(nMax + 1);
            std::vector<double> sums(ts.size());
            for (std::size_t i = b; i < e; ++i) {
                Rng rng(opts.seed, i);
                path(rng, nMax, s);
                std::fill(sums.begin(), sums.end(), 0.0);
                for (double sn : s)
                    for (std::size_t j = 0; j < ts.size(); ++j) sums[j] += f(sn - ts[j]);
                for (std::size_t j = 0; j < ts.size(); ++j) acc[j].add(sums[j]);
            }
            return acc;
        });
        Acc total(ts.size());
        for (const Acc& c : chunks)
            for (std::size_t j = 0; j < ts.size(); ++j) total[j].merge(c[j]);

        const double bound = truncation_bound(sigma, dev, level, nMax, f.supNorm);
        double minErr = std::numeric_limits<double>::infinity();
        for (const Moments& mm : total) minErr = std::min(minErr, mm.stderror());
        if (bound < minErr / 10.0 || bound == 0.0 || nMax > (std::size_t{1} << 20)) {
            std::vector<RenewalResult> out;
            for (std::size_t j = 0; j < ts.size(); ++j) {
                RenewalResult r;
                r.t = ts[j];
                r.estimate = total[j].mean();
                r.stdErr = total[j].stderror();
                r.limit = f.integral_from(-ts[j]) / sigma;
                r.samples = opts.samples;
                r.nMax = nMax;
                r.truncationBound = bound;
                out.push_back(r);
            }
            return out;
        }
        nMax *= 2;
    }
}

}  // namespace

std::vector<RenewalResult> renewal_sums(const MeasureSpec& spec, const TestFunction& f, const Vector& x,
                                        const std::vector<double>& ts, std::optional<double> sigma,
                                        const McOptions& opts) {
    const double s = require_sigma(sigma);
    require_proximal(spec);
    if (x.size() != spec.dim() || !(x.norm() > 0.0)) throw InvalidArgument("renewal: bad start vector");
    const Vector x0 = x.normalized();
    return run_renewal(f, ts, s, opts, [&](Rng& rng, std::size_t n, std::vector<double>& out) {
        // Reversed order: the point moves as X_k ... X_1 x and the cocycle adds up.
        Vector v = x0;
        double acc = 0.0;
        out[0] = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            v = spec.sample(rng) * v;
            const double r = v.norm();
            acc += std::log(r);
            v /= r;
            out[k] = acc;
        }
    });
}

RenewalResult renewal_sum(const MeasureSpec& spec, const TestFunction& f, const Vector& x, double t,
                          std::optional<double> sigma, const McOptions& opts) {
    return renewal_sums(spec, f, x, {t}, sigma, opts).front();
}

RenewalResult renewal_norm_sum(const MeasureSpec& spec, const TestFunction& f, double t, std::optional<double> sigma,
                               const McOptions& opts) {
    const double s = require_sigma(sigma);
    require_proximal(spec);
    return run_renewal(f, {t}, s, opts, [&](Rng& rng, std::size_t n, std::vector<double>& out) {
        WalkState w(spec.rank());
        out[0] = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            w.step(spec, rng);
            out[k] = w.log_scale() + std::log(spectral_norm(w.product()));
        }
    }).front();
}

RenewalFit renewal_error_fit(const MeasureSpec& spec, const TestFunction& f, const Vector& x,
                             const std::vector<double>& ts, std::optional<double> sigma, const McOptions& opts) {
    if (ts.size() < 2) throw InvalidArgument("renewal fit: need at least two t values");
    if (!std::is_sorted(ts.begin(), ts.end())) throw InvalidArgument("renewal fit: t grid must be increasing");
    RenewalFit out;
    out.points = renewal_sums(spec, f, x, ts, sigma, opts);
    std::vector<double> xs, ys;
    for (const RenewalResult& r : out.points) {
        const double err = std::abs(r.estimate - r.limit);
        if (err > 3.0 * r.stdErr && err > 0.0) {
            xs.push_back(r.t);
            ys.push_back(std::log(err));
        }
    }
    std::ostringstream msg;
    if (xs.size() < 3) {
        out.belowNoiseFloor = true;
        msg << "error below Monte Carlo floor: " << xs.size() << " of " << out.points.size()
            << " points exceed 3 stderr";
    } else {
        out.fit = fit_line(xs, ys);
        msg << "slope " << out.fit->slope << " (95% CI " << out.fit->ciLow << ", " << out.fit->ciHigh << ") over "
            << xs.size() << " points";
    }
    out.report = msg.str();
    return out;
}

}  // namespace flagwalk
