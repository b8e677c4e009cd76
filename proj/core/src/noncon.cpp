#include "flagwalk/noncon.hpp"

#include <algorithm>
#include <cmath>

#include "flagwalk/error.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk {

namespace {

constexpr double kExpClamp = 700.0;

double clamped_exp(double x, std::size_t* clamped) {
    if (x > kExpClamp || x < -kExpClamp) {
        if (clamped) ++*clamped;
        x = std::clamp(x, -kExpClamp, kExpClamp);
    }
    return std::exp(x);
}

}  // namespace

Vector cocycle_offset(const GroupElement& g, const Matrix& a, double logScale, const FlagPoint& eta, std::size_t n,
                      const Vector& sigma) {
    if (g.dim() != a.rows() || sigma.size() != g.dim() || eta.rank() != g.rank())
        throw InvalidArgument("cocycle_offset: rank mismatch");
    return iwasawa_cocycle(g.matrix() * a, logScale, eta) - cartan_projection(g) - static_cast<double>(n) * sigma;
}

Vector cocycle_offset(const GroupElement& g, const WalkState& h, const FlagPoint& eta, std::size_t n,
                      const Vector& sigma) {
    if (g.dim() != h.product().rows() || sigma.size() != g.dim() || eta.rank() != g.rank())
        throw InvalidArgument("cocycle_offset: rank mismatch");
    return iwasawa_cocycle(g, h.act(eta)) + h.cocycle(eta) - cartan_projection(g) - static_cast<double>(n) * sigma;
}

Vector y_from_offset(const Vector& s, std::size_t* clamped) {
    const auto m = static_cast<int>(s.size()) - 1;
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = clamped_exp(-(s(i) - s(i + 1)), clamped);
    return y;
}

Vector x_from_offset(const Vector& s, std::size_t* clamped) {
    const auto m = static_cast<int>(s.size()) - 1;
    Vector x(m);
    double chi = 0.0;
    for (int i = 0; i < m; ++i) {
        chi += s(i);
        x(i) = clamped_exp(chi, clamped);
    }
    return x;
}

Vector y_vector(const GroupElement& g, const GroupElement& h, const FlagPoint& eta, std::size_t n,
                const Vector& sigma) {
    return y_from_offset(cocycle_offset(g, h.matrix(), 0.0, eta, n, sigma));
}

Vector x_vector(const GroupElement& g, const GroupElement& h, const FlagPoint& eta, std::size_t n,
                const Vector& sigma) {
    return x_from_offset(cocycle_offset(g, h.matrix(), 0.0, eta, n, sigma));
}

namespace {

NonconEstimate proportion(double hits, std::size_t samples, std::size_t clamped) {
    NonconEstimate out;
    out.samples = samples;
    out.clamped = clamped;
    out.estimate = hits / static_cast<double>(samples);
    out.stdErr = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
    return out;
}

struct YCloud {
    std::vector<Vector> points;
    std::vector<bool> good;
    std::size_t clamped = 0;
};

// One Y-vector per sample, plus the (n, eps, eta, zeta^m_g) goodness flag
// when eps is given.
YCloud sample_y_cloud(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta, const GroupElement& g,
                      const Vector& sigma, const McOptions& opts, std::optional<double> eps) {
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    if (g.rank() != spec.rank() || eta.rank() != spec.rank() || sigma.size() != spec.dim())
        throw InvalidArgument("non-concentration: rank mismatch");
    const FlagPoint zeta = repelling_flag(g);
    auto chunks = map_chunks<YCloud>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        YCloud c;
        for (std::size_t i = b; i < e; ++i) {
            const WalkState w = sample_product(spec, n, opts.seed, i);
            c.points.push_back(y_from_offset(cocycle_offset(g, w, eta, n, sigma), &c.clamped));
            if (eps) c.good.push_back(good_element_parts(w.cartan(), n, *eps, eta, zeta, sigma).good());
        }
        return c;
    });
    YCloud all;
    for (YCloud& c : chunks) {
        all.points.insert(all.points.end(), std::make_move_iterator(c.points.begin()),
                          std::make_move_iterator(c.points.end()));
        all.good.insert(all.good.end(), c.good.begin(), c.good.end());
        all.clamped += c.clamped;
    }
    return all;
}

}  // namespace

NonconEstimate pnc_estimate(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta, const GroupElement& g,
                            const Vector& sigma, double slabWidth, const McOptions& opts, std::size_t directions) {
    if (!(slabWidth >= 0.0)) throw InvalidArgument("slab width must be non-negative");
    const YCloud cloud = sample_y_cloud(spec, n, eta, g, sigma, opts, std::nullopt);
    const auto dirs = slab_directions(spec.rank(), directions, opts.seed);
    const double frac = max_slab_fraction(cloud.points, dirs, slabWidth);
    return proportion(frac * static_cast<double>(opts.samples), opts.samples, cloud.clamped);
}

NonconEstimate snc_estimate(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta, int d, const Vector& sigma,
                            double threshold, const McOptions& opts, bool averaged,
                            const std::optional<GroupElement>& g) {
    const int m = spec.rank();
    if (d < 0 || d > m) throw InvalidArgument("snc_estimate: degree must lie in 0..m");
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    if (eta.rank() != m || sigma.size() != m + 1) throw InvalidArgument("snc_estimate: rank mismatch");
    const GroupElement base = g.value_or(GroupElement::identity(m));
    if (base.rank() != m) throw InvalidArgument("snc_estimate: rank mismatch");
    if (d == 0) return proportion(threshold >= 1.0 ? static_cast<double>(opts.samples) : 0.0, opts.samples, 0);

    // Streams (d+2) i + j: j = 0..d for the tuple, j = d+1 for the averaging element.
    const std::uint64_t stride = static_cast<std::uint64_t>(d) + 2;
    struct Partial {
        double hits = 0.0;
        std::size_t clamped = 0;
    };
    auto chunks = map_chunks<Partial>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        Partial p;
        std::vector<Vector> pts(d + 1);
        for (std::size_t i = b; i < e; ++i) {
            FlagPoint start = eta;
            if (averaged) {
                const WalkState l = sample_product(spec, n, opts.seed, stride * i + d + 1);
                start = l.act(eta);
            }
            for (int j = 0; j <= d; ++j) {
                const WalkState w = sample_product(spec, n, opts.seed, stride * i + j);
                const Vector s = cocycle_offset(base, w, start, n, sigma);
                pts[j] = e_d_map(x_from_offset(s, &p.clamped), d);
            }
            if (std::abs(affine_det(pts)) <= threshold) p.hits += 1.0;
        }
        return p;
    });
    Partial total;
    for (const Partial& p : chunks) {
        total.hits += p.hits;
        total.clamped += p.clamped;
    }
    return proportion(total.hits, opts.samples, total.clamped);
}

MultiscaleResult multiscale_noncon(const MeasureSpec& spec, std::size_t n, const FlagPoint& eta,
                                   const GroupElement& g, const Vector& sigma, double eps,
                                   const std::vector<double>& rhoGrid, const McOptions& opts,
                                   std::size_t directions) {
    if (rhoGrid.empty()) throw InvalidArgument("multiscale: empty rho grid");
    if (!(eps > 0.0)) throw InvalidArgument("multiscale: eps must be positive");
    const YCloud cloud = sample_y_cloud(spec, n, eta, g, sigma, opts, eps);
    std::vector<Vector> good;
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        if (cloud.good[i]) good.push_back(cloud.points[i]);
    const auto dirs = slab_directions(spec.rank(), directions, opts.seed);

    MultiscaleResult out;
    out.rho = rhoGrid;
    std::sort(out.rho.begin(), out.rho.end());
    out.good = good.size();
    out.samples = opts.samples;
    out.clamped = cloud.clamped;
    const double share = static_cast<double>(good.size()) / static_cast<double>(opts.samples);
    std::vector<double> xs, ys;
    for (double rho : out.rho) {
        if (!(rho > 0.0)) throw InvalidArgument("multiscale: rho must be positive");
        const double mass = good.empty() ? 0.0 : share * max_slab_fraction(good, dirs, rho);
        out.mass.push_back(mass);
        if (mass > 0.0) {
            xs.push_back(std::log(rho));
            ys.push_back(std::log(mass));
        }
    }
    if (xs.size() >= 3) out.fit = fit_line(xs, ys);
    return out;
}

}  // namespace flagwalk
