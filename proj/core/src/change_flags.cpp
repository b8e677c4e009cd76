#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flagwalk/error.hpp"
#include "flagwalk/flag.hpp"

namespace flagwalk {

namespace {

// Columns 0..d-2 and d: the wedge obtained after a quarter turn on the alpha_d-circle.
std::vector<int> turned_columns(int d) {
    std::vector<int> cols(d);
    for (int i = 0; i < d - 1; ++i) cols[i] = i;
    cols[d - 1] = d;
    return cols;
}

// Projective line traced by the alpha_d-circle of k, as a point of the second
// exterior power of the d-th exterior power.
Vector circle_line(const Matrix& k, int d) {
    const auto cols = turned_columns(d);
    return wedge2(leading_wedge(k, d), wedge_columns(k, cols));
}

// Minimizes t -> d(A cos t + B sin t, x) over one period [0, pi).
double best_angle(const Vector& a, const Vector& b, const Vector& x) {
    auto cost = [&](double t) { return proj_distance(std::cos(t) * a + std::sin(t) * b, x); };
    constexpr int kGrid = 256;
    const double h = std::numbers::pi / kGrid;
    int bestIndex = 0;
    double bestValue = cost(0.0);
    for (int i = 1; i < kGrid; ++i) {
        const double v = cost(i * h);
        if (v < bestValue) {
            bestValue = v;
            bestIndex = i;
        }
    }
    double lo = (bestIndex - 1) * h;
    double hi = (bestIndex + 1) * h;
    const double invPhi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - invPhi * (hi - lo);
    double e = lo + invPhi * (hi - lo);
    double fc = cost(c);
    double fe = cost(e);
    while (hi - lo > 1e-10) {
        if (fc < fe) {
            hi = e;
            e = c;
            fe = fc;
            c = hi - invPhi * (hi - lo);
            fc = cost(c);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + invPhi * (hi - lo);
            fe = cost(e);
        }
    }
    const double t = 0.5 * (lo + hi);
    return cost(t) <= bestValue ? t : bestIndex * h;
}

struct RootGeometry {
    Vector repelling;        // y^m of the d-th exterior power of g
    Vector repellingSquare;  // y^m of the second exterior power of that
    double scale = 0.0;      // gap(g) e^{-alpha_d kappa(g)}
};

}  // namespace

ChangeFlagsResult change_flags(const FlagPoint& eta, const FlagPoint& etaPrime, const GroupElement& g,
                               double separation) {
    const int m = g.rank();
    if (eta.rank() != m || etaPrime.rank() != m) throw InvalidArgument("change_flags: rank mismatch");
    if (!(separation > 0.0) || separation > 1.0) throw InvalidArgument("change_flags: separation must lie in (0, 1]");

    const CartanTriple cartan = cartan_decompose(g);
    const double beta = gap_of(cartan.kappa);
    std::vector<RootGeometry> roots(m + 1);
    for (int d = 1; d <= m; ++d) {
        const Matrix rho = exterior_power(g.matrix(), d).entries;
        roots[d].repelling = leading_wedge(cartan.l.transpose(), d);
        if (rho.rows() >= 2)
            roots[d].repellingSquare = linear_density_points(exterior_power(rho, 2).entries).ym;
        roots[d].scale = beta * std::exp(-(cartan.kappa(d - 1) - cartan.kappa(d)));
    }

    // Odd degrees move eta towards eta', even degrees move eta' towards eta.
    std::ostringstream failures;
    for (int d = 1; d <= m; ++d) {
        const bool odd = d % 2 == 1;
        const FlagPoint& target = odd ? etaPrime : eta;
        const FlagPoint& mover = odd ? eta : etaPrime;
        const double pointSep = proj_delta(target.wedge(d), roots[d].repelling);
        if (!(pointSep > separation))
            failures << " delta(V_" << d << " of " << (odd ? "eta'" : "eta") << ", y^m)=" << pointSep;
        if (roots[d].repellingSquare.size() > 0) {
            const double lineSep = proj_delta(circle_line(mover.k(), d), roots[d].repellingSquare);
            if (!(lineSep > separation))
                failures << " delta(l_" << d << " of " << (odd ? "eta" : "eta'") << ", y^m of wedge^2)=" << lineSep;
        }
    }
    if (!failures.str().empty())
        throw PreconditionViolated("change_flags: separation hypotheses fail:" + failures.str());

    const FlagPoint gEta = act(g, eta);
    const FlagPoint gEtaPrime = act(g, etaPrime);

    auto build_chain = [&](const FlagPoint& start, const FlagPoint& gTarget, int firstDegree,
                           std::vector<FlagPoint>& chain, std::vector<FlagMove>& moves) {
        chain.push_back(start);
        const FlagPoint gStart = act(g, start);
        for (int d = firstDegree; d <= m; d += 2) {
            const Matrix& k = chain.back().k();
            const Matrix gk = g.matrix() * k;
            const Vector a = leading_wedge(gk, d);
            const Vector b = wedge_columns(gk, turned_columns(d));
            const double t = best_angle(a, b, gTarget.wedge(d));
            FlagPoint next(k * plane_rotation(m + 1, d - 1, d, t));
            const FlagPoint gPrev = act(g, chain.back());
            const FlagPoint gNext = act(g, next);
            FlagMove mv;
            mv.degree = d;
            mv.angle = t;
            mv.stepDistance = dist_flag(gPrev, gNext);
            mv.stepAlpha = dist_alpha(gPrev, gNext, d);
            mv.targetDistance = dist_alpha(gStart, gTarget, d);
            mv.scale = roots[d].scale;
            moves.push_back(mv);
            chain.push_back(std::move(next));
        }
    };

    ChangeFlagsResult out;
    build_chain(eta, gEtaPrime, 1, out.chain, out.moves);
    build_chain(etaPrime, gEta, 2, out.chainPrime, out.movesPrime);

    auto ratio = [](double err, double scale) {
        if (err <= 0.0) return 0.0;
        return scale > 0.0 ? err / scale : std::numeric_limits<double>::infinity();
    };
    for (const auto* list : {&out.moves, &out.movesPrime})
        for (const FlagMove& mv : *list)
            out.moveConstant = std::max(out.moveConstant, ratio(std::abs(mv.stepDistance - mv.targetDistance), mv.scale));

    const FlagPoint gEnd = act(g, out.chain.back());
    const FlagPoint gEndPrime = act(g, out.chainPrime.back());
    for (int d = 1; d <= m; ++d) {
        const double dist = dist_alpha(gEnd, gEndPrime, d);
        out.endpointDistance.push_back(dist);
        out.endpointScale.push_back(roots[d].scale);
        out.endpointConstant = std::max(out.endpointConstant, ratio(dist, roots[d].scale));
    }
    return out;
}

}  // namespace flagwalk
