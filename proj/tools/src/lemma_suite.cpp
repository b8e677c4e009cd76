#include "lemma_suite.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flagwalk/error.hpp"
#include "flagwalk/exterior.hpp"
#include "flagwalk/flag.hpp"
#include "flagwalk/lie.hpp"
#include "flagwalk/noncon.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk::tools {

namespace {

constexpr double kSlack = 1e-9;

// Accumulates lhs <= rhs checks.
class Tally {
public:
    explicit Tally(std::string name) { r_.name = std::move(name); }

    void bound(double lhs, double rhs) {
        double ratio = 0.0;
        if (lhs - kSlack > 0.0) ratio = rhs > 0.0 ? (lhs - kSlack) / rhs : std::numeric_limits<double>::infinity();
        note(ratio);
    }
    // log lhs <= log rhs
    void log_bound(double logLhs, double logRhs) { note(std::exp(logLhs - logRhs - kSlack)); }
    // |residual| <= tol
    void residual(double value, double tol) { note(std::abs(value) / tol); }
    void count() { ++r_.instances; }

    CheckResult done(std::string detail = {}) {
        r_.pass = r_.worst <= 1.0 && r_.instances > 0;
        r_.detail = std::move(detail);
        return r_;
    }
    std::size_t instances() const { return r_.instances; }

private:
    void note(double ratio) {
        if (!(ratio <= r_.worst)) r_.worst = std::isnan(ratio) ? std::numeric_limits<double>::infinity() : ratio;
    }
    CheckResult r_;
};

// k1 exp(diag s) k2 with the log singular values spread over [-scale, scale].
Matrix random_element(int n, Rng& rng, double scale) {
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = scale * (2.0 * rng.uniform() - 1.0);
    std::sort(s.data(), s.data() + n, std::greater<>());
    s.array() -= s.mean();
    return random_rotation(n, rng) * s.array().exp().matrix().asDiagonal() * random_rotation(n, rng);
}

// Element whose consecutive log singular value gaps lie in [lo, hi]. The
// total spread is capped at 26 so decompositions stay well conditioned.
Matrix random_gapped_element(int n, Rng& rng, double lo, double hi) {
    hi = std::min(hi, 26.0 / (n - 1));
    lo = std::min(lo, hi);
    Vector s = Vector::Zero(n);
    for (int i = 1; i < n; ++i) s(i) = s(i - 1) - (lo + (hi - lo) * rng.uniform());
    s.array() -= s.mean();
    return random_rotation(n, rng) * s.array().exp().matrix().asDiagonal() * random_rotation(n, rng);
}

Matrix random_skew(int n, Rng& rng) {
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            x(i, j) = rng.normal();
            x(j, i) = -x(i, j);
        }
    return x / x.norm();
}

// Rotation at distance about t from the identity (Cayley transform).
Matrix near_identity(int n, Rng& rng, double t) {
    const Matrix s = 0.5 * t * random_skew(n, rng);
    const Matrix id = Matrix::Identity(n, n);
    return (id - s).partialPivLu().solve(id + s);
}

double log_uniform(Rng& rng, double lo, double hi) { return lo * std::pow(hi / lo, rng.uniform()); }

Vector perturb(const Vector& v, Rng& rng, double t) {
    Vector w = v;
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) += t * rng.normal();
    return w / w.norm();
}

double sigma_v(const Matrix& a, const Vector& v) { return std::log((a * v).norm() / v.norm()); }

struct Rep {
    Matrix rho;
    DensityPair points;
    double gamma12 = 0.0;
};

Rep random_rep(Rng& rng, double scale) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
    const int d = 1 + static_cast<int>(rng.uniform() * (n - 1));
    Rep r;
    r.rho = exterior_power(random_element(n, rng, scale), d).entries;
    r.points = linear_density_points(r.rho);
    r.gamma12 = gamma12(r.rho);
    return r;
}

CheckResult cocycle_norm_bound(std::size_t count, std::uint64_t seed) {
    Tally t("linear action: delta(x, y^m_g) <= |gv| / (|g| |v|) <= 1");
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, i);
        const Rep r = random_rep(rng, 5.0 * rng.uniform());
        const Vector v = random_unit_vector(static_cast<int>(r.rho.rows()), rng);
        const double ratio = (r.rho * v).norm() / spectral_norm(r.rho);
        t.bound(proj_delta(v, r.points.ym), ratio);
        t.bound(ratio, 1.0);
        t.count();
    }
    return t.done();
}

std::vector<CheckResult> linear_contraction(std::size_t count, std::uint64_t seed) {
    Tally lip("linear action: g is beta delta^-2 Lipschitz on B^m_g(delta)");
    Tally inc("linear action: g B^m_g(delta) lies in b^M_g(beta / delta)");
    Tally coc("linear action: sigma_V(g, .) is 2 / delta Lipschitz on B^m_g(delta)");
    std::size_t attempts = 0;
    for (std::size_t i = 0; lip.instances() < count && attempts < 50 * count; ++i, ++attempts) {
        Rng rng(seed, i);
        const Rep r = random_rep(rng, 1.0 + 4.0 * rng.uniform());
        const int dim = static_cast<int>(r.rho.rows());
        const Vector v = random_unit_vector(dim, rng);
        const Vector w = perturb(v, rng, log_uniform(rng, 1e-6, 1.0));
        const double delta = std::min(proj_delta(v, r.points.ym), proj_delta(w, r.points.ym));
        const double beta = r.gamma12;
        if (!(beta <= delta * delta) || delta <= 0.0) continue;
        const double dxy = proj_distance(v, w);
        lip.bound(proj_distance(r.rho * v, r.rho * w), beta / (delta * delta) * dxy);
        inc.bound(proj_distance(r.rho * v, r.points.xM), beta / delta);
        coc.bound(std::abs(sigma_v(r.rho, v) - sigma_v(r.rho, w)), 2.0 / delta * dxy);
        lip.count();
        inc.count();
        coc.count();
    }
    return {lip.done(), inc.done(), coc.done()};
}

CheckResult distance_lower_bound(std::size_t count, std::uint64_t seed) {
    Tally t("linear action: gamma12(g) delta(x ^ x', y^m of wedge^2 g) <= d(gx, gx') / d(x, x')");
    for (std::size_t i = 0; t.instances() < count; ++i) {
        Rng rng(seed, i);
        const Rep r = random_rep(rng, 5.0 * rng.uniform());
        const int dim = static_cast<int>(r.rho.rows());
        if (dim < 2) continue;
        const Vector v = random_unit_vector(dim, rng);
        const Vector w = perturb(v, rng, log_uniform(rng, 1e-6, 1.0));
        const double dxy = proj_distance(v, w);
        if (!(dxy > 0.0)) continue;
        const Vector ym2 = linear_density_points(exterior_power(r.rho, 2).entries).ym;
        const double lhs = r.gamma12 * proj_delta(wedge2(v, w), ym2);
        t.bound(lhs, proj_distance(r.rho * v, r.rho * w) / dxy);
        t.count();
    }
    return t.done();
}

// Distance from the line x to the projective line spanned by the plane p (n x 2).
double plane_point_distance(const Matrix& p, const Vector& x) {
    Matrix three(p.rows(), 3);
    three << p, x;
    return wedge(three).norm() / (wedge(p).norm() * x.norm());
}

std::vector<CheckResult> plane_point(std::size_t count, std::uint64_t seed) {
    Tally t("linear action: d(gl, gx) <= delta^-2 gamma13(g) d(l, x)");
    for (std::size_t i = 0; t.instances() < count; ++i) {
        Rng rng(seed, i);
        const int n = 3 + static_cast<int>(rng.uniform() * 2);  // 3..4
        const Matrix g = random_element(n, rng, 6.0 * rng.uniform());
        Matrix p(n, 2);
        p.col(0) = random_unit_vector(n, rng);
        p.col(1) = random_unit_vector(n, rng);
        const Vector x = random_unit_vector(n, rng);
        const Vector ym = linear_density_points(g).ym;
        const Vector ym2 = linear_density_points(exterior_power(g, 2).entries).ym;
        const double delta = std::min(proj_delta(x, ym), proj_delta(wedge(p), ym2));
        if (!(delta > 0.0)) continue;
        Eigen::JacobiSVD<Matrix> svd(g);
        const Vector& s = svd.singularValues();
        const double gamma13 = s(2) / s(0);
        t.bound(plane_point_distance(g * p, g * x), gamma13 / (delta * delta) * plane_point_distance(p, x));
        t.count();
    }

    // The opposite flag sits on the lowest weight line of each exterior power.
    Tally w("flag variety: the opposite flag spans e_{m+2-d} ^ ... ^ e_{m+1} in each degree");
    for (int m = 1; m <= 4; ++m)
        for (int d = 1; d <= m; ++d) {
            const Vector u = FlagPoint::opposite(m).wedge(d);
            w.residual(1.0 - std::abs(u(u.size() - 1)), 1e-12);
            w.count();
        }
    return {t.done(), w.done()};
}

CheckResult iwasawa_cartan(std::size_t count, std::uint64_t seed) {
    Tally t("flag variety: |sigma(g, eta) - kappa(g)| <= C1 |log delta(eta, zeta^m_g)|");
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, i);
        const int n = 2 + static_cast<int>(rng.uniform() * 3);
        const GroupElement g = GroupElement::normalized(random_element(n, rng, 8.0 * rng.uniform()));
        const RootData rd = structural_constants(n - 1);
        const CartanTriple c = cartan_decompose(g);
        const FlagPoint eta(random_rotation(n, rng));
        const double del = delta(eta, repelling_flag(c));
        if (!(del > 0.0)) continue;
        t.bound((iwasawa_cocycle(g, eta) - c.kappa).norm(), rd.C1 * std::abs(std::log(del)));
        t.count();
    }
    return t.done();
}

std::vector<CheckResult> flag_contraction(std::size_t count, std::uint64_t seed) {
    Tally lip("flag variety: g is beta delta^-2 Lipschitz on B^m_g(delta)");
    Tally inc("flag variety: g B^m_g(delta) lies in b^M_g(beta / delta)");
    Tally coc("flag variety: sigma(g, .) is 2 C1 / delta Lipschitz on B^m_g(delta)");
    std::size_t attempts = 0;
    for (std::size_t i = 0; lip.instances() < count && attempts < 50 * count; ++i, ++attempts) {
        Rng rng(seed, i);
        const int n = 2 + static_cast<int>(rng.uniform() * 3);
        const GroupElement g = GroupElement::normalized(random_gapped_element(n, rng, 1.0, 8.0));
        const CartanTriple c = cartan_decompose(g);
        const FlagPoint zeta = repelling_flag(c);
        const FlagPoint eta(random_rotation(n, rng));
        const FlagPoint etaPrime(eta.k() * near_identity(n, rng, log_uniform(rng, 1e-6, 1.0)));
        const double del = std::min(delta(eta, zeta), delta(etaPrime, zeta));
        const double beta = gap_of(c.kappa);
        if (!(beta <= del * del) || del <= 0.0) continue;
        const double dxy = dist_flag(eta, etaPrime);
        const FlagPoint gEta = act(g, eta);
        lip.bound(dist_flag(gEta, act(g, etaPrime)), beta / (del * del) * dxy);
        inc.bound(dist_flag(gEta, attracting_flag(c)), beta / del);
        const double c1 = structural_constants(n - 1).C1;
        coc.bound((iwasawa_cocycle(g, eta) - iwasawa_cocycle(g, etaPrime)).norm(), 2.0 * c1 / del * dxy);
        lip.count();
        inc.count();
        coc.count();
    }
    return {lip.done(), inc.done(), coc.done()};
}

std::vector<CheckResult> chains(std::size_t count, std::uint64_t seed) {
    Tally step("changing flags: each move has d = d_alpha and |step - d_alpha(g eta, g eta')| <= delta^-2 beta e^{-alpha kappa}");
    Tally end("changing flags: chain ends satisfy d_alpha <= delta^-2 beta e^{-alpha kappa} for every root");
    Tally near("changing flags: chain images stay in b^M_g((1 + 3 l) beta delta^-2)");
    std::size_t rejected = 0;
    for (std::size_t i = 0; end.instances() < count && rejected < 50 * count; ++i) {
        Rng rng(seed, i);
        const int n = 3 + static_cast<int>(rng.uniform() * 2);  // SL3, SL4
        const int m = n - 1;
        const GroupElement g = GroupElement::normalized(random_gapped_element(n, rng, 4.0, 14.0));
        const FlagPoint eta(random_rotation(n, rng));
        const FlagPoint etaPrime(random_rotation(n, rng));
        const double sep = std::array{0.02, 0.05, 0.1}[static_cast<int>(rng.uniform() * 3)];
        ChangeFlagsResult res;
        try {
            res = change_flags(eta, etaPrime, g, sep);
        } catch (const PreconditionViolated&) {
            ++rejected;
            continue;
        }
        const double inv2 = 1.0 / (sep * sep);
        for (const auto* moves : {&res.moves, &res.movesPrime})
            for (const FlagMove& mv : *moves) {
                step.residual(mv.stepDistance - mv.stepAlpha, 1e-9);
                step.bound(std::abs(mv.stepDistance - mv.targetDistance), inv2 * mv.scale);
            }
        step.count();
        for (int d = 1; d <= m; ++d) end.bound(res.endpointDistance[d - 1], inv2 * res.endpointScale[d - 1]);
        end.count();

        const CartanTriple c = cartan_decompose(g);
        const FlagPoint zeta = repelling_flag(c);
        const double beta = gap_of(c.kappa);
        if (delta(eta, zeta) >= sep && delta(etaPrime, zeta) >= sep && beta <= sep * sep) {
            const FlagPoint top = attracting_flag(c);
            const double l = std::ceil(m / 2.0);
            for (const auto* chain : {&res.chain, &res.chainPrime})
                for (std::size_t j = 1; j < chain->size(); ++j)
                    near.bound(dist_flag(act(g, (*chain)[j]), top), (1.0 + 3.0 * l) * beta * inv2);
            near.count();
        }
    }
    std::ostringstream note;
    note << rejected << " draws rejected by the separation hypotheses";
    return {step.done(note.str()), end.done(note.str()), near.done()};
}

std::vector<CheckResult> lift_distances(std::size_t count, std::uint64_t seed) {
    Tally upper("sign cover: d(pi z, pi z') <= sqrt2 d0(z, z')");
    Tally lower("sign cover: d0(z, z') <= d(pi z, pi z') when m(z, z') = e");
    Tally cell("sign cover: m(z, z') = e exactly when d0(z, z') < 1");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, i);
        const int n = 2 + static_cast<int>(rng.uniform() * 3);
        const SignedFlag z(random_rotation(n, rng));
        const bool nearby = rng.uniform() < 0.5;
        const SignedFlag zp(nearby ? Matrix(z.k() * near_identity(n, rng, log_uniform(rng, 1e-6, 2.0)))
                                   : random_rotation(n, rng));
        const double d0 = lift_distance_d0(z, zp);
        const double d = dist_flag(FlagPoint(z), FlagPoint(zp));
        upper.bound(d, std::numbers::sqrt2 * d0);
        upper.count();
        try {
            const SignElement s = sign_m(z, zp);
            const bool identity = s.is_identity();
            if (identity) {
                lower.bound(d0, d);
                lower.count();
            }
            if (std::abs(d0 - 1.0) > 1e-9) {
                cell.residual((identity == (d0 < 1.0)) ? 0.0 : 1.0, 0.5);
                cell.count();
            }
        } catch (const AmbiguousSign&) {
        }
        const double d1 = lift_distance_d1(z, zp);
        if (d1 > 0.0) {
            lo = std::min(lo, d0 / d1);
            hi = std::max(hi, d0 / d1);
        }
    }
    Tally equiv("sign cover: d0 / d1 stays in a fixed positive interval");
    equiv.count();
    if (!(lo > 0.0) || !std::isfinite(hi)) equiv.residual(1.0, 0.5);
    std::ostringstream range;
    range << "observed d0/d1 in [" << lo << ", " << hi << "]";
    return {upper.done(), lower.done(), cell.done(), equiv.done(range.str())};
}

struct SplitWord {
    Matrix word;     // g h
    Matrix inverse;  // product of atom inverses in reverse order
    Matrix head;     // g
    Matrix tail;     // h
};

// Random word of length 1..maxLength cut at a random point into g h.
SplitWord random_word(const MeasureSpec& spec, std::size_t maxLength, Rng& rng) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(maxLength));
    const std::size_t cut = static_cast<std::size_t>(rng.uniform() * static_cast<double>(len + 1));
    const Matrix id = Matrix::Identity(spec.dim(), spec.dim());
    SplitWord w{id, id, id, id};
    for (std::size_t j = 0; j < len; ++j) {
        const Atom& a = spec.atoms()[spec.sample_index(rng)];
        (j < cut ? w.head : w.tail) = (j < cut ? w.head : w.tail) * a.g.matrix();
        w.inverse = a.g.inverse().matrix() * w.inverse;
    }
    w.word = w.head * w.tail;
    return w;
}

}  // namespace

std::vector<CheckResult> decomposition_suite(const std::vector<MeasureSpec>& specs, std::size_t words,
                                             std::size_t maxLength, std::uint64_t seed) {
    Tally cartan("Cartan reconstruction |k e^kappa l - g| / |g| <= 1e-9");
    Tally chamber("Cartan projection lies in the closed Weyl chamber");
    Tally iwasawa("Iwasawa reconstruction |k e^sigma n - g| / |g| <= 1e-9");
    Tally additive("cocycle additivity sigma(gh, eta) = sigma(g, h eta) + sigma(h, eta) to 1e-8");
    Tally normCocycle("chi_d sigma(g, eta) = log |wedge^d g u| / |u| to 1e-8");
    Tally normCartan("log |wedge^d g| = chi_d kappa(g) to 1e-8");
    Tally inverse("kappa(g^-1) = iota kappa(g) to 1e-8");
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const MeasureSpec& spec = specs[s];
        const int n = spec.dim();
        for (std::size_t i = 0; i < words; ++i) {
            Rng rng(seed + s, i);
            const SplitWord word = random_word(spec, maxLength, rng);
            const GroupElement w = GroupElement::normalized(word.word);
            const GroupElement g = GroupElement::normalized(word.head);
            const GroupElement h = GroupElement::normalized(word.tail);
            const double wNorm = w.matrix().norm();

            const CartanTriple c = cartan_decompose(w);
            cartan.residual((c.reconstruct() - w.matrix()).norm() / wNorm, 1e-9);
            for (int j = 0; j + 1 < n; ++j) chamber.bound(c.kappa(j + 1) - c.kappa(j), 0.0);
            const IwasawaTriple iw = iwasawa_decompose(w);
            iwasawa.residual((iw.reconstruct() - w.matrix()).norm() / wNorm, 1e-9);

            const FlagPoint eta(random_rotation(n, rng));
            const Vector lhs = iwasawa_cocycle(w, eta);
            const Vector rhs = iwasawa_cocycle(g, act(h, eta)) + iwasawa_cocycle(h, eta);
            additive.residual((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);

            for (int d = 1; d < n; ++d) {
                const Vector u = eta.wedge(d);
                const Vector wu = exterior_power(w.matrix(), d).entries * u;
                normCocycle.residual(lhs.head(d).sum() - std::log(wu.norm() / u.norm()), 1e-8);
                normCartan.residual(operator_norm_identity_check(w, d), 1e-8);
            }
            const Vector kInv = cartan_decompose(GroupElement::normalized(word.inverse)).kappa;
            inverse.residual((kInv - opposition_involution(c.kappa)).cwiseAbs().maxCoeff(), 1e-8);

            for (Tally* t : {&cartan, &chamber, &iwasawa, &additive, &normCocycle, &normCartan, &inverse}) t->count();
        }
    }
    return {cartan.done(), chamber.done(), iwasawa.done(), additive.done(),
            normCocycle.done(), normCartan.done(), inverse.done()};
}

std::vector<CheckResult> geometry_suite(std::size_t instances, std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto append = [&out](std::vector<CheckResult> more) { out.insert(out.end(), more.begin(), more.end()); };
    out.push_back(cocycle_norm_bound(instances, seed));
    append(linear_contraction(instances, seed + 1));
    out.push_back(distance_lower_bound(instances, seed + 2));
    append(plane_point(instances, seed + 3));
    out.push_back(iwasawa_cartan(instances, seed + 4));
    append(flag_contraction(instances, seed + 5));
    append(chains(instances, seed + 6));
    append(lift_distances(instances, seed + 7));
    return out;
}

CheckResult derivative_check(std::size_t instances, std::uint64_t seed, double tolerance) {
    Tally t("cocycle derivative against central differences, relative error");
    constexpr double h = 1e-5;
    double worstAbs = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
        Rng rng(seed, i);
        const int n = 2 + static_cast<int>(rng.uniform() * 2);  // SL2, SL3
        const int d = 1 + static_cast<int>(rng.uniform() * (n - 1));
        const GroupElement g = GroupElement::normalized(random_element(n, rng, 3.0 * rng.uniform()));
        const SignedFlag z(random_rotation(n, rng));
        const double analytic = cocycle_derivative(g, z, d);
        auto chi = [&](double t) {
            return iwasawa_cocycle(g, FlagPoint(alpha_circle_point(z, d, t))).head(d).sum();
        };
        const double fd = (chi(h) - chi(-h)) / (2.0 * h);
        const double err = std::abs(analytic - fd);
        worstAbs = std::max(worstAbs, err);
        // Relative to the derivative, floored at 1e-3 so near-zero derivatives
        // do not turn round-off into a failure.
        t.residual(err / std::max(std::abs(analytic), 1e-3), tolerance);
        t.count();
    }
    std::ostringstream note;
    note << "largest absolute difference " << worstAbs;
    return t.done(note.str());
}

std::vector<CheckResult> good_element_suite(const MeasureSpec& spec, const Vector& sigma, std::size_t n, double eps,
                                            std::size_t samples, std::uint64_t seed) {
    const int m = spec.rank();
    const double dn = static_cast<double>(n);
    const double logDelta = -eps * dn;
    double logBeta = -std::numeric_limits<double>::infinity();
    for (int d = 1; d <= m; ++d) logBeta = std::max(logBeta, -(sigma(d - 1) - sigma(d)) * dn);
    if (!(logBeta < 3.0 * logDelta))
        throw InvalidArgument("good element suite: need max_alpha e^{-alpha(sigma) n} < e^{-3 eps n}; lower eps");

    Tally gapBound("good elements: gap(h) <= beta / delta <= delta^2");
    Tally cocycle("good elements: |sigma(gh, eta) - kappa(g) - n sigma| <= eps n");
    Tally turned("good elements: quarter-turned flag, e^{chi(s)} in [delta, 1/delta] off the root, <= beta/delta on it");

    // The fixed g is a word of length 10 from an auxiliary stream.
    Rng aux(seed, kAuxStream + 3);
    WalkState gw(m);
    for (int j = 0; j < 10; ++j) gw.multiply_right(spec.sample(aux));
    const GroupElement g = gw.element();
    const FlagPoint zetaG = repelling_flag(g);

    std::size_t good = 0, goodPrime = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        Rng rng(seed, i);
        const WalkState h = sample_product(spec, n, rng);
        const FlagPoint eta(random_rotation(m + 1, rng));
        const GoodnessParts parts = good_element_parts(h.cartan(), n, eps, eta, zetaG, sigma);
        const CartanTriple hc = h.cartan();
        if (parts.good()) {
            ++good;
            gapBound.log_bound(std::log(gap_of(hc.kappa)), logBeta - logDelta);
            gapBound.log_bound(logBeta - logDelta, 2.0 * logDelta);
            gapBound.count();
            const Vector s = cocycle_offset(g, h, eta, n, sigma);
            cocycle.bound(s.norm(), eps * dn);
            cocycle.count();
        }
        if (parts.kappaDeviation <= parts.kappaThreshold && parts.attractingDelta > parts.deltaThreshold) {
            ++goodPrime;
            for (int d = 1; d <= m; ++d) {
                // At eta = l^-1 r (r the quarter turn) h l^-1 r = (k r) e^{kappa'} with kappa'
                // the Cartan projection with entries d, d+1 swapped. Evaluating the product
                // directly loses the first column of h l^-1 r below round-off.
                const Matrix turn = plane_rotation(m + 1, d - 1, d, std::numbers::pi / 2);
                Vector swapped = hc.kappa;
                std::swap(swapped(d - 1), swapped(d));
                const Vector s = iwasawa_cocycle(g, FlagPoint(hc.k * turn)) + swapped - cartan_projection(g) -
                                 dn * sigma;
                for (int e = 1; e <= m; ++e) {
                    const double chi = s.head(e).sum();
                    if (e == d)
                        turned.log_bound(chi, logBeta - logDelta);
                    else
                        turned.bound(std::abs(chi), -logDelta);
                }
            }
            turned.count();
        }
    }
    std::ostringstream note;
    note << good << " of " << samples << " samples good, " << goodPrime << " good in the one-sided sense";
    return {gapBound.done(note.str()), cocycle.done(note.str()), turned.done(note.str())};
}

namespace {

// Leibniz expansion; only for the tiny matrices of the oracles.
double leibniz_det(const Matrix& a) {
    const auto n = static_cast<int>(a.rows());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double total = 0.0;
    do {
        int inversions = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
        double term = inversions % 2 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) term *= a(i, perm[i]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

// Distances d(v_j, span(v_1..v_{j-1})) by modified Gram-Schmidt, run twice.
std::vector<double> gram_schmidt_distances(const std::vector<Vector>& v) {
    std::vector<Vector> basis;
    std::vector<double> out;
    for (const Vector& x : v) {
        Vector r = x;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& b : basis) r -= b.dot(r) * b;
        out.push_back(r.norm());
        if (r.norm() > 0.0) basis.push_back(r.normalized());
    }
    return out;
}

double half_width(const std::vector<Vector>& pts, const Vector& w) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vector& p : pts) {
        lo = std::min(lo, w.dot(p));
        hi = std::max(hi, w.dot(p));
    }
    return 0.5 * (hi - lo);
}

// Grid over unit normals, then a shrinking random search from the best few.
double brute_near_hyperplane(const std::vector<Vector>& pts, Rng& rng) {
    const auto d = static_cast<int>(pts.front().size());
    if (d == 1) return half_width(pts, Vector::Ones(1));
    std::vector<std::pair<double, Vector>> cand;
    if (d == 2) {
        for (int i = 0; i < 4000; ++i) {
            const double t = std::numbers::pi * i / 4000.0;
            Vector w(2);
            w << std::cos(t), std::sin(t);
            cand.emplace_back(half_width(pts, w), w);
        }
    } else {
        const int count = 8000;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - (i + 0.5) / count;  // upper hemisphere
            const double r = std::sqrt(1.0 - z * z);
            Vector w(3);
            w << r * std::cos(golden * i), r * std::sin(golden * i), z;
            cand.emplace_back(half_width(pts, w), w);
        }
    }
    constexpr int kStarts = 16;
    std::partial_sort(cand.begin(), cand.begin() + kStarts, cand.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
    double best = cand.front().first;
    for (int c = 0; c < kStarts; ++c) {
        Vector w = cand[c].second;
        double value = cand[c].first;
        for (double step = 0.1; step > 1e-12; step *= 0.8) {
            for (int trial = 0; trial < 48; ++trial) {
                Vector trialW = w;
                for (int j = 0; j < d; ++j) trialW(j) += step * rng.normal();
                trialW.normalize();
                const double v = half_width(pts, trialW);
                if (v < value) {
                    value = v;
                    w = trialW;
                }
            }
        }
        best = std::min(best, value);
    }
    return best;
}

std::vector<Vector> random_cloud(int d, Rng& rng) {
    const double radius = std::exp(std::log(0.1) + std::log(100.0) * rng.uniform());
    std::vector<Vector> pts(d + 1);
    for (Vector& p : pts) {
        p = random_unit_vector(d, rng) * radius * std::pow(rng.uniform(), 1.0 / d);
    }
    if (rng.uniform() < 0.5) {
        // Squash along a random direction to reach the small-volume regime.
        const Vector u = random_unit_vector(d, rng);
        const double factor = std::pow(10.0, -8.0 * rng.uniform());
        const double offset = radius * (rng.uniform() - 0.5);
        for (Vector& p : pts) {
            const double t = u.dot(p) - offset;
            p -= (1.0 - factor) * t * u;
        }
    }
    return pts;
}

}  // namespace

std::vector<CheckResult> affine_volume_suite(std::size_t cloudsPerDimension, std::uint64_t seed) {
    Tally wedgeOracle("affine volume: wedge sum equals the cofactor determinant, relative 1e-10");
    Tally spanOracle("affine volume: span distance equals the Gram-Schmidt residual, relative 1e-10");
    Tally nearBelow("affine volume: hyperplane distance never above a direction search");
    Tally nearClose("affine volume: hyperplane distance within 1e-7 C of a direction search");
    Tally iToIi("affine volume: i(c) gives ii(2^{d+1} C^{d-1} c)");
    Tally iiToIii("affine volume: ii(c) gives iii(c^{1/d})");
    Tally iiiToI("affine volume: iii(c) gives i(c)");
    for (int d = 1; d <= 3; ++d) {
        for (std::size_t i = 0; i < cloudsPerDimension; ++i) {
            Rng rng(seed + static_cast<std::uint64_t>(d), i);
            const std::vector<Vector> pts = random_cloud(d, rng);
            const AffineVolume v = affine_volume(pts);
            const double C = v.radius * (1.0 + 1e-12);
            const double scale = std::pow(2.0 * C, d);

            Matrix a(d + 1, d + 1);
            for (int j = 0; j <= d; ++j) {
                a.col(j).head(d) = pts[j];
                a(d, j) = 1.0;
            }
            wedgeOracle.residual(std::abs(v.wedgeSum - std::abs(leibniz_det(a))) / scale, 1e-10);
            wedgeOracle.count();

            std::vector<Vector> diffs;
            for (int j = 0; j < d; ++j) diffs.push_back(pts[j] - pts[d]);
            double span = std::numeric_limits<double>::infinity();
            for (double dist : gram_schmidt_distances(diffs)) span = std::min(span, dist);
            spanOracle.residual((v.spanDistance - span) / (2.0 * C), 1e-10);
            spanOracle.count();

            const double brute = brute_near_hyperplane(pts, rng);
            nearBelow.bound(v.nearHyperplane, brute);
            nearBelow.count();
            nearClose.residual((brute - v.nearHyperplane) / C, 1e-7);
            nearClose.count();

            iToIi.bound(v.wedgeSum, std::pow(2.0, d + 1) * std::pow(C, d - 1) * v.nearHyperplane + 1e-12 * scale);
            iToIi.count();
            iiToIii.bound(v.spanDistance, std::pow(v.wedgeSum, 1.0 / d) + 1e-12 * C);
            iiToIii.count();
            iiiToI.bound(v.nearHyperplane, v.spanDistance + 1e-12 * C);
            iiiToI.count();
        }
    }
    return {wedgeOracle.done(), spanOracle.done(), nearBelow.done(), nearClose.done(), iToIi.done(), iiToIii.done(), iiiToI.done()};
}

bool all_pass(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

}  // namespace flagwalk::tools
