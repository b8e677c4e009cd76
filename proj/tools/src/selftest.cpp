#include "selftest.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flagwalk/error.hpp"
#include "flagwalk/exterior.hpp"
#include "flagwalk/flag.hpp"
#include "flagwalk/fourier.hpp"
#include "flagwalk/noncon.hpp"
#include "flagwalk/renewal.hpp"
#include "flagwalk/spectral.hpp"
#include "flagwalk/walk.hpp"
#include "presets.hpp"

namespace flagwalk::tools {

namespace {

using std::numbers::pi;

class Checks {
public:
    void expect(const std::string& name, bool ok, const std::string& detail = {}) {
        CheckResult r;
        r.name = name;
        r.pass = ok;
        r.worst = ok ? 0.0 : 2.0;
        r.instances = 1;
        r.detail = detail;
        out_.push_back(std::move(r));
    }
    void near(const std::string& name, double actual, double expected, double tol) {
        const double err = std::abs(actual - expected);
        CheckResult r;
        r.name = name;
        r.worst = err == 0.0 ? 0.0 : err / tol;
        r.pass = err <= tol;
        r.instances = 1;
        std::ostringstream d;
        d.precision(17);
        d << "got " << actual << ", expected " << expected;
        r.detail = d.str();
        out_.push_back(std::move(r));
    }
    template <class E, class Fn>
    void throws(const std::string& name, Fn&& fn) {
        bool thrown = false;
        try {
            fn();
        } catch (const E&) {
            thrown = true;
        }
        expect(name, thrown, thrown ? "" : "no exception");
    }
    std::vector<CheckResult> take() { return std::move(out_); }

private:
    std::vector<CheckResult> out_;
};

Matrix mat2(double a, double b, double c, double d) {
    Matrix x(2, 2);
    x << a, b, c, d;
    return x;
}

Matrix diag(std::initializer_list<double> v) {
    Vector d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d(i++) = x;
    return d.asDiagonal();
}

MeasureSpec single(const Matrix& g, const std::string& label) {
    return MeasureSpec({{GroupElement::normalized(g), 1.0}}, label);
}

MeasureSpec two_atom_sl2() {
    return MeasureSpec({{GroupElement(diag({2.0, 0.5})), 0.5}, {GroupElement(plane_rotation(2, 0, 1, 1.0)), 0.5}},
                       "sl2-diag-rotation");
}

void lie_core(Checks& c) {
    c.near("cartan: identity has kappa 0", cartan_decompose(GroupElement::identity(2)).kappa.norm(), 0.0, 1e-15);
    const Vector k = cartan_decompose(GroupElement(diag({2.0, 0.5}))).kappa;
    c.near("cartan: diag(2, 1/2) has kappa_1 = log 2", k(0), std::log(2.0), 1e-14);
    c.near("cartan: diag(2, 1/2) has kappa_2 = -log 2", k(1), -std::log(2.0), 1e-14);
    c.near("cartan: unipotent [[1,1],[0,1]] has kappa_1 = log golden ratio",
           cartan_decompose(GroupElement(mat2(1, 1, 0, 1))).kappa(0), std::log((1.0 + std::sqrt(5.0)) / 2.0), 1e-14);

    Matrix upper(3, 3);
    upper << 2, 1, 3, 0, 1, -1, 0, 0, 0.5;
    c.near("iwasawa: upper triangular input has k = identity",
           (iwasawa_decompose(GroupElement(upper)).k - Matrix::Identity(3, 3)).norm(), 0.0, 1e-14);
    const IwasawaTriple rot = iwasawa_decompose(GroupElement(plane_rotation(3, 0, 2, 0.7)));
    c.near("iwasawa: rotation has sigma = 0", rot.sigma.norm(), 0.0, 1e-14);
    c.near("iwasawa: rotation has n = identity", (rot.n - Matrix::Identity(3, 3)).norm(), 0.0, 1e-14);

    c.near("gap: identity", gap(GroupElement::identity(1)), 1.0, 1e-15);
    c.near("gap: diag(2, 1/2)", gap(GroupElement(diag({2.0, 0.5}))), 0.25, 1e-14);
    c.near("gap: diag(4, 1, 1/4)", gap(GroupElement(diag({4.0, 1.0, 0.25}))), 0.25, 1e-14);

    Vector abc(3);
    abc << 0.7, 0.1, -0.8;
    Vector expected(3);
    expected << 0.8, -0.1, -0.7;
    c.near("opposition involution reverses and negates", (opposition_involution(abc) - expected).norm(), 0.0, 1e-15);
    c.near("opposition involution fixes 0", opposition_involution(Vector::Zero(2)).norm(), 0.0, 0.0);

    const RootData r1 = structural_constants(1);
    c.near("constants: m = 1 has C1' = sqrt 2", r1.C1prime, std::sqrt(2.0), 1e-12);
    c.expect("constants: m = 1 has L = [-2]", r1.L.size() == 1 && r1.L(0, 0) == -2);
    const RootData r2 = structural_constants(2);
    Eigen::MatrixXi l2(2, 2);
    l2 << -2, 1, 1, -2;
    c.expect("constants: m = 2 has L = [[-2,1],[1,-2]]", r2.L == l2);
    c.near("constants: C_A = 3 C1 + C1'", r2.CA, 3.0 * r2.C1 + r2.C1prime, 1e-14);
}

void rep_exterior(Checks& c) {
    Rng rng(11);
    const GroupElement g = GroupElement::normalized(random_unimodular(3, rng));
    c.near("exterior: degree 1 is g itself", (exterior_power(g, 1).entries - g.matrix()).norm(), 0.0, 0.0);
    const Matrix d3 = diag({2.0, 1.25, 0.4});
    c.near("exterior: wedge^2 diag(a,b,c) = diag(ab, ac, bc)",
           (exterior_power(GroupElement(d3), 2).entries - diag({2.5, 0.8, 0.5})).norm(), 0.0, 1e-14);
    c.near("exterior: wedge^2 of the SL4 identity is the 6 x 6 identity",
           (exterior_power(GroupElement::identity(3), 2).entries - Matrix::Identity(6, 6)).norm(), 0.0, 0.0);

    c.near("gamma12: identity", gamma12(GroupElement::identity(2), 1), 1.0, 1e-14);
    const double t = 0.8;
    c.near("gamma12: diag(e^t, e^-t) gives e^{-2t}", gamma12(GroupElement(diag({std::exp(t), std::exp(-t)})), 1),
           std::exp(-2.0 * t), 1e-14);
    const CartanTriple ct = cartan_decompose(g);
    for (int d = 1; d <= 2; ++d)
        c.near("gamma12: random SL3 degree " + std::to_string(d) + " equals e^{-alpha_d kappa}", gamma12(g, d),
               std::exp(-(ct.kappa(d - 1) - ct.kappa(d))), 1e-8);

    const DensityPair dp = density_points(GroupElement(d3), 1);
    c.near("density points: descending diagonal has xM = e_1", std::abs(dp.xM(0)), 1.0, 1e-14);
    const Matrix r = plane_rotation(2, 0, 1, 0.3);
    const DensityPair rp = density_points(GroupElement(Matrix(r * diag({4.0, 0.25}))), 1);
    c.near("density points: r diag(4, 1/4) has xM = r e_1", proj_distance(rp.xM, r.col(0)), 0.0, 1e-14);
    const DensityPair a = density_points(g, 1), b = density_points(g.transpose(), 1);
    c.near("density points: ym of g is xM of g^T", proj_distance(a.ym, b.xM), 0.0, 1e-12);

    c.near("norm identity: identity", operator_norm_identity_check(GroupElement::identity(2), 1), 0.0, 1e-15);
    c.near("norm identity: diag(2, 1/2)", operator_norm_identity_check(GroupElement(diag({2.0, 0.5})), 1), 0.0, 1e-14);
}

void flag_geom(Checks& c) {
    const FlagPoint b1 = FlagPoint::base(1), o1 = FlagPoint::opposite(1);
    const FlagPoint b2 = FlagPoint::base(2), o2 = FlagPoint::opposite(2);
    c.near("dist_alpha: a flag to itself", dist_alpha(b2, b2, 1), 0.0, 0.0);
    c.near("dist_alpha: e_1 against e_2 in SL2", dist_alpha(b1, o1, 1), 1.0, 1e-15);
    c.near("dist_alpha: base against opposite in SL3, degree 1", dist_alpha(b2, o2, 1), 1.0, 1e-15);
    Rng rng(12);
    const FlagPoint x(random_rotation(2, rng)), y(random_rotation(2, rng));
    c.near("dist_flag equals dist_alpha when m = 1", dist_flag(x, y), dist_alpha(x, y, 1), 0.0);

    c.near("delta of base flag and base dual point is 1", delta(b2, b2), 1.0, 1e-15);
    c.near("delta of base flag and opposite dual point in SL2 is 0", delta(b1, o1), 0.0, 1e-15);

    const FlagPoint eta(random_rotation(3, rng));
    c.near("cocycle: identity gives 0", iwasawa_cocycle(GroupElement::identity(2), eta).norm(), 0.0, 1e-14);
    const GroupElement dg(diag({3.0, 1.0, 1.0 / 3.0}));
    c.near("cocycle: descending diagonal at the base flag gives kappa",
           (iwasawa_cocycle(dg, b2) - cartan_decompose(dg).kappa).norm(), 0.0, 1e-14);

    const SignedFlag z(random_rotation(3, rng));
    c.near("derivative: identity gives 0", cocycle_derivative(GroupElement::identity(2), z, 1), 0.0, 1e-14);
    c.near("derivative: diagonal at the base point gives 0", cocycle_derivative(dg, SignedFlag::base(2), 2), 0.0, 1e-14);

    c.expect("sign: m(k, k) is the identity", sign_m(z, z).is_identity());
    const SignElement quarter = sign_m(Matrix(Matrix::Identity(2, 2)), plane_rotation(2, 0, 1, pi / 2));
    c.expect("sign: identity against the quarter turn is zero", quarter.zero);

    c.near("alpha circle: t = 0 returns z", (alpha_circle_point(z, 1, 0.0).k() - z.k()).norm(), 0.0, 1e-15);
    const SignedFlag turned = alpha_circle_point(SignedFlag::base(2), 1, pi / 2);
    c.near("alpha circle: quarter turn in SL3, d = 1, moves the line to e_2",
           std::abs(FlagPoint(turned).wedge(1)(1)), 1.0, 1e-15);
    c.near("alpha circle: the plane is unchanged in degree 2",
           dist_alpha(FlagPoint(alpha_circle_point(z, 1, 0.9)), FlagPoint(z), 2), 0.0, 1e-14);

    c.near("arc distance: a point to itself", arc_distance(z, z, 1), 0.0, 1e-15);
    c.near("arc distance: quarter turn", arc_distance(z, alpha_circle_point(z, 2, pi / 2), 2), pi / 2, 1e-7);
    for (double t : {0.3, 1.2, 2.5})
        c.near("arc distance: points t = " + std::to_string(t) + " apart", arc_distance(z, alpha_circle_point(z, 1, t), 1),
               std::min(t, pi - t), 1e-10);
    c.throws<NotOnCircle>("arc distance: points off a common circle are rejected",
                          [&] { arc_distance(z, SignedFlag(random_rotation(3, rng)), 1); });

    const GroupElement g1(Matrix(plane_rotation(2, 0, 1, 0.4) * diag({30.0, 1.0 / 30.0}) * plane_rotation(2, 0, 1, -1.1)));
    const ChangeFlagsResult r1 = change_flags(FlagPoint(random_rotation(2, rng)), FlagPoint(random_rotation(2, rng)), g1, 0.05);
    c.expect("changing flags: rank 1 chains have at most one move", r1.chain.size() <= 2 && r1.chainPrime.size() <= 1);
    const GroupElement g2(Matrix(random_rotation(3, rng) * diag({40.0, 1.0, 1.0 / 40.0}) * random_rotation(3, rng)));
    const FlagPoint same(random_rotation(3, rng));
    try {
        const ChangeFlagsResult r = change_flags(same, same, g2, 1e-3);
        double moved = 0.0;
        for (const FlagMove& mv : r.moves) moved = std::max(moved, mv.stepDistance);
        for (const FlagMove& mv : r.movesPrime) moved = std::max(moved, mv.stepDistance);
        c.near("changing flags: equal flags give zero moves", moved, 0.0, 1e-8);
    } catch (const PreconditionViolated& e) {
        c.expect("changing flags: equal flags give zero moves", false, e.what());
    }
}

void walk_engine(Checks& c, std::uint64_t seed, int workers) {
    const MeasureSpec sl2 = two_atom_sl2();
    c.near("walk: n = 0 gives the identity", (sample_product(sl2, 0, seed).full_matrix() - Matrix::Identity(2, 2)).norm(),
           0.0, 0.0);
    const Matrix g = plane_rotation(2, 0, 1, 0.3) * diag({1.5, 1.0 / 1.5});
    const MeasureSpec one = single(g, "single");
    Matrix g5 = Matrix::Identity(2, 2);
    for (int i = 0; i < 5; ++i) g5 = g5 * g;
    c.near("walk: single atom, n = 5 gives g^5", (sample_product(one, 5, seed).full_matrix() - g5).norm() / g5.norm(), 0.0,
           1e-13);

    const McOptions opts{2000, seed, workers};
    const LyapunovEstimate det = lyapunov_vector(single(diag({2.0, 0.5}), "det"), 50, opts);
    c.near("lyapunov: deterministic diag(2, 1/2) gives log 2", det.sigma(0), std::log(2.0), 1e-12);
    const Vector sigma = det.sigma;
    const DeviationCurve ldp = large_deviation_curve(single(diag({2.0, 0.5}), "det"), sigma, 0.1, {10, 20}, opts);
    c.expect("large deviations: deterministic spec never deviates", ldp.probability[0] == 0.0 && ldp.probability[1] == 0.0);
    const DeviationCurve pos = position_deviation_curve(sl2, std::numeric_limits<double>::infinity(), {10, 20},
                                                        FlagPoint::base(1), PositionMode::LineRepelling, opts);
    c.expect("position deviations: eps = infinity is the empty event", pos.probability[0] == 0.0 && pos.probability[1] == 0.0);

    c.near("stationary: n = 0 returns the base flag", dist_flag(stationary_sample(sl2, 0, seed), FlagPoint::base(1)), 0.0,
           0.0);
    Vector y(2);
    y << 1.0, 0.0;
    const RegularityFit reg = holder_regularity(sl2, y, {0.01, 0.05, 0.2, 0.5}, opts);
    c.expect("regularity: masses are nondecreasing in r and at most 1",
             std::is_sorted(reg.mass.begin(), reg.mass.end()) && reg.mass.back() <= 1.0 && reg.mass.front() >= 0.0);

    const std::size_t n = 30;
    const Vector s2 = Vector::LinSpaced(3, 0.5, -0.5);
    const GroupElement h = GroupElement::diagonal(static_cast<double>(n) * s2);
    c.expect("good elements: h = exp(n sigma) at the base flags is good",
             is_good_element(h, n, 1.0, FlagPoint::base(2), FlagPoint::base(2), s2));
    c.expect("good elements: eps = 0 is never good off exp(n sigma)",
             !is_good_element(GroupElement::diagonal(Vector::LinSpaced(3, 16.0, -16.0)), n, 0.0, FlagPoint::base(2),
                              FlagPoint::base(2), s2));
}

void noncon(Checks& c) {
    const std::size_t n = 7;
    Vector s(3);
    s << 0.6, 0.1, -0.7;
    const GroupElement h = GroupElement::diagonal(static_cast<double>(n) * s);
    c.near("y vector: g = identity, h = exp(n sigma) gives all ones",
           (y_vector(GroupElement::identity(2), h, FlagPoint::base(2), n, s) - Vector::Ones(2)).norm(), 0.0, 1e-12);
    c.near("y vector: n = 0, g = h = identity gives all ones",
           (y_vector(GroupElement::identity(2), GroupElement::identity(2), FlagPoint::base(2), 0, s) - Vector::Ones(2)).norm(),
           0.0, 0.0);

    c.near("E_d: all ones map to all ones", (e_d_map(Vector::Ones(3), 3) - Vector::Ones(3)).norm(), 0.0, 0.0);
    Vector x1(1);
    x1 << 1.7;
    c.near("E_d: m = 1 maps x to x^-2", e_d_map(x1, 1)(0), std::pow(1.7, -2.0), 1e-15);
    Vector x2(2);
    x2 << 1.3, 0.6;
    const Vector e2 = e_d_map(x2, 2);
    c.near("E_d: m = 2, first coordinate a^-2 b", e2(0), 0.6 / (1.3 * 1.3), 1e-15);
    c.near("E_d: m = 2, second coordinate a b^-2", e2(1), 1.3 / (0.6 * 0.6), 1e-14);
    c.throws<DomainError>("E_d: non-positive input is a domain error", [] { e_d_map(Vector::Zero(2), 1); });

    Vector p(1), q(1);
    p << 2.5;
    q << -0.25;
    c.near("affine det: d = 1 gives y1 - y2", affine_det({p, q}), 2.75, 1e-15);
    Vector u(2);
    u << 0.3, 0.9;
    c.near("affine det: coincident points give 0", affine_det({u, u, Vector::Ones(2)}), 0.0, 1e-15);
}

void noncon_mc(Checks& c, std::uint64_t seed, int workers) {
    const MeasureSpec sl2 = two_atom_sl2();
    const McOptions opts{400, seed, workers};
    const Vector sigma = Vector::LinSpaced(2, 0.2, -0.2);
    const double wide = pnc_estimate(sl2, 5, FlagPoint::base(1), GroupElement::identity(1), sigma, 1e9, opts, 16).estimate;
    c.near("PNC: a slab wider than the cloud holds everything", wide, 1.0, 0.0);
    const double point = pnc_estimate(single(diag({2.0, 0.5}), "det"), 5, FlagPoint::base(1), GroupElement::identity(1),
                                      sigma, 1e-6, opts, 16).estimate;
    c.near("PNC: a deterministic spec is a point mass", point, 1.0, 0.0);
    const double snc = snc_estimate(sl2, 20, FlagPoint::base(1), 1, sigma, 0.0, opts).estimate;
    // short walks repeat words, and repeated words give exactly degenerate tuples
    c.near("SNC: threshold 0 has probability 0", snc, 0.0, 0.0);
}

void spectral(Checks& c) {
    const MeasureSpec sl2 = two_atom_sl2();
    const TransferDiscretization t0 = build_transfer(sl2, Complex(0.0), 128);
    CVector ones = CVector::Ones(128), image(128);
    t0.apply(ones, image);
    c.near("transfer: z = 0 fixes constants", (image - ones).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    const MeasureSpec rot = single(plane_rotation(2, 0, 1, 0.77), "rotation");
    build_transfer(rot, Complex(0.0), 128).apply(ones, image);
    c.near("transfer: a rotation atom has unit row sums", (image - ones).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    c.near("spectral radius at z = 0", spectral_radius(build_transfer(sl2, Complex(0.0), 256)).radius, 1.0, 1e-6);
    const double up = spectral_radius(build_transfer(sl2, Complex(0.01, 5.0), 256)).radius;
    const double down = spectral_radius(build_transfer(sl2, Complex(0.01, -5.0), 256)).radius;
    c.near("spectral radius: conjugate z gives the same radius", up, down, 1e-8);
    c.expect("spectral radius: z = 5i is inside the unit disc", up < 1.0);

    const IterateNorms it = iterate_norm_estimate(sl2, Complex(0.0), [](const FlagPoint&) { return Complex(1.0); }, 8,
                                                  FlagPoint::base(1));
    double dev = 0.0;
    for (Complex v : it.values) dev = std::max(dev, std::abs(v - 1.0));
    c.near("iterates: z = 0 keeps constants", dev, 0.0, 1e-12);
    const IterateNorms iso = iterate_norm_estimate(rot, Complex(0.0, 5.0), [](const FlagPoint&) { return Complex(1.0); }, 6,
                                                   FlagPoint::base(1));
    c.near("iterates: an isometric atom keeps modulus 1", std::abs(iso.values.back()), 1.0, 1e-12);
}

void renewal(Checks& c, std::uint64_t seed, int workers) {
    const MeasureSpec sl2 = two_atom_sl2();
    const TestFunction bump = TestFunction::bump();
    Vector x(2);
    x << 1.0, 0.0;
    const McOptions opts{500, seed, workers};
    const RenewalResult far = renewal_sum(sl2, bump, x, -50.0, 0.2, opts);
    c.expect("renewal: t far below the support gives 0", far.estimate == 0.0 && far.limit == 0.0);

    const MeasureSpec oracle = single(diag({std::numbers::e, 1.0 / std::numbers::e}), "diag-oracle");
    const TestFunction spline = TestFunction::cubic_bspline();
    const double t = 3.3;
    double exact = 0.0;
    for (int k = 0; k < 40; ++k) exact += spline(k - t);
    c.near("renewal: diag(e, 1/e) sums f(n - t)", renewal_sum(oracle, spline, x, t, 1.0, {4, seed, workers}).estimate,
           exact, 1e-10);
    c.near("renewal: norm sum for diag(e, 1/e) sums f(n - t)",
           renewal_norm_sum(oracle, spline, t, 1.0, {4, seed, workers}).estimate, exact, 1e-10);
    c.throws<MustEstimateFirst>("renewal: a missing Lyapunov exponent is refused",
                                [&] { renewal_sum(sl2, bump, x, 1.0, std::nullopt, opts); });
    c.throws<InvalidArgument>("renewal: the identity spec is refused",
                              [&] { renewal_norm_sum(single(Matrix::Identity(2, 2), "id"), bump, 1.0, 0.2, opts); });
}

void fourier(Checks& c, std::uint64_t seed, int workers) {
    const MeasureSpec sl2 = two_atom_sl2();
    const McOptions opts{2000, seed, workers};
    const std::vector<FourierCoefficient> fc = fourier_coefficients(sl2, {0, 1, 3, -3}, opts);
    c.near("fourier: k = 0 gives 1", std::abs(fc[0].value - 1.0), 0.0, 0.0);
    c.expect("fourier: |coefficient| <= 1", std::abs(fc[1].value) <= 1.0 && std::abs(fc[2].value) <= 1.0);
    c.near("fourier: coefficient at -k is the conjugate", std::abs(fc[3].value - std::conj(fc[2].value)), 0.0, 1e-12);
    c.throws<DegenerateFit>("fourier: the grid {0} is rejected", [&] { decay_exponent_fit(sl2, {0}, opts); });

    const OscillatoryResult zero = oscillatory_integral(sl2, oscillatory_preset("angle", "zero", 1, 5.0, 2.0), opts);
    c.near("oscillatory: r = 0 gives 0", std::abs(zero.value), 0.0, 0.0);
    const OscillatoryResult flat = oscillatory_integral(sl2, oscillatory_preset("constant", "one", 1, 5.0, 2.0), opts);
    c.near("oscillatory: constant phase gives |E r|", std::abs(flat.value), 1.0, 1e-12);
    const OscillatoryResult angle = oscillatory_integral(sl2, oscillatory_preset("angle", "one", 1, 3.0, 2.0), opts);
    c.near("oscillatory: phi = 2 theta with xi = 3 is the third coefficient", std::abs(angle.value - fc[2].value), 0.0,
           1e-12);

    const GoodnessReport good = cr_goodness_check(oscillatory_preset("angle", "one", 1, 1.0, 2.0 * pi), 1, opts);
    c.expect("goodness: phi = 2 theta passes at C = 2 pi", good.all_pass(), describe(good));
    const GoodnessReport flatRep = cr_goodness_check(oscillatory_preset("constant", "one", 1, 1.0, 4.0), 1, opts);
    c.expect("goodness: constant phase fails G4", !flatRep.g4.pass);
    const GoodnessReport crit = cr_goodness_check(oscillatory_preset("quadratic", "one", 1, 1.0, 4.0), 1, opts);
    c.expect("goodness: a critical point fails G2", !crit.g2.pass);
    c.throws<EmptySupport>("goodness: empty support is an error",
                           [&] { cr_goodness_check(oscillatory_preset("angle", "zero", 1, 1.0, 4.0), 1, opts); });
}

}  // namespace

std::vector<CheckResult> example_checks(std::uint64_t seed, int workers) {
    Checks c;
    lie_core(c);
    rep_exterior(c);
    flag_geom(c);
    walk_engine(c, seed, workers);
    noncon(c);
    noncon_mc(c, seed, workers);
    spectral(c);
    renewal(c, seed, workers);
    fourier(c, seed, workers);
    return c.take();
}

}  // namespace flagwalk::tools
