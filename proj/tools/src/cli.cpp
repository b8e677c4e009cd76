#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flagwalk/error.hpp"
#include "flagwalk/fourier.hpp"
#include "flagwalk/noncon.hpp"
#include "flagwalk/renewal.hpp"
#include "flagwalk/spectral.hpp"
#include "flagwalk/walk.hpp"
#include "lemma_suite.hpp"
#include "presets.hpp"
#include "selftest.hpp"

namespace flagwalk::tools {

namespace {

using std::numbers::pi;

struct Params {
    std::string spec;
    std::uint64_t seed = 1;
    std::optional<std::size_t> samples;
    int workers = 0;
    std::string out;
    std::size_t burnIn = kDefaultBurnIn;

    std::size_t n = 0;
    std::vector<std::size_t> nList;
    std::optional<double> eps;
    std::vector<double> sigma;
    std::string mode = "cartan";
    std::vector<double> y;
    double rMin = 1e-3;
    double rMax = 0.3;
    std::size_t points = 12;
    std::string eta = "random";
    std::size_t gLength = 0;

    std::string nonconKind;
    int degree = 0;
    bool averaged = false;
    std::size_t directions = kSlabDirections;

    std::vector<long> ks;
    long kMin = 2;
    long kMax = 2048;
    std::string phase = "angle";
    std::string amplitude = "one";
    std::vector<double> xi;
    double C = 2.0;

    std::vector<double> aGrid{0.0};
    std::vector<double> bList;
    double bMin = 1.0;
    double bMax = 50.0;
    double bStep = 0.5;
    bool bothSigns = false;
    int gridSize = 2048;
    bool refine = false;
    bool contrast = false;
    double tol = 0.05;
    double a = 0.0;
    double b = 0.0;
    int iters = 10;

    std::vector<double> ts;
    std::string testFunction = "bump";
    std::vector<double> x;
    bool norm = false;
    bool estimateSigma = false;
    std::optional<double> topExponent;
    double tMin = 2.0;
    double tMax = 30.0;
    double tStep = 2.0;

    std::vector<double> radii{1e-2};
    int angles = 4;
    std::string resolventF = "one";

    std::size_t instances = 10000;
};

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

class Csv {
public:
    explicit Csv(std::ostream& os) : os_(os) { os_ << std::setprecision(17); }
    template <class... T>
    void row(const T&... values) {
        bool first = true;
        ((os_ << (first ? "" : ","), put(values), first = false), ...);
        os_ << '\n';
    }
    void comment(const std::string& line) { os_ << "# " << line << '\n'; }
    void raw(const std::string& line) { os_ << line << '\n'; }

private:
    template <class T>
    void put(const T& v) {
        if constexpr (std::is_convertible_v<T, std::string>)
            os_ << quoted(v);
        else
            os_ << v;
    }
    std::ostream& os_;
};

std::string fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string format_vector(const Vector& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? " " : "") << v(i);
    return s.str();
}

std::string fit_summary(const std::optional<LineFit>& fit) {
    if (!fit) return "fit: not enough points";
    std::ostringstream s;
    s << std::setprecision(6) << "slope " << fit->slope << " stderr " << fit->slopeStderr << " 95% CI [" << fit->ciLow
      << ", " << fit->ciHigh << "] over " << fit->points << " points";
    return s.str();
}

struct Context {
    const Params& p;
    std::optional<MeasureSpec> spec;
    Csv& csv;

    McOptions opts(std::size_t defaultSamples) const { return {p.samples.value_or(defaultSamples), p.seed, p.workers}; }
    const MeasureSpec& measure() const {
        if (!spec) throw InvalidArgument("--spec is required for this command");
        return *spec;
    }
    int rank() const { return measure().rank(); }

    // Auxiliary randomness for fixed flags and group elements, kept away from
    // the trajectory streams.
    FlagPoint flag(std::uint64_t slot) const {
        if (p.eta == "base") return FlagPoint::base(rank());
        if (p.eta == "opposite") return FlagPoint::opposite(rank());
        Rng rng(p.seed, kAuxStream + 100 + slot);
        return FlagPoint(random_rotation(rank() + 1, rng));
    }
    GroupElement word() const {
        Rng rng(p.seed, kAuxStream + 200);
        WalkState w(rank());
        for (std::size_t i = 0; i < p.gLength; ++i) w.multiply_right(measure().sample(rng));
        return w.element();
    }
    Vector lyapunov() const {
        const int dim = rank() + 1;
        if (!p.sigma.empty()) {
            if (static_cast<int>(p.sigma.size()) != dim)
                throw InvalidArgument("--sigma needs " + std::to_string(dim) + " components");
            Vector s = Eigen::Map<const Vector>(p.sigma.data(), dim);
            if (std::abs(s.sum()) > 1e-6 * std::max(1.0, s.norm())) throw InvalidArgument("--sigma must sum to zero");
            return s;
        }
        const Vector s = lyapunov_or_estimate(measure(), {std::min<std::size_t>(p.samples.value_or(2000), 2000),
                                                          p.seed ^ 0x5157ULL, p.workers});
        csv.comment("sigma: " + format_vector(s));
        return s;
    }
    double top_exponent() const {
        if (p.topExponent) return *p.topExponent;
        if (measure().lyapunov()) return (*measure().lyapunov())(0);
        if (!p.estimateSigma)
            throw MustEstimateFirst("renewal: give --sigma-top, or --estimate-sigma to estimate it first");
        const TopExponentEstimate s =
            top_exponent_estimate(measure(), kDefaultBurnIn, 1000, {20000, p.seed ^ 0x5157ULL, p.workers});
        std::ostringstream line;
        line << std::setprecision(17) << "sigma_top: " << s.value << " stderr " << s.stdErr;
        csv.comment(line.str());
        return s.value;
    }
    Vector start_vector() const {
        const int dim = rank() + 1;
        if (p.x.empty()) return Vector::Unit(dim, 0);
        if (static_cast<int>(p.x.size()) != dim) throw InvalidArgument("--x needs " + std::to_string(dim) + " components");
        return Eigen::Map<const Vector>(p.x.data(), dim);
    }
};

std::vector<std::size_t> n_list(const Params& p, std::vector<std::size_t> fallback) {
    return p.nList.empty() ? fallback : p.nList;
}

void cmd_lyapunov(Context& c) {
    const LyapunovEstimate e = lyapunov_vector(c.measure(), c.p.n ? c.p.n : 200, c.opts(100000));
    c.csv.row("quantity", "index", "value", "stderr");
    for (Eigen::Index i = 0; i < e.sigma.size(); ++i) c.csv.row("sigma", i + 1, e.sigma(i), e.stdErr(i));
    c.csv.row("margin", 0, e.margin, e.marginStderr);
    if (e.positivityWarning) c.csv.comment("warning: some simple root value is within 2 stderr of 0");
}

void cmd_ldp(Context& c) {
    const auto ns = n_list(c.p, {10, 20, 30, 40, 50, 60});
    const double eps = c.p.eps.value_or(0.1);
    DeviationCurve curve;
    if (c.p.mode == "cartan") {
        curve = large_deviation_curve(c.measure(), c.lyapunov(), eps, ns, c.opts(100000));
    } else {
        static const std::vector<std::pair<std::string, PositionMode>> modes{
            {"line-repelling", PositionMode::LineRepelling},
            {"line-attracting", PositionMode::LineAttracting},
            {"flag-repelling", PositionMode::FlagRepelling},
            {"flag-attracting", PositionMode::FlagAttracting}};
        const auto it = std::find_if(modes.begin(), modes.end(), [&](const auto& m) { return m.first == c.p.mode; });
        if (it == modes.end()) throw InvalidArgument("unknown --mode " + c.p.mode);
        curve = position_deviation_curve(c.measure(), eps, ns, c.flag(0), it->second, c.opts(100000));
    }
    c.csv.row("n", "probability", "stderr");
    for (std::size_t i = 0; i < curve.n.size(); ++i) c.csv.row(curve.n[i], curve.probability[i], curve.stdErr[i]);
    c.csv.comment(fit_summary(curve.fit));
}

void cmd_stationary(Context& c) {
    const McOptions o = c.opts(1000);
    const MeasureSpec& spec = c.measure();
    const int dim = spec.dim();
    std::vector<Matrix> frames(o.samples);
    const Matrix start = Matrix::Identity(dim, dim);
    for_each_index(o.samples, o.workers, [&](std::size_t i) {
        Rng rng(o.seed, i);
        frames[i] = stationary_frame(spec, c.p.burnIn, rng, start);
    });
    if (dim == 2) {
        c.csv.row("index", "theta");
        for (std::size_t i = 0; i < frames.size(); ++i) {
            double theta = std::atan2(frames[i](1, 0), frames[i](0, 0));
            if (theta < 0) theta += pi;
            if (theta >= pi) theta -= pi;
            c.csv.row(i, theta);
        }
        return;
    }
    std::ostringstream head;
    head << "index";
    for (int r = 0; r < dim; ++r)
        for (int col = 0; col < dim; ++col) head << ",k" << r + 1 << col + 1;
    c.csv.comment("columns of k span the flag; k is defined up to column signs");
    c.csv.raw(head.str());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        std::ostringstream line;
        line << std::setprecision(17) << i;
        for (int r = 0; r < dim; ++r)
            for (int col = 0; col < dim; ++col) line << ',' << frames[i](r, col);
        c.csv.raw(line.str());
    }
}

void cmd_regularity(Context& c) {
    const int dim = c.rank() + 1;
    Vector y = Vector::Unit(dim, 0);
    if (!c.p.y.empty()) {
        if (static_cast<int>(c.p.y.size()) != dim) throw InvalidArgument("--y needs " + std::to_string(dim) + " components");
        y = Eigen::Map<const Vector>(c.p.y.data(), dim);
    }
    const RegularityFit fit =
        holder_regularity(c.measure(), y, log_grid(c.p.rMin, c.p.rMax, c.p.points), c.opts(1000000), c.p.burnIn);
    c.csv.row("r", "mass");
    for (std::size_t i = 0; i < fit.r.size(); ++i) c.csv.row(fit.r[i], fit.mass[i]);
    c.csv.comment(fit_summary(fit.fit));
}

void cmd_goodfreq(Context& c) {
    const auto ns = n_list(c.p, {10, 20, 30, 40, 50});
    const Vector sigma = c.lyapunov();
    const FlagPoint eta = c.flag(0), zeta = c.flag(1);
    c.csv.row("n", "failure_frequency", "stderr", "samples");
    for (std::size_t n : ns) {
        const Frequency f = good_failure_frequency(c.measure(), n, c.p.eps.value_or(1.0), eta, zeta, sigma, c.opts(10000));
        c.csv.row(n, f.estimate, f.stdErr, f.samples);
    }
}

void cmd_noncon(Context& c) {
    const auto ns = n_list(c.p, {10, 20, 30, 40});
    const double eps = c.p.eps.value_or(0.1);
    const Vector sigma = c.lyapunov();
    const FlagPoint eta = c.flag(0);
    const GroupElement g = c.word();
    const bool pnc = c.p.nonconKind == "pnc";
    const int d = c.p.degree ? c.p.degree : c.rank();
    c.csv.row("n", pnc ? "width" : "threshold", "estimate", "stderr", "samples", "clamped");
    for (std::size_t n : ns) {
        const double scale = std::exp(-eps * static_cast<double>(n));
        const NonconEstimate e =
            pnc ? pnc_estimate(c.measure(), n, eta, g, sigma, scale, c.opts(4000), c.p.directions)
                : snc_estimate(c.measure(), n, eta, d, sigma, scale, c.opts(20000), c.p.averaged,
                               c.p.gLength ? std::optional<GroupElement>(g) : std::nullopt);
        c.csv.row(n, scale, e.estimate, e.stdErr, e.samples, e.clamped);
    }
}

void cmd_multiscale(Context& c) {
    const std::size_t n = c.p.n ? c.p.n : 40;
    const double eps = c.p.eps.value_or(0.5);
    const double dn = static_cast<double>(n);
    const auto rho = log_grid(std::exp(-2.0 * eps * dn), std::exp(-eps * dn / 4.0), c.p.points);
    const MultiscaleResult r = multiscale_noncon(c.measure(), n, c.flag(0), c.word(), c.lyapunov(), eps, rho,
                                                 c.opts(4000), c.p.directions);
    c.csv.row("rho", "mass");
    for (std::size_t i = 0; i < r.rho.size(); ++i) c.csv.row(r.rho[i], r.mass[i]);
    c.csv.comment("good samples: " + std::to_string(r.good) + " of " + std::to_string(r.samples) +
                  ", clamped: " + std::to_string(r.clamped));
    c.csv.comment(fit_summary(r.fit));
}

std::vector<long> k_grid(const Params& p) {
    if (!p.ks.empty()) return p.ks;
    if (p.kMin < 1 || p.kMax < p.kMin) throw InvalidArgument("need 1 <= --kmin <= --kmax");
    std::set<long> ks;
    for (double k : log_grid(static_cast<double>(p.kMin), static_cast<double>(p.kMax), p.points))
        ks.insert(std::lround(k));
    return {ks.begin(), ks.end()};
}

void cmd_fourier(Context& c) {
    const std::vector<long> ks = k_grid(c.p);
    const bool fit = ks.size() >= 3 && std::all_of(ks.begin(), ks.end(), [](long k) { return k > 0; });
    DecayFit result;
    if (fit) {
        result = decay_exponent_fit(c.measure(), ks, c.opts(100000), c.p.burnIn);
    } else {
        result.coefficients = fourier_coefficients(c.measure(), ks, c.opts(100000), c.p.burnIn);
    }
    c.csv.row("k", "re", "im", "modulus", "stderr");
    for (const FourierCoefficient& f : result.coefficients)
        c.csv.row(f.k, f.value.real(), f.value.imag(), std::abs(f.value), f.stdErr);
    if (fit) c.csv.comment(result.report);
}

void cmd_oscillatory(Context& c) {
    std::vector<double> xis = c.p.xi;
    if (xis.empty()) xis = {1, 2, 4, 8, 16, 32, 64};
    c.csv.row("xi", "re", "im", "modulus", "stderr");
    for (double xi : xis) {
        const OscillatorySpec osc = oscillatory_preset(c.p.phase, c.p.amplitude, c.rank(), xi, c.p.C);
        const OscillatoryResult r = oscillatory_integral(c.measure(), osc, c.opts(100000), c.p.burnIn);
        c.csv.row(xi, r.value.real(), r.value.imag(), std::abs(r.value), r.stdErr);
    }
}

void cmd_goodness(Context& c, std::ostream& body) {
    const int m = c.spec ? c.rank() : (c.p.degree ? c.p.degree : 1);
    const OscillatorySpec osc = oscillatory_preset(c.p.phase, c.p.amplitude, m, 1.0, c.p.C);
    const GoodnessReport r = cr_goodness_check(osc, m, c.opts(4000));
    body << std::setprecision(17) << "phase: " << c.p.phase << "\namplitude: " << c.p.amplitude << "\nC: " << c.p.C << '\n'
         << describe(r) << "result: " << (r.all_pass() ? "good" : "not good") << '\n';
}

std::vector<double> b_grid(const Params& p) {
    if (!p.bList.empty()) return p.bList;
    if (!(p.bStep > 0.0) || p.bMax < p.bMin) throw InvalidArgument("need --bstep > 0 and --bmin <= --bmax");
    std::vector<double> bs;
    const auto count = static_cast<long>(std::floor((p.bMax - p.bMin) / p.bStep + 1e-9));
    for (long i = 0; i <= count; ++i) {
        const double b = p.bMin + static_cast<double>(i) * p.bStep;
        if (p.bothSigns && b != 0.0) bs.push_back(-b);
        bs.push_back(b);
    }
    return bs;
}

void cmd_spectrum(Context& c) {
    if (c.p.contrast) {
        const AbelianContrast ac = abelian_contrast(c.measure(), c.p.bMin, c.p.bMax, c.p.tol);
        c.csv.row("b", "gap");
        for (std::size_t i = 0; i < ac.b.size(); ++i) c.csv.row(ac.b[i], ac.gap[i]);
        c.csv.comment(std::to_string(ac.b.size()) + " frequencies with |1 - lambda(ib)| below the tolerance");
        return;
    }
    const GapScan scan = spectral_gap_scan(c.measure(), c.p.aGrid, b_grid(c.p), c.p.gridSize, c.p.refine, 1.0);
    c.csv.row("a", "b", "N", "radius", "radius_2N", "refinement_delta");
    for (const ScanRow& r : scan.rows) {
        if (r.radiusRefined)
            c.csv.row(r.a, r.b, r.n, r.radius, *r.radiusRefined, *r.refinementDelta);
        else
            c.csv.row(r.a, r.b, r.n, r.radius, "", "");
    }
    std::ostringstream s;
    s << std::setprecision(17) << "max radius over |b| >= 1: " << scan.maxRadius << ", min gap " << scan.minGap;
    if (c.p.refine) s << ", max refinement delta " << scan.maxDelta;
    c.csv.comment(s.str());
}

void cmd_iterate(Context& c) {
    const IterateNorms it = iterate_norm_estimate(c.measure(), Complex(c.p.a, c.p.b),
                                                  [](const FlagPoint&) { return Complex(1.0); }, c.p.iters,
                                                  FlagPoint::base(c.rank()));
    c.csv.row("k", "re", "im", "modulus");
    for (std::size_t k = 0; k < it.values.size(); ++k)
        c.csv.row(k, it.values[k].real(), it.values[k].imag(), std::abs(it.values[k]));
    c.csv.comment(fit_summary(it.fit) + ", words " + std::to_string(it.words));
}

TestFunction test_function(const std::string& name) {
    if (name == "bump") return TestFunction::bump();
    if (name == "bspline") return TestFunction::cubic_bspline();
    throw InvalidArgument("unknown --f " + name + " (bump or bspline)");
}

void renewal_rows(Csv& csv, const std::vector<RenewalResult>& rows) {
    csv.row("t", "estimate", "stderr", "limit", "samples", "nmax", "truncation_bound");
    for (const RenewalResult& r : rows)
        csv.row(r.t, r.estimate, r.stdErr, r.limit, r.samples, r.nMax, r.truncationBound);
}

void cmd_renewal(Context& c) {
    const std::vector<double> ts = c.p.ts.empty() ? std::vector<double>{20.0} : c.p.ts;
    const TestFunction f = test_function(c.p.testFunction);
    const double sigma = c.top_exponent();
    std::vector<RenewalResult> rows;
    if (c.p.norm) {
        for (double t : ts) rows.push_back(renewal_norm_sum(c.measure(), f, t, sigma, c.opts(100000)));
    } else {
        rows = renewal_sums(c.measure(), f, c.start_vector(), ts, sigma, c.opts(100000));
    }
    renewal_rows(c.csv, rows);
}

void cmd_renewal_fit(Context& c) {
    std::vector<double> ts = c.p.ts;
    if (ts.empty())
        for (double t = c.p.tMin; t <= c.p.tMax + 1e-9; t += c.p.tStep) ts.push_back(t);
    const RenewalFit fit =
        renewal_error_fit(c.measure(), test_function(c.p.testFunction), c.start_vector(), ts, c.top_exponent(), c.opts(100000));
    renewal_rows(c.csv, fit.points);
    c.csv.comment(fit.report);
}

void cmd_resolvent(Context& c) {
    std::vector<Complex> zs;
    for (double r : c.p.radii)
        for (int j = 0; j < c.p.angles; ++j) zs.push_back(std::polar(r, 2.0 * pi * j / c.p.angles));
    std::function<double(double)> f;
    if (c.p.resolventF == "one")
        f = [](double) { return 1.0; };
    else if (c.p.resolventF == "cos")
        f = [](double theta) { return std::cos(2.0 * theta); };
    else
        throw InvalidArgument("unknown --f " + c.p.resolventF + " (one or cos)");
    const auto rows = resolvent_pole_check(c.measure(), zs, c.p.gridSize, f);
    c.csv.row("z_re", "z_im", "value_re", "value_im", "pole", "deviation", "relative_deviation");
    for (const ResolventRow& r : rows)
        c.csv.row(r.z.real(), r.z.imag(), r.value.real(), r.value.imag(), r.pole, r.deviation, r.relativeDeviation);
}

bool check_rows(Csv& csv, const std::vector<CheckResult>& results) {
    csv.row("check", "result", "worst_ratio", "instances", "detail");
    for (const CheckResult& r : results) csv.row(r.name, r.pass ? "pass" : "fail", r.worst, r.instances, r.detail);
    const bool ok = all_pass(results);
    csv.comment(ok ? "all checks pass" : "some checks FAILED");
    return ok;
}

bool cmd_geom_selftest(Context& c) {
    std::vector<CheckResult> results;
    if (c.spec) {
        auto dec = decomposition_suite({*c.spec}, c.p.instances, 30, c.p.seed);
        results.insert(results.end(), dec.begin(), dec.end());
    }
    auto geo = geometry_suite(c.p.instances, c.p.seed + 1);
    results.insert(results.end(), geo.begin(), geo.end());
    results.push_back(derivative_check(std::max<std::size_t>(1, c.p.instances / 10), c.p.seed + 2));
    return check_rows(c.csv, results);
}

bool cmd_selftest(Context& c) {
    std::vector<CheckResult> results = example_checks(c.p.seed, c.p.workers);
    const std::size_t small = std::min<std::size_t>(c.p.instances, 500);
    auto geo = geometry_suite(small, c.p.seed + 1);
    results.insert(results.end(), geo.begin(), geo.end());
    results.push_back(derivative_check(small, c.p.seed + 2));
    return check_rows(c.csv, results);
}

// "walk lyapunov" and "spectral scan" are accepted as aliases.
std::vector<std::string> normalize_args(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.size() >= 2 && args[0] == "walk") args.erase(args.begin());
    if (args.size() >= 2 && args[0] == "spectral" && args[1] == "scan") {
        args.erase(args.begin());
        args[0] = "spectrum";
    }
    return args;
}

// Arguments echoed in the header; worker count and output path do not affect results.
std::string canonical_command(const std::vector<std::string>& args) {
    std::string s = "flagwalk";
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--workers" || a == "--out" || a == "-o") {
            ++i;
            continue;
        }
        if (a.rfind("--workers=", 0) == 0 || a.rfind("--out=", 0) == 0) continue;
        s += ' ' + a;
    }
    return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Params p;
    CLI::App app{"flagwalk: random matrix products on SL(m+1, R), flag varieties, transfer operators and renewal sums"};
    app.name("flagwalk");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("flagwalk ") + FLAGWALK_VERSION_STRING);

    auto common = [&p](CLI::App* s, bool needsSpec, bool sampling = true) {
        auto* spec = s->add_option("--spec", p.spec, "measure spec (JSON)")->check(CLI::ExistingFile);
        if (needsSpec) spec->required();
        s->add_option("--seed", p.seed, "64-bit seed; trajectory i uses stream i of the seed");
        if (sampling) {
            s->add_option("--samples", p.samples, "number of trajectories");
            s->add_option("--workers", p.workers, "worker threads (default: FLAGWALK_WORKERS or all cores)");
            s->add_option("--burn-in", p.burnIn, "steps before a stationary sample is taken");
        }
        s->add_option("-o,--out", p.out, "write output here instead of stdout");
    };
    auto nlist = [&p](CLI::App* s) { s->add_option("--n", p.nList, "list of walk lengths")->delimiter(','); };
    auto sigma = [&p](CLI::App* s) {
        s->add_option("--sigma", p.sigma, "Lyapunov vector (comma separated); estimated when absent")->delimiter(',');
    };
    auto flags = [&p](CLI::App* s) {
        s->add_option("--eta", p.eta, "reference flag: base, opposite or random (drawn from the seed)")
            ->check(CLI::IsMember({"base", "opposite", "random"}));
    };

    auto* lyap = app.add_subcommand("lyapunov",
                                    "Lyapunov vector: mean Cartan projection over n steps, with the smallest simple-root "
                                    "value as positivity margin (the vector lies in the open Weyl chamber).");
    common(lyap, true);
    lyap->add_option("--n", p.n, "walk length (default 200)");

    auto* ldp = app.add_subcommand("ldp",
                                   "Large deviations: probability that the Cartan projection leaves the eps n ball around "
                                   "n sigma, or that the walk comes e^{-eps n} close to a repelling point; log-linear fit.");
    common(ldp, true);
    nlist(ldp);
    sigma(ldp);
    flags(ldp);
    ldp->add_option("--eps", p.eps, "deviation size (default 0.1)");
    ldp->add_option("--mode", p.mode, "cartan, line-repelling, line-attracting, flag-repelling or flag-attracting");

    auto* stat = app.add_subcommand("stationary", "Samples of the stationary measure on the flag variety.");
    common(stat, true);

    auto* reg = app.add_subcommand("regularity",
                                   "Hoelder regularity of the stationary measure: mass of the r-neighbourhood of a "
                                   "hyperplane, with the fitted exponent.");
    common(reg, true);
    reg->add_option("--y", p.y, "functional defining the hyperplane (default e_1)")->delimiter(',');
    reg->add_option("--rmin", p.rMin, "smallest radius");
    reg->add_option("--rmax", p.rMax, "largest radius");
    reg->add_option("--points", p.points, "grid points");

    auto* good = app.add_subcommand("goodfreq",
                                    "Frequency of walk products that are not good elements (Cartan projection near "
                                    "n sigma and flags away from the density points).");
    common(good, true);
    nlist(good);
    sigma(good);
    flags(good);
    good->add_option("--eps", p.eps, "goodness scale (default 1; the kappa window is eps n / C_A)");

    auto* nc = app.add_subcommand("noncon",
                                  "Non-concentration of the Y-vectors: projective (largest mass of a slab of width "
                                  "e^{-eps n}) or simplicial (affine volumes below e^{-eps n}).");
    common(nc, true);
    nc->add_option("kind", p.nonconKind, "pnc or snc")->required()->check(CLI::IsMember({"pnc", "snc"}));
    nlist(nc);
    sigma(nc);
    flags(nc);
    nc->add_option("--eps", p.eps, "scale exponent (default 0.1)");
    nc->add_option("--d", p.degree, "simplex dimension for snc (default m)");
    nc->add_flag("--averaged", p.averaged, "snc: give every tuple its own flag l eta");
    nc->add_option("--g-length", p.gLength, "use a random word of this length as g (default identity)");
    nc->add_option("--directions", p.directions, "slab directions searched");

    auto* ms = app.add_subcommand("multiscale",
                                  "Multiscale non-concentration: slab masses of the good-restricted Y-cloud across "
                                  "scales rho in [e^{-2 eps n}, e^{-eps n / 4}].");
    common(ms, true);
    sigma(ms);
    flags(ms);
    ms->add_option("--n", p.n, "walk length (default 40)");
    ms->add_option("--eps", p.eps, "scale exponent (default 0.5)");
    ms->add_option("--points", p.points, "number of scales");
    ms->add_option("--g-length", p.gLength, "use a random word of this length as g");
    ms->add_option("--directions", p.directions, "slab directions searched");

    auto* fou = app.add_subcommand("fourier",
                                   "Fourier coefficients of the stationary measure on P^1 and the fitted polynomial "
                                   "decay exponent.");
    common(fou, true);
    fou->add_option("--k", p.ks, "explicit frequency list")->delimiter(',');
    fou->add_option("--kmin", p.kMin, "smallest frequency of the log grid");
    fou->add_option("--kmax", p.kMax, "largest frequency of the log grid");
    fou->add_option("--points", p.points, "log grid points");

    auto* osc = app.add_subcommand("oscillatory",
                                   "Oscillatory integrals of e^{i xi phi} r against the stationary measure on the flag "
                                   "variety.");
    common(osc, true);
    osc->add_option("--phase", p.phase, "phase preset")->check(CLI::IsMember(phase_names()));
    osc->add_option("--amplitude", p.amplitude, "amplitude preset")->check(CLI::IsMember(amplitude_names()));
    osc->add_option("--xi", p.xi, "frequencies")->delimiter(',');

    auto* gd = app.add_subcommand("goodness",
                                  "Sampled check of the (C, r) goodness conditions G1-G4 for a phase: Lipschitz bound, "
                                  "derivative lower bound, derivative Lipschitz bound and the range of v.");
    common(gd, false);
    gd->add_option("--phase", p.phase, "phase preset")->check(CLI::IsMember(phase_names()));
    gd->add_option("--amplitude", p.amplitude, "amplitude preset")->check(CLI::IsMember(amplitude_names()));
    gd->add_option("--C", p.C, "goodness constant, > 1");
    gd->add_option("--m", p.degree, "rank when no spec is given (default 1)");

    auto* sp = app.add_subcommand("spectrum",
                                  "Spectral radius of the discretized transfer operator P_{a+ib} on P^1 over a grid of "
                                  "(a, b), with optional N -> 2N refinement; --contrast runs the scalar comparison walk.");
    common(sp, true, false);
    sp->add_option("--workers", p.workers, "unused; accepted for uniformity");
    sp->add_option("--a", p.aGrid, "real parts")->delimiter(',');
    sp->add_option("--b", p.bList, "explicit imaginary parts")->delimiter(',');
    sp->add_option("--bmin", p.bMin, "smallest |b| of the grid");
    sp->add_option("--bmax", p.bMax, "largest |b| of the grid");
    sp->add_option("--bstep", p.bStep, "grid step");
    sp->add_flag("--both-signs", p.bothSigns, "scan -b as well");
    sp->add_option("--N", p.gridSize, "grid size");
    sp->add_flag("--refine", p.refine, "also solve on the 2N grid");
    sp->add_flag("--contrast", p.contrast, "scalar walk log ||g||: frequencies where |1 - lambda(ib)| < tol");
    sp->add_option("--tol", p.tol, "contrast tolerance");

    auto* it = app.add_subcommand("iterate",
                                  "Exact iterates P_z^k 1 at the base point over the full word tree, with the fitted "
                                  "decay rate (cross-check of the spectral radius).");
    common(it, true, false);
    it->add_option("--workers", p.workers, "unused; accepted for uniformity");
    it->add_option("--a", p.a, "real part of z");
    it->add_option("--b", p.b, "imaginary part of z");
    it->add_option("--iters", p.iters, "number of iterates");

    auto* rn = app.add_subcommand("renewal",
                                  "Renewal sums sum_n E f(sigma(X_n...X_1, x) - t) against the limit "
                                  "(1/sigma) * integral of f over [-t, infinity).");
    common(rn, true);
    rn->add_option("--t", p.ts, "levels")->delimiter(',');
    rn->add_option("--f", p.testFunction, "test function: bump or bspline");
    rn->add_option("--x", p.x, "start vector (default e_1)")->delimiter(',');
    rn->add_flag("--norm", p.norm, "use log ||X_1...X_n|| instead of the cocycle");
    rn->add_option("--sigma-top", p.topExponent, "top Lyapunov exponent");
    rn->add_flag("--estimate-sigma", p.estimateSigma, "estimate the top exponent first");

    auto* rf = app.add_subcommand("renewal-fit",
                                  "Exponential fit of the renewal error |estimate - limit| against t.");
    common(rf, true);
    rf->add_option("--t", p.ts, "levels")->delimiter(',');
    rf->add_option("--tmin", p.tMin, "first level");
    rf->add_option("--tmax", p.tMax, "last level");
    rf->add_option("--tstep", p.tStep, "level step");
    rf->add_option("--f", p.testFunction, "test function: bump or bspline");
    rf->add_option("--x", p.x, "start vector")->delimiter(',');
    rf->add_option("--sigma-top", p.topExponent, "top Lyapunov exponent");
    rf->add_flag("--estimate-sigma", p.estimateSigma, "estimate the top exponent first");

    auto* rs = app.add_subcommand("resolvent",
                                  "Pole of the resolvent (I - P_z)^{-1} at z = 0: z u against the residue, along rays "
                                  "into 0.");
    common(rs, true, false);
    rs->add_option("--workers", p.workers, "unused; accepted for uniformity");
    rs->add_option("--radius", p.radii, "|z| values (>= 1e-3)")->delimiter(',');
    rs->add_option("--angles", p.angles, "rays, equally spaced");
    rs->add_option("--N", p.gridSize, "grid size");
    rs->add_option("--f", p.resolventF, "right-hand side: one or cos");

    auto* gs = app.add_subcommand("geom-selftest",
                                  "Decomposition identities (with --spec), linear-action and flag-variety inequalities, "
                                  "changing-flags chains, sign-cover distances and the cocycle derivative on random "
                                  "instances.");
    common(gs, false, false);
    gs->add_option("--instances", p.instances, "instances per check");
    gs->add_option("--workers", p.workers, "unused; accepted for uniformity");

    auto* st = app.add_subcommand("selftest", "Worked examples of every module plus a reduced geometry suite.");
    common(st, false, false);
    st->add_option("--workers", p.workers, "worker threads");

    const std::vector<std::string> args = normalize_args(argc, argv);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        std::ostringstream body;
        Csv csv(body);
        std::optional<MeasureSpec> spec;
        std::string specHash;
        if (!p.spec.empty()) {
            const std::string text = read_file(p.spec);
            specHash = fnv1a64(text);
            spec = parse_measure_spec(text, p.spec);
        }
        Context ctx{p, spec, csv};
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        int code = 0;
        if (name == "lyapunov") cmd_lyapunov(ctx);
        else if (name == "ldp") cmd_ldp(ctx);
        else if (name == "stationary") cmd_stationary(ctx);
        else if (name == "regularity") cmd_regularity(ctx);
        else if (name == "goodfreq") cmd_goodfreq(ctx);
        else if (name == "noncon") cmd_noncon(ctx);
        else if (name == "multiscale") cmd_multiscale(ctx);
        else if (name == "fourier") cmd_fourier(ctx);
        else if (name == "oscillatory") cmd_oscillatory(ctx);
        else if (name == "goodness") cmd_goodness(ctx, body);
        else if (name == "spectrum") cmd_spectrum(ctx);
        else if (name == "iterate") cmd_iterate(ctx);
        else if (name == "renewal") cmd_renewal(ctx);
        else if (name == "renewal-fit") cmd_renewal_fit(ctx);
        else if (name == "resolvent") cmd_resolvent(ctx);
        else if (name == "geom-selftest") code = cmd_geom_selftest(ctx) ? 0 : 2;
        else if (name == "selftest") code = cmd_selftest(ctx) ? 0 : 2;

        std::ostringstream header;
        header << "# flagwalk " << FLAGWALK_VERSION_STRING << '\n'
               << "# command: " << canonical_command(args) << '\n'
               << "# seed: " << p.seed << '\n';
        if (spec) header << "# spec: " << spec->label() << " fnv1a64:" << specHash << '\n';

        if (p.out.empty()) {
            out << header.str() << body.str();
        } else {
            std::ofstream file(p.out, std::ios::binary);
            if (!file) throw InvalidArgument("cannot write " + p.out);
            file << header.str() << body.str();
        }
        return code;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace flagwalk::tools
