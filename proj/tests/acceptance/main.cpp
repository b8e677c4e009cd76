#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/noncon.hpp"
#include "flagwalk/renewal.hpp"
#include "flagwalk/fourier.hpp"
#include "flagwalk/spectral.hpp"
#include "flagwalk/walk.hpp"
#include "lemma_suite.hpp"

using namespace flagwalk;

namespace {

std::string spec_path(const std::string& name) { return std::string(FLAGWALK_SPEC_DIR) + "/" + name + ".json"; }

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& note) {
        pass = pass && ok;
        notes.push_back((ok ? "ok    " : "FAIL  ") + note);
    }
};

std::string fmt(double x, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << x;
    return s.str();
}

std::string ci(const LineFit& f) {
    return "slope " + fmt(f.slope) + " CI [" + fmt(f.ciLow) + ", " + fmt(f.ciHigh) + "]";
}

class Acceptance {
public:
    explicit Acceptance(std::uint64_t seed) : seed_(seed) {
        specs_.push_back(load_measure_spec(spec_path("sl2")));
        specs_.push_back(load_measure_spec(spec_path("sl3")));
    }

    const std::vector<MeasureSpec>& specs() const { return specs_; }
    const MeasureSpec& sl2() const { return specs_[0]; }
    std::uint64_t seed() const { return seed_; }

    // The n = 200, 10^5-sample estimate, shared by criteria 4, 5 and 7.
    const LyapunovEstimate& lyapunov(std::size_t i) {
        auto it = lyapunov_.find(i);
        if (it == lyapunov_.end()) it = lyapunov_.emplace(i, lyapunov_vector(specs_[i], 200, {100000, seed_, 0})).first;
        return it->second;
    }

    // Same rule as the CLI default --eta random.
    FlagPoint random_flag(int m) const {
        Rng rng(seed_, kAuxStream + 100);
        return FlagPoint(random_rotation(m + 1, rng));
    }

private:
    std::uint64_t seed_;
    std::vector<MeasureSpec> specs_;
    std::map<std::size_t, LyapunovEstimate> lyapunov_;
};

void suite_notes(Outcome& o, const std::vector<tools::CheckResult>& results) {
    for (const auto& r : results)
        o.require(r.pass, r.name + ": worst ratio " + fmt(r.worst) + " over " + std::to_string(r.instances) +
                              (r.detail.empty() ? "" : " (" + r.detail + ")"));
}

Outcome c1_decomposition(Acceptance& a, double& seconds) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto results = tools::decomposition_suite(a.specs(), 10000, 30, a.seed());
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    suite_notes(o, results);
    o.require(seconds < 30.0, "runtime " + fmt(seconds, 3) + " s < 30 s");
    return o;
}

Outcome c2_geometry(Acceptance& a, double& seconds) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto results = tools::geometry_suite(10000, a.seed() + 1);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    suite_notes(o, results);
    o.require(seconds < 120.0, "runtime " + fmt(seconds, 3) + " s < 120 s");
    return o;
}

Outcome c3_derivative(Acceptance& a) {
    Outcome o;
    suite_notes(o, {tools::derivative_check(1000, a.seed() + 2, 1e-5)});
    return o;
}

Outcome c4_lyapunov(Acceptance& a) {
    Outcome o;
    for (std::size_t i = 0; i < a.specs().size(); ++i) {
        const LyapunovEstimate& e = a.lyapunov(i);
        o.require(e.margin > 5.0 * e.marginStderr, a.specs()[i].label() + ": margin " + fmt(e.margin) + " > 5 x " +
                                                       fmt(e.marginStderr));
    }
    return o;
}

Outcome c5_large_deviations(Acceptance& a) {
    Outcome o;
    const std::vector<std::size_t> ns{10, 20, 30, 40, 50, 60};
    const McOptions opts{100000, a.seed(), 0};
    const std::vector<std::pair<std::string, PositionMode>> modes{{"line-repelling", PositionMode::LineRepelling},
                                                                  {"line-attracting", PositionMode::LineAttracting},
                                                                  {"flag-repelling", PositionMode::FlagRepelling},
                                                                  {"flag-attracting", PositionMode::FlagAttracting}};
    for (std::size_t i = 0; i < a.specs().size(); ++i) {
        const MeasureSpec& spec = a.specs()[i];
        std::vector<std::pair<std::string, DeviationCurve>> curves;
        curves.emplace_back("cartan", large_deviation_curve(spec, a.lyapunov(i).sigma, 0.1, ns, opts));
        for (const auto& [name, mode] : modes)
            curves.emplace_back(name, position_deviation_curve(spec, 0.1, ns, a.random_flag(spec.rank()), mode, opts));
        for (const auto& [name, curve] : curves) {
            const bool ok = curve.fit && curve.fit->ciHigh < 0.0;
            o.require(ok, spec.label() + " " + name + ": " + (curve.fit ? ci(*curve.fit) : "no fit"));
        }
    }
    return o;
}

Outcome c6_regularity(Acceptance& a) {
    Outcome o;
    for (const MeasureSpec& spec : a.specs()) {
        const RegularityFit f =
            holder_regularity(spec, Vector::Unit(spec.dim(), 0), log_grid(1e-3, 0.3, 12), {1000000, a.seed(), 0});
        o.require(f.fit.slope > 0.0 && f.fit.ciLow > 0.0, spec.label() + ": exponent " + ci(f.fit));
    }
    return o;
}

Outcome c7_noncon(Acceptance& a) {
    Outcome o;
    const std::vector<std::size_t> ns{10, 20, 30, 40};
    for (std::size_t i = 0; i < a.specs().size(); ++i) {
        const MeasureSpec& spec = a.specs()[i];
        const Vector& sigma = a.lyapunov(i).sigma;
        const FlagPoint eta = a.random_flag(spec.rank());
        const GroupElement g = GroupElement::identity(spec.rank());
        std::vector<double> pnc, snc;
        for (std::size_t n : ns) {
            const double scale = std::exp(-0.1 * static_cast<double>(n));
            pnc.push_back(pnc_estimate(spec, n, eta, g, sigma, scale, {4000, a.seed(), 0}).estimate);
            snc.push_back(snc_estimate(spec, n, eta, spec.rank(), sigma, scale, {20000, a.seed(), 0}).estimate);
        }
        for (const auto& [name, v] : {std::pair{"PNC", pnc}, std::pair{"SNC", snc}}) {
            bool decreasing = true;
            std::string list;
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (j > 0 && !(v[j] < v[j - 1])) decreasing = false;
                list += (j ? ", " : "") + fmt(v[j]);
            }
            o.require(decreasing, spec.label() + " " + name + " n = 10..40: " + list);
        }
    }
    suite_notes(o, tools::affine_volume_suite(1000, a.seed()));
    return o;
}

Outcome c8_fourier(Acceptance& a, double& seconds) {
    Outcome o;
    std::set<long> ks;
    for (double k : log_grid(2.0, 2048.0, 12)) ks.insert(std::lround(k));
    const auto start = std::chrono::steady_clock::now();
    const DecayFit fit = decay_exponent_fit(a.sl2(), {ks.begin(), ks.end()}, {10000000, a.seed(), 0});
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(fit.fit && fit.fit->ciHigh < 0.0, a.sl2().label() + ": " + fit.report);
    o.require(seconds < 600.0, "runtime " + fmt(seconds, 3) + " s < 600 s");
    return o;
}

Outcome c9_spectral(Acceptance& a) {
    Outcome o;
    const MeasureSpec& spec = a.sl2();
    const double r0 = spectral_radius(build_transfer(spec, Complex(0.0), 2048)).radius;
    o.require(std::abs(r0 - 1.0) <= 1e-6, "radius at z = 0: " + fmt(r0, 12));
    std::vector<double> bs;
    for (int i = 0; i <= 98; ++i) {
        const double b = 1.0 + 0.5 * i;
        bs.push_back(-b);
        bs.push_back(b);
    }
    const GapScan scan = spectral_gap_scan(spec, {0.0, 0.02, -0.02}, bs, 2048, true, 1.0);
    o.require(scan.maxRadius <= 0.99, "max radius over " + std::to_string(scan.rows.size()) +
                                          " points: " + fmt(scan.maxRadius, 6) + " <= 0.99");
    o.require(scan.maxDelta < 1e-3, "max N -> 2N refinement delta " + fmt(scan.maxDelta, 4) + " < 1e-3");
    const AbelianContrast ac = abelian_contrast(spec, 1.0, 1000.0, 0.05);
    std::string found;
    for (std::size_t i = 0; i < std::min<std::size_t>(ac.b.size(), 5); ++i)
        found += (i ? ", " : "") + fmt(ac.b[i], 6) + ":" + fmt(ac.gap[i], 3);
    o.require(ac.b.size() >= 3, "abelian contrast: " + std::to_string(ac.b.size()) +
                                    " frequencies with |1 - lambda(ib)| < 0.05 (first " + found + ")");
    return o;
}

Outcome c10_renewal(Acceptance& a) {
    Outcome o;
    const MeasureSpec oracle = load_measure_spec(spec_path("diag_oracle"));
    double worst = 0.0;
    for (const TestFunction& f : {TestFunction::bump(), TestFunction::cubic_bspline()})
        for (double t : {0.0, 1.5, 7.25, 20.0, 33.3}) {
            double exact = 0.0;
            for (int n = 0; n < 200; ++n) exact += f(n - t);
            const RenewalResult r = renewal_sum(oracle, f, Vector::Unit(2, 0), t, 1.0, {4, a.seed(), 1});
            worst = std::max(worst, std::abs(r.estimate - exact));
        }
    o.require(worst <= 1e-10, "deterministic oracle: max |R f - sum f(n - t)| " + fmt(worst, 3));

    const TestFunction bump = TestFunction::bump();
    for (const MeasureSpec& spec : a.specs()) {
        const Vector x = Vector::Unit(spec.dim(), 0);
        const TopExponentEstimate s = top_exponent_estimate(spec, kDefaultBurnIn, 1000, {100000, a.seed() + 10, 0});
        const RenewalResult r = renewal_sum(spec, bump, x, 20.0, s.value, {1000000, a.seed(), 0});
        const double dev = std::abs(r.estimate - r.limit);
        o.require(dev < 3.0 * r.stdErr, spec.label() + " t = 20: estimate " + fmt(r.estimate, 6) + ", limit " +
                                            fmt(r.limit, 6) + " (sigma " + fmt(s.value, 6) + " +- " + fmt(s.stdErr, 2) +
                                            "), deviation " + fmt(dev / r.stdErr, 3) + " stderr");
        std::vector<double> ts;
        for (double t = 2.0; t <= 30.0; t += 2.0) ts.push_back(t);
        const RenewalFit fit = renewal_error_fit(spec, bump, x, ts, s.value, {100000, a.seed() + 1, 0});
        const bool ok = fit.belowNoiseFloor || (fit.fit && fit.fit->slope < 0.0);
        o.require(ok, spec.label() + " error fit: " + fit.report);
    }
    return o;
}

Outcome c11_resolvent(Acceptance& a) {
    Outcome o;
    std::vector<Complex> zs;
    for (int j = 0; j < 8; ++j) zs.push_back(std::polar(1e-2, 2.0 * std::numbers::pi * j / 8));
    const auto rows = resolvent_pole_check(a.sl2(), zs, 2048, [](double) { return 1.0; });
    for (const ResolventRow& r : rows)
        o.require(r.relativeDeviation < 0.05, "z = " + fmt(r.z.real(), 3) + (r.z.imag() < 0 ? "" : "+") +
                                                  fmt(r.z.imag(), 3) + "i: z u = " + fmt(r.value.real(), 6) +
                                                  ", pole " + fmt(r.pole, 6) + ", relative deviation " +
                                                  fmt(r.relativeDeviation, 3));
    return o;
}

Outcome c12_determinism() {
    Outcome o;
    const std::string sl2 = spec_path("sl2"), sl3 = spec_path("sl3");
    const std::vector<std::vector<std::string>> commands{
        {"lyapunov", "--spec", sl3, "--samples", "3000", "--n", "40"},
        {"ldp", "--spec", sl3, "--samples", "3000"},
        {"ldp", "--spec", sl3, "--samples", "3000", "--mode", "flag-attracting"},
        {"stationary", "--spec", sl3, "--samples", "200"},
        {"regularity", "--spec", sl3, "--samples", "3000"},
        {"goodfreq", "--spec", sl3, "--samples", "2500", "--n", "10,20"},
        {"noncon", "pnc", "--spec", sl3, "--samples", "2500", "--n", "10,20", "--directions", "64"},
        {"noncon", "snc", "--spec", sl3, "--samples", "2500", "--n", "10,20"},
        {"multiscale", "--spec", sl3, "--samples", "2500", "--n", "20", "--directions", "64"},
        {"fourier", "--spec", sl2, "--samples", "5000"},
        {"oscillatory", "--spec", sl2, "--samples", "5000"},
        {"goodness", "--spec", sl3, "--phase", "quadratic", "--amplitude", "bump", "--samples", "2500"},
        {"spectrum", "--spec", sl2, "--N", "256", "--b", "1,5", "--refine"},
        {"spectrum", "--spec", sl2, "--contrast", "--bmax", "200"},
        {"iterate", "--spec", sl2, "--iters", "8", "--b", "2"},
        {"renewal", "--spec", sl3, "--samples", "3000", "--estimate-sigma", "--t", "5,10"},
        {"renewal-fit", "--spec", sl2, "--samples", "3000", "--sigma-top", "0.1856"},
        {"resolvent", "--spec", sl2, "--N", "256", "--radius", "0.01"},
        {"geom-selftest", "--spec", sl3, "--instances", "100"},
        {"selftest"},
    };
    auto run = [](std::vector<std::string> args, int workers) {
        args.insert(args.begin(), "flagwalk");
        args.push_back("--workers");
        args.push_back(std::to_string(workers));
        std::vector<const char*> argv;
        for (const auto& s : args) argv.push_back(s.c_str());
        std::ostringstream out, err;
        const int code = tools::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return std::pair{code, out.str()};
    };
    for (const auto& cmd : commands) {
        const auto first = run(cmd, 1);
        const auto second = run(cmd, 1);
        const auto threaded = run(cmd, 4);
        std::string name = cmd[0] + (cmd[0] == "noncon" ? " " + cmd[1] : "");
        if (cmd[0] == "spectrum") name += cmd[3] == "--contrast" ? " --contrast" : " --refine";
        if (cmd[0] == "ldp" && cmd.size() > 5) name += " " + cmd[6];
        const bool ok = first.first == 0 && first == second && first == threaded && !first.second.empty();
        o.require(ok, name + ": exit " + std::to_string(first.first) + ", " + std::to_string(first.second.size()) +
                          " bytes, repeat " + (first == second ? "identical" : "DIFFERS") + ", 4 workers " +
                          (first == threaded ? "identical" : "DIFFERS"));
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("flagwalk acceptance run: one PASS/FAIL line per criterion");
    std::uint64_t seed = 1;
    std::vector<int> only, expectFail;
    bool quiet = false;
    app.add_option("--seed", seed, "base seed");
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    app.add_option("--expect-fail", expectFail,
                   "criteria known to fail; the exit code is 0 iff exactly these fail")
        ->delimiter(',');
    app.add_flag("--quiet", quiet, "omit the per-check notes");
    CLI11_PARSE(app, argc, argv);

    Acceptance acc(seed);
    double t1 = 0, t2 = 0, t8 = 0;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"decomposition suite", [&] { return c1_decomposition(acc, t1); }},
        {"geometry lemma suite", [&] { return c2_geometry(acc, t2); }},
        {"cocycle derivative", [&] { return c3_derivative(acc); }},
        {"Lyapunov positivity", [&] { return c4_lyapunov(acc); }},
        {"large deviations", [&] { return c5_large_deviations(acc); }},
        {"Holder regularity", [&] { return c6_regularity(acc); }},
        {"non-concentration", [&] { return c7_noncon(acc); }},
        {"Fourier decay", [&] { return c8_fourier(acc, t8); }},
        {"spectral gap", [&] { return c9_spectral(acc); }},
        {"renewal", [&] { return c10_renewal(acc); }},
        {"resolvent pole", [&] { return c11_resolvent(acc); }},
        {"determinism", [&] { return c12_determinism(); }},
    };

    std::set<int> failed;
    int ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) failed.insert(id);
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << criteria[i].first
                  << "  (" << fmt(secs, 3) << " s)\n";
        if (!quiet)
            for (const auto& n : o.notes) std::cout << "        " << n << '\n';
        std::cout.flush();
    }

    std::cout << "summary: " << ran - static_cast<int>(failed.size()) << " of " << ran << " criteria pass";
    if (!failed.empty()) {
        std::cout << "; failed:";
        for (int f : failed) std::cout << ' ' << f;
    }
    std::cout << '\n';
    std::set<int> expected;
    for (int e : expectFail)
        if (only.empty() || std::find(only.begin(), only.end(), e) != only.end()) expected.insert(e);
    if (app.count("--expect-fail")) {
        std::cout << "known failures (see README):";
        for (int e : expected) std::cout << ' ' << e;
        std::cout << (failed == expected ? "; outcome matches\n" : "; outcome DIFFERS\n");
        return failed == expected ? 0 : 1;
    }
    return failed.empty() ? 0 : 1;
}
