#include "flagwalk/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flagwalk/error.hpp"

namespace flagwalk {

namespace {

struct ComplexMoments {
    Moments re;
    Moments im;
    void add(Complex z) {
        re.add(z.real());
        im.add(z.imag());
    }
    void merge(const ComplexMoments& o) {
        re.merge(o.re);
        im.merge(o.im);
    }
    Complex mean() const { return {re.mean(), im.mean()}; }
    double stderror() const {
        if (re.count < 2) return 0.0;
        return std::sqrt((re.variance() + im.variance()) / re.count);
    }
};

double wrap(double x, std::optional<double> period) {
    if (!period) return x;
    const double p = *period;
    x = std::fmod(x, p);
    if (x > 0.5 * p) x -= p;
    if (x <= -0.5 * p) x += p;
    return x;
}

// Orthogonal matrix close to the identity: Cayley transform of t X.
Matrix cayley(const Matrix& skew, double t) {
    const Eigen::Index n = skew.rows();
    const Matrix id = Matrix::Identity(n, n);
    return (id - 0.5 * t * skew).partialPivLu().solve(id + 0.5 * t * skew);
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

}  // namespace

std::vector<FourierCoefficient> fourier_coefficients(const MeasureSpec& spec, const std::vector<long>& ks,
                                                     const McOptions& opts, std::size_t burnIn) {
    if (spec.rank() != 1) throw InvalidArgument("fourier coefficients are defined for SL(2) specs");
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    const Matrix start = Matrix::Identity(2, 2);
    using Acc = std::vector<ComplexMoments>;
    auto chunks = map_chunks<Acc>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        Acc acc(ks.size());
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(opts.seed, i);
            const Matrix k = stationary_frame(spec, burnIn, rng, start);
            // Circle coordinate 2 theta of the line.
            const double phi = 2.0 * std::atan2(k(1, 0), k(0, 0));
            for (std::size_t j = 0; j < ks.size(); ++j) {
                const double a = static_cast<double>(ks[j]) * phi;
                acc[j].add(ks[j] == 0 ? Complex(1.0) : Complex(std::cos(a), std::sin(a)));
            }
        }
        return acc;
    });
    Acc total(ks.size());
    for (const Acc& c : chunks)
        for (std::size_t j = 0; j < ks.size(); ++j) total[j].merge(c[j]);
    std::vector<FourierCoefficient> out;
    for (std::size_t j = 0; j < ks.size(); ++j) out.push_back({ks[j], total[j].mean(), total[j].stderror()});
    return out;
}

FourierCoefficient fourier_coefficient(const MeasureSpec& spec, long k, const McOptions& opts, std::size_t burnIn) {
    return fourier_coefficients(spec, {k}, opts, burnIn).front();
}

DecayFit decay_exponent_fit(const MeasureSpec& spec, const std::vector<long>& kGrid, const McOptions& opts,
                            std::size_t burnIn) {
    if (kGrid.empty()) throw DegenerateFit("decay fit: empty frequency grid");
    for (long k : kGrid)
        if (k <= 0) throw DegenerateFit("decay fit: frequencies must be positive");
    DecayFit out;
    out.coefficients = fourier_coefficients(spec, kGrid, opts, burnIn);
    std::vector<double> xs, ys;
    for (const FourierCoefficient& c : out.coefficients) {
        const double mod = std::abs(c.value);
        if (mod > 3.0 * c.stdErr) {
            xs.push_back(std::log(static_cast<double>(c.k)));
            ys.push_back(std::log(mod));
        }
    }
    std::ostringstream msg;
    if (xs.size() < 3) {
        out.belowNoiseFloor = true;
        msg << "noise floor: only " << xs.size() << " of " << kGrid.size()
            << " coefficients exceed 3 stderr; raise the sample count";
    } else {
        out.fit = fit_line(xs, ys);
        msg << "slope " << out.fit->slope << " (95% CI " << out.fit->ciLow << ", " << out.fit->ciHigh << ") over "
            << xs.size() << " frequencies";
    }
    out.report = msg.str();
    return out;
}

OscillatoryResult oscillatory_integral(const MeasureSpec& spec, const OscillatorySpec& osc, const McOptions& opts,
                                       std::size_t burnIn) {
    if (!osc.phase || !osc.amplitude) throw InvalidArgument("oscillatory integral: phase and amplitude required");
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    const Matrix start = Matrix::Identity(spec.dim(), spec.dim());
    auto chunks = map_chunks<ComplexMoments>(opts.samples, opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
        ComplexMoments acc;
        for (std::size_t i = b; i < e; ++i) {
            Rng rng(opts.seed, i);
            const FlagPoint eta(stationary_frame(spec, burnIn, rng, start));
            const Complex r = osc.amplitude(eta);
            acc.add(r == Complex{} ? Complex{} : std::exp(Complex(0.0, osc.xi * osc.phase(eta))) * r);
        }
        return acc;
    });
    ComplexMoments total;
    for (const ComplexMoments& c : chunks) total.merge(c);
    return {total.mean(), total.stderror(), opts.samples};
}

double circle_derivative(const OscillatorySpec& osc, const Matrix& k, int d) {
    const auto n = static_cast<int>(k.rows());
    const double h = osc.derivativeStep;
    const double plus = osc.phase(FlagPoint(k * plane_rotation(n, d - 1, d, h)));
    const double minus = osc.phase(FlagPoint(k * plane_rotation(n, d - 1, d, -h)));
    return wrap(plus - minus, osc.phasePeriod) / (2.0 * h);
}

GoodnessReport cr_goodness_check(const OscillatorySpec& osc, int m, const McOptions& opts) {
    if (!osc.phase || !osc.amplitude) throw InvalidArgument("goodness: phase and amplitude required");
    if (!(osc.C > 1.0)) throw InvalidArgument("goodness: C must exceed 1");
    if (m < 1) throw InvalidArgument("goodness: rank must be at least 1");
    if (opts.samples == 0) throw InvalidArgument("sample count must be positive");
    const int n = m + 1;
    const double c = osc.C;

    struct Sample {
        Matrix k;
        Matrix partner;
        bool inSupport = false;
        bool partnerInSupport = false;
    };
    std::vector<Sample> pts(opts.samples);
    for (std::size_t i = 0; i < opts.samples; ++i) {
        Rng rng(opts.seed, i);
        Sample& s = pts[i];
        s.k = random_rotation(n, rng);
        const double t = std::pow(10.0, -4.0 + 4.0 * rng.uniform());
        s.partner = s.k * cayley(random_skew(n, rng), t);
        s.inSupport = osc.amplitude(FlagPoint(s.k)) != Complex{};
        s.partnerInSupport = osc.amplitude(FlagPoint(s.partner)) != Complex{};
    }
    std::vector<const Matrix*> support;
    for (const Sample& s : pts)
        if (s.inSupport) support.push_back(&s.k);
    if (support.empty()) throw EmptySupport("goodness: the amplitude vanishes on every sampled flag");

    auto in_j = [&](const Matrix& k, bool inSupport) {
        if (inSupport) return true;
        const FlagPoint eta(k);
        for (const Matrix* s : support)
            if (dist_flag(eta, FlagPoint(*s)) < 1.0 / c) return true;
        return false;
    };

    GoodnessReport rep;
    rep.supportPoints = support.size();
    std::vector<std::vector<double>> deriv(support.size(), std::vector<double>(m));
    rep.v.assign(m, 0.0);
    for (std::size_t i = 0; i < support.size(); ++i)
        for (int d = 1; d <= m; ++d) {
            deriv[i][d - 1] = circle_derivative(osc, *support[i], d);
            rep.v[d - 1] = std::max(rep.v[d - 1], std::abs(deriv[i][d - 1]));
        }

    auto record = [](GoodnessCondition& g, double ratio, const Matrix& k) {
        ++g.checked;
        if (ratio > g.worst) {
            g.worst = ratio;
            g.witness = k;
        }
        if (ratio > 1.0) g.pass = false;
    };
    auto ratio = [](double lhs, double rhs) {
        if (lhs <= rhs) return rhs > 0.0 ? lhs / rhs : 0.0;
        return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    };

    // G2: lower bound on the derivative over the support.
    for (std::size_t i = 0; i < support.size(); ++i)
        for (int d = 1; d <= m; ++d) record(rep.g2, ratio(rep.v[d - 1] / c, std::abs(deriv[i][d - 1])), *support[i]);

    // G4: the largest v in [1/C, C].
    const double vmax = *std::max_element(rep.v.begin(), rep.v.end());
    const double g4 = vmax > 0.0 ? std::max(1.0 / (c * vmax), vmax / c) : std::numeric_limits<double>::infinity();
    record(rep.g4, g4, Matrix());

    // G1 and G3 on nearby pairs inside the neighbourhood J.
    constexpr double kSlack = 1e-9;
    constexpr double kDerivSlack = 1e-7;
    for (const Sample& s : pts) {
        const FlagPoint a(s.k), b(s.partner);
        const double dist = dist_flag(a, b);
        if (dist > 1.0 / c) continue;
        if (!in_j(s.k, s.inSupport) || !in_j(s.partner, s.partnerInSupport)) continue;
        ++rep.neighbourhoodPoints;
        double rhs1 = 0.0;
        for (int d = 1; d <= m; ++d) rhs1 += dist_alpha(a, b, d) * rep.v[d - 1];
        const double lhs1 = std::abs(wrap(osc.phase(a) - osc.phase(b), osc.phasePeriod));
        record(rep.g1, ratio(std::max(0.0, lhs1 - kSlack), c * rhs1), s.k);
        for (int d = 1; d <= m; ++d) {
            const double lhs3 = std::abs(circle_derivative(osc, s.k, d) - circle_derivative(osc, s.partner, d));
            record(rep.g3, ratio(std::max(0.0, lhs3 - kDerivSlack), c * dist * rep.v[d - 1]), s.k);
        }
    }
    return rep;
}

std::string describe(const GoodnessReport& report) {
    std::ostringstream out;
    out << "v =";
    for (double v : report.v) out << ' ' << v;
    out << "\nsupport points: " << report.supportPoints << ", pairs in J: " << report.neighbourhoodPoints << '\n';
    const char* names[] = {"G1", "G2", "G3", "G4"};
    const GoodnessCondition* conds[] = {&report.g1, &report.g2, &report.g3, &report.g4};
    for (int i = 0; i < 4; ++i) {
        out << names[i] << ": " << (conds[i]->pass ? "pass" : "fail") << " (worst ratio " << conds[i]->worst
            << ", checked " << conds[i]->checked << ")";
        if (!conds[i]->pass && conds[i]->witness.size() > 0) {
            out << " witness first column:";
            for (Eigen::Index r = 0; r < conds[i]->witness.rows(); ++r) out << ' ' << conds[i]->witness(r, 0);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace flagwalk
