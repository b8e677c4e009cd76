#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flagwalk/measure.hpp"
#include "flagwalk/parallel.hpp"
#include "flagwalk/stats.hpp"

namespace flagwalk {

// Compactly supported test function on R, vanishing outside [-support, support].
struct TestFunction {
    std::function<double(double)> f;
    double support = 1.0;
    double supNorm = 1.0;
    std::string name;

    double operator()(double x) const { return std::abs(x) >= support ? 0.0 : f(x); }
    // Integral of f over [a, infinity).
    double integral_from(double a) const;

    // exp(1 - 1/(1 - (x/r)^2)) on (-r, r).
    static TestFunction bump(double radius = 1.0);
    // Centred cubic B-spline on [-2, 2]. Its integer translates sum to 1.
    static TestFunction cubic_bspline();
};

struct RenewalResult {
    double t = 0.0;
    double estimate = 0.0;
    double stdErr = 0.0;
    double limit = 0.0;  // (1/sigma) * integral of f over [-t, infinity)
    std::size_t samples = 0;
    std::size_t nMax = 0;
    double truncationBound = 0.0;
};

// sum_{n >= 0} E f(sigma(X_n ... X_1, x) - t) for each t, from one set of
// trajectories. sigma is the top Lyapunov exponent; without it the call
// throws MustEstimateFirst.
std::vector<RenewalResult> renewal_sums(const MeasureSpec& spec, const TestFunction& f, const Vector& x,
                                        const std::vector<double>& ts, std::optional<double> sigma,
                                        const McOptions& opts);
RenewalResult renewal_sum(const MeasureSpec& spec, const TestFunction& f, const Vector& x, double t,
                          std::optional<double> sigma, const McOptions& opts);

// The same with log ||X_1 ... X_n|| in place of the cocycle.
RenewalResult renewal_norm_sum(const MeasureSpec& spec, const TestFunction& f, double t, std::optional<double> sigma,
                               const McOptions& opts);

struct RenewalFit {
    std::vector<RenewalResult> points;
    std::optional<LineFit> fit;  // log |estimate - limit| against t, over points above 3 stdErr
    bool belowNoiseFloor = false;
    std::string report;
};

RenewalFit renewal_error_fit(const MeasureSpec& spec, const TestFunction& f, const Vector& x,
                             const std::vector<double>& ts, std::optional<double> sigma, const McOptions& opts);

}  // namespace flagwalk
