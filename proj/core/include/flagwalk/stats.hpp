#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flagwalk {

// Running sums; merged in a fixed order to keep results reproducible.
struct Moments {
    double count = 0.0;
    double sum = 0.0;
    double sumSq = 0.0;

    void add(double x) {
        count += 1.0;
        sum += x;
        sumSq += x * x;
    }
    void merge(const Moments& o) {
        count += o.count;
        sum += o.sum;
        sumSq += o.sumSq;
    }
    double mean() const { return count > 0 ? sum / count : 0.0; }
    // Sample variance (n - 1 denominator).
    double variance() const;
    // Standard error of the mean.
    double stderror() const;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slopeStderr = 0.0;
    double ciLow = 0.0;   // 95% confidence interval for the slope
    double ciHigh = 0.0;
    std::size_t points = 0;

    bool ci_excludes_zero() const { return ciLow > 0.0 || ciHigh < 0.0; }
};

// Weighted least squares y ~ a + b x. Empty weights mean unit weights. The
// slope standard error uses the residual scatter, the interval Student-t
// quantiles with points - 2 degrees of freedom. Needs at least 3 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w = {});

double student_t_quantile(double p, double dof);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Log-spaced grid of count points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

}  // namespace flagwalk
