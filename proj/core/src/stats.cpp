#include "flagwalk/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "flagwalk/error.hpp"

namespace flagwalk {

double Moments::variance() const {
    if (count < 2) return 0.0;
    const double m = sum / count;
    return std::max(0.0, (sumSq - count * m * m) / (count - 1.0));
}

double Moments::stderror() const {
    if (count < 2) return 0.0;
    return std::sqrt(variance() / count);
}

double student_t_quantile(double p, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, p);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
    if (x.size() != y.size() || (!w.empty() && w.size() != x.size()))
        throw DegenerateFit("fit_line: mismatched input sizes");
    const std::size_t n = x.size();
    if (n < 3) throw DegenerateFit("fit_line: need at least 3 points");

    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw DegenerateFit("fit_line: abscissae are all equal");

    LineFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += wi * r * r;
    }
    const double dof = static_cast<double>(n) - 2.0;
    fit.slopeStderr = std::sqrt(rss / dof / sxx);
    const double q = student_t_quantile(0.975, dof);
    fit.ciLow = fit.slope - q * fit.slopeStderr;
    fit.ciHigh = fit.slope + q * fit.slopeStderr;
    return fit;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DegenerateFit("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace flagwalk
