#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "flagwalk/measure.hpp"

namespace flagwalk::tools {

// One checked inequality or identity. worst is the largest observed
// lhs / bound (or residual / tolerance), so pass means worst <= 1.
struct CheckResult {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    std::size_t instances = 0;
    std::string detail;
};

// Cartan and Iwasawa round trips, cocycle additivity, the norm identities for
// exterior powers and kappa(g^-1) = iota kappa(g), on random words of length
// <= maxLength in the atoms of each spec.
std::vector<CheckResult> decomposition_suite(const std::vector<MeasureSpec>& specs, std::size_t words,
                                             std::size_t maxLength, std::uint64_t seed);

// Linear-action and flag-variety inequalities on random instances, with
// 1e-9 slack.
std::vector<CheckResult> geometry_suite(std::size_t instances, std::uint64_t seed);

// Analytic cocycle derivative against central differences (step 1e-5).
CheckResult derivative_check(std::size_t instances, std::uint64_t seed, double tolerance = 1e-5);

// Conclusions for good elements h ~ mu^{*n}: the gap and cocycle bounds, and
// the one-root bound for the quarter-turned flag. Samples that are not good
// are skipped; the instance count records how many were checked.
// Throws InvalidArgument unless max_alpha e^{-alpha(sigma) n} < e^{-3 eps n}.
std::vector<CheckResult> good_element_suite(const MeasureSpec& spec, const Vector& sigma, std::size_t n, double eps,
                                            std::size_t samples, std::uint64_t seed);

// The three affine-volume quantities of d+1 points in R^d (d = 1, 2, 3)
// against brute-force oracles, and the implications between them: near a
// hyperplane within c gives wedge sum <= 2^{d+1} C^{d-1} c, wedge sum c gives
// a span distance <= c^{1/d}, span distance c gives a hyperplane within c.
std::vector<CheckResult> affine_volume_suite(std::size_t cloudsPerDimension, std::uint64_t seed);

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace flagwalk::tools
