#include <gtest/gtest.h>

#include "common.hpp"
#include "lemma_suite.hpp"
#include "selftest.hpp"

namespace flagwalk {
namespace {

void expect_all(const std::vector<tools::CheckResult>& results) {
    ASSERT_FALSE(results.empty());
    for (const auto& r : results) EXPECT_TRUE(r.pass) << r.name << " worst " << r.worst << ' ' << r.detail;
}

TEST(Suites, WorkedExamples) { expect_all(tools::example_checks(1, 0)); }

TEST(Suites, Decompositions) {
    expect_all(tools::decomposition_suite({test::shipped("sl2"), test::shipped("sl3")}, 500, 30, 4));
}

TEST(Suites, Geometry) { expect_all(tools::geometry_suite(500, 5)); }

TEST(Suites, Derivative) { expect_all({tools::derivative_check(200, 6)}); }

}  // namespace
}  // namespace flagwalk
