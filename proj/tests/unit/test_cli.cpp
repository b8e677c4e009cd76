#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "common.hpp"

namespace flagwalk {
namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "flagwalk");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = tools::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const std::string sl2 = test::spec_path("sl2");
const std::string sl3 = test::spec_path("sl3");

const std::vector<std::vector<std::string>> kCommands{
    {"lyapunov", "--spec", sl3, "--samples", "3000", "--n", "40"},
    {"ldp", "--spec", sl2, "--samples", "3000", "--sigma", "0.1856,-0.1856"},
    {"ldp", "--spec", sl3, "--samples", "3000", "--mode", "flag-repelling", "--eta", "random"},
    {"stationary", "--spec", sl3, "--samples", "50"},
    {"regularity", "--spec", sl2, "--samples", "3000"},
    {"goodfreq", "--spec", sl2, "--samples", "2500", "--n", "10,20"},
    {"noncon", "pnc", "--spec", sl3, "--samples", "2500", "--n", "10,20", "--directions", "32"},
    {"noncon", "snc", "--spec", sl3, "--samples", "2500", "--n", "10,20", "--g-length", "3"},
    {"multiscale", "--spec", sl2, "--samples", "2500", "--n", "20", "--directions", "32"},
    {"fourier", "--spec", sl2, "--samples", "3000"},
    {"oscillatory", "--spec", sl2, "--samples", "3000", "--phase", "angle"},
    {"goodness", "--phase", "quadratic", "--amplitude", "bump", "--m", "2", "--samples", "2500"},
    {"spectrum", "--spec", sl2, "--N", "128", "--b", "1,2"},
    {"iterate", "--spec", sl2, "--iters", "6", "--b", "1"},
    {"renewal", "--spec", sl2, "--samples", "3000", "--sigma-top", "0.1856", "--t", "5,10"},
    {"renewal-fit", "--spec", sl2, "--samples", "3000", "--estimate-sigma", "--t", "1,2,3,4"},
    {"resolvent", "--spec", sl2, "--N", "128", "--radius", "0.01", "--angles", "2"},
    {"geom-selftest", "--instances", "50"},
};

class CliDeterminism : public ::testing::TestWithParam<std::size_t> {};

TEST_P(CliDeterminism, ByteIdenticalAcrossRunsAndWorkers) {
    std::vector<std::string> args = kCommands[GetParam()];
    const Outcome first = run_cli(args);
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_NE(first.out.find("# seed: 1"), std::string::npos);
    const Outcome again = run_cli(args);
    EXPECT_EQ(first.out, again.out);
    args.push_back("--workers");
    args.push_back("3");
    const Outcome threaded = run_cli(args);
    ASSERT_EQ(threaded.code, 0) << threaded.err;
    EXPECT_EQ(first.out, threaded.out);
}

INSTANTIATE_TEST_SUITE_P(Subcommands, CliDeterminism, ::testing::Range<std::size_t>(0, kCommands.size()));

TEST(Cli, HeaderNamesSpecAndCommand) {
    const Outcome o = run_cli({"lyapunov", "--spec", sl2, "--samples", "100", "--n", "10", "--seed", "9"});
    ASSERT_EQ(o.code, 0);
    EXPECT_EQ(o.out.rfind("# flagwalk ", 0), 0u);
    EXPECT_NE(o.out.find("# seed: 9"), std::string::npos);
    EXPECT_NE(o.out.find("# spec: sl2-diag-rotation fnv1a64:"), std::string::npos);
    EXPECT_NE(run_cli({"lyapunov", "--spec", sl2, "--samples", "100", "--n", "10", "--seed", "10"}).out, o.out);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"no-such-command"}).code, 1);
    EXPECT_EQ(run_cli({"lyapunov", "--spec", "/nonexistent.json"}).code, 1);
    EXPECT_EQ(run_cli({"renewal", "--spec", sl2, "--samples", "10"}).code, 1);
    EXPECT_EQ(run_cli({"ldp", "--spec", sl2, "--sigma", "1,1"}).code, 1);
    EXPECT_EQ(run_cli({"resolvent", "--spec", sl2, "--radius", "1e-5"}).code, 1);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    EXPECT_EQ(run_cli({"selftest"}).code, 0);
}

TEST(Cli, AliasesMatch) {
    const auto a = run_cli({"walk", "lyapunov", "--spec", sl2, "--samples", "100", "--n", "10"});
    const auto b = run_cli({"lyapunov", "--spec", sl2, "--samples", "100", "--n", "10"});
    ASSERT_EQ(a.code, 0);
    // The header echoes the command line; the bodies agree.
    EXPECT_EQ(a.out.substr(a.out.find("quantity")), b.out.substr(b.out.find("quantity")));
}

}  // namespace
}  // namespace flagwalk
