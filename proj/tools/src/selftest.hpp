#pragma once

#include <cstdint>
#include <vector>

#include "lemma_suite.hpp"

namespace flagwalk::tools {

// The worked examples of every module, each as a small exact or Monte Carlo
// check. Runs in a few seconds.
std::vector<CheckResult> example_checks(std::uint64_t seed = 1, int workers = 0);

}  // namespace flagwalk::tools
