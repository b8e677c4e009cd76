#pragma once

#include <string>
#include <vector>

#include "flagwalk/fourier.hpp"

namespace flagwalk::tools {

// Named phases:
//   angle      m = 1 only: phi = 2 theta for the line at angle theta (mod 2 pi)
//   quadratic  phi = (first coordinate of the line)^2, critical at e_1 and at e_1-perp
//   constant   phi = 0
// Named amplitudes: one, zero, bump (1 - 2 dist_flag(eta, base), cut at 0).
OscillatorySpec oscillatory_preset(const std::string& phase, const std::string& amplitude, int m, double xi, double C);

const std::vector<std::string>& phase_names();
const std::vector<std::string>& amplitude_names();

}  // namespace flagwalk::tools
