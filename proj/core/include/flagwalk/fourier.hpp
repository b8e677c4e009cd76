#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flagwalk/flag.hpp"
#include "flagwalk/measure.hpp"
#include "flagwalk/parallel.hpp"
#include "flagwalk/stats.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk {

struct FourierCoefficient {
    long k = 0;
    Complex value{};
    double stdErr = 0.0;  // of the complex mean, sqrt(var re + var im) / sqrt(N)
};

// Mean of e^{2 i k theta} over stationary samples on P^1.
std::vector<FourierCoefficient> fourier_coefficients(const MeasureSpec& spec, const std::vector<long>& ks,
                                                     const McOptions& opts, std::size_t burnIn = kDefaultBurnIn);
FourierCoefficient fourier_coefficient(const MeasureSpec& spec, long k, const McOptions& opts,
                                       std::size_t burnIn = kDefaultBurnIn);

struct DecayFit {
    std::vector<FourierCoefficient> coefficients;
    std::optional<LineFit> fit;  // log |nu(k)| against log k, over points above 3 stdErr
    bool belowNoiseFloor = false;
    std::string report;
};

// kGrid must be positive; throws DegenerateFit otherwise.
DecayFit decay_exponent_fit(const MeasureSpec& spec, const std::vector<long>& kGrid, const McOptions& opts,
                            std::size_t burnIn = kDefaultBurnIn);

struct OscillatorySpec {
    std::function<double(const FlagPoint&)> phase;
    std::function<Complex(const FlagPoint&)> amplitude;
    double xi = 1.0;
    double C = 2.0;
    // Set when the phase is only defined modulo a period (angle-valued phases).
    std::optional<double> phasePeriod;
    double derivativeStep = 1e-5;
};

struct OscillatoryResult {
    Complex value{};
    double stdErr = 0.0;
    std::size_t samples = 0;
};

// Mean of e^{i xi phase} amplitude over stationary flags.
OscillatoryResult oscillatory_integral(const MeasureSpec& spec, const OscillatorySpec& osc, const McOptions& opts,
                                       std::size_t burnIn = kDefaultBurnIn);

// Central difference of the phase along the alpha_d-circle through k.
double circle_derivative(const OscillatorySpec& osc, const Matrix& k, int d);

struct GoodnessCondition {
    bool pass = true;
    double worst = 0.0;  // largest lhs / rhs seen (pass iff <= 1)
    Matrix witness;      // frame of the worst point, empty if none
    std::size_t checked = 0;
};

struct GoodnessReport {
    std::vector<double> v;  // sup of |d_alpha phase| over the sampled support
    GoodnessCondition g1, g2, g3, g4;
    std::size_t supportPoints = 0;
    std::size_t neighbourhoodPoints = 0;
    bool all_pass() const { return g1.pass && g2.pass && g3.pass && g4.pass; }
};

// Sampled check of the (C, r) goodness conditions. Points are Haar-random
// frames; pairs are nearby frames at log-uniform distances, drawn
// independently of C so that results are monotone in C.
GoodnessReport cr_goodness_check(const OscillatorySpec& osc, int m, const McOptions& opts);

std::string describe(const GoodnessReport& report);

}  // namespace flagwalk
