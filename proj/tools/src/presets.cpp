#include "presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flagwalk/error.hpp"

namespace flagwalk::tools {

const std::vector<std::string>& phase_names() {
    static const std::vector<std::string> names{"angle", "quadratic", "constant"};
    return names;
}

const std::vector<std::string>& amplitude_names() {
    static const std::vector<std::string> names{"one", "zero", "bump"};
    return names;
}

OscillatorySpec oscillatory_preset(const std::string& phase, const std::string& amplitude, int m, double xi, double C) {
    if (m < 1) throw InvalidArgument("rank must be at least 1");
    OscillatorySpec osc;
    osc.xi = xi;
    osc.C = C;
    if (phase == "angle") {
        if (m != 1) throw InvalidArgument("the angle phase is defined for rank 1 only");
        osc.phase = [](const FlagPoint& eta) { return 2.0 * std::atan2(eta.k()(1, 0), eta.k()(0, 0)); };
        osc.phasePeriod = 2.0 * std::numbers::pi;
    } else if (phase == "quadratic") {
        osc.phase = [](const FlagPoint& eta) { return eta.k()(0, 0) * eta.k()(0, 0); };
    } else if (phase == "constant") {
        osc.phase = [](const FlagPoint&) { return 0.0; };
    } else {
        throw InvalidArgument("unknown phase '" + phase + "'");
    }

    if (amplitude == "one") {
        osc.amplitude = [](const FlagPoint&) { return Complex(1.0); };
    } else if (amplitude == "zero") {
        osc.amplitude = [](const FlagPoint&) { return Complex(0.0); };
    } else if (amplitude == "bump") {
        const FlagPoint base = FlagPoint::base(m);
        osc.amplitude = [base](const FlagPoint& eta) {
            return Complex(std::max(0.0, 1.0 - 2.0 * dist_flag(eta, base)));
        };
    } else {
        throw InvalidArgument("unknown amplitude '" + amplitude + "'");
    }
    return osc;
}

}  // namespace flagwalk::tools
