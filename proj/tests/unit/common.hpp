#pragma once

#include <string>

#include "flagwalk/measure.hpp"

namespace flagwalk::test {

inline std::string spec_path(const std::string& name) { return std::string(FLAGWALK_SPEC_DIR) + "/" + name + ".json"; }

inline MeasureSpec shipped(const std::string& name) { return load_measure_spec(spec_path(name)); }

inline Matrix diag(std::initializer_list<double> v) {
    Vector d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d(i++) = x;
    return d.asDiagonal();
}

inline Matrix mat2(double a, double b, double c, double d) {
    Matrix x(2, 2);
    x << a, b, c, d;
    return x;
}

}  // namespace flagwalk::test
