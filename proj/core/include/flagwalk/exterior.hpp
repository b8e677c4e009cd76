#pragma once

#include <span>
#include <vector>

#include "flagwalk/lie.hpp"
#include "flagwalk/linalg.hpp"

namespace flagwalk {

// Matrix of g acting on the d-th exterior power, in the lexicographic basis
// e_I = e_{i_1} ^ ... ^ e_{i_d}.
struct ExteriorMatrix {
    int degree = 1;
    std::vector<std::vector<int>> basis;
    Matrix entries;

    long dim() const { return static_cast<long>(basis.size()); }
};

// Entry (I, J) is the I x J minor. Works for any square matrix, including
// exterior matrices themselves.
ExteriorMatrix exterior_power(const Matrix& a, int d);
ExteriorMatrix exterior_power(const GroupElement& g, int d);

// Coordinates of the wedge of the columns of v (n x d).
Vector wedge(const Matrix& v);
// Wedge of the listed columns of k.
Vector wedge_columns(const Matrix& k, std::span<const int> cols);
// k e_1 ^ ... ^ k e_d.
Vector leading_wedge(const Matrix& k, int d);

// ||wedge^2 a|| / ||a||^2 for a linear map a.
double gamma12(const Matrix& a);
// The same ratio for the representation on the d-th exterior power.
double gamma12(const GroupElement& g, int d);

// Attracting line xM and repelling functional ym of a linear map.
struct DensityPair {
    Vector xM;
    Vector ym;
    bool degenerate = false;  // top two singular values closer than 1e-10 in log
};

DensityPair density_points(const GroupElement& g, int d);
DensityPair linear_density_points(const Matrix& a);

// |log ||wedge^d g|| - (kappa_1 + ... + kappa_d)|.
double operator_norm_identity_check(const GroupElement& g, int d);

}  // namespace flagwalk
