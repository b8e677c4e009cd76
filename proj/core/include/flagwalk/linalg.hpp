#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

#include "flagwalk/rng.hpp"

namespace flagwalk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// All size-d subsets of {0, ..., n-1} in lexicographic order.
std::vector<std::vector<int>> subsets(int n, int d);
long binomial(int n, int d);

double spectral_norm(const Matrix& a);

// Planar rotation by t in coordinates (i, j): e_i -> cos t e_i + sin t e_j.
Matrix plane_rotation(int n, int i, int j, double t);

// Haar-distributed element of SO(n).
Matrix random_rotation(int n, Rng& rng);
// Matrix with i.i.d. Gaussian entries rescaled to determinant one (det > 0).
Matrix random_unimodular(int n, Rng& rng, double spread = 1.0);
Vector random_unit_vector(int n, Rng& rng);

// Projective distance ||v ^ w|| / (||v|| ||w||), computed from the component
// of w orthogonal to v to avoid cancellation for nearby lines.
double proj_distance(const Vector& v, const Vector& w);
// |<f, v>| / (||f|| ||v||): distance from the line v to the hyperplane ker f.
double proj_delta(const Vector& v, const Vector& f);

// Coordinates of v ^ w in the lexicographic basis of the second exterior power.
Vector wedge2(const Vector& v, const Vector& w);

// Orthonormalize columns (Householder QR), signs chosen so that R has a
// positive diagonal. Returns Q.
Matrix orthonormalize(const Matrix& a);

}  // namespace flagwalk
