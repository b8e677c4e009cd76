#pragma once

#include <Eigen/Dense>

#include "flagwalk/linalg.hpp"

namespace flagwalk {

// Element of SL(m+1, R). Construction checks |det - 1| <= 1e-9.
class GroupElement {
public:
    explicit GroupElement(Matrix entries);

    // Rescales a matrix with positive determinant to determinant one.
    static GroupElement normalized(const Matrix& entries);
    static GroupElement identity(int m);
    static GroupElement diagonal(const Vector& logEntries);  // exp of a trace-zero vector

    int rank() const { return static_cast<int>(a_.rows()) - 1; }
    int dim() const { return static_cast<int>(a_.rows()); }
    const Matrix& matrix() const { return a_; }
    double operator()(int i, int j) const { return a_(i, j); }

    // Products and inverses are re-normalized to determinant one.
    GroupElement operator*(const GroupElement& other) const;
    GroupElement inverse() const;
    GroupElement transpose() const;

private:
    struct Unchecked {};
    GroupElement(Matrix entries, Unchecked) : a_(std::move(entries)) {}

    Matrix a_;
};

// g = k exp(diag kappa) l with k, l in SO(m+1) and kappa non-increasing.
struct CartanTriple {
    Matrix k;
    Vector kappa;
    Matrix l;
    Matrix reconstruct() const;
};

// g = k exp(diag sigma) n with k in SO(m+1), n unipotent upper triangular.
struct IwasawaTriple {
    Matrix k;
    Vector sigma;
    Matrix n;
    Matrix reconstruct() const;
};

CartanTriple cartan_decompose(const GroupElement& g);
// Decomposition of e^{logScale} a, where a is a rescaled copy of a unimodular
// matrix (the renormalized product kept by the walk engine). The smallest
// log singular value is fixed by the trace-zero constraint rather than read
// off the factorization, which keeps kappa accurate for ill-conditioned a.
CartanTriple cartan_decompose(const Matrix& a, double logScale);

IwasawaTriple iwasawa_decompose(const GroupElement& g);
IwasawaTriple iwasawa_decompose(const Matrix& a, double logScale);

Vector cartan_projection(const GroupElement& g);

// max_i exp(-(kappa_i - kappa_{i+1})).
double gap(const GroupElement& g);
double gap_of(const Vector& kappa);

// (k_1, ..., k_{m+1}) -> (-k_{m+1}, ..., -k_1). Requires a trace-zero input.
Vector opposition_involution(const Vector& kappa);

// Root and weight tables of type A_m on the trace-zero diagonal subalgebra.
struct RootData {
    int m = 1;
    Eigen::MatrixXi L;  // L_ij = -alpha_i(H_j): negative Cartan matrix
    double C1 = 0.0;
    double C1prime = 0.0;
    double CA = 0.0;

    // Simple root alpha_i(X) = x_i - x_{i+1}, i = 1..m.
    double simple_root(int i, const Vector& x) const { return x(i - 1) - x(i); }
    // Fundamental weight chi_d(X) = x_1 + ... + x_d, d = 1..m.
    double weight(int d, const Vector& x) const { return x.head(d).sum(); }
};

RootData structural_constants(int m);

}  // namespace flagwalk
