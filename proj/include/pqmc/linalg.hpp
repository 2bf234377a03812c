#pragma once
#include <utility>
#include <vector>

namespace pqmc {

// Dense symmetric matrix, row-major.
struct SymMatrix {
    int n = 0;
    std::vector<double> a;

    SymMatrix() = default;
    explicit SymMatrix(int order) : n(order), a(static_cast<size_t>(order) * order, 0.0) {}

    double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    static SymMatrix identity(int order);
};

// Eigenvalues descending; vectors row-major with column j the unit
// eigenvector of values[j]. Sign convention: each column's largest-magnitude
// entry is positive (ties resolved at the lowest index).
struct EigenPairs {
    std::vector<double> values;
    std::vector<double> vectors;
    int n = 0;

    double vec(int i, int j) const { return vectors[static_cast<size_t>(i) * n + j]; }
};

// L lower triangular with positive diagonal, L*L^T = S.
// Throws DefinitenessError naming the pivot when S is not positive definite.
std::vector<double> cholesky_lower(const SymMatrix& S);

// Cyclic Jacobi; throws NumericalError after 100 sweeps without convergence.
EigenPairs sym_eigen(const SymMatrix& S);

// Leading eigenpair by power iteration. Residual target is
// ||S v - lambda v||_2 <= tol * max|S_ij|; throws NumericalError past
// max_iter. S should be positive semidefinite.
std::pair<double, std::vector<double>> power_leading(const SymMatrix& S,
                                                     double tol, int max_iter);

// Orthogonal matrix (row-major) whose first column equals theta, built from
// the reflection I - 2ww^T with w = (theta - e1)/||theta - e1||; returns the
// identity when theta is e1. theta must be unit length to 1e-10.
std::vector<double> householder_completion(const std::vector<double>& theta);

}  // namespace pqmc
