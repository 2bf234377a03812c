#pragma once
#include <vector>

#include "pqmc/linalg.hpp"

namespace pqmc {

// Square factor R with R R^T equal to the target covariance.
struct FactorMatrix {
    int n = 0;
    std::vector<double> a;  // row-major

    FactorMatrix() = default;
    explicit FactorMatrix(int order) : n(order), a(static_cast<size_t>(order) * order, 0.0) {}

    double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

// Covariance of a Brownian path observed at t_j = j T/d, j = 1..d:
// Sigma_ij = (T/d) min(i, j).
SymMatrix brownian_covariance(int d, double T);

// Lower-triangular factor with every nonzero entry sqrt(T/d); the exact
// Cholesky factor of the path covariance.
FactorMatrix standard_factor(int d, double T);

// Eigenvector factor R = V diag(sqrt(lambda)), eigenvalues descending,
// column signs fixed so the first column is all-positive.
FactorMatrix pca_factor(int d, double T);

// Closed-form eigenvalue k (1-based) of the path covariance:
// (dt/4) / sin^2((2k-1) pi / (2(2d+1))).
double pca_eigenvalue(int d, double T, int k);

// Two correlated geometric Brownian legs sharing the strike; the payoff
// weights w1, w2 and per-leg drifts r1, r2 live here as well since the
// basket experiments vary them together.
struct BasketParams {
    double S0 = 100.0;
    double K = 95.0;
    double T = 1.0;
    double rho = 0.5;
    double r1 = 0.1, r2 = 0.2;
    double sigma1 = 0.2, sigma2 = 0.4;
    double w1 = 0.8, w2 = 0.2;
    int d = 50;
};

// Joint covariance of (sigma1 B^(1), sigma2 B^(2)) with Corr = rho, 2d x 2d.
SymMatrix basket_covariance(const BasketParams& bp);

enum class BasketKind {
    ordinary_standard,  // per-leg factor, correlation mixed in afterwards
    ordinary_pca,
    full_standard,      // Cholesky of the joint covariance
    full_pca,           // eigenfactor of the joint covariance
};

const char* basket_kind_name(BasketKind k);

FactorMatrix basket_factor(const BasketParams& bp, BasketKind kind);

// R Theta for an orthogonal Theta (row-major d x d); preserves R R^T.
FactorMatrix rotate_factor(const FactorMatrix& R, const std::vector<double>& Theta);

}  // namespace pqmc
