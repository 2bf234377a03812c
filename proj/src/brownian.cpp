#include "pqmc/brownian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pqmc/errors.hpp"

namespace pqmc {

SymMatrix brownian_covariance(int d, double T) {
    if (d < 1 || !(T > 0.0)) throw std::invalid_argument("need d >= 1 and T > 0");
    double dt = T / d;
    SymMatrix S(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) S.at(i, j) = dt * std::min(i + 1, j + 1);
    return S;
}

FactorMatrix standard_factor(int d, double T) {
    if (d < 1 || !(T > 0.0)) throw std::invalid_argument("need d >= 1 and T > 0");
    double s = std::sqrt(T / d);
    FactorMatrix R(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) R.at(i, j) = s;
    return R;
}

double pca_eigenvalue(int d, double T, int k) {
    if (k < 1 || k > d) throw std::invalid_argument("eigenvalue index out of range");
    double dt = T / d;
    double s = std::sin((2.0 * k - 1.0) * std::numbers::pi / (2.0 * (2 * d + 1)));
    return dt / (4.0 * s * s);
}

namespace {

// eigenfactor of a PSD matrix: V diag(sqrt(lambda)) with the linalg sign
// convention (largest-magnitude entry of each column positive)
FactorMatrix eigen_factor(const SymMatrix& S) {
    EigenPairs eg = sym_eigen(S);
    int n = S.n;
    FactorMatrix R(n);
    for (int k = 0; k < n; ++k) {
        double lam = eg.values[k];
        if (lam < 0.0) {
            if (lam < -1e-10 * std::max(eg.values[0], 1.0))
                throw DefinitenessError(k, lam);
            lam = 0.0;
        }
        double root = std::sqrt(lam);
        for (int i = 0; i < n; ++i) R.at(i, k) = eg.vec(i, k) * root;
    }
    return R;
}

}  // namespace

FactorMatrix pca_factor(int d, double T) {
    return eigen_factor(brownian_covariance(d, T));
}

SymMatrix basket_covariance(const BasketParams& bp) {
    if (!(std::abs(bp.rho) < 1.0))
        throw std::invalid_argument("need |rho| < 1");
    SymMatrix S = brownian_covariance(bp.d, bp.T);
    int d = bp.d;
    SymMatrix J(2 * d);
    double s11 = bp.sigma1 * bp.sigma1;
    double s22 = bp.sigma2 * bp.sigma2;
    double s12 = bp.rho * bp.sigma1 * bp.sigma2;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            J.at(i, j) = s11 * S.at(i, j);
            J.at(i, d + j) = s12 * S.at(i, j);
            J.at(d + i, j) = s12 * S.at(i, j);
            J.at(d + i, d + j) = s22 * S.at(i, j);
        }
    }
    return J;
}

const char* basket_kind_name(BasketKind k) {
    switch (k) {
        case BasketKind::ordinary_standard: return "ordinary-standard";
        case BasketKind::ordinary_pca: return "ordinary-pca";
        case BasketKind::full_standard: return "full-standard";
        case BasketKind::full_pca: return "full-pca";
    }
    return "?";
}

FactorMatrix basket_factor(const BasketParams& bp, BasketKind kind) {
    if (!(std::abs(bp.rho) < 1.0))
        throw std::invalid_argument("need |rho| < 1");
    int d = bp.d;
    if (kind == BasketKind::full_standard || kind == BasketKind::full_pca) {
        SymMatrix J = basket_covariance(bp);
        if (kind == BasketKind::full_pca) return eigen_factor(J);
        std::vector<double> L = cholesky_lower(J);
        FactorMatrix R(2 * d);
        R.a = std::move(L);
        return R;
    }
    // per-leg factor, correlation mixed in by the 2x2 block map
    // [[sigma1, 0], [rho sigma2, sqrt(1-rho^2) sigma2]]
    FactorMatrix leg = kind == BasketKind::ordinary_pca ? pca_factor(d, bp.T)
                                                        : standard_factor(d, bp.T);
    double c = std::sqrt(1.0 - bp.rho * bp.rho);
    FactorMatrix R(2 * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double v = leg.at(i, j);
            R.at(i, j) = bp.sigma1 * v;
            R.at(d + i, j) = bp.rho * bp.sigma2 * v;
            R.at(d + i, d + j) = c * bp.sigma2 * v;
        }
    }
    return R;
}

FactorMatrix rotate_factor(const FactorMatrix& R, const std::vector<double>& Theta) {
    int n = R.n;
    if (Theta.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("rotation has wrong shape");
    FactorMatrix out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += R.at(i, k) * Theta[static_cast<size_t>(k) * n + j];
            out.at(i, j) = s;
        }
    }
    return out;
}

}  // namespace pqmc
