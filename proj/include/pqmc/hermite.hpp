#pragma once
#include <vector>

namespace pqmc {

// Quadrature rule for integrals against the standard normal density:
// integral of h(z) phi(z) dz ~ sum_i weights[i] * h(nodes[i]).
// Exact for polynomials up to degree 2q - 1.
struct HermiteRule {
    std::vector<double> nodes;    // ascending
    std::vector<double> weights;  // sum to 1
};

// Probabilists' Gauss-Hermite rule with q points, 1 <= q <= 128, via
// Golub-Welsch on the Jacobi matrix (zero diagonal, offdiagonal sqrt(k)).
HermiteRule gauss_hermite(int q);

}  // namespace pqmc
