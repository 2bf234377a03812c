#include "pqmc/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pqmc/linalg.hpp"

namespace pqmc {

namespace {

// Orthonormal probabilists' Hermite values p_0..p_q at x.
// p_{k+1} = (x p_k - sqrt(k) p_{k-1})/sqrt(k+1); p_q' = sqrt(q) p_{q-1}.
void hermite_values(int q, double x, std::vector<double>& p) {
    p[0] = 1.0;
    if (q >= 1) p[1] = x;
    for (int k = 1; k < q; ++k)
        p[k + 1] = (x * p[k] - std::sqrt(static_cast<double>(k)) * p[k - 1]) /
                   std::sqrt(static_cast<double>(k + 1));
}

}  // namespace

HermiteRule gauss_hermite(int q) {
    if (q < 1 || q > 128) throw std::invalid_argument("need 1 <= q <= 128");
    HermiteRule rule;
    if (q == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }

    // initial nodes: eigenvalues of the Jacobi matrix
    SymMatrix J(q);
    for (int k = 1; k < q; ++k) {
        const double b = std::sqrt(static_cast<double>(k));
        J.at(k - 1, k) = b;
        J.at(k, k - 1) = b;
    }
    EigenPairs ep = sym_eigen(J);
    std::vector<double> x(ep.values);
    std::sort(x.begin(), x.end());

    // Newton polish on p_q(x) = 0; eigenvalue weights are only absolutely
    // accurate, so weights come from the Christoffel function instead
    std::vector<double> p(q + 1);
    const double sq = std::sqrt(static_cast<double>(q));
    for (int i = 0; i < q; ++i) {
        for (int it = 0; it < 4; ++it) {
            hermite_values(q, x[i], p);
            const double deriv = sq * p[q - 1];
            if (deriv == 0.0) break;
            const double step = p[q] / deriv;
            x[i] -= step;
            if (std::fabs(step) <= 1e-16 * (1.0 + std::fabs(x[i]))) break;
        }
    }
    // nodes of a symmetric weight come in +- pairs; make that exact
    for (int i = 0; i < q / 2; ++i) {
        const double v = 0.5 * (x[q - 1 - i] - x[i]);
        x[q - 1 - i] = v;
        x[i] = -v;
    }
    if (q % 2 == 1) x[q / 2] = 0.0;

    rule.nodes = x;
    rule.weights.resize(q);
    for (int i = 0; i < q; ++i) {
        hermite_values(q, x[i], p);
        double chris = 0.0;
        for (int k = 0; k < q; ++k) chris += p[k] * p[k];
        rule.weights[i] = 1.0 / chris;
    }
    const double wsum =
        std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& w : rule.weights) w /= wsum;
    return rule;
}

}  // namespace pqmc
