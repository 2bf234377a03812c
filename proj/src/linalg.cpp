#include "pqmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pqmc/errors.hpp"

namespace pqmc {

SymMatrix SymMatrix::identity(int order) {
    SymMatrix s(order);
    for (int i = 0; i < order; ++i) s.at(i, i) = 1.0;
    return s;
}

std::vector<double> cholesky_lower(const SymMatrix& S) {
    const int n = S.n;
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += S.at(i, i);
    const double floor = 1e-12 * trace;
    std::vector<double> L(static_cast<size_t>(n) * n, 0.0);
    auto l = [&](int i, int j) -> double& { return L[static_cast<size_t>(i) * n + j]; };
    for (int j = 0; j < n; ++j) {
        double diag = S.at(j, j);
        for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= floor) throw DefinitenessError(j, diag);
        const double d = std::sqrt(diag);
        l(j, j) = d;
        for (int i = j + 1; i < n; ++i) {
            double v = S.at(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / d;
        }
    }
    return L;
}

namespace {

void sign_fix_column(std::vector<double>& V, int n, int j) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double m = std::fabs(V[static_cast<size_t>(i) * n + j]);
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (V[static_cast<size_t>(arg) * n + j] < 0.0)
        for (int i = 0; i < n; ++i) V[static_cast<size_t>(i) * n + j] *= -1.0;
}

}  // namespace

EigenPairs sym_eigen(const SymMatrix& S) {
    const int n = S.n;
    std::vector<double> A = S.a;
    std::vector<double> V(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) V[static_cast<size_t>(i) * n + i] = 1.0;
    auto a = [&](int i, int j) -> double& { return A[static_cast<size_t>(i) * n + j]; };
    auto v = [&](int i, int j) -> double& { return V[static_cast<size_t>(i) * n + j]; };

    double scale = 0.0;
    for (double x : A) scale = std::max(scale, std::fabs(x));
    if (scale == 0.0) scale = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };

    const double tol = 1e-14 * scale * n;
    int sweep = 0;
    while (off_norm() > tol) {
        if (++sweep > 100)
            throw NumericalError("symmetric eigensolver did not converge", off_norm());
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                                     : -1.0 / (-theta + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = a(i, i);
    for (int j = 0; j < n; ++j) sign_fix_column(V, n, j);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // descending by eigenvalue; equal values ordered by the sign-fixed
    // eigenvector's lexicographic order so the output is reproducible
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (vals[x] != vals[y]) return vals[x] > vals[y];
        for (int i = 0; i < n; ++i) {
            const double vx = V[static_cast<size_t>(i) * n + x];
            const double vy = V[static_cast<size_t>(i) * n + y];
            if (vx != vy) return vx > vy;
        }
        return false;
    });

    EigenPairs out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = vals[order[j]];
        for (int i = 0; i < n; ++i)
            out.vectors[static_cast<size_t>(i) * n + j] =
                V[static_cast<size_t>(i) * n + order[j]];
    }
    return out;
}

std::pair<double, std::vector<double>> power_leading(const SymMatrix& S,
                                                     double tol, int max_iter) {
    const int n = S.n;
    double scale = 0.0;
    for (double x : S.a) scale = std::max(scale, std::fabs(x));
    if (scale == 0.0) {
        // zero matrix: any unit vector with eigenvalue 0
        std::vector<double> e(n, 0.0);
        e[0] = 1.0;
        return {0.0, e};
    }

    // deterministic start: the coordinate with the largest diagonal entry
    int start = 0;
    for (int i = 1; i < n; ++i)
        if (S.at(i, i) > S.at(start, start)) start = i;
    std::vector<double> v(n, 0.0), w(n);
    v[start] = 1.0;

    double lambda = 0.0, resid = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += S.at(i, j) * v[j];
            w[i] = s;
        }
        lambda = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
        resid = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = w[i] - lambda * v[i];
            resid += r * r;
        }
        resid = std::sqrt(resid);
        if (resid <= tol * scale) {
            int arg = 0;
            for (int i = 1; i < n; ++i)
                if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
            if (v[arg] < 0.0)
                for (double& x : v) x = -x;
            return {lambda, v};
        }
        double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        if (norm == 0.0) {
            // v is in the null space; restart from a different axis
            v.assign(n, 0.0);
            v[(start + it + 1) % n] = 1.0;
            continue;
        }
        for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
    }
    throw NumericalError("power iteration did not converge", resid);
}

std::vector<double> householder_completion(const std::vector<double>& theta) {
    const int n = static_cast<int>(theta.size());
    if (n == 0) throw std::invalid_argument("empty direction vector");
    double norm2 = 0.0;
    for (double x : theta) norm2 += x * x;
    if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-10)
        throw std::invalid_argument("direction vector must be unit length");

    std::vector<double> Q(static_cast<size_t>(n) * n, 0.0);
    // w = (theta - e1)/||theta - e1||; ||theta - e1||^2 = 2(1 - theta_1)
    const double r2 = 2.0 * (1.0 - theta[0]);
    if (r2 < 1e-24) {
        for (int i = 0; i < n; ++i) Q[static_cast<size_t>(i) * n + i] = 1.0;
        return Q;
    }
    std::vector<double> w(theta);
    w[0] -= 1.0;
    const double r = std::sqrt(r2);
    for (double& x : w) x /= r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            Q[static_cast<size_t>(i) * n + j] =
                (i == j ? 1.0 : 0.0) - 2.0 * w[i] * w[j];
    return Q;
}

}  // namespace pqmc
