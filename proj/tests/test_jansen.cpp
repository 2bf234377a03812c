#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pqmc/errors.hpp"
#include "pqmc/jansen.hpp"
#include "pqmc/linalg.hpp"
#include "pqmc/normal.hpp"
#include "pqmc/rng.hpp"

using namespace pqmc;

namespace {

std::vector<double> normalize(std::vector<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

// columns 2..d of the reflection completing theta
std::vector<double> householder_cols(const std::vector<double>& theta) {
    int d = static_cast<int>(theta.size());
    std::vector<double> Q = householder_completion(theta);
    std::vector<double> comp(static_cast<size_t>(d) * (d - 1));
    for (int i = 0; i < d; ++i)
        for (int c = 1; c < d; ++c)
            comp[static_cast<size_t>(i) * (d - 1) + (c - 1)] = Q[static_cast<size_t>(i) * d + c];
    return comp;
}

// random orthogonal q x q matrix by Gram-Schmidt on Gaussian columns
std::vector<double> random_orthogonal(int q, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> M(static_cast<size_t>(q) * q);
    for (double& x : M) x = norm_inv_cdf(rng.next_unit());
    for (int c = 0; c < q; ++c) {
        for (int p = 0; p < c; ++p) {
            double dot = 0.0;
            for (int i = 0; i < q; ++i) dot += M[i * q + c] * M[i * q + p];
            for (int i = 0; i < q; ++i) M[i * q + c] -= dot * M[i * q + p];
        }
        double nrm = 0.0;
        for (int i = 0; i < q; ++i) nrm += M[i * q + c] * M[i * q + c];
        nrm = std::sqrt(nrm);
        for (int i = 0; i < q; ++i) M[i * q + c] /= nrm;
    }
    return M;
}

}  // namespace

TEST_CASE("constant integrands have exactly zero index") {
    auto f = [](const double*) { return 4.5; };
    JansenOptions opt;
    opt.m = 6;
    opt.replicates = 4;
    auto theta = normalize({1.0, 2.0});
    auto est = jansen_tau_projection(f, 2, theta, householder_cols(theta), opt);
    CHECK(est.tau_upper == 0.0);
    CHECK(est.stderr_tau == 0.0);
    auto ce = jansen_tau_coordinate(f, 2, 1, opt);
    CHECK(ce.tau_upper == 0.0);
}

TEST_CASE("linear Gaussian functional has index (c.theta)^2") {
    std::vector<double> c = {3.0, -1.0, 2.0};
    auto f = [&](const double* x) { return c[0] * x[0] + c[1] * x[1] + c[2] * x[2]; };
    JansenOptions opt;
    opt.m = 10;
    opt.replicates = 10;
    opt.seed = 42;
    for (auto theta : {normalize({1.0, 1.0, 1.0}), normalize({2.0, 0.0, -1.0})}) {
        auto est = jansen_tau_projection(f, 3, theta, householder_cols(theta), opt);
        double dot = c[0] * theta[0] + c[1] * theta[1] + c[2] * theta[2];
        CHECK(std::abs(est.tau_upper - dot * dot) <= 3.0 * est.stderr_tau + 1e-10);
        CHECK(est.tau_upper >= 0.0);
        // total index never exceeds the variance
        CHECK(est.tau_upper <=
              est.variance + 3.0 * (est.stderr_tau + est.stderr_variance) + 1e-10);
    }
}

TEST_CASE("quadratic closed form matches a hand-computed diagonal case") {
    // f = (3/2) x1^2: index of e1 is a^2 - a^2/2 with a = 3
    QuadraticForm q;
    q.A = SymMatrix(2);
    q.A.at(0, 0) = 3.0;
    q.b = {0.0, 0.0};
    CHECK(quadratic_tau_closed_form(q, {1.0, 0.0}) == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(quadratic_tau_closed_form(q, {0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("Jansen estimate agrees with the quadratic closed form") {
    QuadraticForm q;
    q.A = SymMatrix(3);
    double avals[9] = {2, 1, 0, 1, 3, 1, 0, 1, 1};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q.A.at(i, j) = avals[i * 3 + j];
    q.b = {0.5, -1.0, 2.0};
    JansenOptions opt;
    opt.m = 11;
    opt.replicates = 20;
    opt.seed = 7;
    for (auto theta : {normalize({1.0, 1.0, 1.0}), normalize({1.0, -2.0, 0.5})}) {
        auto est = jansen_tau_projection(
            [&](const double* x) { return q(x); }, 3, theta, householder_cols(theta), opt);
        double want = quadratic_tau_closed_form(q, theta);
        CHECK(std::abs(est.tau_upper - want) <= 3.0 * est.stderr_tau + 1e-8);
    }
}

TEST_CASE("coordinate indices on the unit cube") {
    auto f = [](const double* x) { return x[0]; };
    JansenOptions opt;
    opt.m = 10;
    opt.replicates = 10;
    opt.seed = 3;
    opt.gaussian = false;
    auto e1 = jansen_tau_coordinate(f, 2, 1, opt);
    CHECK(std::abs(e1.tau_upper - 1.0 / 12.0) <= 3.0 * e1.stderr_tau + 1e-10);
    auto e2 = jansen_tau_coordinate(f, 2, 2, opt);
    CHECK(e2.tau_upper == 0.0);
}

TEST_CASE("pure interaction gives unit index to both coordinates") {
    auto f = [](const double* x) { return x[0] * x[1]; };
    JansenOptions opt;
    opt.m = 11;
    opt.replicates = 20;
    opt.seed = 11;
    auto e1 = jansen_tau_coordinate(f, 2, 1, opt);
    CHECK(std::abs(e1.tau_upper - 1.0) <= 3.0 * e1.stderr_tau + 1e-6);
    auto e2 = jansen_tau_coordinate(f, 2, 2, opt);
    CHECK(std::abs(e2.tau_upper - 1.0) <= 3.0 * e2.stderr_tau + 1e-6);
}

TEST_CASE("symmetric integrands give matching coordinate indices") {
    auto f = [](const double* x) { return x[0] + x[1] + x[0] * x[1]; };
    JansenOptions opt;
    opt.m = 10;
    opt.replicates = 15;
    opt.seed = 13;
    auto e1 = jansen_tau_coordinate(f, 2, 1, opt);
    auto e2 = jansen_tau_coordinate(f, 2, 2, opt);
    double se = std::sqrt(e1.stderr_tau * e1.stderr_tau + e2.stderr_tau * e2.stderr_tau);
    CHECK(std::abs(e1.tau_upper - e2.tau_upper) <= 3.0 * se + 1e-8);
}

TEST_CASE("mean dimension recovers known values") {
    JansenOptions opt;
    opt.m = 10;
    opt.replicates = 15;
    opt.seed = 40;
    SUBCASE("single coordinate") {
        auto md = mean_dimension([](const double* x) { return x[0]; }, 3, opt);
        CHECK(std::abs(md.nu - 1.0) <= 3.0 * md.stderr_nu + 1e-6);
        CHECK(md.tau.size() == 3);
        CHECK(md.tau[1] == 0.0);
        CHECK(md.tau[2] == 0.0);
    }
    SUBCASE("additive function") {
        opt.gaussian = false;
        auto md = mean_dimension(
            [](const double* x) { return std::sin(x[0]) + std::sin(x[1]) + std::sin(x[2]); },
            3, opt);
        CHECK(std::abs(md.nu - 1.0) <= 3.0 * md.stderr_nu + 1e-4);
    }
    SUBCASE("pure interaction") {
        auto md = mean_dimension([](const double* x) { return x[0] * x[1]; }, 2, opt);
        CHECK(std::abs(md.nu - 2.0) <= 3.0 * md.stderr_nu + 1e-4);
    }
    SUBCASE("zero variance is degenerate") {
        CHECK_THROWS_AS(mean_dimension([](const double*) { return 1.0; }, 2, opt),
                        NumericalError);
    }
}

TEST_CASE("gradient covariance bound and its gap") {
    JansenOptions opt;
    opt.m = 10;
    opt.replicates = 15;
    opt.seed = 21;
    SUBCASE("linear integrand closes the gap") {
        std::vector<double> c = {1.0, -2.0, 0.5};
        SymMatrix C(3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) C.at(i, j) = c[i] * c[j];
        auto theta = normalize({1.0, 0.5, -0.25});
        auto pg = poincare_gap(
            [&](const double* x) { return c[0] * x[0] + c[1] * x[1] + c[2] * x[2]; },
            3, theta, C, opt);
        CHECK(std::abs(pg.gap) <= 3.0 * pg.stderr_tau + 1e-8);
        CHECK_FALSE(pg.violation);
    }
    SUBCASE("quadratic integrand leaves half the squared Rayleigh quotient") {
        QuadraticForm q;
        q.A = SymMatrix(2);
        q.A.at(0, 0) = 2.0;
        q.A.at(0, 1) = q.A.at(1, 0) = 1.0;
        q.A.at(1, 1) = 1.5;
        q.b = {1.0, -0.5};
        auto theta = normalize({2.0, 1.0});
        auto pg = poincare_gap([&](const double* x) { return q(x); }, 2, theta,
                               quadratic_gradient_covariance(q), opt);
        double tAt = 0.0;
        std::vector<double> At = {q.A.at(0, 0) * theta[0] + q.A.at(0, 1) * theta[1],
                                  q.A.at(1, 0) * theta[0] + q.A.at(1, 1) * theta[1]};
        tAt = theta[0] * At[0] + theta[1] * At[1];
        CHECK(std::abs(pg.gap - 0.5 * tAt * tAt) <= 3.0 * pg.stderr_tau + 1e-6);
        CHECK_FALSE(pg.violation);
    }
    SUBCASE("constant integrand gives the zero triple") {
        auto pg = poincare_gap([](const double*) { return 2.0; }, 2, {1.0, 0.0},
                               SymMatrix(2), opt);
        CHECK(pg.tau == 0.0);
        CHECK(pg.upper == 0.0);
        CHECK(pg.gap == 0.0);
        CHECK_FALSE(pg.violation);
    }
}

TEST_CASE("estimates do not depend on the completion choice") {
    auto theta = normalize({1.0, 2.0, -1.0, 0.5});
    auto f = [](const double* x) {
        return std::exp(0.3 * x[0] + 0.2 * x[1]) + x[2] * x[2] * x[3];
    };
    JansenOptions opt;
    opt.m = 10;
    opt.replicates = 15;
    opt.seed = 77;
    std::vector<double> compA = householder_cols(theta);
    std::vector<double> Q = random_orthogonal(3, 99);
    std::vector<double> compB(compA.size(), 0.0);
    for (int i = 0; i < 4; ++i)
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 3; ++k)
                compB[i * 3 + c] += compA[i * 3 + k] * Q[k * 3 + c];
    auto estA = jansen_tau_projection(f, 4, theta, compA, opt);
    auto estB = jansen_tau_projection(f, 4, theta, compB, opt);
    double se = std::sqrt(estA.stderr_tau * estA.stderr_tau +
                          estB.stderr_tau * estB.stderr_tau);
    CHECK(std::abs(estA.tau_upper - estB.tau_upper) <= 3.0 * se + 1e-10);
}

TEST_CASE("doubling the integrand exactly quadruples the index") {
    auto f1 = [](const double* x) { return std::exp(0.5 * x[0]) + x[1]; };
    auto f2 = [&](const double* x) { return 2.0 * f1(x); };
    JansenOptions opt;
    opt.m = 8;
    opt.replicates = 5;
    opt.seed = 5;
    auto theta = normalize({1.0, 1.0});
    auto e1 = jansen_tau_projection(f1, 2, theta, householder_cols(theta), opt);
    auto e2 = jansen_tau_projection(f2, 2, theta, householder_cols(theta), opt);
    CHECK(e2.tau_upper == 4.0 * e1.tau_upper);
    auto c1 = jansen_tau_coordinate(f1, 2, 1, opt);
    auto c2 = jansen_tau_coordinate(f2, 2, 1, opt);
    CHECK(c2.tau_upper == 4.0 * c1.tau_upper);
}

TEST_CASE("estimator validates its frame") {
    auto f = [](const double* x) { return x[0]; };
    JansenOptions opt;
    opt.m = 4;
    opt.replicates = 2;
    // not unit length
    CHECK_THROWS_AS(
        jansen_tau_projection(f, 2, {1.0, 1.0}, householder_cols(normalize({1.0, 1.0})), opt),
        std::invalid_argument);
    // completion not orthogonal to theta
    std::vector<double> bad = {1.0, 0.0};  // column e1 == theta
    CHECK_THROWS_AS(jansen_tau_projection(f, 2, {1.0, 0.0}, bad, opt),
                    std::invalid_argument);
    // projections need Gaussian inputs
    JansenOptions cube = opt;
    cube.gaussian = false;
    auto theta = normalize({1.0, 1.0});
    CHECK_THROWS_AS(jansen_tau_projection(f, 2, theta, householder_cols(theta), cube),
                    std::invalid_argument);
    CHECK_THROWS_AS(jansen_tau_coordinate(f, 2, 0, opt), std::invalid_argument);
    CHECK_THROWS_AS(jansen_tau_coordinate(f, 2, 3, opt), std::invalid_argument);
}

TEST_CASE("results are reproducible for a fixed seed") {
    auto f = [](const double* x) { return x[0] * x[0] + x[1]; };
    JansenOptions opt;
    opt.m = 8;
    opt.replicates = 5;
    opt.seed = 123;
    auto a = jansen_tau_coordinate(f, 2, 1, opt);
    auto b = jansen_tau_coordinate(f, 2, 1, opt);
    CHECK(a.tau_upper == b.tau_upper);
    CHECK(a.stderr_tau == b.stderr_tau);
    opt.seed = 124;
    auto c = jansen_tau_coordinate(f, 2, 1, opt);
    CHECK(a.tau_upper != c.tau_upper);
}
