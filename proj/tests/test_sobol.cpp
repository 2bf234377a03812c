#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pqmc/rng.hpp"
#include "pqmc/sobol.hpp"

using namespace pqmc;

TEST_CASE("first point is the origin") {
    PointSet ps = generate_sobol(0, 3);
    REQUIRE(ps.n() == 1);
    for (int j = 0; j < 3; ++j) CHECK(ps.at(0, j) == 0.0);
}

TEST_CASE("dimension 1 is the base-2 radical inverse in index order") {
    PointSet ps = generate_sobol(2, 1);
    const double want[4] = {0.0, 0.5, 0.25, 0.75};
    for (int i = 0; i < 4; ++i) CHECK(ps.at(i, 0) == want[i]);
}

TEST_CASE("first eight points in two dimensions, natural order") {
    PointSet ps = generate_sobol(3, 2);
    const double want[8][2] = {{0, 0},           {0.5, 0.5},   {0.25, 0.75},
                               {0.75, 0.25},     {0.125, 0.625}, {0.625, 0.125},
                               {0.375, 0.375},   {0.875, 0.875}};
    for (int i = 0; i < 8; ++i) {
        CHECK(ps.at(i, 0) == want[i][0]);
        CHECK(ps.at(i, 1) == want[i][1]);
    }
}

TEST_CASE("direction table limits are enforced and named") {
    CHECK(joe_kuo_table().max_dim() == 100);
    CHECK_THROWS_WITH_AS(generate_sobol(3, 101),
                         doctest::Contains("limit of 100"), std::runtime_error);
    CHECK_THROWS_AS(generate_sobol(32, 2), std::invalid_argument);
    CHECK_THROWS_AS(generate_sobol(-1, 2), std::invalid_argument);
    CHECK_THROWS_AS(generate_sobol(3, 0), std::invalid_argument);
    PointSet big = generate_sobol(1, 100);
    CHECK(big.n() == 2);
}

TEST_CASE("every coordinate lies in [0,1) and scrambled ones in (0,1)") {
    PointSet ps = generate_sobol(10, 5);
    for (double v : ps.points) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    for (Scramble kind : {Scramble::linear_matrix_shift, Scramble::nested_uniform}) {
        PointSet sc = scramble(ps, kind, 77);
        for (double v : sc.points) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("scrambling is deterministic in (seed, kind) and seed-sensitive") {
    PointSet ps = generate_sobol(6, 3);
    for (Scramble kind : {Scramble::linear_matrix_shift, Scramble::nested_uniform}) {
        PointSet a = scramble(ps, kind, 123), b = scramble(ps, kind, 123);
        CHECK(a.bits == b.bits);
        CHECK(a.points == b.points);
        PointSet c = scramble(ps, kind, 124);
        CHECK(a.bits != c.bits);
    }
    PointSet lms = scramble(ps, Scramble::linear_matrix_shift, 5);
    PointSet nest = scramble(ps, Scramble::nested_uniform, 5);
    CHECK(lms.bits != nest.bits);
    CHECK(scramble(ps, Scramble::none, 9).points == ps.points);
}

TEST_CASE("scrambled coordinates are marginally uniform (KS band)") {
    // KS statistic below the 0.999 asymptotic quantile for >= 99 of 100
    // seeds, n = 2^14, checked per coordinate
    const int m = 14, d = 2;
    const size_t n = size_t(1) << m;
    const double ks_cut = 1.94947 / std::sqrt(static_cast<double>(n));
    PointSet base = generate_sobol(m, d);
    for (Scramble kind : {Scramble::linear_matrix_shift, Scramble::nested_uniform}) {
        int fails = 0;
        const int nseeds = (kind == Scramble::linear_matrix_shift) ? 100 : 30;
        for (int s = 0; s < nseeds; ++s) {
            PointSet sc = scramble(base, kind, 1000 + s);
            for (int j = 0; j < d; ++j) {
                std::vector<double> u(n);
                for (size_t i = 0; i < n; ++i) u[i] = sc.at(i, j);
                std::sort(u.begin(), u.end());
                double dks = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    const double lo = u[i] - static_cast<double>(i) / n;
                    const double hi = static_cast<double>(i + 1) / n - u[i];
                    dks = std::max(dks, std::max(lo, hi));
                }
                if (dks > ks_cut) ++fails;
            }
        }
        INFO("kind = " << scramble_name(kind));
        CHECK(fails <= nseeds * 2 / 100);
    }
}

TEST_CASE("scrambled-net quadrature of x1*x2 is unbiased") {
    const int m = 6, d = 2;
    PointSet base = generate_sobol(m, d);
    const int reps = 2000;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < reps; ++s) {
        PointSet sc = scramble(base, Scramble::linear_matrix_shift, 50000 + s);
        double est = 0.0;
        for (size_t i = 0; i < sc.n(); ++i) est += sc.at(i, 0) * sc.at(i, 1);
        est /= static_cast<double>(sc.n());
        sum += est;
        sumsq += est * est;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sumsq / reps - mean * mean) / (reps - 1));
    CHECK(std::fabs(mean - 0.25) < 4.0 * se);
}

TEST_CASE("scramble requires digit data") {
    PointSet ps;
    ps.m = 1;
    ps.d = 1;
    ps.points = {0.0, 0.5};
    CHECK_THROWS_AS(scramble(ps, Scramble::linear_matrix_shift, 1),
                    std::invalid_argument);
}

TEST_CASE("direction file loader rejects malformed tables") {
    CHECK_THROWS_AS(DirectionTable::load_file("/nonexistent/file.txt"),
                    std::runtime_error);
}
