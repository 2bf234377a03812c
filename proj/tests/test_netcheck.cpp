#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdexcept>

#include "doctest.h"
#include "pqmc/netcheck.hpp"
#include "pqmc/rng.hpp"
#include "pqmc/sobol.hpp"

using namespace pqmc;

namespace {

PointSet random_points(int m, int d, uint64_t seed) {
    PointSet ps;
    ps.m = m;
    ps.d = d;
    const size_t n = ps.n();
    ps.bits.resize(n * d);
    ps.points.resize(n * d);
    Rng r(seed);
    for (size_t i = 0; i < n * static_cast<size_t>(d); ++i) {
        ps.bits[i] = r.next_u64() & ((1ull << 53) - 1);
        ps.points[i] = static_cast<double>(ps.bits[i]) * 0x1p-53;
    }
    return ps;
}

}  // namespace

TEST_CASE("a single point is trivially a (0,0,d)-net") {
    PointSet ps = generate_sobol(0, 4);
    CHECK(is_net(ps, 0, 0, 4));
}

TEST_CASE("van der Corput points balance all dyadic intervals") {
    PointSet ps = generate_sobol(6, 1);
    CHECK(is_net(ps, 0, 6, 1));
    CHECK(smallest_net_t(ps) == 0);
}

TEST_CASE("two-dimensional Sobol points form a (0,m,2)-net") {
    for (int m : {2, 4, 5}) {
        PointSet ps = generate_sobol(m, 2);
        CHECK(is_net(ps, 0, m, 2));
        CHECK(smallest_net_t(ps) == 0);
    }
}

TEST_CASE("quality degrades with dimension: smallest t for d=3 and d=5") {
    // Joe-Kuo direction numbers do not give t=0 beyond d=2 at these sizes;
    // the failing elementary intervals were located by an independent
    // prototype (d=3,m=6: witness k=(0,1,5); d=5,m=8: witness k=(0,0,0,1,7)).
    PointSet p3 = generate_sobol(6, 3);
    CHECK_FALSE(is_net(p3, 0, 6, 3));
    CHECK(smallest_net_t(p3) == 1);
    PointSet p5 = generate_sobol(8, 5);
    CHECK_FALSE(is_net(p5, 0, 8, 5));
    CHECK(smallest_net_t(p5) == 3);
}

TEST_CASE("pseudorandom points are not a net") {
    PointSet ps = random_points(4, 2, 99);
    CHECK_FALSE(is_net(ps, 0, 4, 2));
}

TEST_CASE("both scrambles preserve the net parameter exactly") {
    PointSet net = generate_sobol(4, 2);
    for (Scramble kind : {Scramble::linear_matrix_shift, Scramble::nested_uniform}) {
        for (uint64_t seed : {1ull, 2ull, 77ull}) {
            PointSet sc = scramble(net, kind, seed);
            CHECK(is_net(sc, 0, 4, 2));
            CHECK(smallest_net_t(sc) == 0);
        }
    }
    // a t=1 set stays exactly t=1: scrambling can neither harm nor improve it
    PointSet p3 = generate_sobol(6, 3);
    for (Scramble kind : {Scramble::linear_matrix_shift, Scramble::nested_uniform}) {
        PointSet sc = scramble(p3, kind, 11);
        CHECK(smallest_net_t(sc) == 1);
    }
}

TEST_CASE("scrambling leaves non-nets broken") {
    PointSet ps = random_points(4, 2, 123);
    PointSet sc = scramble(ps, Scramble::linear_matrix_shift, 5);
    CHECK_FALSE(is_net(sc, 0, 4, 2));
}

TEST_CASE("argument validation") {
    PointSet ps = generate_sobol(3, 2);
    CHECK_THROWS_AS(is_net(ps, 0, 4, 2), std::invalid_argument);  // n != 2^m
    CHECK_THROWS_AS(is_net(ps, 0, 3, 3), std::invalid_argument);  // wrong d
    CHECK_THROWS_AS(is_net(ps, 2, 1, 2), std::invalid_argument);  // t > m
    CHECK(is_net(ps, 3, 3, 2));                                   // t = m trivial
}

TEST_CASE("is_net works from doubles when digit data is absent") {
    PointSet ps = generate_sobol(4, 2);
    PointSet stripped = ps;
    stripped.bits.clear();
    CHECK(is_net(stripped, 0, 4, 2));
}
