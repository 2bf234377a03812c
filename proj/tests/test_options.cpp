#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "pqmc/brownian.hpp"
#include "pqmc/normal.hpp"
#include "pqmc/options.hpp"
#include "pqmc/rng.hpp"
#include "pqmc/sobol.hpp"

using namespace pqmc;

namespace {

struct MeanSE {
    double mean, se;
};

MeanSE mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double s2 = 0.0;
    for (double x : xs) s2 += (x - m) * (x - m);
    s2 /= (n - 1.0);
    return {m, std::sqrt(s2 / n)};
}

// Scrambled digital net mapped to Gaussians, row-major n x d.
std::vector<double> gaussian_net(int m, int d, uint64_t seed) {
    PointSet ps = scramble(generate_sobol(m, d), Scramble::linear_matrix_shift, seed);
    return to_gaussian(ps);
}

std::vector<double> iid_gaussians(size_t n, int d, uint64_t seed) {
    std::vector<double> z(n * static_cast<size_t>(d));
    for (size_t i = 0; i < z.size(); ++i)
        z[i] = norm_inv_cdf(counter_unit(seed, i));
    return z;
}

double batch_mean(const MarketParams& mp, const FactorMatrix& R, Greek g,
                  const std::vector<double>& z) {
    const size_t n = z.size() / static_cast<size_t>(mp.d);
    std::vector<double> v(n);
    asian_eval_batch(mp, R, g, z.data(), n, v.data());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
}

// Discounted price estimate on fixed points.
double disc_price(const MarketParams& mp, const FactorMatrix& R,
                  const std::vector<double>& z) {
    return std::exp(-mp.r * mp.T) * batch_mean(mp, R, Greek::payoff, z);
}

using FactorMaker = std::function<FactorMatrix(int, double)>;

// Central finite difference of the discounted price (or of the delta
// estimate, for gamma) in the parameter that the Greek differentiates,
// on common points z. Theta rebuilds the factor at the shifted horizon.
double fd_estimate(Greek g, const MarketParams& mp, const FactorMaker& make,
                   const FactorMatrix& R, const std::vector<double>& z) {
    MarketParams up = mp, dn = mp;
    switch (g) {
        case Greek::delta: {
            const double h = 0.5;
            up.S0 += h;
            dn.S0 -= h;
            return (disc_price(up, R, z) - disc_price(dn, R, z)) / (2.0 * h);
        }
        case Greek::gamma: {
            const double h = 0.5;
            up.S0 += h;
            dn.S0 -= h;
            return (batch_mean(up, R, Greek::delta, z) -
                    batch_mean(dn, R, Greek::delta, z)) /
                   (2.0 * h);
        }
        case Greek::rho: {
            const double h = 1e-3;
            up.r += h;
            dn.r -= h;
            return (disc_price(up, R, z) - disc_price(dn, R, z)) / (2.0 * h);
        }
        case Greek::theta: {
            const double h = 1e-3;
            up.T += h;
            dn.T -= h;
            FactorMatrix Ru = make(mp.d, up.T), Rd = make(mp.d, dn.T);
            return (disc_price(up, Ru, z) - disc_price(dn, Rd, z)) / (2.0 * h);
        }
        case Greek::vega: {
            const double h = 1e-3;
            up.sigma += h;
            dn.sigma -= h;
            return (disc_price(up, R, z) - disc_price(dn, R, z)) / (2.0 * h);
        }
        default:
            throw std::logic_error("no finite difference for payoff");
    }
}

}  // namespace

TEST_CASE("hand payoff at z = 0 for two dates") {
    MarketParams mp;
    mp.d = 2;
    FactorMatrix R = standard_factor(2, mp.T);
    const double z[2] = {0.0, 0.0};
    const double dt = mp.T / 2.0;
    const double mu = mp.r - 0.5 * mp.sigma * mp.sigma;
    const double sbar = 0.5 * (mp.S0 * std::exp(mu * dt) + mp.S0 * std::exp(mu * 2 * dt));
    CHECK(asian_eval(mp, R, Greek::payoff, z) ==
          doctest::Approx(sbar - mp.K).epsilon(1e-12));

    mp.K = 1e6;  // far out of the money: exact zero
    CHECK(asian_eval(mp, R, Greek::payoff, z) == 0.0);
}

TEST_CASE("closed-form geometric prices match frozen values") {
    // High-precision evaluations of the documented formula at double inputs.
    MarketParams a;  // the asian50 preset
    CHECK(geometric_asian_price(a) ==
          doctest::Approx(11.55048151799278850835).epsilon(1e-12));

    MarketParams b{90.0, 80.0, 0.05, 0.3, 2.0, 4};
    CHECK(geometric_asian_price(b) ==
          doctest::Approx(18.8966176362023690481).epsilon(1e-12));

    MarketParams c{100.0, 110.0, 0.03, 0.25, 0.75, 1};
    CHECK(geometric_asian_price(c) ==
          doctest::Approx(5.79765634268767922892).epsilon(1e-12));
}

TEST_CASE("single date reduces to the lognormal call expectation") {
    MarketParams mp{95.0, 105.0, 0.07, 0.35, 1.4, 1};
    const double m = std::log(mp.S0) + (mp.r - 0.5 * mp.sigma * mp.sigma) * mp.T;
    const double v = mp.sigma * mp.sigma * mp.T;
    const double d1 = (m - std::log(mp.K) + v) / std::sqrt(v);
    const double d2 = d1 - std::sqrt(v);
    const double bs = std::exp(m + 0.5 * v) * norm_cdf(d1) - mp.K * norm_cdf(d2);
    CHECK(geometric_asian_price(mp) == doctest::Approx(bs).epsilon(1e-14));
}

TEST_CASE("vanishing volatility collapses to the drift-only path") {
    MarketParams mp{100.0, 90.0, 0.05, 1e-8, 1.0, 4};
    const double drift = mp.r * mp.T * (mp.d + 1) / (2.0 * mp.d);
    CHECK(geometric_asian_price(mp) ==
          doctest::Approx(mp.S0 * std::exp(drift) - mp.K).epsilon(1e-6));

    mp.K = 120.0;  // out of the money: the limit is zero
    CHECK(geometric_asian_price(mp) <= 1e-9);
    CHECK(geometric_asian_price(mp) >= 0.0);
}

TEST_CASE("geometric payoff under RQMC agrees with the closed form") {
    MarketParams mp;  // asian50
    FactorMatrix R = pca_factor(mp.d, mp.T);
    const double truth = geometric_asian_price(mp);
    const int reps = 8, m = 15;
    const size_t n = size_t{1} << m;
    std::vector<double> means;
    std::vector<double> vals(n);
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> z = gaussian_net(m, mp.d, derive_seed(0x6E0A51, rep));
        geometric_eval_batch(mp, R, z.data(), n, vals.data());
        means.push_back(std::accumulate(vals.begin(), vals.end(), 0.0) /
                        static_cast<double>(n));
    }
    auto [mean, se] = mean_se(means);
    CHECK(std::fabs(mean - truth) <= 4.0 * se);
}

TEST_CASE("zero strike recovers the lognormal mean of the average") {
    MarketParams mp;
    mp.K = 0.0;
    const double dt = mp.T / mp.d;
    double expect = 0.0;
    for (int j = 1; j <= mp.d; ++j) expect += std::exp(mp.r * j * dt);
    expect *= mp.S0 / mp.d;

    FactorMatrix R = pca_factor(mp.d, mp.T);
    const int reps = 8, m = 14;
    std::vector<double> means;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> z = gaussian_net(m, mp.d, derive_seed(0x57A1FE, rep));
        means.push_back(batch_mean(mp, R, Greek::payoff, z));
    }
    auto [mean, se] = mean_se(means);
    CHECK(std::fabs(mean - expect) <= 4.0 * se);
}

TEST_CASE("payoff is nonnegative and Greeks are finite at random points") {
    MarketParams mp;
    FactorMatrix R = standard_factor(mp.d, mp.T);
    AsianIntegrands fam = asian_integrands(mp, R);
    std::vector<double> z = iid_gaussians(1000, mp.d, 0xF00D);
    for (size_t i = 0; i < 1000; ++i) {
        const double* zi = z.data() + i * static_cast<size_t>(mp.d);
        CHECK(fam.payoff(zi) >= 0.0);
        for (int gi = 0; gi < kGreekCount; ++gi)
            CHECK(std::isfinite(fam.get(static_cast<Greek>(gi))(zi)));
    }
}

TEST_CASE("batch, single-point, and closure evaluations agree bit for bit") {
    MarketParams mp{100.0, 95.0, 0.04, 0.3, 1.3, 8};
    FactorMatrix R = pca_factor(8, mp.T);
    AsianIntegrands fam = asian_integrands(mp, R);
    const size_t n = 64;
    std::vector<double> z = iid_gaussians(n, 8, 0xB17);
    std::vector<double> out(n);
    for (int gi = 0; gi < kGreekCount; ++gi) {
        Greek g = static_cast<Greek>(gi);
        asian_eval_batch(mp, R, g, z.data(), n, out.data());
        for (size_t i = 0; i < n; ++i) {
            const double* zi = z.data() + i * 8;
            CHECK(out[i] == asian_eval(mp, R, g, zi));
            CHECK(out[i] == fam.get(g)(zi));
        }
    }

    BasketParams bp;
    bp.d = 3;
    FactorMatrix Rb = basket_factor(bp, BasketKind::full_pca);
    RealFn bfn = basket_integrand(bp, Rb);
    std::vector<double> zb = iid_gaussians(n, 6, 0xB18);
    std::vector<double> outb(n);
    basket_eval_batch(bp, Rb, zb.data(), n, outb.data());
    for (size_t i = 0; i < n; ++i) {
        CHECK(outb[i] == basket_eval(bp, Rb, zb.data() + i * 6));
        CHECK(outb[i] == bfn(zb.data() + i * 6));
    }

    RealFn gfn = geometric_payoff(mp, R);
    geometric_eval_batch(mp, R, z.data(), n, out.data());
    for (size_t i = 0; i < n; ++i) {
        CHECK(out[i] == geometric_eval(mp, R, z.data() + i * 8));
        CHECK(out[i] == gfn(z.data() + i * 8));
    }
}

TEST_CASE("Greek integrands match finite differences of the discounted price") {
    MarketParams mp{100.0, 100.0, 0.1, 0.4, 1.0, 8};
    const struct {
        const char* name;
        FactorMaker make;
    } factors[] = {{"standard", standard_factor}, {"pca", pca_factor}};
    // |h^2/6 f'''| headroom on top of the 4 sigma band; gamma differences an
    // indicator integrand, so its band is wider.
    const double allowance[] = {0.0, 2e-4, 1e-3, 5e-5, 1e-4, 1e-4};

    for (const auto& fac : factors) {
        CAPTURE(fac.name);
        FactorMatrix R = fac.make(mp.d, mp.T);
        for (int gi = 1; gi < kGreekCount; ++gi) {
            Greek g = static_cast<Greek>(gi);
            CAPTURE(greek_name(g));
            const int reps = g == Greek::gamma ? 24 : 12;
            const int m = g == Greek::gamma ? 12 : 11;
            std::vector<double> diffs;
            for (int rep = 0; rep < reps; ++rep) {
                std::vector<double> z =
                    gaussian_net(m, mp.d, derive_seed(0xFD0C, gi, rep));
                const double est = batch_mean(mp, R, g, z);
                const double fd = fd_estimate(g, mp, fac.make, R, z);
                diffs.push_back(est - fd);
            }
            auto [mean, se] = mean_se(diffs);
            CHECK(std::fabs(mean) <= 4.0 * se + allowance[gi]);
        }
    }
}

TEST_CASE("factor construction changes the sampler, not the estimand") {
    MarketParams mp{100.0, 100.0, 0.1, 0.4, 1.0, 8};
    FactorMatrix Rs = standard_factor(mp.d, mp.T);
    FactorMatrix Rp = pca_factor(mp.d, mp.T);
    const int reps = 16;
    const size_t n = size_t{1} << 12;
    for (int gi = 0; gi < kGreekCount; ++gi) {
        Greek g = static_cast<Greek>(gi);
        CAPTURE(greek_name(g));
        std::vector<double> ms, mpc;
        for (int rep = 0; rep < reps; ++rep) {
            std::vector<double> zs = iid_gaussians(n, mp.d, derive_seed(0x1A3, gi, rep));
            std::vector<double> zp =
                iid_gaussians(n, mp.d, derive_seed(0x1A4, gi, rep));
            ms.push_back(batch_mean(mp, Rs, g, zs));
            mpc.push_back(batch_mean(mp, Rp, g, zp));
        }
        auto [m1, se1] = mean_se(ms);
        auto [m2, se2] = mean_se(mpc);
        CHECK(std::fabs(m1 - m2) <= 4.0 * std::sqrt(se1 * se1 + se2 * se2));
    }
}

TEST_CASE("basket with a unit weight reduces to the single-asset payoff") {
    BasketParams bp;
    bp.w1 = 1.0;
    bp.w2 = 0.0;
    bp.d = 6;
    FactorMatrix Rb = basket_factor(bp, BasketKind::ordinary_standard);

    MarketParams leg;
    leg.S0 = bp.S0;
    leg.K = bp.K;
    leg.r = bp.r1;
    leg.sigma = bp.sigma1;
    leg.T = bp.T;
    leg.d = bp.d;
    FactorMatrix R = standard_factor(bp.d, bp.T);

    std::vector<double> z = iid_gaussians(50, 2 * bp.d, 0xC0FE);
    for (size_t i = 0; i < 50; ++i) {
        const double* zi = z.data() + i * static_cast<size_t>(2 * bp.d);
        const double basket = basket_eval(bp, Rb, zi);
        const double single = asian_eval(leg, R, Greek::payoff, zi);
        CHECK(basket == doctest::Approx(single).epsilon(1e-12));
    }
}

TEST_CASE("near-unit correlation with identical legs merges the basket") {
    BasketParams bp;
    bp.rho = 1.0 - 1e-12;
    bp.r1 = bp.r2 = 0.1;
    bp.sigma1 = bp.sigma2 = 0.3;
    bp.w1 = 0.55;
    bp.w2 = 0.45;
    bp.d = 5;
    FactorMatrix Rb = basket_factor(bp, BasketKind::ordinary_standard);

    MarketParams one;
    one.S0 = bp.S0;
    one.K = bp.K;
    one.r = bp.r1;
    one.sigma = bp.sigma1;
    one.T = bp.T;
    one.d = bp.d;
    FactorMatrix R = standard_factor(bp.d, bp.T);

    std::vector<double> z = iid_gaussians(20, 2 * bp.d, 0xC0FF);
    for (size_t i = 0; i < 20; ++i) {
        const double* zi = z.data() + i * static_cast<size_t>(2 * bp.d);
        // both legs ride the same Brownian path, so the payoff is the
        // single-asset one with total weight w1 + w2 = 1
        const double basket = basket_eval(bp, Rb, zi);
        const double single = asian_eval(one, R, Greek::payoff, zi);
        CHECK(basket == doctest::Approx(single).epsilon(1e-4));
    }
}

TEST_CASE("presets carry the documented configurations") {
    MarketParams a = market_preset("asian50");
    CHECK(a.S0 == 100.0);
    CHECK(a.K == 100.0);
    CHECK(a.r == 0.1);
    CHECK(a.sigma == 0.4);
    CHECK(a.T == 1.0);
    CHECK(a.d == 50);

    BasketParams ba = basket_preset("basketA");
    BasketParams bb = basket_preset("basketB");
    CHECK(ba.w1 == 0.8);
    CHECK(ba.w2 == 0.2);
    CHECK(bb.w1 == 0.2);
    CHECK(bb.w2 == 0.8);
    CHECK(ba.r1 == 0.1);
    CHECK(ba.r2 == 0.2);
    CHECK(ba.sigma1 == 0.2);
    CHECK(ba.sigma2 == 0.4);
    CHECK(ba.K == 95.0);
    CHECK(ba.rho == 0.5);

    CHECK_THROWS_AS(market_preset("nope"), std::invalid_argument);
    CHECK_THROWS_AS(basket_preset("asian50"), std::invalid_argument);

    CHECK(std::string(greek_name(Greek::vega)) == "vega");
    CHECK(greek_from_name("gamma") == Greek::gamma);
    CHECK_THROWS_AS(greek_from_name("speed"), std::invalid_argument);
}

TEST_CASE("bundled preset files load to the code presets") {
    MarketParams a = load_market_params(bundled_preset_file("asian50"));
    MarketParams ref = market_preset("asian50");
    CHECK(a.S0 == ref.S0);
    CHECK(a.K == ref.K);
    CHECK(a.r == ref.r);
    CHECK(a.sigma == ref.sigma);
    CHECK(a.T == ref.T);
    CHECK(a.d == ref.d);

    for (const char* name : {"basketA", "basketB"}) {
        BasketParams got = load_basket_params(bundled_preset_file(name));
        BasketParams want = basket_preset(name);
        CHECK(got.S0 == want.S0);
        CHECK(got.K == want.K);
        CHECK(got.T == want.T);
        CHECK(got.rho == want.rho);
        CHECK(got.r1 == want.r1);
        CHECK(got.r2 == want.r2);
        CHECK(got.sigma1 == want.sigma1);
        CHECK(got.sigma2 == want.sigma2);
        CHECK(got.w1 == want.w1);
        CHECK(got.w2 == want.w2);
        CHECK(got.d == want.d);
    }
}

TEST_CASE("parameter files round-trip exactly") {
    const char* mpath = "pqmc_test_params_market.txt";
    const char* bpath = "pqmc_test_params_basket.txt";
    MarketParams mp{87.5, 101.25, 0.035, 0.27, 1.75, 13};
    save_market_params(mpath, mp);
    MarketParams got = load_market_params(mpath);
    CHECK(got.S0 == mp.S0);
    CHECK(got.K == mp.K);
    CHECK(got.r == mp.r);
    CHECK(got.sigma == mp.sigma);
    CHECK(got.T == mp.T);
    CHECK(got.d == mp.d);

    BasketParams bp;
    bp.rho = -0.35;
    bp.w1 = 0.6;
    bp.w2 = 0.4;
    bp.d = 7;
    save_basket_params(bpath, bp);
    BasketParams gb = load_basket_params(bpath);
    CHECK(gb.rho == bp.rho);
    CHECK(gb.w1 == bp.w1);
    CHECK(gb.w2 == bp.w2);
    CHECK(gb.d == bp.d);
    CHECK(gb.sigma2 == bp.sigma2);

    std::remove(mpath);
    std::remove(bpath);
}

TEST_CASE("parameter files reject malformed input") {
    const char* path = "pqmc_test_params_bad.txt";
    auto write = [&](const char* body) {
        std::FILE* f = std::fopen(path, "w");
        REQUIRE(f != nullptr);
        std::fputs(body, f);
        std::fclose(f);
    };

    write("S0 = 100 = 5\n");
    CHECK_THROWS(load_market_params(path));
    write("q = 1\n");
    CHECK_THROWS(load_market_params(path));
    write("d = 2.5\n");
    CHECK_THROWS(load_market_params(path));
    write("sigma = grey\n");
    CHECK_THROWS(load_market_params(path));
    write("sigma = -1\n");
    CHECK_THROWS(load_market_params(path));
    write("S0 = 100\nS0 = 101\n");
    CHECK_THROWS(load_market_params(path));
    write("rho = 1.5\n");
    CHECK_THROWS(load_basket_params(path));
    write("# comment only\n\nK = 90 # trailing comment\n");
    CHECK(load_market_params(path).K == 90.0);
    CHECK_THROWS(load_market_params("no_such_file_anywhere.txt"));
    std::remove(path);
}

TEST_CASE("overflowing paths saturate to +inf instead of NaN") {
    MarketParams mp;
    mp.r = 1500.0;  // drives the exponent past the exp overflow threshold
    mp.d = 2;
    FactorMatrix R = standard_factor(2, mp.T);
    const double z[2] = {0.0, 0.0};
    const double pay = asian_eval(mp, R, Greek::payoff, z);
    CHECK(std::isinf(pay));
    CHECK(pay > 0.0);
}

TEST_CASE("invalid market and factor inputs throw") {
    MarketParams mp;
    FactorMatrix R = standard_factor(mp.d, mp.T);
    const std::vector<double> z(mp.d, 0.0);

    MarketParams bad = mp;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(asian_eval(bad, R, Greek::payoff, z.data()), std::invalid_argument);
    bad = mp;
    bad.S0 = -1.0;
    CHECK_THROWS_AS(geometric_asian_price(bad), std::invalid_argument);
    bad = mp;
    bad.d = 49;  // factor order mismatch
    CHECK_THROWS_AS(asian_eval(bad, R, Greek::payoff, z.data()), std::invalid_argument);

    BasketParams bp;
    bp.rho = 1.0;
    CHECK_THROWS_AS(basket_factor(bp, BasketKind::full_pca), std::invalid_argument);
}
