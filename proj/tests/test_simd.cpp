#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "pqmc/detail/kernel_scalar.hpp"
#include "pqmc/rng.hpp"
#include "pqmc/simd.hpp"

using namespace pqmc;
using simd::KernelOps;

namespace {

// mpmath reference values, 22 significant digits
struct Pt {
    double x, v;
};
constexpr Pt kUpperTail[] = {
    {8.0, 6.220960574271784123516e-16},  {5.5, 1.898956246588771938385e-8},
    {3.0, 0.001349898031630094526652},   {-3.0, 0.9986501019683699054733},
    {1.0, 0.1586552539314570514148},     {0.5, 0.3085375387259868963623},
    {-0.3, 0.6179114221889526373065},    {0.3, 0.3820885778110473626935},
    {-2.0, 0.9772498680518207927997},    {2.0, 0.02275013194817920720028},
    {5.0, 2.866515718791939116738e-7},   {10.0, 7.619853024160526065973e-24},
};
constexpr Pt kInvCdf[] = {
    // references are for the exact double closest to the printed u
    {1e-300, -37.04709629936119923655}, {1e-100, -21.27345356096532429418},
    {1e-16, -8.222082216130435615182},  {1e-10, -6.3613409024040561991},
    {1e-4, -3.719016485455680552288},   {0.025, -1.95996398454005421178},
    {0.25, -0.6744897501960817432022},  {0.7, 0.5244005127080406563136},
    {0.975, 1.959963984540053855604},   {0.9999, 3.719016485455708386723},
    {0.9999999999999999, 8.209536151601386855631},
};

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::fabs(want);
}

}  // namespace

TEST_CASE("exp kernel tracks std::exp inside the supported range") {
    Rng r(11);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = (r.next_unit() - 0.5) * 1400.0;
        worst = std::max(worst, rel_err(kern::exp1(x), std::exp(x)));
    }
    for (double x : {-0.5, 0.0, 1.0, 1e-17, -1e-300, 700.0, -690.0})
        worst = std::max(worst, rel_err(kern::exp1(x), std::exp(x)));
    CHECK(worst < 1e-15);
    CHECK(kern::exp1(0.0) == 1.0);
    CHECK(kern::exp1(-709.0) == 0.0);
    CHECK(kern::exp1(-1000.0) == 0.0);
    CHECK(kern::exp1(709.0) == std::numeric_limits<double>::infinity());
    CHECK(kern::exp1(1000.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("erfc kernel matches std::erfc and decays to zero") {
    Rng r(12);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = (r.next_unit() - 0.5) * 52.0;
        worst = std::max(worst, rel_err(kern::erfc1(x), std::erfc(x)));
    }
    for (double x : {0.0, 0.46875, -0.46875, 4.0, -4.0, 26.5, -26.5})
        worst = std::max(worst, rel_err(kern::erfc1(x), std::erfc(x)));
    CHECK(worst < 1e-13);
    CHECK(kern::erfc1(27.0) == 0.0);  // below 1e-318, saturates
    CHECK(kern::erfc1(-27.0) == 2.0);
}

TEST_CASE("upper normal tail matches high-precision references") {
    for (const Pt& p : kUpperTail) {
        INFO("x = " << p.x);
        CHECK(rel_err(kern::norm_cdf_upper1(p.x), p.v) < 5e-15);
    }
    // deep tail keeps relative accuracy
    CHECK(rel_err(kern::norm_cdf_upper1(37.0), 5.725571222524576822683e-300) <
          1e-13);
    CHECK(kern::norm_cdf1(-8.0) == kern::norm_cdf_upper1(8.0));
}

TEST_CASE("inverse normal cdf matches high-precision references") {
    for (const Pt& p : kInvCdf) {
        INFO("u = " << p.x);
        CHECK(std::fabs(kern::inv_norm_cdf1(p.x) - p.v) <
              4e-15 * std::max(1.0, std::fabs(p.v)));
    }
    CHECK(kern::inv_norm_cdf1(0.5) == 0.0);
}

TEST_CASE("inverse cdf round-trips through the cdf") {
    Rng r(13);
    for (int i = 0; i < 5000; ++i) {
        const double u = r.next_unit();
        const double z = kern::inv_norm_cdf1(u);
        if (u <= 0.5) {
            CHECK(rel_err(kern::norm_cdf_upper1(-z), u) < 1e-13);
        } else {
            CHECK(rel_err(kern::norm_cdf_upper1(z), 1.0 - u) < 1e-13);
        }
    }
    // extreme dyadic cells of a 2^53 grid stay finite and monotone
    const double lo = kern::inv_norm_cdf1(0.5 * 0x1p-53);
    const double hi = kern::inv_norm_cdf1(1.0 - 0x1p-53);
    CHECK(std::isfinite(lo));
    CHECK(std::isfinite(hi));
    CHECK(lo < -8.0);
    CHECK(hi > 8.0);
}

TEST_CASE("affine_fold equals the reference triple loop bit for bit") {
    Rng r(14);
    for (size_t nterms : {1u, 3u, 4u, 7u, 64u}) {
        for (size_t dim : {1u, 2u, 5u, 33u}) {
            std::vector<double> Ft(nterms * dim), drift(nterms), z(dim),
                out(nterms), ref(nterms);
            for (double& v : Ft) v = 2.0 * r.next_unit() - 1.0;
            for (double& v : drift) v = 2.0 * r.next_unit() - 1.0;
            for (double& v : z) v = 4.0 * r.next_unit() - 2.0;
            for (size_t t = 0; t < nterms; ++t) {
                double acc = drift[t];
                for (size_t k = 0; k < dim; ++k) acc += Ft[k * nterms + t] * z[k];
                ref[t] = acc;
            }
            simd::scalar_kernels().affine_fold(Ft.data(), drift.data(), z.data(),
                                               out.data(), nterms, dim);
            CHECK(std::memcmp(out.data(), ref.data(),
                              nterms * sizeof(double)) == 0);
        }
    }
}

TEST_CASE("sobol_fill in one dimension is the van der Corput sequence") {
    const size_t nbits = 53;
    std::vector<uint64_t> dirs(nbits, 0);
    for (size_t t = 0; t < nbits; ++t) dirs[t] = 1ull << (52 - t);
    std::vector<uint64_t> bits(8);
    simd::scalar_kernels().sobol_fill(dirs.data(), nbits, 1, 0, 8, bits.data());
    std::vector<double> u(8);
    simd::scalar_kernels().unit_from_bits(bits.data(), u.data(), 8, 0);
    const double want[8] = {0, 0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875};
    for (int i = 0; i < 8; ++i) CHECK(u[i] == want[i]);
    // i0 offset picks up mid-sequence
    std::vector<uint64_t> bits2(3);
    simd::scalar_kernels().sobol_fill(dirs.data(), nbits, 1, 5, 3, bits2.data());
    CHECK(bits2[0] == bits[5]);
    CHECK(bits2[2] == bits[7]);
}

TEST_CASE("unit_from_bits handles both modes and never reaches 1") {
    const uint64_t xs[] = {0, 1, 1ull << 52, (1ull << 53) - 2, (1ull << 53) - 1};
    double plain[5], centered[5];
    simd::scalar_kernels().unit_from_bits(xs, plain, 5, 0);
    simd::scalar_kernels().unit_from_bits(xs, centered, 5, 1);
    CHECK(plain[0] == 0.0);
    CHECK(plain[2] == 0.5);
    CHECK(centered[0] == 0.5 * 0x1p-53);
    CHECK(centered[4] < 1.0);
    CHECK(centered[4] == 0x1.fffffffffffffp-1);
    for (int i = 0; i < 5; ++i) {
        CHECK(centered[i] > 0.0);
        CHECK(centered[i] < 1.0);
    }
}

TEST_CASE("dispatch selects a named provider") {
    const KernelOps& k = simd::kernels();
    const std::string name = k.name;
    CHECK((name == "scalar" || name == "avx2"));
    MESSAGE("active kernels: ", name);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
    const KernelOps* av = simd::avx2_kernels();
    if (av == nullptr) {
        MESSAGE("avx2 not available on this machine; equivalence not exercised");
        return;
    }
    const KernelOps& sc = simd::scalar_kernels();
    Rng r(15);

    SUBCASE("elementwise transcendentals") {
        std::vector<double> xe, xc, uu;
        for (int i = 0; i < 4099; ++i) {
            xe.push_back((r.next_unit() - 0.5) * 1500.0);
            xc.push_back((r.next_unit() - 0.5) * 60.0);
            uu.push_back(r.next_unit());
        }
        for (double s : {-708.0, -708.0000001, 708.9999, 709.0, 0.0, -0.0,
                         1e-300, 26.543, -26.543, 0.46875, -0.46875, 4.0})
            xe.push_back(s), xc.push_back(s);
        for (double s : {1e-300, 1e-16, 0.074, 0.075, 0.076, 0.425, 0.5, 0.924,
                         0.925, 0.926, 1.0 - 1e-16})
            uu.push_back(s);
        std::vector<double> a(xe.size()), b(xe.size());
        sc.exp_vec(xe.data(), a.data(), xe.size());
        av->exp_vec(xe.data(), b.data(), xe.size());
        CHECK(std::memcmp(a.data(), b.data(), xe.size() * 8) == 0);
        a.resize(xc.size());
        b.resize(xc.size());
        sc.erfc_vec(xc.data(), a.data(), xc.size());
        av->erfc_vec(xc.data(), b.data(), xc.size());
        CHECK(std::memcmp(a.data(), b.data(), xc.size() * 8) == 0);
        sc.norm_cdf_upper_vec(xc.data(), a.data(), xc.size());
        av->norm_cdf_upper_vec(xc.data(), b.data(), xc.size());
        CHECK(std::memcmp(a.data(), b.data(), xc.size() * 8) == 0);
        a.resize(uu.size());
        b.resize(uu.size());
        sc.inv_norm_cdf_vec(uu.data(), a.data(), uu.size());
        av->inv_norm_cdf_vec(uu.data(), b.data(), uu.size());
        CHECK(std::memcmp(a.data(), b.data(), uu.size() * 8) == 0);
    }

    SUBCASE("affine_fold") {
        for (size_t nterms : {1u, 5u, 8u, 50u}) {
            for (size_t dim : {1u, 7u, 100u}) {
                std::vector<double> Ft(nterms * dim), drift(nterms), z(dim),
                    a(nterms), b(nterms);
                for (double& v : Ft) v = 2.0 * r.next_unit() - 1.0;
                for (double& v : drift) v = 2.0 * r.next_unit() - 1.0;
                for (double& v : z) v = 6.0 * r.next_unit() - 3.0;
                sc.affine_fold(Ft.data(), drift.data(), z.data(), a.data(),
                               nterms, dim);
                av->affine_fold(Ft.data(), drift.data(), z.data(), b.data(),
                                nterms, dim);
                CHECK(std::memcmp(a.data(), b.data(), nterms * 8) == 0);
            }
        }
    }

    SUBCASE("sobol_fill, lms_apply, unit_from_bits") {
        const size_t nbits = 53, dim = 7, count = 37;
        std::vector<uint64_t> dirs(nbits * dim);
        for (uint64_t& v : dirs) v = r.next_u64() & ((1ull << 53) - 1);
        std::vector<uint64_t> a(count * dim), b(count * dim);
        sc.sobol_fill(dirs.data(), nbits, dim, 3, count, a.data());
        av->sobol_fill(dirs.data(), nbits, dim, 3, count, b.data());
        CHECK(std::memcmp(a.data(), b.data(), a.size() * 8) == 0);

        std::vector<uint64_t> cols(dim * nbits), shift(dim);
        for (uint64_t& v : cols) v = r.next_u64() & ((1ull << 53) - 1);
        for (uint64_t& v : shift) v = r.next_u64() & ((1ull << 53) - 1);
        std::vector<uint64_t> xa(count * dim);
        for (uint64_t& v : xa) v = r.next_u64() & ((1ull << 53) - 1);
        sc.lms_apply(xa.data(), count, dim, cols.data(), nbits, shift.data(),
                     a.data());
        av->lms_apply(xa.data(), count, dim, cols.data(), nbits, shift.data(),
                      b.data());
        CHECK(std::memcmp(a.data(), b.data(), a.size() * 8) == 0);

        std::vector<uint64_t> xs;
        for (int i = 0; i < 1023; ++i) xs.push_back(r.next_u64() & ((1ull << 53) - 1));
        for (uint64_t s : {0ull, 1ull, (1ull << 52), (1ull << 53) - 1})
            xs.push_back(s);
        std::vector<double> ua(xs.size()), ub(xs.size());
        for (int center : {0, 1}) {
            sc.unit_from_bits(xs.data(), ua.data(), xs.size(), center);
            av->unit_from_bits(xs.data(), ub.data(), xs.size(), center);
            CHECK(std::memcmp(ua.data(), ub.data(), xs.size() * 8) == 0);
        }
    }
}
