#include <immintrin.h>

#include <cstdint>
#include <cstring>

#include "pqmc/detail/kernel_scalar.hpp"
#include "pqmc/simd.hpp"

// AVX2 providers. Every arithmetic lane replays the scalar DAG from
// kernel_scalar.hpp operation for operation (no FMA, contraction off), so
// outputs are bit-identical to the scalar kernels. Lanes that would need a
// vector log (inverse-CDF tails) fall back to the scalar routine per lane.

namespace pqmc::simd {
namespace {

inline __m256d abs_pd(__m256d x) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}
inline __m256d neg_pd(__m256d x) {
    return _mm256_xor_pd(_mm256_set1_pd(-0.0), x);
}

// ---- exp -----------------------------------------------------------------
inline __m256d exp4(__m256d x) {
    using namespace kern::expc;
    const __m256d shift = _mm256_set1_pd(SHIFT);
    const __m256d t =
        _mm256_add_pd(_mm256_mul_pd(x, _mm256_set1_pd(LOG2E)), shift);
    const __m256i ki = _mm256_sub_epi64(
        _mm256_and_si256(_mm256_castpd_si256(t),
                         _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
        _mm256_set1_epi64x(0x0008000000000000ll));
    const __m256d kd = _mm256_sub_pd(t, shift);
    const __m256d r = _mm256_sub_pd(
        _mm256_sub_pd(x, _mm256_mul_pd(kd, _mm256_set1_pd(LN2_HI))),
        _mm256_mul_pd(kd, _mm256_set1_pd(LN2_LO)));
    __m256d p = _mm256_set1_pd(C[0]);
    for (int i = 1; i < 12; ++i)
        p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(C[i]));
    const __m256d one = _mm256_set1_pd(1.0);
    p = _mm256_add_pd(_mm256_mul_pd(p, r), one);
    p = _mm256_add_pd(_mm256_mul_pd(p, r), one);
    const __m256d scale = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52));
    __m256d res = _mm256_mul_pd(p, scale);
    res = _mm256_blendv_pd(
        res, _mm256_setzero_pd(),
        _mm256_cmp_pd(x, _mm256_set1_pd(kern::kExpZeroBelow), _CMP_LE_OQ));
    res = _mm256_blendv_pd(
        res, _mm256_set1_pd(__builtin_inf()),
        _mm256_cmp_pd(x, _mm256_set1_pd(kern::kExpInfAbove), _CMP_GE_OQ));
    return res;
}

// ---- erfc ----------------------------------------------------------------
inline __m256d erfc4(__m256d x) {
    using namespace kern::erfcc;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d y = abs_pd(x);

    // |x| <= 0.46875: erf rational in y^2, then 1 - erf
    __m256d ysqA = _mm256_blendv_pd(
        _mm256_setzero_pd(), _mm256_mul_pd(y, y),
        _mm256_cmp_pd(y, _mm256_set1_pd(XSMALL), _CMP_GT_OQ));
    __m256d xnum = _mm256_mul_pd(_mm256_set1_pd(A[4]), ysqA);
    __m256d xden = ysqA;
    for (int i = 0; i < 3; ++i) {
        xnum = _mm256_mul_pd(_mm256_add_pd(xnum, _mm256_set1_pd(A[i])), ysqA);
        xden = _mm256_mul_pd(_mm256_add_pd(xden, _mm256_set1_pd(B[i])), ysqA);
    }
    const __m256d erfv = _mm256_div_pd(
        _mm256_mul_pd(x, _mm256_add_pd(xnum, _mm256_set1_pd(A[3]))),
        _mm256_add_pd(xden, _mm256_set1_pd(B[3])));
    const __m256d resA = _mm256_sub_pd(one, erfv);

    // 0.46875 < |x| <= 4: rational in y
    xnum = _mm256_mul_pd(_mm256_set1_pd(C[8]), y);
    xden = y;
    for (int i = 0; i < 7; ++i) {
        xnum = _mm256_mul_pd(_mm256_add_pd(xnum, _mm256_set1_pd(C[i])), y);
        xden = _mm256_mul_pd(_mm256_add_pd(xden, _mm256_set1_pd(D[i])), y);
    }
    const __m256d rB = _mm256_div_pd(
        _mm256_add_pd(xnum, _mm256_set1_pd(C[7])),
        _mm256_add_pd(xden, _mm256_set1_pd(D[7])));

    // |x| > 4: asymptotic rational in 1/y^2
    const __m256d ysqC = _mm256_div_pd(one, _mm256_mul_pd(y, y));
    xnum = _mm256_mul_pd(_mm256_set1_pd(P[5]), ysqC);
    xden = ysqC;
    for (int i = 0; i < 4; ++i) {
        xnum = _mm256_mul_pd(_mm256_add_pd(xnum, _mm256_set1_pd(P[i])), ysqC);
        xden = _mm256_mul_pd(_mm256_add_pd(xden, _mm256_set1_pd(Q[i])), ysqC);
    }
    __m256d rC = _mm256_div_pd(
        _mm256_mul_pd(ysqC, _mm256_add_pd(xnum, _mm256_set1_pd(P[4]))),
        _mm256_add_pd(xden, _mm256_set1_pd(Q[4])));
    rC = _mm256_div_pd(_mm256_sub_pd(_mm256_set1_pd(SQRPI), rC), y);

    // shared exp(-y*y) factor, split at 1/16 granularity
    const __m256d sixteen = _mm256_set1_pd(16.0);
    const __m256d ysq16 = _mm256_div_pd(
        _mm256_round_pd(_mm256_mul_pd(y, sixteen),
                        _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC),
        sixteen);
    const __m256d del = _mm256_mul_pd(_mm256_sub_pd(y, ysq16),
                                      _mm256_add_pd(y, ysq16));
    const __m256d f =
        _mm256_mul_pd(exp4(_mm256_mul_pd(neg_pd(ysq16), ysq16)),
                      exp4(neg_pd(del)));

    const __m256d resB = _mm256_mul_pd(f, rB);
    const __m256d resC = _mm256_mul_pd(f, rC);

    __m256d res = _mm256_blendv_pd(
        _mm256_setzero_pd(), resC,
        _mm256_cmp_pd(y, _mm256_set1_pd(XBIG), _CMP_LT_OQ));
    res = _mm256_blendv_pd(res, resB,
                           _mm256_cmp_pd(y, _mm256_set1_pd(4.0), _CMP_LE_OQ));
    const __m256d threshM =
        _mm256_cmp_pd(y, _mm256_set1_pd(THRESH), _CMP_LE_OQ);
    res = _mm256_blendv_pd(res, resA, threshM);

    const __m256d flip = _mm256_andnot_pd(
        threshM, _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ));
    res = _mm256_blendv_pd(res, _mm256_sub_pd(_mm256_set1_pd(2.0), res), flip);
    return res;
}

inline __m256d norm_cdf_upper4(__m256d x) {
    return _mm256_mul_pd(
        _mm256_set1_pd(0.5),
        erfc4(_mm256_mul_pd(x, _mm256_set1_pd(kern::kInvSqrt2))));
}

// ---- batch wrappers --------------------------------------------------------
void exp_vec_a(const double* x, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = kern::exp1(x[i]);
}

void erfc_vec_a(const double* x, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, erfc4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = kern::erfc1(x[i]);
}

void norm_cdf_upper_vec_a(const double* x, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, norm_cdf_upper4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = kern::norm_cdf_upper1(x[i]);
}

void inv_norm_cdf_vec_a(const double* u, double* out, size_t n) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d one = _mm256_set1_pd(1.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d uu = _mm256_loadu_pd(u + i);
        const __m256d q = _mm256_sub_pd(uu, half);
        const __m256d central =
            _mm256_cmp_pd(abs_pd(q), _mm256_set1_pd(0.425), _CMP_LE_OQ);

        __m256d r = _mm256_sub_pd(_mm256_set1_pd(0.180625),
                                  _mm256_mul_pd(q, q));
        __m256d nu = _mm256_set1_pd(kern::as241::AC[7]);
        for (int k = 6; k >= 0; --k)
            nu = _mm256_add_pd(_mm256_mul_pd(nu, r),
                               _mm256_set1_pd(kern::as241::AC[k]));
        __m256d de = _mm256_set1_pd(kern::as241::BC[6]);
        for (int k = 5; k >= 0; --k)
            de = _mm256_add_pd(_mm256_mul_pd(de, r),
                               _mm256_set1_pd(kern::as241::BC[k]));
        de = _mm256_add_pd(_mm256_mul_pd(de, r), one);
        __m256d z = _mm256_div_pd(_mm256_mul_pd(q, nu), de);

        const int cm = _mm256_movemask_pd(central);
        if (cm != 0xF) {
            alignas(32) double zl[4];
            _mm256_store_pd(zl, z);
            for (int k = 0; k < 4; ++k)
                if (!(cm & (1 << k))) zl[k] = kern::inv_norm_cdf_raw(u[i + k]);
            z = _mm256_load_pd(zl);
        }

        // Halley step, residual on the nearer tail
        const __m256d eL =
            _mm256_sub_pd(norm_cdf_upper4(neg_pd(z)), uu);
        const __m256d eR =
            _mm256_sub_pd(_mm256_sub_pd(one, uu), norm_cdf_upper4(z));
        const __m256d e =
            _mm256_blendv_pd(eR, eL, _mm256_cmp_pd(uu, half, _CMP_LE_OQ));
        const __m256d pd = _mm256_mul_pd(
            _mm256_set1_pd(kern::kInvSqrt2Pi),
            exp4(_mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(-0.5), z), z)));
        __m256d t = _mm256_blendv_pd(
            _mm256_setzero_pd(), _mm256_div_pd(e, pd),
            _mm256_cmp_pd(pd, _mm256_setzero_pd(), _CMP_GT_OQ));
        z = _mm256_sub_pd(
            z, _mm256_div_pd(
                   t, _mm256_add_pd(
                          one, _mm256_mul_pd(_mm256_mul_pd(half, z), t))));
        _mm256_storeu_pd(out + i, z);
    }
    for (; i < n; ++i) out[i] = kern::inv_norm_cdf1(u[i]);
}

void affine_fold_a(const double* Ft, const double* drift, const double* z,
                   double* out, size_t nterms, size_t dim) {
    size_t t = 0;
    for (; t + 4 <= nterms; t += 4) {
        __m256d acc = _mm256_loadu_pd(drift + t);
        for (size_t k = 0; k < dim; ++k) {
            const __m256d zk = _mm256_set1_pd(z[k]);
            acc = _mm256_add_pd(
                acc, _mm256_mul_pd(_mm256_loadu_pd(Ft + k * nterms + t), zk));
        }
        _mm256_storeu_pd(out + t, acc);
    }
    for (; t < nterms; ++t) {
        double acc = drift[t];
        for (size_t k = 0; k < dim; ++k) acc += Ft[k * nterms + t] * z[k];
        out[t] = acc;
    }
}

void sobol_fill_a(const uint64_t* dirs, size_t nbits, size_t dim, uint64_t i0,
                  size_t count, uint64_t* out) {
    for (size_t i = 0; i < count; ++i) {
        const uint64_t idx = i0 + static_cast<uint64_t>(i);
        uint64_t* row = out + i * dim;
        size_t j = 0;
        for (; j + 4 <= dim; j += 4) {
            __m256i acc = _mm256_setzero_si256();
            uint64_t bits = idx;
            size_t t = 0;
            while (bits != 0 && t < nbits) {
                if (bits & 1u)
                    acc = _mm256_xor_si256(
                        acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(
                                 dirs + t * dim + j)));
                bits >>= 1;
                ++t;
            }
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + j), acc);
        }
        for (; j < dim; ++j) {
            uint64_t acc = 0;
            uint64_t bits = idx;
            size_t t = 0;
            while (bits != 0 && t < nbits) {
                if (bits & 1u) acc ^= dirs[t * dim + j];
                bits >>= 1;
                ++t;
            }
            row[j] = acc;
        }
    }
}

void lms_apply_a(const uint64_t* x, size_t count, size_t dim,
                 const uint64_t* cols, size_t inbits, const uint64_t* shift,
                 uint64_t* out) {
    const __m256i onev = _mm256_set1_epi64x(1);
    for (size_t j = 0; j < dim; ++j) {
        const uint64_t* cj = cols + j * inbits;
        const __m256i sh = _mm256_set1_epi64x(static_cast<long long>(shift[j]));
        const __m256i stride = _mm256_set_epi64x(
            static_cast<long long>(3 * dim), static_cast<long long>(2 * dim),
            static_cast<long long>(dim), 0);
        size_t i = 0;
        for (; i + 4 <= count; i += 4) {
            const long long* base =
                reinterpret_cast<const long long*>(x + i * dim + j);
            __m256i v = _mm256_i64gather_epi64(base, stride, 8);
            __m256i y = _mm256_setzero_si256();
            for (size_t t = 0; t < inbits; ++t) {
                const __m256i bit = _mm256_and_si256(
                    _mm256_srli_epi64(v, static_cast<int>(52 - t)), onev);
                const __m256i mask = _mm256_cmpeq_epi64(bit, onev);
                y = _mm256_xor_si256(
                    y, _mm256_and_si256(
                           mask, _mm256_set1_epi64x(
                                     static_cast<long long>(cj[t]))));
            }
            y = _mm256_xor_si256(y, sh);
            alignas(32) uint64_t yl[4];
            _mm256_store_si256(reinterpret_cast<__m256i*>(yl), y);
            out[(i + 0) * dim + j] = yl[0];
            out[(i + 1) * dim + j] = yl[1];
            out[(i + 2) * dim + j] = yl[2];
            out[(i + 3) * dim + j] = yl[3];
        }
        for (; i < count; ++i) {
            const uint64_t v = x[i * dim + j];
            uint64_t y = 0;
            for (size_t t = 0; t < inbits; ++t)
                if ((v >> (52 - t)) & 1u) y ^= cj[t];
            out[i * dim + j] = y ^ shift[j];
        }
    }
}

void unit_from_bits_a(const uint64_t* x, double* out, size_t n, int center) {
    // u64 -> double for values < 2^53: split into low 32 and high 21 bits,
    // each converted exactly via the 2^52 magic bias, recombined exactly.
    const __m256i lomask = _mm256_set1_epi64x(0xFFFFFFFFll);
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
    const __m256d magicd = _mm256_set1_pd(0x1p52);
    const __m256d two32 = _mm256_set1_pd(4294967296.0);
    const __m256d scale = _mm256_set1_pd(0x1p-53);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d top = _mm256_set1_pd(0x1.fffffffffffffp-1);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i v =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
        const __m256d dlo = _mm256_sub_pd(
            _mm256_castsi256_pd(
                _mm256_or_si256(_mm256_and_si256(v, lomask), magic)),
            magicd);
        const __m256d dhi = _mm256_sub_pd(
            _mm256_castsi256_pd(
                _mm256_or_si256(_mm256_srli_epi64(v, 32), magic)),
            magicd);
        const __m256d d =
            _mm256_add_pd(_mm256_mul_pd(dhi, two32), dlo);
        __m256d u;
        if (center == 0) {
            u = _mm256_mul_pd(d, scale);
        } else {
            u = _mm256_mul_pd(_mm256_add_pd(d, half), scale);
            u = _mm256_min_pd(u, top);
        }
        _mm256_storeu_pd(out + i, u);
    }
    constexpr double s = 0x1p-53;
    constexpr double topd = 0x1.fffffffffffffp-1;
    for (; i < n; ++i) {
        if (center == 0) {
            out[i] = static_cast<double>(x[i]) * s;
        } else {
            double u = (static_cast<double>(x[i]) + 0.5) * s;
            if (u > topd) u = topd;
            out[i] = u;
        }
    }
}

}  // namespace

const KernelOps* avx2_kernels() {
    static const KernelOps ops = {
        "avx2",            exp_vec_a,    erfc_vec_a, norm_cdf_upper_vec_a,
        inv_norm_cdf_vec_a, affine_fold_a, sobol_fill_a, lms_apply_a,
        unit_from_bits_a,
    };
    return &ops;
}

}  // namespace pqmc::simd
