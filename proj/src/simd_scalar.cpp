#include <cstdint>
#include <cstring>

#include "pqmc/detail/kernel_scalar.hpp"
#include "pqmc/simd.hpp"

namespace pqmc::simd {
namespace {

void exp_vec_s(const double* x, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = kern::exp1(x[i]);
}

void erfc_vec_s(const double* x, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = kern::erfc1(x[i]);
}

void norm_cdf_upper_vec_s(const double* x, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = kern::norm_cdf_upper1(x[i]);
}

void inv_norm_cdf_vec_s(const double* u, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = kern::inv_norm_cdf1(u[i]);
}

void affine_fold_s(const double* Ft, const double* drift, const double* z,
                   double* out, size_t nterms, size_t dim) {
    for (size_t t = 0; t < nterms; ++t) out[t] = drift[t];
    for (size_t k = 0; k < dim; ++k) {
        const double zk = z[k];
        const double* col = Ft + k * nterms;
        for (size_t t = 0; t < nterms; ++t) out[t] += col[t] * zk;
    }
}

void sobol_fill_s(const uint64_t* dirs, size_t nbits, size_t dim, uint64_t i0,
                  size_t count, uint64_t* out) {
    for (size_t i = 0; i < count; ++i) {
        uint64_t idx = i0 + static_cast<uint64_t>(i);
        uint64_t* row = out + i * dim;
        std::memset(row, 0, dim * sizeof(uint64_t));
        size_t t = 0;
        while (idx != 0) {
            if (idx & 1u) {
                const uint64_t* vt = dirs + t * dim;
                for (size_t j = 0; j < dim; ++j) row[j] ^= vt[j];
            }
            idx >>= 1;
            ++t;
            if (t >= nbits) break;
        }
    }
}

void lms_apply_s(const uint64_t* x, size_t count, size_t dim,
                 const uint64_t* cols, size_t inbits, const uint64_t* shift,
                 uint64_t* out) {
    for (size_t i = 0; i < count; ++i) {
        const uint64_t* xr = x + i * dim;
        uint64_t* yr = out + i * dim;
        for (size_t j = 0; j < dim; ++j) {
            const uint64_t* cj = cols + j * inbits;
            uint64_t v = xr[j];
            uint64_t y = 0;
            for (size_t t = 0; t < inbits; ++t) {
                // digit t+1 counted from the top of the 53-bit word
                if ((v >> (52 - t)) & 1u) y ^= cj[t];
            }
            yr[j] = y ^ shift[j];
        }
    }
}

void unit_from_bits_s(const uint64_t* x, double* out, size_t n, int center) {
    constexpr double scale = 0x1p-53;
    if (center == 0) {
        for (size_t i = 0; i < n; ++i)
            out[i] = static_cast<double>(x[i]) * scale;
    } else {
        constexpr double top = 0x1.fffffffffffffp-1;  // 1 - 2^-53
        for (size_t i = 0; i < n; ++i) {
            double u = (static_cast<double>(x[i]) + 0.5) * scale;
            if (u > top) u = top;  // tie-to-even at 2^53-1 can round to 1.0
            out[i] = u;
        }
    }
}

}  // namespace

const KernelOps& scalar_kernels() {
    static const KernelOps ops = {
        "scalar",          exp_vec_s,    erfc_vec_s, norm_cdf_upper_vec_s,
        inv_norm_cdf_vec_s, affine_fold_s, sobol_fill_s, lms_apply_s,
        unit_from_bits_s,
    };
    return ops;
}

}  // namespace pqmc::simd
