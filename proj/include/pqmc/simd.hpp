#pragma once
#include <cstddef>
#include <cstdint>

// Batch kernels behind a runtime-dispatched function table. Two providers:
// a portable scalar reference and an AVX2 variant compiled in its own TU.
// Contract: for identical inputs, every provider returns bit-identical
// outputs (the element-wise operation DAG is the same; the build disables
// fp contraction so the compiler cannot fuse differently per path).
//
// Batch entry points take restrict-free raw pointers; callers guarantee
// outputs don't alias inputs.

namespace pqmc::simd {

struct KernelOps {
    const char* name;

    // out[i] = exp(x[i]). Full accuracy on (-708, 709); 0 at or below -708,
    // +inf at or above 709 (true values in [709, 709.78) saturate to +inf).
    void (*exp_vec)(const double* x, double* out, size_t n);

    // out[i] = erfc(x[i]) (Cody's rational approximation).
    void (*erfc_vec)(const double* x, double* out, size_t n);

    // out[i] = Phi_bar(x[i]) = erfc(x[i]/sqrt(2))/2, computed directly.
    void (*norm_cdf_upper_vec)(const double* x, double* out, size_t n);

    // out[i] = Phi^{-1}(u[i]) for u in (0,1); rational approximation plus
    // one Halley refinement against Phi.
    void (*inv_norm_cdf_vec)(const double* u, double* out, size_t n);

    // out[t] = drift[t] + sum_k Ft[k*nterms + t] * z[k], k ascending.
    // Ft is stored k-major (dim blocks of nterms contiguous entries).
    void (*affine_fold)(const double* Ft, const double* drift, const double* z,
                        double* out, size_t nterms, size_t dim);

    // Natural-order digital points: out[i*dim + j] = XOR over set bits t of
    // (i0 + i) of dirs[t*dim + j], for i in [0, count).
    void (*sobol_fill)(const uint64_t* dirs, size_t nbits, size_t dim,
                       uint64_t i0, size_t count, uint64_t* out);

    // Affine digit scramble: out = shift[j] XOR the XOR over set digits t
    // (from the top, t = 1..inbits) of x[i*dim + j] of cols[(t-1)*dim + j].
    void (*lms_apply)(const uint64_t* x, size_t count, size_t dim,
                      const uint64_t* cols, size_t inbits,
                      const uint64_t* shift, uint64_t* out);

    // 53-bit fixed-point to double. center == 0: exact x * 2^-53.
    // center != 0: (x + 0.5) * 2^-53, clamped into (0, 1).
    void (*unit_from_bits)(const uint64_t* x, double* out, size_t n, int center);
};

// Portable reference provider.
const KernelOps& scalar_kernels();

// AVX2 provider; nullptr when not compiled in or not supported by this CPU.
const KernelOps* avx2_kernels();

// Active provider: best available, unless overridden by the environment
// variable PQMC_KERNELS=scalar|avx2 (read once, at first use).
const KernelOps& kernels();

}  // namespace pqmc::simd
