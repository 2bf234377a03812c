#include <cstdlib>
#include <cstring>

#include "pqmc/simd.hpp"

namespace pqmc::simd {

#if !defined(PQMC_BUILD_AVX2)
const KernelOps* avx2_kernels() { return nullptr; }
#endif

namespace {

const KernelOps& select() {
    const char* env = std::getenv("PQMC_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return scalar_kernels();
        if (std::strcmp(env, "avx2") == 0) {
            const KernelOps* k = avx2_kernels();
            if (k != nullptr) return *k;
            return scalar_kernels();
        }
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) {
        const KernelOps* k = avx2_kernels();
        if (k != nullptr) return *k;
    }
#endif
    return scalar_kernels();
}

}  // namespace

const KernelOps& kernels() {
    static const KernelOps& chosen = select();
    return chosen;
}

}  // namespace pqmc::simd
