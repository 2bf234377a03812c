#pragma once
#include <cstdint>

// Counter-based pseudorandom primitives. Every stream in the project is
// derived from a master seed by hashing fixed integer tags, so results are
// independent of evaluation order and bit-identical across runs.

namespace pqmc {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on uint64.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derive a child seed from a parent seed and a tag. Chain calls to build
// per-(method, m, replicate) streams.
inline uint64_t derive_seed(uint64_t seed, uint64_t tag) {
    return mix64(seed ^ mix64(tag + 0x632be59bd9b4e019ull));
}
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return derive_seed(derive_seed(seed, a, b), c);
}

// 53-bit center-of-cell uniform in (0,1): (k + 0.5) * 2^-53 never returns an
// exact 0 or 1, so inverse-CDF mappings stay finite. The clamp guards the
// k = 2^53-1 cell, where the addition rounds up to 1.0.
inline double to_unit53(uint64_t bits) {
    double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
    if (u > 0x1.fffffffffffffp-1) u = 0x1.fffffffffffffp-1;
    return u;
}

// Sequential generator: splitmix64 stream.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double next_unit() { return to_unit53(next_u64()); }
    // Uniform in {0, ..., n-1} by rejection; n must be >= 1.
    uint64_t next_below(uint64_t n) {
        uint64_t lim = ~0ull - ~0ull % n;
        uint64_t v;
        do { v = next_u64(); } while (v >= lim);
        return v % n;
    }

  private:
    uint64_t state_;
};

// Counter-mode access: value at index i of stream `seed`, order-independent.
inline uint64_t counter_u64(uint64_t seed, uint64_t i) {
    return mix64(seed ^ mix64(i * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
}
inline double counter_unit(uint64_t seed, uint64_t i) {
    return to_unit53(counter_u64(seed, i));
}

}  // namespace pqmc
