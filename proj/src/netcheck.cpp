#include "pqmc/netcheck.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pqmc {

namespace {

// Bucket the points by their digit prefixes (k_0,...,k_{d-1}) and test that
// all 2^{|k|} buckets hold the same count.
bool composition_balanced(const std::vector<uint64_t>& bits, size_t n, int d,
                          const std::vector<int>& k, int w, uint64_t want) {
    std::vector<uint32_t> counts(size_t(1) << w, 0);
    for (size_t i = 0; i < n; ++i) {
        const uint64_t* row = bits.data() + i * d;
        uint64_t idx = 0;
        for (int j = 0; j < d; ++j) idx = (idx << k[j]) | (row[j] >> (53 - k[j]));
        ++counts[idx];
    }
    for (uint32_t c : counts)
        if (c != want) return false;
    return true;
}

}  // namespace

bool is_net(const PointSet& ps, int t, int m, int d) {
    if (t < 0 || m < 0 || t > m) throw std::invalid_argument("need 0 <= t <= m");
    if (d != ps.d) throw std::invalid_argument("dimension mismatch");
    if (ps.n() != (size_t(1) << m))
        throw std::invalid_argument("point count is not 2^m");
    const size_t n = ps.n();

    const std::vector<uint64_t>* bits = &ps.bits;
    std::vector<uint64_t> derived;
    if (bits->size() != n * static_cast<size_t>(d)) {
        derived.resize(n * d);
        for (size_t i = 0; i < n * static_cast<size_t>(d); ++i)
            derived[i] = static_cast<uint64_t>(ps.points[i] * 0x1p53);
        bits = &derived;
    }

    const int w = m - t;
    if (w <= 0) return true;
    const uint64_t want = 1ull << t;

    std::vector<int> k(d, 0);
    bool ok = true;
    // enumerate weak compositions of w into d parts
    std::function<void(int, int)> rec = [&](int j, int rem) {
        if (!ok) return;
        if (j == d - 1) {
            k[j] = rem;
            if (!composition_balanced(*bits, n, d, k, w, want)) ok = false;
            return;
        }
        for (int v = rem; v >= 0 && ok; --v) {
            k[j] = v;
            rec(j + 1, rem - v);
        }
    };
    rec(0, w);
    return ok;
}

int smallest_net_t(const PointSet& ps) {
    for (int t = 0; t <= ps.m; ++t)
        if (is_net(ps, t, ps.m, ps.d)) return t;
    return ps.m;
}

}  // namespace pqmc
