#include "pqmc/sobol.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pqmc/rng.hpp"
#include "pqmc/simd.hpp"

namespace pqmc {

namespace {
constexpr int kBits = 53;
constexpr uint64_t kMask53 = (1ull << 53) - 1;
}  // namespace

const char* scramble_name(Scramble s) {
    switch (s) {
        case Scramble::none: return "none";
        case Scramble::nested_uniform: return "nested-uniform";
        case Scramble::linear_matrix_shift: return "linear-matrix+digital-shift";
    }
    return "?";
}

DirectionTable DirectionTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open direction-number file: " + path);
    std::string header;
    std::getline(in, header);
    if (header.find('d') == std::string::npos)
        throw std::runtime_error("direction-number file missing header line: " + path);
    DirectionTable table;
    int expect_d = 2;
    long long d, s, a;
    while (in >> d >> s >> a) {
        if (d != expect_d)
            throw std::runtime_error("direction-number rows must start at d=2 and be consecutive");
        if (s < 1 || s > 63) throw std::runtime_error("bad polynomial degree in direction file");
        Row row;
        row.s = static_cast<int>(s);
        row.a = static_cast<uint64_t>(a);
        row.m.resize(row.s);
        for (int i = 0; i < row.s; ++i) {
            unsigned long long mi;
            if (!(in >> mi)) throw std::runtime_error("truncated direction-number row");
            if (mi % 2 == 0 || mi >= (1ull << (i + 1)))
                throw std::runtime_error("direction number m_i out of range (need odd, < 2^i)");
            row.m[i] = mi;
        }
        table.rows_.push_back(std::move(row));
        ++expect_d;
    }
    if (table.rows_.empty()) throw std::runtime_error("empty direction-number file: " + path);
    return table;
}

std::vector<uint64_t> DirectionTable::direction_integers(int dim) const {
    if (dim < 1 || dim > max_dim())
        throw std::runtime_error("dimension " + std::to_string(dim) +
                                 " exceeds direction-number table limit of " +
                                 std::to_string(max_dim()));
    std::vector<uint64_t> dirs(static_cast<size_t>(kBits) * dim, 0);
    // dimension 1: van der Corput, V_t = 2^{53-t}
    for (int t = 0; t < kBits; ++t) dirs[static_cast<size_t>(t) * dim + 0] = 1ull << (52 - t);
    std::vector<uint64_t> v(kBits);
    for (int j = 1; j < dim; ++j) {
        const Row& row = rows_[j - 1];
        const int s = row.s;
        for (int t = 0; t < kBits; ++t) {
            if (t < s) {
                v[t] = row.m[t] << (52 - t);
            } else {
                uint64_t acc = v[t - s] ^ (v[t - s] >> s);
                for (int i = 1; i < s; ++i)
                    if ((row.a >> (s - 1 - i)) & 1u) acc ^= v[t - i];
                v[t] = acc;
            }
        }
        for (int t = 0; t < kBits; ++t) dirs[static_cast<size_t>(t) * dim + j] = v[t];
    }
    return dirs;
}

std::string bundled_direction_file() {
    if (const char* env = std::getenv("PQMC_DATA_DIR"))
        return std::string(env) + "/new-joe-kuo-6.100.txt";
#ifdef PQMC_SOURCE_DATA_DIR
    return std::string(PQMC_SOURCE_DATA_DIR) + "/new-joe-kuo-6.100.txt";
#else
    return "data/new-joe-kuo-6.100.txt";
#endif
}

const DirectionTable& joe_kuo_table() {
    static const DirectionTable table = DirectionTable::load_file(bundled_direction_file());
    return table;
}

PointSet generate_sobol(int m, int d, const DirectionTable& table) {
    if (m < 0 || m > 31) throw std::invalid_argument("resolution m must be in [0,31]");
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    const std::vector<uint64_t> dirs = table.direction_integers(d);
    PointSet ps;
    ps.m = m;
    ps.d = d;
    const size_t n = ps.n();
    ps.bits.resize(n * d);
    ps.points.resize(n * d);
    const auto& k = simd::kernels();
    k.sobol_fill(dirs.data(), kBits, static_cast<size_t>(d), 0, n, ps.bits.data());
    k.unit_from_bits(ps.bits.data(), ps.points.data(), n * d, /*center=*/0);
    return ps;
}

PointSet generate_sobol(int m, int d) { return generate_sobol(m, d, joe_kuo_table()); }

namespace {

PointSet scramble_lms(const PointSet& ps, uint64_t seed) {
    const int d = ps.d;
    const size_t n = ps.n();
    std::vector<uint64_t> cols(static_cast<size_t>(d) * kBits);
    std::vector<uint64_t> shift(d);
    for (int j = 0; j < d; ++j) {
        Rng r(derive_seed(seed, 0xC015u, static_cast<uint64_t>(j)));
        for (int t = 0; t < kBits; ++t) {
            const uint64_t diag = 1ull << (52 - t);
            cols[static_cast<size_t>(j) * kBits + t] = diag | (r.next_u64() & (diag - 1));
        }
        shift[j] = r.next_u64() & kMask53;
    }
    PointSet out;
    out.m = ps.m;
    out.d = d;
    out.scramble = Scramble::linear_matrix_shift;
    out.seed = seed;
    out.bits.resize(n * d);
    out.points.resize(n * d);
    const auto& k = simd::kernels();
    k.lms_apply(ps.bits.data(), n, static_cast<size_t>(d), cols.data(), kBits,
                shift.data(), out.bits.data());
    k.unit_from_bits(out.bits.data(), out.points.data(), n * d, /*center=*/1);
    return out;
}

PointSet scramble_nested(const PointSet& ps, uint64_t seed) {
    const int d = ps.d;
    const size_t n = ps.n();
    PointSet out;
    out.m = ps.m;
    out.d = d;
    out.scramble = Scramble::nested_uniform;
    out.seed = seed;
    out.bits.resize(n * d);
    out.points.resize(n * d);
    std::vector<uint64_t> dimseed(d);
    for (int j = 0; j < d; ++j)
        dimseed[j] = derive_seed(seed, 0x0E57u, static_cast<uint64_t>(j));
    for (size_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            const uint64_t x = ps.bits[i * d + j];
            uint64_t y = 0;
            // digit t gets XORed with a random bit drawn from the node of the
            // binary tree addressed by the first t-1 digits
            for (int t = 1; t <= kBits; ++t) {
                const uint64_t prefix = (t == 1) ? 0 : (x >> (54 - t));
                const uint64_t key = (prefix << 6) | static_cast<uint64_t>(t);
                const uint64_t flip = mix64(dimseed[j] ^ key) & 1u;
                const uint64_t xbit = (x >> (53 - t)) & 1u;
                y |= (xbit ^ flip) << (53 - t);
            }
            out.bits[i * d + j] = y;
        }
    }
    simd::kernels().unit_from_bits(out.bits.data(), out.points.data(), n * d,
                                   /*center=*/1);
    return out;
}

}  // namespace

PointSet scramble(const PointSet& ps, Scramble kind, uint64_t seed) {
    if (ps.bits.size() != ps.n() * static_cast<size_t>(ps.d))
        throw std::invalid_argument("point set has no digit data to scramble");
    switch (kind) {
        case Scramble::none: return ps;
        case Scramble::linear_matrix_shift: return scramble_lms(ps, seed);
        case Scramble::nested_uniform: return scramble_nested(ps, seed);
    }
    throw std::invalid_argument("unknown scramble kind");
}

}  // namespace pqmc
