#include "pqmc/walsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pqmc/rng.hpp"

namespace pqmc {

namespace {

constexpr int kMaxDim = 4;
constexpr int kMaxTotalResolution = 12;
// Refinement head-room for coefficients with k_j beyond f's resolution.
constexpr int kMaxRefined = 26;

void check_shape(const std::vector<int>& r) {
    if (r.empty() || r.size() > kMaxDim)
        throw std::invalid_argument("dyadic function dimension must be 1..4");
    int total = 0;
    for (int rj : r) {
        if (rj < 0 || rj > kMaxTotalResolution)
            throw std::invalid_argument("dyadic resolution out of range");
        total += rj;
    }
    if (total > kMaxTotalResolution)
        throw std::invalid_argument("dyadic grid exceeds 2^12 cells");
}

size_t cell_count(const std::vector<int>& r) {
    int total = 0;
    for (int rj : r) total += rj;
    return size_t(1) << total;
}

int bit_length(uint64_t k) { return k == 0 ? 0 : std::bit_width(k); }

// Walsh sign exponent of the cell with digit prefix c (width w) at index k:
// digit t of x is bit (w-t) of c, digit t of k is bit (t-1), so reversing c
// aligns the two and a popcount gives the dot product of digit vectors.
int walsh_parity(uint64_t c, int width, uint64_t k) {
    uint64_t rev = 0;
    for (int t = 0; t < width; ++t)
        if ((c >> t) & 1u) rev |= uint64_t(1) << (width - 1 - t);
    return std::popcount(rev & k) & 1;
}

}  // namespace

DyadicStepFunction::DyadicStepFunction(std::vector<int> res, std::vector<double> vals)
    : r(std::move(res)), values(std::move(vals)) {
    check_shape(r);
    if (values.size() != cell_count(r))
        throw std::invalid_argument("dyadic value array does not match grid");
}

DyadicStepFunction DyadicStepFunction::random(const std::vector<int>& res, uint64_t seed) {
    check_shape(res);
    Rng rng(derive_seed(seed, 0xD7AD1Cu));
    std::vector<double> vals(cell_count(res));
    for (double& v : vals) v = rng.next_unit() * 2.0 - 1.0;
    return DyadicStepFunction(res, std::move(vals));
}

DyadicStepFunction DyadicStepFunction::constant(const std::vector<int>& res, double c) {
    check_shape(res);
    return DyadicStepFunction(res, std::vector<double>(cell_count(res), c));
}

double DyadicStepFunction::value_at(const std::vector<uint64_t>& cell) const {
    size_t idx = 0;
    for (int j = 0; j < dim(); ++j) idx = (idx << r[j]) | cell[j];
    return values[idx];
}

double DyadicStepFunction::eval_bits(const uint64_t* bits) const {
    size_t idx = 0;
    for (int j = 0; j < dim(); ++j)
        idx = (idx << r[j]) | (r[j] == 0 ? 0 : bits[j] >> (53 - r[j]));
    return values[idx];
}

double dyadic_mean(const DyadicStepFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s / static_cast<double>(f.values.size());
}

double dyadic_variance(const DyadicStepFunction& f) {
    double mu = dyadic_mean(f);
    double s = 0.0;
    for (double v : f.values) s += (v - mu) * (v - mu);
    return s / static_cast<double>(f.values.size());
}

double walsh_coefficient_real(const DyadicStepFunction& f,
                              const std::vector<uint64_t>& k) {
    if (static_cast<int>(k.size()) != f.dim())
        throw std::invalid_argument("walsh index dimension mismatch");
    // Refine each axis until both f and wal_k are constant per cell.
    std::vector<int> rr(f.dim());
    int total = 0;
    for (int j = 0; j < f.dim(); ++j) {
        rr[j] = std::max(f.r[j], bit_length(k[j]));
        total += rr[j];
    }
    if (total > kMaxRefined)
        throw std::invalid_argument("walsh index too fine for exact summation");
    size_t ncells = size_t(1) << total;
    double acc = 0.0;
    std::vector<uint64_t> c(f.dim());
    for (size_t idx = 0; idx < ncells; ++idx) {
        size_t rest = idx;
        int parity = 0;
        size_t fidx = 0;
        for (int j = f.dim() - 1; j >= 0; --j) {
            c[j] = rest & ((uint64_t(1) << rr[j]) - 1);
            rest >>= rr[j];
        }
        for (int j = 0; j < f.dim(); ++j) {
            parity ^= walsh_parity(c[j], rr[j], k[j]);
            fidx = (fidx << f.r[j]) | (c[j] >> (rr[j] - f.r[j]));
        }
        acc += parity ? -f.values[fidx] : f.values[fidx];
    }
    return acc / static_cast<double>(ncells);
}

std::complex<double> walsh_coefficient(const DyadicStepFunction& f,
                                       const std::vector<uint64_t>& k) {
    if (static_cast<int>(k.size()) != f.dim())
        throw std::invalid_argument("walsh index dimension mismatch");
    std::vector<int> rr(f.dim());
    int total = 0;
    for (int j = 0; j < f.dim(); ++j) {
        rr[j] = std::max(f.r[j], bit_length(k[j]));
        total += rr[j];
    }
    if (total > kMaxRefined)
        throw std::invalid_argument("walsh index too fine for exact summation");
    size_t ncells = size_t(1) << total;
    std::complex<double> acc(0.0, 0.0);
    std::vector<uint64_t> c(f.dim());
    for (size_t idx = 0; idx < ncells; ++idx) {
        size_t rest = idx;
        for (int j = f.dim() - 1; j >= 0; --j) {
            c[j] = rest & ((uint64_t(1) << rr[j]) - 1);
            rest >>= rr[j];
        }
        int dot = 0;
        size_t fidx = 0;
        for (int j = 0; j < f.dim(); ++j) {
            dot += walsh_parity(c[j], rr[j], k[j]);
            fidx = (fidx << f.r[j]) | (c[j] >> (rr[j] - f.r[j]));
        }
        // conjugated character exp(-2 pi i (digit dot product) / 2)
        std::complex<double> w =
            std::exp(std::complex<double>(0.0, -std::numbers::pi * dot));
        acc += f.values[fidx] * w;
    }
    return acc / static_cast<double>(ncells);
}

double group_variance(const DyadicStepFunction& f, const std::vector<int>& ell) {
    if (static_cast<int>(ell.size()) != f.dim())
        throw std::invalid_argument("group index dimension mismatch");
    for (int lj : ell)
        if (lj < 0) throw std::invalid_argument("group index must be nonnegative");
    // Enumerate k with bit length exactly ell_j in each dimension.
    std::vector<uint64_t> k(f.dim(), 0);
    double acc = 0.0;
    size_t combos = 1;
    for (int lj : ell) combos *= lj == 0 ? 1 : size_t(1) << (lj - 1);
    for (size_t idx = 0; idx < combos; ++idx) {
        size_t rest = idx;
        for (int j = f.dim() - 1; j >= 0; --j) {
            if (ell[j] == 0) {
                k[j] = 0;
            } else {
                uint64_t span = uint64_t(1) << (ell[j] - 1);
                k[j] = span + (rest % span);
                rest /= span;
            }
        }
        double fk = walsh_coefficient_real(f, k);
        acc += fk * fk;
    }
    return acc;
}

namespace {

void check_gain_args(const PointSet& ps, const std::vector<int>& ell) {
    if (static_cast<int>(ell.size()) != ps.d)
        throw std::invalid_argument("gain index dimension mismatch");
    bool all_zero = true;
    for (int lj : ell) {
        if (lj < 0 || lj > 53)
            throw std::invalid_argument("gain index digit depth out of range");
        if (lj > 0) all_zero = false;
    }
    if (all_zero)
        throw std::invalid_argument("gain coefficient is undefined at the zero group");
}

uint64_t prefix(uint64_t bits, int depth) {
    return depth == 0 ? 0 : bits >> (53 - depth);
}

}  // namespace

double gain_reference(const PointSet& ps, const std::vector<int>& ell) {
    check_gain_args(ps, ell);
    size_t n = ps.n();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t i2 = 0; i2 < n; ++i2) {
            double prod = 1.0;
            for (int j = 0; j < ps.d; ++j) {
                if (ell[j] == 0) continue;
                uint64_t a = ps.bits[i * ps.d + j];
                uint64_t b = ps.bits[i2 * ps.d + j];
                double fine = prefix(a, ell[j]) == prefix(b, ell[j]) ? 1.0 : 0.0;
                double coarse =
                    prefix(a, ell[j] - 1) == prefix(b, ell[j] - 1) ? 1.0 : 0.0;
                prod *= 2.0 * fine - coarse;
            }
            acc += prod;
        }
    }
    return acc / static_cast<double>(n);
}

double gain_fast(const PointSet& ps, const std::vector<int>& ell) {
    check_gain_args(ps, ell);
    size_t n = ps.n();
    std::vector<int> active;
    int total_bits = 0;
    for (int j = 0; j < ps.d; ++j) {
        if (ell[j] > 0) {
            active.push_back(j);
            total_bits += ell[j];
        }
    }
    if (total_bits > 64) return gain_reference(ps, ell);
    // Expand prod_j (2 A_j - B_j) over subsets S of active dimensions, where
    // A_j matches ell_j digits and B_j matches ell_j - 1. Each term counts
    // agreeing pairs, i.e. the sum of squared bucket sizes for the composite
    // prefix key.
    double acc = 0.0;
    std::vector<uint64_t> keys(n);
    size_t nsub = size_t(1) << active.size();
    for (size_t sub = 0; sub < nsub; ++sub) {
        for (size_t i = 0; i < n; ++i) {
            uint64_t key = 0;
            for (size_t aj = 0; aj < active.size(); ++aj) {
                int j = active[aj];
                int depth = (sub >> aj) & 1u ? ell[j] : ell[j] - 1;
                key = (key << ell[j]) | prefix(ps.bits[i * ps.d + j], depth);
            }
            keys[i] = key;
        }
        std::sort(keys.begin(), keys.end());
        double pairs = 0.0;
        size_t i = 0;
        while (i < n) {
            size_t run = i + 1;
            while (run < n && keys[run] == keys[i]) ++run;
            double cnt = static_cast<double>(run - i);
            pairs += cnt * cnt;
            i = run;
        }
        int bits_set = std::popcount(sub);
        double sign = (active.size() - bits_set) % 2 == 0 ? 1.0 : -1.0;
        acc += sign * std::ldexp(pairs, bits_set);
    }
    return acc / static_cast<double>(n);
}

double predicted_variance(const DyadicStepFunction& f, const PointSet& ps) {
    if (f.dim() != ps.d)
        throw std::invalid_argument("function and point set dimension mismatch");
    // Walk all ell <= r except 0; every other group has sigma^2 = 0 exactly.
    std::vector<int> ell(f.dim(), 0);
    double acc = 0.0;
    while (true) {
        int j = f.dim() - 1;
        while (j >= 0 && ell[j] == f.r[j]) ell[j--] = 0;
        if (j < 0) break;
        ++ell[j];
        acc += gain_fast(ps, ell) * group_variance(f, ell);
    }
    return acc / static_cast<double>(ps.n());
}

ScrambleStats empirical_scramble_variance(const DyadicStepFunction& f,
                                          const PointSet& base, int reps,
                                          uint64_t seed, Scramble kind) {
    if (f.dim() != base.d)
        throw std::invalid_argument("function and point set dimension mismatch");
    if (reps < 2) throw std::invalid_argument("need at least 2 replicates");
    size_t n = base.n();
    std::vector<double> est(reps);
    for (int rep = 0; rep < reps; ++rep) {
        PointSet sc = scramble(base, kind, derive_seed(seed, rep));
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += f.eval_bits(&sc.bits[i * sc.d]);
        est[rep] = s / static_cast<double>(n);
    }
    ScrambleStats out;
    for (double e : est) out.mean += e;
    out.mean /= reps;
    double m2 = 0.0, m4 = 0.0;
    for (double e : est) {
        double d = e - out.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    out.variance = m2 / (reps - 1);
    m4 /= reps;
    // large-sample standard error of the sample variance
    double v = (m4 - out.variance * out.variance * (reps - 3.0) / (reps - 1.0)) / reps;
    out.stderr_variance = v > 0.0 ? std::sqrt(v) : 0.0;
    return out;
}

DyadicStepFunction coordinate_preintegrate_dyadic(const DyadicStepFunction& f,
                                                  int j) {
    if (j < 1 || j > f.dim())
        throw std::invalid_argument("preintegration coordinate out of range");
    int jj = j - 1;
    std::vector<int> rg = f.r;
    rg[jj] = 0;
    // strides of the input grid, last dimension fastest
    std::vector<size_t> stride(f.dim(), 1);
    for (int a = f.dim() - 2; a >= 0; --a)
        stride[a] = stride[a + 1] << f.r[a + 1];
    size_t slices = size_t(1) << f.r[jj];
    size_t out_cells = f.values.size() >> f.r[jj];
    std::vector<double> vals(out_cells, 0.0);
    // Walk output cells in their own row-major order; for each, average the
    // input cells that differ only in coordinate j.
    std::vector<uint64_t> cell(f.dim(), 0);
    for (size_t o = 0; o < out_cells; ++o) {
        size_t rest = o;
        for (int a = f.dim() - 1; a >= 0; --a) {
            if (a == jj) {
                cell[a] = 0;
                continue;
            }
            cell[a] = rest & ((uint64_t(1) << f.r[a]) - 1);
            rest >>= f.r[a];
        }
        size_t ibase = 0;
        for (int a = 0; a < f.dim(); ++a) ibase += cell[a] * stride[a];
        double s = 0.0;
        for (size_t c = 0; c < slices; ++c) s += f.values[ibase + c * stride[jj]];
        vals[o] = s / static_cast<double>(slices);
    }
    return DyadicStepFunction(rg, std::move(vals));
}

}  // namespace pqmc
