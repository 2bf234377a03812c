#pragma once
#include <complex>
#include <cstdint>
#include <vector>

#include "pqmc/sobol.hpp"

namespace pqmc {

// Piecewise-constant function on the dyadic grid with cells of side 2^{-r_j}.
// Its Walsh expansion is finite: coefficients vanish once any k_j >= 2^{r_j},
// which makes every identity in this laboratory testable exactly.
// Desk-scale caps: d <= 4 and |r| <= 12 (at most 4096 cells).
struct DyadicStepFunction {
    std::vector<int> r;
    std::vector<double> values;  // last dimension fastest

    DyadicStepFunction(std::vector<int> res, std::vector<double> vals);
    static DyadicStepFunction random(const std::vector<int>& res, uint64_t seed);
    static DyadicStepFunction constant(const std::vector<int>& res, double c);

    int dim() const { return static_cast<int>(r.size()); }
    size_t cells() const { return values.size(); }
    double value_at(const std::vector<uint64_t>& cell) const;
    // cell lookup from 53-bit fixed-point coordinates
    double eval_bits(const uint64_t* bits) const;
};

// Exact mean and variance under the uniform distribution on [0,1)^d.
double dyadic_mean(const DyadicStepFunction& f);
double dyadic_variance(const DyadicStepFunction& f);

// Exact Walsh coefficients of the step function. Base 2 makes every Walsh
// value +-1; the complex version evaluates the root-of-unity form literally
// and exists to cross-check the real fast path.
double walsh_coefficient_real(const DyadicStepFunction& f,
                              const std::vector<uint64_t>& k);
std::complex<double> walsh_coefficient(const DyadicStepFunction& f,
                                       const std::vector<uint64_t>& k);

// sigma^2_ell: sum of |fhat(k)|^2 over the group with digit lengths ell
// (k_j = 0 where ell_j = 0, else 2^{ell_j - 1} <= k_j < 2^{ell_j}).
double group_variance(const DyadicStepFunction& f, const std::vector<int>& ell);

// Gain coefficient of the point set at index group ell != 0. The reference
// is the literal O(n^2 d) pair sum; the fast path buckets digit prefixes in
// O(2^d n) and agrees to 1e-12. Both are invariant under scrambling.
double gain_reference(const PointSet& ps, const std::vector<int>& ell);
double gain_fast(const PointSet& ps, const std::vector<int>& ell);

// (1/n) sum over ell != 0 of Gamma_ell sigma^2_ell, truncated at f's
// resolution (all other groups have sigma^2_ell = 0).
double predicted_variance(const DyadicStepFunction& f, const PointSet& ps);

struct ScrambleStats {
    double mean = 0.0;
    double variance = 0.0;
    double stderr_variance = 0.0;
};

// Variance of the RQMC estimate of f across `reps` independent scrambles of
// `base`. Deterministic given seed; replicate r uses derive_seed(seed, r).
ScrambleStats empirical_scramble_variance(const DyadicStepFunction& f,
                                          const PointSet& base, int reps,
                                          uint64_t seed,
                                          Scramble kind = Scramble::linear_matrix_shift);

// Exact average over coordinate j (1-based). The result no longer depends on
// x_j (its resolution drops to 0) and keeps exactly the Walsh coefficients of
// f that have k_j = 0.
DyadicStepFunction coordinate_preintegrate_dyadic(const DyadicStepFunction& f,
                                                  int j);

}  // namespace pqmc
