#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pqmc/active.hpp"
#include "pqmc/brownian.hpp"
#include "pqmc/conditional.hpp"
#include "pqmc/options.hpp"

namespace pqmc {

// The five estimators under comparison. Names used on the CLI and in CSVs:
// mc, rqmc, preint, preint-dimred, as-preint.
enum class Method { mc, rqmc, preint, preint_dimred, as_preint };
constexpr int kMethodCount = 5;

const char* method_name(Method m);
Method method_from_name(const std::string& name);
// Comma-separated list, e.g. "mc,rqmc,as-preint".
std::vector<Method> parse_methods(const std::string& csv);

// A fully bound experiment cell: preset parameters, the integrand, and the
// path construction, with the factor built once. Presets asian50 (integrands
// payoff, delta, gamma, rho, theta, vega, geometric; constructions standard,
// pca) and basketA/basketB (integrand payoff; constructions
// ordinary-standard, ordinary-pca, full-standard, full-pca).
struct Problem {
    std::string preset, integrand, construction;
    bool is_basket = false;
    bool is_geometric = false;
    MarketParams mp;
    BasketParams bp;
    Greek greek = Greek::payoff;
    int dim = 0;  // Gaussian input dimension: d, or 2d for baskets
    FactorMatrix factor;
};

Problem make_problem(const std::string& preset, const std::string& integrand,
                     const std::string& construction);

// Raw integrand of the problem under an explicit factor (rows n x dim).
void problem_eval_batch(const Problem& prob, const FactorMatrix& R,
                        const double* z, size_t n, double* out);
RealFn problem_integrand(const Problem& prob, const FactorMatrix& R);

struct MethodOptions {
    int M = 128;               // gradient sample size for the rotation methods
    double fd_epsilon = 1e-6;
    bool centered = false;
    CompletionMode completion = CompletionMode::eigvec_complement;
    Scramble scramble = Scramble::linear_matrix_shift;
    bool allow_quad_fallback = false;  // mixed-sign columns: quadrature not error
};

// Seconds spent inside one run_method call; `gradient` covers gradient
// sampling plus the eigendecomposition (as-preint's C hat, preint-dimred's
// pre-integrated C), zero for the other methods.
struct MethodTiming {
    double total = 0.0;
    double gradient = 0.0;
};

// One unbiased estimate from n = 2^m points, 3 <= m <= 17. All randomness
// is derived from `seed`; the gradient stream is independent of the
// integration stream. MonotonicityError is rethrown with method and
// construction context.
double run_method(const Problem& prob, Method method, int m, uint64_t seed,
                  const MethodOptions& opt = {}, MethodTiming* timing = nullptr);

struct TruthResult {
    double value = 0.0;
    double se = 0.0;
    int reps = 0;
    size_t n = 0;
    bool from_cache = false;
    std::string cache_path;
};

struct TruthOptions {
    int m = 17;
    int reps = 30;
    uint64_t seed = 9001;
    std::string cache_dir = "truth_cache";
    MethodOptions method;
};

// Reference value: preint-dimred under the pca construction (full-pca for
// baskets), averaged over `reps` replicates at n = 2^m. Results are cached
// on disk keyed by a hash of every input that affects the value; a cache hit
// returns the stored value verbatim.
TruthResult ground_truth(const Problem& prob, const TruthOptions& opt = {});

struct ReportRow {
    std::string integrand, method, construction;
    int m = 0;
    size_t n = 0;
    int replicate = 0;
    double estimate = 0.0;
    double seconds = 0.0;
};

struct SummaryRow {
    std::string integrand, method, construction;
    int m = 0;
    size_t n = 0;
    double rmse = 0.0;
    double se = 0.0;     // stderr of the RMSE via the MSE delta rule
    double slope = 0.0;  // per-method least-squares slope of log2 rmse vs m
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::vector<SummaryRow> summary;
    double truth = 0.0;
    double truth_se = 0.0;
};

struct SweepOptions {
    int m_lo = 3, m_hi = 13;
    int reps = 50;
    uint64_t master_seed = 1;
    MethodOptions method;
    TruthOptions truth;
};

// RMSE-versus-n sweep against the cached ground truth. Per-replicate seeds
// derive from (master_seed, method, m, replicate), so any subset of cells
// reproduces bit-identically.
ExperimentReport rmse_sweep(const Problem& prob,
                            const std::vector<Method>& methods,
                            const SweepOptions& opt = {});

// Fitted slope for one method from a report's summary rows.
double report_slope(const ExperimentReport& report, Method method);

struct TimingRow {
    std::string integrand, method, construction;
    size_t n = 0;
    int reps = 0;
    double seconds = 0.0;           // mean wall time of one estimate
    double gradient_seconds = 0.0;  // mean rotation-estimation share
};

// Mean wall-clock cost of one estimate per (problem, method) at n = 2^m.
std::vector<TimingRow> timing_run(const std::vector<Problem>& probs,
                                  const std::vector<Method>& methods, int m = 15,
                                  int reps = 10, uint64_t seed = 7,
                                  const MethodOptions& opt = {});

}  // namespace pqmc
