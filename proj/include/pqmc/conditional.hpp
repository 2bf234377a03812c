#pragma once
#include <cstddef>
#include <vector>

#include "pqmc/brownian.hpp"
#include "pqmc/options.hpp"

namespace pqmc {

// One exponential term of the conditional average: amplitude e^{loading z}.
struct ExpTerm {
    double amplitude;
    double loading;
};

struct ThresholdSolve {
    double gamma;    // -inf when the payoff region is the whole line
    int iterations;  // Newton or bisection updates, bracket growth excluded
    double residual; // |(1/d) sum_j amplitude_j e^{loading_j gamma} - K|
};

// Root of the strictly increasing map
//   z -> (1/d) sum_j amplitude_j e^{loading_j z} - K,  d = terms.size().
// Newton from 0 (run on the log of the mean, which keeps the iteration
// finite for any magnitudes), damped by a bisection bracket grown
// geometrically; residual tolerance K 1e-12, iteration cap 100 (reaching
// the cap throws NumericalError). K <= 0 returns gamma = -inf: the sum of
// positive terms is never below K. Amplitudes must be positive; loadings
// that are not strictly positive throw MonotonicityError.
ThresholdSolve solve_threshold(const std::vector<ExpTerm>& terms, double K);

enum class PreintRule {
    closed_form_kink,  // Gaussian partial moments, assembled in log domain
    quadrature,        // kink-split composite Gauss-Legendre in z1
};

struct PreintOptions {
    PreintRule rule = PreintRule::closed_form_kink;
    // Quadrature rule shape; the defaults push panel error far below the
    // 1e-8 agreement gate.
    int quad_nodes = 16;
    double panel_width = 0.5;
    // A mixed-sign first column breaks monotonicity in z1 and raises
    // MonotonicityError by default. Opting in switches to the quadrature
    // rule with the payoff region segmented by a root scan over [-8, 8]
    // (sign changes outside that range sit under ~1e-15 Gaussian mass).
    bool allow_mixed_sign = false;
};

// An Asian-family integrand with the first factor coordinate integrated
// out in closed form: a (d-1)-input function of z_{2..d}. Requires the
// first factor column strictly positive; an all-negative column is fixed
// by replacing R with -R (the Gaussian law is symmetric), anything else
// is a MonotonicityError unless the quadrature opt-in is set.
//
// Evaluation solves the payoff threshold gamma(z_rest), then assembles
// the conditional expectation from order-0/1 Gaussian partial moments,
// entirely in log domain so that large drifts neither overflow the
// lognormal terms nor lose the tail probabilities.
class PreintegratedIntegrand {
  public:
    PreintegratedIntegrand(const MarketParams& mp, const FactorMatrix& R,
                           Greek greek, PreintOptions opt = {});

    int dim() const { return d_ - 1; }  // inputs of operator()
    Greek greek() const { return greek_; }
    PreintRule rule() const { return rule_; }
    bool sign_flipped() const { return flipped_; }
    int direction_column() const { return 1; }  // always the leading column
    const FactorMatrix& factor() const { return R_; }  // after any flip

    double operator()(const double* z_rest) const;
    void eval_batch(const double* z_rest, size_t n, double* out) const;

  private:
    double closed_form(const double* z_rest) const;
    double quadrature(const double* z_rest) const;

    MarketParams mp_;
    FactorMatrix R_;
    Greek greek_;
    PreintOptions opt_;
    PreintRule rule_;
    bool flipped_ = false;
    int d_;
    double dt_, disc_, mu1_;
    std::vector<double> w_;       // first factor column
    std::vector<double> a_;      // sigma w
    std::vector<double> ft_rest_; // columns 2..d, k-major for the fold
    std::vector<double> mu_;     // (r - sigma^2/2) j dt
    double log_s0d_;             // log(S0/d)
};

// One-shot conveniences with the closed-form rule.
// Conditional expectation of the basket payoff (w1 Sbar1 + w2 Sbar2 - K)+
// over the first Gaussian coordinate. The mixture average is again a sum of
// exponentials in z1 (2d terms, amplitudes S0 w_leg/d), so the threshold
// solve and the log-domain tail assembly carry over unchanged. The factor
// carries the per-leg volatilities, so loadings are read straight from its
// leading column. Column sign policy and the mixed-sign quadrature opt-in
// match PreintegratedIntegrand; zero-weight legs contribute nothing and are
// harmless.
class BasketPreintegrated {
  public:
    BasketPreintegrated(const BasketParams& bp, const FactorMatrix& R,
                        PreintOptions opt = {});

    int dim() const { return D_ - 1; }
    PreintRule rule() const { return rule_; }
    bool sign_flipped() const { return flipped_; }
    const FactorMatrix& factor() const { return R_; }

    double operator()(const double* z_rest) const;
    void eval_batch(const double* z_rest, size_t n, double* out) const;

  private:
    double closed_form(const double* z_rest) const;
    double quadrature(const double* z_rest) const;

    BasketParams bp_;
    FactorMatrix R_;
    PreintOptions opt_;
    PreintRule rule_;
    bool flipped_ = false;
    int D_;  // 2 bp.d rows
    std::vector<double> a_, ft_rest_, logw_mu_;
};

// Conditional expectation of the geometric payoff (G - K)+ over the first
// Gaussian coordinate. G depends on z1 only through the column-mean loading
// abar = sigma mean_j(R_{j1}), so the conditional is a single lognormal term
// and the threshold is analytic (iterations: 0). Monotonicity needs abar > 0
// rather than a one-signed column: a negative mean loading is healed by the
// usual global flip, and abar = 0 throws MonotonicityError unless the
// quadrature opt-in is set.
class GeometricPreintegrated {
  public:
    GeometricPreintegrated(const MarketParams& mp, const FactorMatrix& R,
                           PreintOptions opt = {});

    int dim() const { return d_ - 1; }
    PreintRule rule() const { return rule_; }
    bool sign_flipped() const { return flipped_; }
    const FactorMatrix& factor() const { return R_; }

    double operator()(const double* z_rest) const;
    void eval_batch(const double* z_rest, size_t n, double* out) const;

  private:
    double closed_form(const double* z_rest) const;
    double quadrature(const double* z_rest) const;

    MarketParams mp_;
    FactorMatrix R_;
    PreintOptions opt_;
    PreintRule rule_;
    bool flipped_ = false;
    int d_;
    double abar_ = 0.0, base_ = 0.0;
    std::vector<double> fbar_;  // d-1 tail loadings of log G
};

double preintegrate_call(const FactorMatrix& R, const MarketParams& mp,
                         const double* z_rest);
double preintegrate_linear_kink(const FactorMatrix& R, const MarketParams& mp,
                                const double* z_rest, Greek greek);

// The (d-1)-input function the RQMC loop averages: Sobol' dimension k
// (1-based) feeds factor column k+1, no dimension skipped, so the
// integrated-out variable ends up last in the effective ordering.
RealFn assemble_qmc_integrand(const PreintegratedIntegrand& p);

}  // namespace pqmc
