#pragma once
#include <cstddef>
#include <functional>
#include <string>

#include "pqmc/brownian.hpp"

namespace pqmc {

using RealFn = std::function<double(const double*)>;

// Arithmetic Asian call on a single lognormal asset, monitored at
// t_j = j T/d. Defaults are the d = 50 desk configuration.
struct MarketParams {
    double S0 = 100.0;
    double K = 100.0;
    double r = 0.1;
    double sigma = 0.4;
    double T = 1.0;
    int d = 50;
};

// Named presets: "asian50" for MarketParams, "basketA"/"basketB" for
// BasketParams (B swaps the payoff weights). Unknown names throw.
MarketParams market_preset(const std::string& name);
BasketParams basket_preset(const std::string& name);

// Plain-text parameter files, one "key = value" per line, '#' comments.
// Loading starts from the defaults and overrides the keys present;
// unknown keys and malformed lines throw.
MarketParams load_market_params(const std::string& path);
BasketParams load_basket_params(const std::string& path);
void save_market_params(const std::string& path, const MarketParams& mp);
void save_basket_params(const std::string& path, const BasketParams& bp);

// Path to the preset file bundled with the source tree ("asian50", ...).
std::string bundled_preset_file(const std::string& name);

// The six integrands of the Asian family. Payoff is the undiscounted
// expectation target E(Sbar - K)+; every Greek is a derivative of the
// discounted price P = e^{-rT} E(Sbar - K)+ and carries the discount
// factor inside the integrand.
enum class Greek { payoff, delta, gamma, rho, theta, vega };
constexpr int kGreekCount = 6;
const char* greek_name(Greek g);
Greek greek_from_name(const std::string& name);

// Integrand value at one Gaussian point z in R^d. The path is
//   S_j = S0 exp((r - sigma^2/2) j dt + sigma B_j),  B = R z,
// so the factor R carries the construction (standard, PCA, rotated) and
// the distribution of the estimate, never its mean. Estimators:
//   payoff  (Sbar - K)+
//   delta   e^{-rT} 1{Sbar >= K} Sbar / S0                     (pathwise)
//   gamma   e^{-rT} 1{Sbar >= K} (Sbar / S0^2) (B_1/(sigma dt) - 1)
//           (pathwise delta, with the remaining S0 derivative moved to a
//            likelihood-ratio weight on the first path increment; valid
//            for every factor because B_1 is the first increment under
//            all of them)
//   rho     e^{-rT} (-T (Sbar - K)+ + 1{.} (1/d) sum_j S_j j dt)
//   theta   e^{-rT} (-r (Sbar - K)+ + 1{.} (1/d) sum_j S_j ((r - sigma^2/2) j/d
//            + sigma B_j / (2T)))   [dP/dT, factor rebuilt as sqrt(T)]
//   vega    e^{-rT} 1{.} (1/d) sum_j S_j (B_j - sigma j dt)    (pathwise)
// Exponent overflow saturates through the kernel exp (0 or +inf), so the
// payoff degrades to +inf rather than NaN when parameters push a path past
// the representable range.
double asian_eval(const MarketParams& mp, const FactorMatrix& R, Greek g,
                  const double* z);

// Same value for n row-major points, batched through the active kernel
// provider; out[i] equals the single-point evaluation bit for bit.
void asian_eval_batch(const MarketParams& mp, const FactorMatrix& R, Greek g,
                      const double* z, size_t n, double* out);

struct AsianIntegrands {
    RealFn payoff, delta, gamma, rho, theta, vega;
    const RealFn& get(Greek g) const;
};

// Closures over a shared precomputed context; pure and reentrant.
AsianIntegrands asian_integrands(const MarketParams& mp, const FactorMatrix& R);

// Basket payoff (w1 Sbar1 + w2 Sbar2 - K)+, undiscounted, on z in R^{2d}.
// The 2d x 2d factor already contains the per-leg volatilities:
//   S_j^(1) = S0 exp((r1 - sigma1^2/2) j dt + (Rz)_j)
//   S_j^(2) = S0 exp((r2 - sigma2^2/2) j dt + (Rz)_{d+j})
double basket_eval(const BasketParams& bp, const FactorMatrix& R, const double* z);
void basket_eval_batch(const BasketParams& bp, const FactorMatrix& R,
                       const double* z, size_t n, double* out);
RealFn basket_integrand(const BasketParams& bp, const FactorMatrix& R);

// Geometric-average payoff (exp((1/d) sum_j log S_j) - K)+, undiscounted
// like the arithmetic payoff. Its expectation is known in closed form,
// which makes it the calibration integrand for the whole pipeline.
double geometric_eval(const MarketParams& mp, const FactorMatrix& R, const double* z);
void geometric_eval_batch(const MarketParams& mp, const FactorMatrix& R,
                          const double* z, size_t n, double* out);
RealFn geometric_payoff(const MarketParams& mp, const FactorMatrix& R);

// Closed form: the geometric average is lognormal, log G ~ N(m, v) with
//   m = log S0 + (r - sigma^2/2) T (d+1) / (2d)
//   v = sigma^2 T (d+1)(2d+1) / (6 d^2)
// and E(G - K)+ = e^{m + v/2} Phi(d1) - K Phi(d2), d1 = (m - log K + v)/sqrt(v),
// d2 = d1 - sqrt(v). Requires sigma > 0; K <= 0 degenerates to E[G] - K.
double geometric_asian_price(const MarketParams& mp);

}  // namespace pqmc
