#pragma once
#include <cstddef>
#include <vector>

#include "pqmc/sobol.hpp"

namespace pqmc {

double norm_cdf(double x);
double norm_cdf_upper(double x);  // computed directly, keeps tail accuracy
double norm_pdf(double x);

// Inverse of norm_cdf; throws std::invalid_argument unless 0 < u < 1.
double norm_inv_cdf(double u);

// log(norm_cdf_upper(x)), finite deep into the right tail where the cdf
// itself underflows (asymptotic series past x = 34).
double log_norm_cdf_upper(double x);

// I_k(a, gamma) = integral over [gamma, inf) of z^k e^{az} phi(z) dz for
// k in {0,1}:
//   I_0 = e^{a^2/2} UpperPhi(gamma - a)
//   I_1 = e^{a^2/2} (phi(gamma - a) + a UpperPhi(gamma - a))
// gamma = -inf gives the full moment.
double gaussian_partial_moment(double a, double gamma, int order);

// Componentwise inverse-CDF map to standard Gaussians, batched through the
// active kernel provider.
void to_gaussian(const double* u, double* z, size_t n);
std::vector<double> to_gaussian(const PointSet& ps);

}  // namespace pqmc
