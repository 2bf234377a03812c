#include "pqmc/normal.hpp"

#include <cmath>
#include <stdexcept>

#include "pqmc/detail/kernel_scalar.hpp"
#include "pqmc/simd.hpp"

namespace pqmc {

double norm_cdf(double x) { return kern::norm_cdf1(x); }
double norm_cdf_upper(double x) { return kern::norm_cdf_upper1(x); }
double norm_pdf(double x) { return kern::norm_pdf1(x); }

double norm_inv_cdf(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("norm_inv_cdf needs 0 < u < 1");
    return kern::inv_norm_cdf1(u);
}

double log_norm_cdf_upper(double x) {
    // Direct evaluation is exact until the tail underflows near x = 37.5;
    // switch to the asymptotic series well before that.
    if (!(x > 34.0)) return std::log(norm_cdf_upper(x));
    // Phi_bar(x) = phi(x)/x (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...);
    // five terms leave a relative error below 3e-15 for x > 34.
    const double ix2 = 1.0 / (x * x);
    const double series =
        -ix2 * (1.0 - 3.0 * ix2 * (1.0 - 5.0 * ix2 * (1.0 - 7.0 * ix2 * (1.0 - 9.0 * ix2))));
    return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI) - std::log(x) +
           std::log1p(series);
}

double gaussian_partial_moment(double a, double gamma, int order) {
    if (order != 0 && order != 1)
        throw std::invalid_argument("partial moment order must be 0 or 1");
    const double ea = std::exp(0.5 * a * a);
    const double tail = norm_cdf_upper(gamma - a);
    if (order == 0) return ea * tail;
    return ea * (norm_pdf(gamma - a) + a * tail);
}

void to_gaussian(const double* u, double* z, size_t n) {
    simd::kernels().inv_norm_cdf_vec(u, z, n);
}

std::vector<double> to_gaussian(const PointSet& ps) {
    std::vector<double> z(ps.points.size());
    to_gaussian(ps.points.data(), z.data(), z.size());
    return z;
}

}  // namespace pqmc
