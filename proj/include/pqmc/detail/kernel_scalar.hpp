#pragma once
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

// Element-wise scalar kernels. The AVX2 TU re-expresses exactly these
// operation DAGs with intrinsics; any change here must be mirrored there or
// the bit-identical dispatch contract breaks.

namespace pqmc::kern {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// ---------------------------------------------------------------- exp ----
// Cody-Waite range reduction, degree-13 Taylor core on |r| <= ln2/2.
inline constexpr double kExpZeroBelow = -708.0;
inline constexpr double kExpInfAbove = 709.0;
namespace expc {
inline constexpr double LOG2E = 1.4426950408889634074;
inline constexpr double LN2_HI = 6.93147180369123816490e-01;
inline constexpr double LN2_LO = 1.90821492927058770002e-10;
inline constexpr double SHIFT = 6755399441055744.0;  // 1.5 * 2^52
inline constexpr double C[12] = {
    1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
    1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
    1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        1.0 / 2.0};
}  // namespace expc

inline double exp1(double x) {
    const double t = x * expc::LOG2E + expc::SHIFT;
    const int64_t ki =
        static_cast<int64_t>(std::bit_cast<uint64_t>(t) & 0x000FFFFFFFFFFFFFull) -
        0x0008000000000000ll;
    const double kd = t - expc::SHIFT;
    const double r = (x - kd * expc::LN2_HI) - kd * expc::LN2_LO;
    double p = expc::C[0];
    for (int i = 1; i < 12; ++i) p = p * r + expc::C[i];
    p = p * r + 1.0;
    p = p * r + 1.0;
    const double scale =
        std::bit_cast<double>(static_cast<uint64_t>(ki + 1023) << 52);
    double res = p * scale;
    if (x <= kExpZeroBelow) res = 0.0;
    if (x >= kExpInfAbove) res = std::numeric_limits<double>::infinity();
    return res;
}

// --------------------------------------------------------------- erfc ----
// W. J. Cody's rational Chebyshev approximation (Math. Comp. 1969), the
// SPECFUN coefficient set. Three regimes split at 0.46875 and 4.
namespace erfcc {
inline constexpr double A[5] = {3.1611237438705656, 113.864154151050156,
                                377.485237685302021, 3209.37758913846947,
                                0.185777706184603153};
inline constexpr double B[4] = {23.6012909523441209, 244.024637934444173,
                                1282.61652607737228, 2844.23683343917062};
inline constexpr double C[9] = {
    0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
    298.635138197400131,  881.95222124176909,  1712.04761263407058,
    2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
inline constexpr double D[8] = {15.7449261107098347, 117.693950891312499,
                                537.181101862009858, 1621.38957456669019,
                                3290.79923573345963, 4362.61909014324716,
                                3439.36767414372164, 1230.33935480374942};
inline constexpr double P[6] = {0.305326634961232344, 0.360344899949804439,
                                0.125781726111229246, 0.0160837851487422766,
                                6.58749161529837803e-4, 0.0163153871373020978};
inline constexpr double Q[5] = {2.56852019228982242, 1.87295284992346047,
                                0.527905102951428412, 0.0605183413124413191,
                                0.00233520497626869185};
inline constexpr double SQRPI = 0.56418958354775628695;
inline constexpr double THRESH = 0.46875;
inline constexpr double XBIG = 26.543;
inline constexpr double XSMALL = 1.11e-16;
}  // namespace erfcc

// exp(-y*y) with the argument split at 1/16 granularity; y >= 0.
inline double erfc_exp_factor(double y) {
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    return exp1(-ysq * ysq) * exp1(-del);
}

inline double erfc1(double x) {
    using namespace erfcc;
    const double y = std::fabs(x);
    double result;
    if (y <= THRESH) {
        const double ysq = (y > XSMALL) ? y * y : 0.0;
        double xnum = A[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + A[i]) * ysq;
            xden = (xden + B[i]) * ysq;
        }
        const double erfv = x * (xnum + A[3]) / (xden + B[3]);
        result = 1.0 - erfv;
        return result;  // sign fixup below is for the erfc branches
    } else if (y <= 4.0) {
        double xnum = C[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        result = (xnum + C[7]) / (xden + D[7]);
        result = erfc_exp_factor(y) * result;
    } else if (y < XBIG) {
        const double ysq = 1.0 / (y * y);
        double xnum = P[5] * ysq;
        double xden = ysq;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + P[i]) * ysq;
            xden = (xden + Q[i]) * ysq;
        }
        result = ysq * (xnum + P[4]) / (xden + Q[4]);
        result = (SQRPI - result) / y;
        result = erfc_exp_factor(y) * result;
    } else {
        result = 0.0;
    }
    if (x < 0.0) result = 2.0 - result;
    return result;
}

inline double norm_cdf_upper1(double x) { return 0.5 * erfc1(x * kInvSqrt2); }
inline double norm_cdf1(double x) { return 0.5 * erfc1(-x * kInvSqrt2); }
inline double norm_pdf1(double z) { return kInvSqrt2Pi * exp1(-0.5 * z * z); }

// ------------------------------------------------------------ inverse ----
// Wichura's AS241 (PPND16) rational approximation, then one Halley step
// against Phi with the residual taken on the nearer tail so it stays
// relatively accurate for extreme u.
namespace as241 {
inline constexpr double AC[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
    3.3430575583588128105e+4, 2.5090809287301226727e+3};
inline constexpr double BC[7] = {
    4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
    2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
    5.2264952788528545610e+3};
inline constexpr double CC[8] = {
    1.42343711074968357734e0,    4.63033784615654529590e0,
    5.76949722146069140550e0,    3.64784832476320460504e0,
    1.27045825245236838258e0,    2.41780725177450611770e-1,
    2.27238449892691845833e-2,   7.74545014278341407640e-4};
inline constexpr double DC[7] = {
    2.05319162663775882187e0,  1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1,
    1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9};
inline constexpr double EC[8] = {
    6.65790464350110377720e0,  5.46378491116411436990e0,
    1.78482653991729133580e0,  2.96560571828504891230e-1,
    2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
inline constexpr double FC[7] = {
    5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4,
    1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15};
}  // namespace as241

inline double inv_norm_cdf_raw(double u) {
    using namespace as241;
    const double q = u - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        double nu = AC[7], de = BC[6];
        for (int i = 6; i >= 0; --i) nu = nu * r + AC[i];
        for (int i = 5; i >= 0; --i) de = de * r + BC[i];
        de = de * r + 1.0;
        return q * nu / de;
    }
    double r = (q < 0.0) ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        double nu = CC[7], de = DC[6];
        for (int i = 6; i >= 0; --i) nu = nu * r + CC[i];
        for (int i = 5; i >= 0; --i) de = de * r + DC[i];
        de = de * r + 1.0;
        z = nu / de;
    } else {
        r -= 5.0;
        double nu = EC[7], de = FC[6];
        for (int i = 6; i >= 0; --i) nu = nu * r + EC[i];
        for (int i = 5; i >= 0; --i) de = de * r + FC[i];
        de = de * r + 1.0;
        z = nu / de;
    }
    return (q < 0.0) ? -z : z;
}

inline double inv_norm_cdf1(double u) {
    double z = inv_norm_cdf_raw(u);
    // Halley refinement of Phi(z) = u; residual on the nearer tail.
    const double e = (u <= 0.5) ? (norm_cdf_upper1(-z) - u)
                                : ((1.0 - u) - norm_cdf_upper1(z));
    const double pd = norm_pdf1(z);
    double t = (pd > 0.0) ? e / pd : 0.0;
    z -= t / (1.0 + 0.5 * z * t);
    return z;
}

}  // namespace pqmc::kern
