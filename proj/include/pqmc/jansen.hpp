#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "pqmc/linalg.hpp"
#include "pqmc/sobol.hpp"

namespace pqmc {

using RealFn = std::function<double(const double*)>;

// Shared settings for the pick-freeze estimators: each of `replicates`
// independent runs draws 2^m scrambled Sobol' points in d+1 dimensions,
// ordered (z, z_tilde, y). Standard errors come from the replicate spread.
struct JansenOptions {
    int m = 10;
    int replicates = 30;
    uint64_t seed = 0;
    Scramble scramble = Scramble::linear_matrix_shift;
    bool gaussian = true;  // false: inputs uniform on [0,1)^d (coordinates only)
};

struct ProjectionIndexEstimate {
    std::vector<double> theta;
    double tau_upper = 0.0;        // estimate of the total index (unnormalized)
    double stderr_tau = 0.0;
    double variance = 0.0;         // estimate of Var f on the same samples
    double stderr_variance = 0.0;
    size_t n = 0;
    uint64_t seed = 0;
};

// Total Sobol' index of the projection z = theta . x for Gaussian x:
// (1/2) E[(f(z theta + C y) - f(z~ theta + C y))^2] where C is the d x (d-1)
// completion (row-major) making [theta | C] orthogonal.
ProjectionIndexEstimate jansen_tau_projection(const RealFn& f, int d,
                                              const std::vector<double>& theta,
                                              const std::vector<double>& completion,
                                              const JansenOptions& opt);

// Same estimator for coordinate j (1-based): theta = e_j, completion the
// remaining identity columns. Works on either input domain.
ProjectionIndexEstimate jansen_tau_coordinate(const RealFn& f, int d, int j,
                                              const JansenOptions& opt);

struct MeanDimensionEstimate {
    double nu = 0.0;
    double stderr_nu = 0.0;
    double variance = 0.0;
    double stderr_variance = 0.0;
    std::vector<double> tau;         // per-coordinate total indices
    std::vector<double> tau_stderr;
};

// nu = sum_j tau_j / variance; >= 1 for any nonconstant f. Throws
// NumericalError when the variance estimate is zero.
MeanDimensionEstimate mean_dimension(const RealFn& f, int d, const JansenOptions& opt);

// f(x) = (1/2) x^T A x + b^T x, the family with closed-form indices.
struct QuadraticForm {
    SymMatrix A;
    std::vector<double> b;
    double operator()(const double* x) const;
};

// tau^2(theta) = theta^T A^2 theta + (theta^T b)^2 - (1/2)(theta^T A theta)^2
double quadratic_tau_closed_form(const QuadraticForm& q,
                                 const std::vector<double>& theta);

// E[grad f grad f^T] = A^2 + b b^T for standard Gaussian input.
SymMatrix quadratic_gradient_covariance(const QuadraticForm& q);

struct PoincareGapEstimate {
    double tau = 0.0;
    double stderr_tau = 0.0;
    double upper = 0.0;   // theta^T C_hat theta
    double gap = 0.0;     // upper - tau; the Poincare bound predicts >= 0
    bool violation = false;  // gap < -3 stderr
};

// Compare the Jansen estimate against the gradient-covariance upper bound.
PoincareGapEstimate poincare_gap(const RealFn& f, int d,
                                 const std::vector<double>& theta,
                                 const SymMatrix& C_hat, const JansenOptions& opt);

}  // namespace pqmc
