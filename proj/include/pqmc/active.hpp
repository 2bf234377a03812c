#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pqmc/jansen.hpp"
#include "pqmc/linalg.hpp"
#include "pqmc/sobol.hpp"

namespace pqmc {

// Forward-difference gradient, exactly d+1 evaluations of f. Throws
// NumericalError naming the coordinate when an evaluation is not finite.
std::vector<double> fd_gradient(const RealFn& f, const std::vector<double>& x,
                                double eps = 1e-6);

struct GradientSample {
    std::vector<double> grads;        // M x d row-major
    std::vector<double> eval_points;  // M x d Gaussian sample rows
    int M = 0;
    int d = 0;
    double fd_epsilon = 0.0;
    bool analytic = false;
};

struct EstimateCOptions {
    int M = 128;
    double fd_epsilon = 1e-6;
    bool centered = false;
    uint64_t seed = 0;
    Scramble scramble = Scramble::linear_matrix_shift;
};

// Gradient rows at M RQMC Gaussian points (own seed stream, independent of
// any integration points).
GradientSample sample_gradients(const RealFn& f, int d, const EstimateCOptions& opt);

// (1/M) sum g g^T, or the centered version with the mean gradient removed.
SymMatrix gradient_covariance(const GradientSample& g, bool centered);

// sample_gradients + gradient_covariance
SymMatrix estimate_C(const RealFn& f, int d, const EstimateCOptions& opt);

enum class CompletionMode { eigvec_complement, householder };

// Orthogonal change of variables with the leading gradient-covariance
// direction first.
struct Rotation {
    std::vector<double> theta;     // unit d-vector, first column of Theta
    std::vector<double> Theta;     // d x d row-major orthogonal
    std::vector<double> spectrum;  // descending eigenvalues of C_hat
    CompletionMode completion_mode = CompletionMode::eigvec_complement;
    bool centered = false;
};

// Eigendecomposition of C_hat; completion either the remaining eigenvector
// columns (default) or the Householder reflection sending e1 to theta.
Rotation rotation_from_C(const SymMatrix& C_hat,
                         CompletionMode mode = CompletionMode::eigvec_complement);

// Gradient PCA of an already pre-integrated integrand on R^{d-1}: the full
// eigenvector rotation of its gradient covariance.
Rotation gpca_dimred(const RealFn& h, int dm1, const EstimateCOptions& opt);

// CSV cache of a rotation (theta row, spectrum row, then Theta rows);
// round-trips exactly.
void write_rotation_csv(const std::string& path, const Rotation& rot);
Rotation read_rotation_csv(const std::string& path);

}  // namespace pqmc
