#include "pqmc/active.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pqmc/errors.hpp"
#include "pqmc/normal.hpp"
#include "pqmc/rng.hpp"

namespace pqmc {

namespace {
constexpr uint64_t kTagGradient = 0x912AD5u;
}

std::vector<double> fd_gradient(const RealFn& f, const std::vector<double>& x,
                                double eps) {
    int d = static_cast<int>(x.size());
    if (d < 1) throw std::invalid_argument("gradient needs at least one coordinate");
    if (!(eps > 0.0)) throw std::invalid_argument("step size must be positive");
    double f0 = f(x.data());
    if (!std::isfinite(f0))
        throw NumericalError("gradient base evaluation not finite", f0);
    std::vector<double> xs(x);
    std::vector<double> g(d);
    for (int j = 0; j < d; ++j) {
        double keep = xs[j];
        xs[j] = keep + eps;
        double fj = f(xs.data());
        xs[j] = keep;
        if (!std::isfinite(fj))
            throw NumericalError("gradient evaluation not finite at coordinate " +
                                     std::to_string(j + 1),
                                 fj);
        g[j] = (fj - f0) / eps;
    }
    return g;
}

GradientSample sample_gradients(const RealFn& f, int d, const EstimateCOptions& opt) {
    if (opt.M < 2) throw std::invalid_argument("need at least 2 gradient samples");
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (opt.M < d)
        std::fprintf(stderr,
                     "note: %d gradient samples for %d dimensions; the "
                     "covariance estimate is rank-deficient\n",
                     opt.M, d);
    int m = 0;
    while ((size_t(1) << m) < static_cast<size_t>(opt.M)) ++m;
    PointSet ps = scramble(generate_sobol(m, d), opt.scramble,
                           derive_seed(opt.seed, kTagGradient));
    std::vector<double> z = to_gaussian(ps);
    GradientSample out;
    out.M = opt.M;
    out.d = d;
    out.fd_epsilon = opt.fd_epsilon;
    out.grads.resize(static_cast<size_t>(opt.M) * d);
    out.eval_points.assign(z.begin(), z.begin() + static_cast<size_t>(opt.M) * d);
    std::vector<double> x(d);
    for (int i = 0; i < opt.M; ++i) {
        for (int j = 0; j < d; ++j) x[j] = z[static_cast<size_t>(i) * d + j];
        std::vector<double> g = fd_gradient(f, x, opt.fd_epsilon);
        for (int j = 0; j < d; ++j) out.grads[static_cast<size_t>(i) * d + j] = g[j];
    }
    return out;
}

SymMatrix gradient_covariance(const GradientSample& g, bool centered) {
    int d = g.d, M = g.M;
    if (M < 2) throw std::invalid_argument("need at least 2 gradient rows");
    SymMatrix C(d);
    std::vector<double> mean(d, 0.0);
    if (centered) {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < d; ++j) mean[j] += g.grads[static_cast<size_t>(i) * d + j];
        for (int j = 0; j < d; ++j) mean[j] /= M;
    }
    std::vector<double> row(d);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < d; ++j)
            row[j] = g.grads[static_cast<size_t>(i) * d + j] - mean[j];
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) C.at(a, b) += row[a] * row[b];
    }
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            C.at(a, b) /= M;
            C.at(b, a) = C.at(a, b);
        }
    return C;
}

SymMatrix estimate_C(const RealFn& f, int d, const EstimateCOptions& opt) {
    GradientSample g = sample_gradients(f, d, opt);
    return gradient_covariance(g, opt.centered);
}

Rotation rotation_from_C(const SymMatrix& C_hat, CompletionMode mode) {
    int d = C_hat.n;
    if (d < 1) throw std::invalid_argument("empty covariance");
    double scale = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) scale = std::max(scale, std::abs(C_hat.at(i, j)));
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::abs(C_hat.at(i, j) - C_hat.at(j, i)) > 1e-12 * std::max(scale, 1.0))
                throw std::invalid_argument("covariance matrix is not symmetric");
    EigenPairs eg = sym_eigen(C_hat);
    Rotation rot;
    rot.completion_mode = mode;
    rot.spectrum = eg.values;
    rot.theta.resize(d);
    for (int i = 0; i < d; ++i) rot.theta[i] = eg.vec(i, 0);
    if (mode == CompletionMode::eigvec_complement) {
        rot.Theta = eg.vectors;
    } else {
        rot.Theta = householder_completion(rot.theta);
    }
    return rot;
}

Rotation gpca_dimred(const RealFn& h, int dm1, const EstimateCOptions& opt) {
    SymMatrix C = estimate_C(h, dm1, opt);
    Rotation rot = rotation_from_C(C, CompletionMode::eigvec_complement);
    rot.centered = opt.centered;
    return rot;
}

void write_rotation_csv(const std::string& path, const Rotation& rot) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    int d = static_cast<int>(rot.theta.size());
    out << "mode," << (rot.completion_mode == CompletionMode::householder
                           ? "householder"
                           : "eigvec-complement")
        << "," << (rot.centered ? 1 : 0) << "\n";
    auto row = [&](const char* name, const double* v, int n) {
        out << name;
        char buf[32];
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", v[i]);
            out << buf;
        }
        out << "\n";
    };
    row("theta", rot.theta.data(), d);
    row("spectrum", rot.spectrum.data(), static_cast<int>(rot.spectrum.size()));
    for (int i = 0; i < d; ++i) row("Theta", &rot.Theta[static_cast<size_t>(i) * d], d);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Rotation read_rotation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Rotation rot;
    std::string line;
    std::vector<std::vector<double>> theta_rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string name;
        std::getline(ss, name, ',');
        if (name == "mode") {
            std::string mode, centered;
            std::getline(ss, mode, ',');
            std::getline(ss, centered, ',');
            rot.completion_mode = mode == "householder" ? CompletionMode::householder
                                                        : CompletionMode::eigvec_complement;
            rot.centered = centered == "1";
            continue;
        }
        std::vector<double> vals;
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (name == "theta")
            rot.theta = vals;
        else if (name == "spectrum")
            rot.spectrum = vals;
        else if (name == "Theta")
            theta_rows.push_back(vals);
        else
            throw std::runtime_error("unknown rotation row: " + name);
    }
    size_t d = rot.theta.size();
    if (theta_rows.size() != d)
        throw std::runtime_error("rotation file has wrong matrix shape");
    rot.Theta.resize(d * d);
    for (size_t i = 0; i < d; ++i) {
        if (theta_rows[i].size() != d)
            throw std::runtime_error("rotation file has ragged matrix rows");
        for (size_t j = 0; j < d; ++j) rot.Theta[i * d + j] = theta_rows[i][j];
    }
    return rot;
}

}  // namespace pqmc
