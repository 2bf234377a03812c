#include "pqmc/jansen.hpp"

#include <cmath>
#include <stdexcept>

#include "pqmc/errors.hpp"
#include "pqmc/normal.hpp"
#include "pqmc/rng.hpp"

namespace pqmc {

namespace {

constexpr uint64_t kTagJansen = 0x7A225E2u;

void check_frame(int d, const std::vector<double>& theta,
                 const std::vector<double>& completion) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (static_cast<int>(theta.size()) != d)
        throw std::invalid_argument("projection vector has wrong dimension");
    if (completion.size() != static_cast<size_t>(d) * (d - 1))
        throw std::invalid_argument("completion must be d x (d-1)");
    double nrm = 0.0;
    for (double t : theta) nrm += t * t;
    if (std::abs(nrm - 1.0) > 1e-10)
        throw std::invalid_argument("projection vector must be unit length");
    // Gram matrix of [theta | completion] against the identity
    auto col = [&](int c, int i) {
        return c == 0 ? theta[i] : completion[static_cast<size_t>(i) * (d - 1) + (c - 1)];
    };
    for (int c1 = 0; c1 < d; ++c1) {
        for (int c2 = c1; c2 < d; ++c2) {
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += col(c1, i) * col(c2, i);
            double want = c1 == c2 ? 1.0 : 0.0;
            if (std::abs(dot - want) > 1e-8)
                throw std::invalid_argument("completion is not orthogonal to 1e-8");
        }
    }
}

struct ReplicateMoments {
    double tau = 0.0;
    double var = 0.0;   // within-replicate sample variance
    double mean = 0.0;  // replicate estimate of E f
};

// One scrambled-net replicate of the pick-freeze sum. `assemble` fills the
// two input vectors x and x_swap from (z, z_tilde, y).
template <typename Assemble>
ReplicateMoments run_replicate(const RealFn& f, int d, const JansenOptions& opt,
                               uint64_t rep_seed, Assemble&& assemble) {
    PointSet ps = scramble(generate_sobol(opt.m, d + 1), opt.scramble, rep_seed);
    std::vector<double> row(ps.points);
    if (opt.gaussian) to_gaussian(row.data(), row.data(), row.size());
    size_t n = ps.n();
    std::vector<double> x(d), xs(d), fv(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double* u = &row[i * (d + 1)];
        assemble(u[0], u[1], u + 2, x.data(), xs.data());
        fv[i] = f(x.data());
        double diff = fv[i] - f(xs.data());
        acc += 0.5 * diff * diff;
    }
    ReplicateMoments out;
    out.tau = acc / static_cast<double>(n);
    // two-pass variance: exactly zero for a constant integrand
    double mean = 0.0;
    for (double v : fv) mean += v;
    mean /= static_cast<double>(n);
    double s2 = 0.0;
    for (double v : fv) s2 += (v - mean) * (v - mean);
    out.var = s2 / (static_cast<double>(n) - 1.0);
    out.mean = mean;
    return out;
}

struct Pooled {
    double tau, tau_se, var, var_se;
};

// Unbiased variance of f from R scrambles: within-replicate sample variances
// are biased by the intra-scramble covariance, but (n-1)/n * mean(within) +
// var(replicate means) cancels it exactly for any dependence structure.
double combine_variance(const std::vector<double>& vars,
                        const std::vector<double>& means, double n) {
    int R = static_cast<int>(vars.size());
    double w = 0.0;
    for (double v : vars) w += v;
    w /= R;
    double mm = 0.0;
    for (double m : means) mm += m;
    mm /= R;
    double b = 0.0;
    for (double m : means) b += (m - mm) * (m - mm);
    b /= (R - 1);
    return (n - 1.0) / n * w + b;
}

template <typename Assemble>
Pooled run_all(const RealFn& f, int d, const JansenOptions& opt, uint64_t stream,
               Assemble&& assemble) {
    if (opt.replicates < 2) throw std::invalid_argument("need at least 2 replicates");
    if (opt.m < 1) throw std::invalid_argument("need at least 2 points per replicate");
    int R = opt.replicates;
    std::vector<double> taus(R), vars(R), means(R);
    for (int rep = 0; rep < R; ++rep) {
        auto mo = run_replicate(f, d, opt, derive_seed(stream, rep), assemble);
        taus[rep] = mo.tau;
        vars[rep] = mo.var;
        means[rep] = mo.mean;
    }
    auto mean_se = [R](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= R;
        double s2 = 0.0;
        for (double x : v) s2 += (x - mean) * (x - mean);
        s2 /= (R - 1);
        return std::pair<double, double>(mean, std::sqrt(s2 / R));
    };
    auto [tm, ts] = mean_se(taus);
    auto [vm, vs] = mean_se(vars);
    (void)vm;
    double n = static_cast<double>(size_t(1) << opt.m);
    return {tm, ts, combine_variance(vars, means, n), vs};
}

}  // namespace

ProjectionIndexEstimate jansen_tau_projection(const RealFn& f, int d,
                                              const std::vector<double>& theta,
                                              const std::vector<double>& completion,
                                              const JansenOptions& opt) {
    check_frame(d, theta, completion);
    if (!opt.gaussian)
        throw std::invalid_argument("projection indices are defined for Gaussian input");
    uint64_t stream = derive_seed(opt.seed, kTagJansen);
    auto assemble = [&](double z, double zs, const double* y, double* x, double* xs) {
        for (int i = 0; i < d; ++i) {
            double tail = 0.0;
            const double* ci = &completion[static_cast<size_t>(i) * (d - 1)];
            for (int c = 0; c < d - 1; ++c) tail += ci[c] * y[c];
            x[i] = z * theta[i] + tail;
            xs[i] = zs * theta[i] + tail;
        }
    };
    Pooled p = run_all(f, d, opt, stream, assemble);
    ProjectionIndexEstimate est;
    est.theta = theta;
    est.tau_upper = p.tau;
    est.stderr_tau = p.tau_se;
    est.variance = p.var;
    est.stderr_variance = p.var_se;
    est.n = (size_t(1) << opt.m) * static_cast<size_t>(opt.replicates);
    est.seed = opt.seed;
    return est;
}

ProjectionIndexEstimate jansen_tau_coordinate(const RealFn& f, int d, int j,
                                              const JansenOptions& opt) {
    if (j < 1 || j > d) throw std::invalid_argument("coordinate index out of range");
    uint64_t stream = derive_seed(opt.seed, kTagJansen, static_cast<uint64_t>(j));
    int jj = j - 1;
    auto assemble = [&](double z, double zs, const double* y, double* x, double* xs) {
        int c = 0;
        for (int i = 0; i < d; ++i) {
            double v = i == jj ? 0.0 : y[c++];
            x[i] = v;
            xs[i] = v;
        }
        x[jj] = z;
        xs[jj] = zs;
    };
    Pooled p = run_all(f, d, opt, stream, assemble);
    ProjectionIndexEstimate est;
    est.theta.assign(d, 0.0);
    est.theta[jj] = 1.0;
    est.tau_upper = p.tau;
    est.stderr_tau = p.tau_se;
    est.variance = p.var;
    est.stderr_variance = p.var_se;
    est.n = (size_t(1) << opt.m) * static_cast<size_t>(opt.replicates);
    est.seed = opt.seed;
    return est;
}

MeanDimensionEstimate mean_dimension(const RealFn& f, int d, const JansenOptions& opt) {
    MeanDimensionEstimate out;
    out.tau.resize(d);
    out.tau_stderr.resize(d);
    // Per-replicate nu so its spread gives an honest standard error: ratio of
    // the coordinate sum to the variance pooled over the d coordinate runs.
    int R = opt.replicates;
    if (R < 3) throw std::invalid_argument("need at least 3 replicates");
    std::vector<std::vector<double>> taus(d, std::vector<double>(R));
    std::vector<std::vector<double>> vars(d, std::vector<double>(R));
    std::vector<std::vector<double>> mus(d, std::vector<double>(R));
    for (int j = 1; j <= d; ++j) {
        uint64_t stream = derive_seed(opt.seed, kTagJansen, static_cast<uint64_t>(j));
        int jj = j - 1;
        auto assemble = [&](double z, double zs, const double* y, double* x, double* xs) {
            int c = 0;
            for (int i = 0; i < d; ++i) {
                double v = i == jj ? 0.0 : y[c++];
                x[i] = v;
                xs[i] = v;
            }
            x[jj] = z;
            xs[jj] = zs;
        };
        for (int rep = 0; rep < R; ++rep) {
            auto mo = run_replicate(f, d, opt, derive_seed(stream, rep), assemble);
            taus[jj][rep] = mo.tau;
            vars[jj][rep] = mo.var;
            mus[jj][rep] = mo.mean;
        }
    }
    // nu as a ratio of unbiased pieces, jackknifed over replicates: the
    // numerator averages the coordinate sums, the denominator is the
    // bias-corrected variance pooled over the d coordinate streams.
    double n = static_cast<double>(size_t(1) << opt.m);
    auto nu_from = [&](int skip) {
        double tnum = 0.0, denom = 0.0;
        int Reff = skip < 0 ? R : R - 1;
        for (int jj = 0; jj < d; ++jj) {
            double w = 0.0, mm = 0.0;
            for (int rep = 0; rep < R; ++rep) {
                if (rep == skip) continue;
                tnum += taus[jj][rep];
                w += vars[jj][rep];
                mm += mus[jj][rep];
            }
            w /= Reff;
            mm /= Reff;
            double b = 0.0;
            for (int rep = 0; rep < R; ++rep) {
                if (rep == skip) continue;
                b += (mus[jj][rep] - mm) * (mus[jj][rep] - mm);
            }
            b /= (Reff - 1);
            denom += (n - 1.0) / n * w + b;
        }
        tnum /= Reff;
        denom /= d;
        return std::pair<double, double>(tnum, denom);
    };
    auto [tfull, vfull] = nu_from(-1);
    if (vfull <= 0.0)
        throw NumericalError("mean dimension undefined for zero-variance function", vfull);
    double nu_plain = tfull / vfull;
    std::vector<double> loo(R);
    double loo_mean = 0.0;
    for (int rep = 0; rep < R; ++rep) {
        auto [t, v] = nu_from(rep);
        if (v <= 0.0)
            throw NumericalError("mean dimension undefined for zero-variance function", v);
        loo[rep] = t / v;
        loo_mean += loo[rep];
    }
    loo_mean /= R;
    double loo_s2 = 0.0;
    for (double v : loo) loo_s2 += (v - loo_mean) * (v - loo_mean);
    out.nu = R * nu_plain - (R - 1) * loo_mean;
    out.stderr_nu = std::sqrt((R - 1.0) / R * loo_s2);
    out.variance = vfull;
    auto mean_se = [R](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= R;
        double s2 = 0.0;
        for (double x : v) s2 += (x - mean) * (x - mean);
        return std::pair<double, double>(mean, std::sqrt(s2 / (R - 1) / R));
    };
    double vse_acc = 0.0;
    for (int jj = 0; jj < d; ++jj) {
        auto [tm, tse] = mean_se(taus[jj]);
        out.tau[jj] = tm;
        out.tau_stderr[jj] = tse;
        auto [vm, vse] = mean_se(vars[jj]);
        vse_acc += vse * vse;
        (void)vm;
    }
    out.stderr_variance = std::sqrt(vse_acc) / d;
    return out;
}

double QuadraticForm::operator()(const double* x) const {
    int d = A.n;
    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j = 0; j < d; ++j) row += A.at(i, j) * x[j];
        quad += x[i] * row;
        lin += b[i] * x[i];
    }
    return 0.5 * quad + lin;
}

double quadratic_tau_closed_form(const QuadraticForm& q,
                                 const std::vector<double>& theta) {
    int d = q.A.n;
    if (static_cast<int>(theta.size()) != d)
        throw std::invalid_argument("projection vector has wrong dimension");
    std::vector<double> At(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) At[i] += q.A.at(i, j) * theta[j];
    double tAAt = 0.0, tAt = 0.0, tb = 0.0;
    for (int i = 0; i < d; ++i) {
        tAAt += At[i] * At[i];
        tAt += theta[i] * At[i];
        tb += theta[i] * q.b[i];
    }
    return tAAt + tb * tb - 0.5 * tAt * tAt;
}

SymMatrix quadratic_gradient_covariance(const QuadraticForm& q) {
    int d = q.A.n;
    SymMatrix C(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double aa = 0.0;
            for (int k = 0; k < d; ++k) aa += q.A.at(i, k) * q.A.at(k, j);
            C.at(i, j) = aa + q.b[i] * q.b[j];
        }
    }
    return C;
}

PoincareGapEstimate poincare_gap(const RealFn& f, int d,
                                 const std::vector<double>& theta,
                                 const SymMatrix& C_hat, const JansenOptions& opt) {
    if (C_hat.n != d) throw std::invalid_argument("covariance dimension mismatch");
    std::vector<double> Q = householder_completion(theta);
    std::vector<double> completion(static_cast<size_t>(d) * (d - 1));
    for (int i = 0; i < d; ++i)
        for (int c = 1; c < d; ++c)
            completion[static_cast<size_t>(i) * (d - 1) + (c - 1)] =
                Q[static_cast<size_t>(i) * d + c];
    ProjectionIndexEstimate est = jansen_tau_projection(f, d, theta, completion, opt);
    PoincareGapEstimate out;
    out.tau = est.tau_upper;
    out.stderr_tau = est.stderr_tau;
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j = 0; j < d; ++j) row += C_hat.at(i, j) * theta[j];
        out.upper += theta[i] * row;
    }
    out.gap = out.upper - out.tau;
    out.violation = out.gap < -3.0 * out.stderr_tau;
    return out;
}

}  // namespace pqmc
