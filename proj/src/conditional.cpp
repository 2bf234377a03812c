#include "pqmc/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "pqmc/errors.hpp"
#include "pqmc/linalg.hpp"
#include "pqmc/normal.hpp"
#include "pqmc/simd.hpp"

namespace pqmc {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)

struct Workspace {
    std::vector<double> c, logA, ebuf, lp, coef, nodes, weights, zfull, vals;
    void ensure(int d) {
        const size_t need = static_cast<size_t>(d);
        if (c.size() < need) {
            c.resize(need);
            logA.resize(need);
            ebuf.resize(2 * need + 1);
            lp.resize(2 * need + 1);
            coef.resize(2 * need + 1);
        }
    }
};

Workspace& workspace() {
    thread_local Workspace w;
    return w;
}

// log of the mean (1/d) sum_j e^{logA_j + a_j z} and, optionally, the
// softmax-weighted mean loading (the log-derivative in z). logA is taken
// to already contain the 1/d factor.
double log_mean_at(const double* logA, const double* a, int d, double z,
                   double* wbar, std::vector<double>& ebuf) {
    double mx = -HUGE_VAL;
    for (int j = 0; j < d; ++j) {
        const double t = logA[j] + a[j] * z;
        ebuf[static_cast<size_t>(j)] = t;
        if (t > mx) mx = t;
    }
    const auto& kk = simd::kernels();
    for (int j = 0; j < d; ++j) ebuf[static_cast<size_t>(j)] -= mx;
    kk.exp_vec(ebuf.data(), ebuf.data(), static_cast<size_t>(d));
    double s = 0.0, sw = 0.0;
    for (int j = 0; j < d; ++j) {
        s += ebuf[static_cast<size_t>(j)];
        sw += a[j] * ebuf[static_cast<size_t>(j)];
    }
    if (wbar) *wbar = sw / s;
    return mx + std::log(s);
}

struct LogSolve {
    double gamma;
    int iterations;
    double residual_rel;  // |S_bar(gamma)/K - 1|
};

// Damped Newton for log_mean(z) = logK, started at 0, with a bisection
// bracket grown geometrically; the residual gate is |S_bar - K| <= K tol.
LogSolve solve_log(const double* logA, const double* a, int d, double logK) {
    constexpr double kTol = 1e-12;
    Workspace& ws = workspace();
    ws.ensure(d);
    double wbar;
    double z = 0.0;
    double g = log_mean_at(logA, a, d, z, &wbar, ws.ebuf) - logK;
    if (std::fabs(std::expm1(g)) <= kTol) return {z, 0, std::fabs(std::expm1(g))};

    double lo, hi;
    if (g > 0.0) {
        hi = 0.0;
        double probe = -1.0;
        while (true) {
            const double gp = log_mean_at(logA, a, d, probe, nullptr, ws.ebuf) - logK;
            if (gp <= 0.0) {
                lo = probe;
                break;
            }
            hi = probe;
            probe *= 2.0;
            if (probe < -1e300)
                throw NumericalError("threshold bracket not found", gp);
        }
    } else {
        lo = 0.0;
        double probe = 1.0;
        while (true) {
            const double gp = log_mean_at(logA, a, d, probe, nullptr, ws.ebuf) - logK;
            if (gp >= 0.0) {
                hi = probe;
                break;
            }
            lo = probe;
            probe *= 2.0;
            if (probe > 1e300)
                throw NumericalError("threshold bracket not found", gp);
        }
    }

    for (int it = 1; it <= 100; ++it) {
        double zn = z - g / wbar;
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);  // damped step
        z = zn;
        g = log_mean_at(logA, a, d, z, &wbar, ws.ebuf) - logK;
        const double rel = std::fabs(std::expm1(g));
        if (rel <= kTol) return {z, it, rel};
        if (g > 0.0)
            hi = z;
        else
            lo = z;
    }
    throw NumericalError("threshold solve did not converge",
                         std::fabs(std::expm1(g)));
}

// Gauss-Legendre rule on [-1, 1] from the Jacobi matrix of the Legendre
// recurrence; weights are 2 (first eigenvector component)^2.
struct GLRule {
    std::vector<double> x, w;
};

const GLRule& gl_rule(int n) {
    static std::mutex mu;
    static std::map<int, GLRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    SymMatrix J(n);
    for (int i = 1; i < n; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J.at(i - 1, i) = b;
        J.at(i, i - 1) = b;
    }
    EigenPairs ep = sym_eigen(J);
    GLRule rule;
    rule.x.resize(static_cast<size_t>(n));
    rule.w.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        rule.x[static_cast<size_t>(k)] = ep.values[static_cast<size_t>(k)];
        const double v0 = ep.vec(0, k);
        rule.w[static_cast<size_t>(k)] = 2.0 * v0 * v0;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace

ThresholdSolve solve_threshold(const std::vector<ExpTerm>& terms, double K) {
    if (terms.empty()) throw std::invalid_argument("no exponential terms");
    for (const ExpTerm& t : terms) {
        if (!(t.amplitude > 0.0) || !std::isfinite(t.amplitude))
            throw std::invalid_argument("amplitudes must be positive");
        if (!std::isfinite(t.loading))
            throw std::invalid_argument("loadings must be finite");
        if (!(t.loading > 0.0))
            throw MonotonicityError(
                "threshold solve needs strictly positive loadings; the "
                "conditional average is not monotone otherwise");
    }
    if (!std::isfinite(K)) throw std::invalid_argument("K must be finite");
    if (K <= 0.0) return {-HUGE_VAL, 0, 0.0};

    const int d = static_cast<int>(terms.size());
    std::vector<double> logA(static_cast<size_t>(d)), a(static_cast<size_t>(d));
    const double logd = std::log(static_cast<double>(d));
    for (int j = 0; j < d; ++j) {
        logA[static_cast<size_t>(j)] = std::log(terms[static_cast<size_t>(j)].amplitude) - logd;
        a[static_cast<size_t>(j)] = terms[static_cast<size_t>(j)].loading;
    }
    LogSolve s = solve_log(logA.data(), a.data(), d, std::log(K));
    return {s.gamma, s.iterations, s.residual_rel * K};
}

PreintegratedIntegrand::PreintegratedIntegrand(const MarketParams& mp,
                                               const FactorMatrix& R,
                                               Greek greek, PreintOptions opt)
    : mp_(mp), R_(R), greek_(greek), opt_(opt), rule_(opt.rule) {
    if (!(mp.S0 > 0.0)) throw std::invalid_argument("S0 must be positive");
    if (!(mp.K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
    if (!(mp.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(mp.T > 0.0)) throw std::invalid_argument("T must be positive");
    if (mp.d < 1) throw std::invalid_argument("d must be at least 1");
    if (R.n != mp.d) throw std::invalid_argument("factor order does not match d");
    if (opt.quad_nodes < 2 || opt.quad_nodes > 64)
        throw std::invalid_argument("quad_nodes out of range");
    if (!(opt.panel_width > 0.0))
        throw std::invalid_argument("panel_width must be positive");

    d_ = mp.d;
    dt_ = mp.T / mp.d;
    disc_ = std::exp(-mp.r * mp.T);
    mu1_ = mp.r - 0.5 * mp.sigma * mp.sigma;

    int pos = 0, neg = 0;
    for (int j = 0; j < d_; ++j) {
        const double v = R_.at(j, 0);
        if (v > 0.0) ++pos;
        if (v < 0.0) ++neg;
    }
    if (neg == d_) {
        // all-negative leading column: -R generates the same path law and
        // restores monotonicity in z1
        for (double& v : R_.a) v = -v;
        flipped_ = true;
    } else if (pos != d_) {
        if (!opt_.allow_mixed_sign)
            throw MonotonicityError(
                "pre-integration needs a strictly one-signed leading factor "
                "column (" + std::to_string(pos) + " positive, " +
                std::to_string(neg) + " negative of " + std::to_string(d_) +
                " entries); pass allow_mixed_sign to use segmented quadrature");
        if (rule_ == PreintRule::closed_form_kink) {
            rule_ = PreintRule::quadrature;
            std::fprintf(stderr,
                         "note: mixed-sign leading factor column; "
                         "pre-integrating by kink-split quadrature\n");
        }
    }

    w_.resize(static_cast<size_t>(d_));
    a_.resize(static_cast<size_t>(d_));
    mu_.resize(static_cast<size_t>(d_));
    for (int j = 0; j < d_; ++j) {
        w_[static_cast<size_t>(j)] = R_.at(j, 0);
        a_[static_cast<size_t>(j)] = mp.sigma * R_.at(j, 0);
        mu_[static_cast<size_t>(j)] = mu1_ * (j + 1) * dt_;
    }
    ft_rest_.resize(static_cast<size_t>(d_) * (d_ - 1));
    for (int k = 1; k < d_; ++k)
        for (int j = 0; j < d_; ++j)
            ft_rest_[static_cast<size_t>(k - 1) * d_ + j] = R_.at(j, k);
    log_s0d_ = std::log(mp.S0 / mp.d);
}

double PreintegratedIntegrand::operator()(const double* z_rest) const {
    return rule_ == PreintRule::closed_form_kink ? closed_form(z_rest)
                                                 : quadrature(z_rest);
}

void PreintegratedIntegrand::eval_batch(const double* z_rest, size_t n,
                                        double* out) const {
    const size_t stride = static_cast<size_t>(d_ - 1);
    for (size_t i = 0; i < n; ++i) out[i] = (*this)(z_rest + i * stride);
}

// Conditional expectation over z1 given z_rest. Every integrand in the
// family reduces to
//   pref ( sum_j A_j (alpha_j I0(a_j, gamma) + beta_j I1(a_j, gamma))
//          + kappa Phi_bar(gamma) )
// with A_j = (S0/d) e^{mu_j + sigma c_j}, I0/I1 the order-0/1 Gaussian
// partial moments. Expanding the moments gives per-term coefficients
// (alpha_j + beta_j a_j) for Phi_bar(gamma - a_j) and beta_j for
// phi(gamma - a_j); the signed sum runs in log magnitudes so that huge
// A_j and tiny tails cannot overflow or vanish prematurely.
double PreintegratedIntegrand::closed_form(const double* z_rest) const {
    const auto& kk = simd::kernels();
    Workspace& ws = workspace();
    ws.ensure(d_);
    thread_local std::vector<double> zero;
    if (static_cast<int>(zero.size()) < d_) zero.assign(static_cast<size_t>(d_), 0.0);
    kk.affine_fold(ft_rest_.data(), zero.data(), z_rest, ws.c.data(),
                   static_cast<size_t>(d_), static_cast<size_t>(d_ - 1));

    for (int j = 0; j < d_; ++j)
        ws.logA[static_cast<size_t>(j)] =
            log_s0d_ + mu_[static_cast<size_t>(j)] + mp_.sigma * ws.c[static_cast<size_t>(j)];

    double gamma;
    if (mp_.K > 0.0) {
        gamma = solve_log(ws.logA.data(), a_.data(), d_, std::log(mp_.K)).gamma;
    } else {
        gamma = -HUGE_VAL;
    }

    double pref = 1.0, kappa = 0.0;
    switch (greek_) {
        case Greek::payoff: kappa = -mp_.K; break;
        case Greek::delta: pref = disc_ / mp_.S0; break;
        case Greek::gamma: pref = disc_ / (mp_.S0 * mp_.S0); break;
        case Greek::rho: pref = disc_; kappa = mp_.T * mp_.K; break;
        case Greek::theta: pref = disc_; kappa = mp_.r * mp_.K; break;
        case Greek::vega: pref = disc_; break;
    }

    size_t nterm = 0;
    double mx = -HUGE_VAL;
    auto push = [&](double logmag, double c) {
        if (c == 0.0) return;
        ws.lp[nterm] = logmag;
        ws.coef[nterm] = c;
        if (logmag > mx) mx = logmag;
        ++nterm;
    };

    for (int j = 0; j < d_; ++j) {
        const size_t sj = static_cast<size_t>(j);
        const double aj = a_[sj];
        double alpha, beta = 0.0;
        switch (greek_) {
            case Greek::payoff:
            case Greek::delta:
                alpha = 1.0;
                break;
            case Greek::gamma:
                alpha = ws.c[0] / (mp_.sigma * dt_) - 1.0;
                beta = w_[0] / (mp_.sigma * dt_);
                break;
            case Greek::rho:
                alpha = (j + 1) * dt_ - mp_.T;
                break;
            case Greek::theta:
                alpha = -mp_.r + mu1_ * (j + 1) / d_ +
                        mp_.sigma * ws.c[sj] / (2.0 * mp_.T);
                beta = mp_.sigma * w_[sj] / (2.0 * mp_.T);
                break;
            case Greek::vega:
                alpha = ws.c[sj] - mp_.sigma * (j + 1) * dt_;
                beta = w_[sj];
                break;
            default:
                throw std::invalid_argument("unknown Greek");
        }
        const double base = ws.logA[sj] + 0.5 * aj * aj;
        const double u = gamma - aj;
        push(base + log_norm_cdf_upper(u), alpha + beta * aj);
        if (beta != 0.0) push(base - 0.5 * u * u - 0.5 * kLogTwoPi, beta);
    }
    if (kappa != 0.0) push(log_norm_cdf_upper(gamma), kappa);

    double value = 0.0;
    if (nterm > 0 && std::isfinite(mx)) {
        for (size_t i = 0; i < nterm; ++i) ws.ebuf[i] = ws.lp[i] - mx;
        kk.exp_vec(ws.ebuf.data(), ws.ebuf.data(), nterm);
        double s = 0.0;
        for (size_t i = 0; i < nterm; ++i) s += ws.coef[i] * ws.ebuf[i];
        if (s != 0.0)
            value = (s > 0.0 ? 1.0 : -1.0) * std::exp(mx + std::log(std::fabs(s)));
    }
    value *= pref;
    if (greek_ == Greek::payoff && value < 0.0) value = 0.0;
    return value;
}

// Kink-split quadrature of the raw integrand over z1: locate where the
// average crosses the strike, then integrate each smooth piece with
// composite Gauss-Legendre panels against the Gaussian weight. The raw
// integrand comes from the options module, so this path shares nothing
// with the closed form beyond the factor itself.
double PreintegratedIntegrand::quadrature(const double* z_rest) const {
    const auto& kk = simd::kernels();
    Workspace& ws = workspace();
    ws.ensure(d_);
    thread_local std::vector<double> zero;
    if (static_cast<int>(zero.size()) < d_) zero.assign(static_cast<size_t>(d_), 0.0);
    kk.affine_fold(ft_rest_.data(), zero.data(), z_rest, ws.c.data(),
                   static_cast<size_t>(d_), static_cast<size_t>(d_ - 1));
    for (int j = 0; j < d_; ++j)
        ws.logA[static_cast<size_t>(j)] =
            log_s0d_ + mu_[static_cast<size_t>(j)] + mp_.sigma * ws.c[static_cast<size_t>(j)];

    double amax = 0.0;
    bool one_sign = true;
    for (int j = 0; j < d_; ++j) {
        amax = std::max(amax, a_[static_cast<size_t>(j)]);
        if (!(a_[static_cast<size_t>(j)] > 0.0)) one_sign = false;
    }
    const double hi = amax + 40.0;

    std::vector<double> cuts;
    double lo;
    if (mp_.K <= 0.0) {
        lo = -44.0;
    } else if (one_sign) {
        const double gamma =
            solve_log(ws.logA.data(), a_.data(), d_, std::log(mp_.K)).gamma;
        if (gamma >= hi) return 0.0;
        lo = std::max(gamma, -44.0);
    } else {
        // scan [-8, 8] for strike crossings of the (non-monotone) average
        lo = -44.0;
        const double logK = std::log(mp_.K);
        const int grid = 257;
        double prev_z = -8.0;
        double prev_g =
            log_mean_at(ws.logA.data(), a_.data(), d_, prev_z, nullptr, ws.ebuf) - logK;
        for (int i = 1; i < grid; ++i) {
            const double z = -8.0 + 16.0 * i / (grid - 1);
            const double g =
                log_mean_at(ws.logA.data(), a_.data(), d_, z, nullptr, ws.ebuf) - logK;
            if ((prev_g <= 0.0) != (g <= 0.0)) {
                double zl = prev_z, zh = z;
                for (int it = 0; it < 100; ++it) {
                    const double zm = 0.5 * (zl + zh);
                    const double gm = log_mean_at(ws.logA.data(), a_.data(), d_,
                                                  zm, nullptr, ws.ebuf) - logK;
                    if ((prev_g <= 0.0) == (gm <= 0.0))
                        zl = zm;
                    else
                        zh = zm;
                }
                cuts.push_back(0.5 * (zl + zh));
            }
            prev_z = z;
            prev_g = g;
        }
    }

    std::vector<double> edges;
    edges.push_back(lo);
    for (double c : cuts)
        if (c > lo && c < hi) edges.push_back(c);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());

    const GLRule& rule = gl_rule(opt_.quad_nodes);
    ws.nodes.clear();
    ws.weights.clear();
    for (size_t e = 0; e + 1 < edges.size(); ++e) {
        const double s0 = edges[e], s1 = edges[e + 1];
        const int panels =
            std::max(1, static_cast<int>(std::ceil((s1 - s0) / opt_.panel_width)));
        for (int p = 0; p < panels; ++p) {
            const double p0 = s0 + (s1 - s0) * p / panels;
            const double p1 = s0 + (s1 - s0) * (p + 1) / panels;
            const double mid = 0.5 * (p0 + p1), half = 0.5 * (p1 - p0);
            for (int i = 0; i < opt_.quad_nodes; ++i) {
                const double z = mid + half * rule.x[static_cast<size_t>(i)];
                ws.nodes.push_back(z);
                ws.weights.push_back(half * rule.w[static_cast<size_t>(i)] *
                                     norm_pdf(z));
            }
        }
    }

    const size_t nn = ws.nodes.size();
    ws.zfull.resize(nn * static_cast<size_t>(d_));
    for (size_t i = 0; i < nn; ++i) {
        double* row = ws.zfull.data() + i * static_cast<size_t>(d_);
        row[0] = ws.nodes[i];
        for (int k = 1; k < d_; ++k) row[k] = z_rest[k - 1];
    }
    ws.vals.resize(nn);
    asian_eval_batch(mp_, R_, greek_, ws.zfull.data(), nn, ws.vals.data());
    double acc = 0.0;
    for (size_t i = 0; i < nn; ++i) acc += ws.weights[i] * ws.vals[i];
    return acc;
}

BasketPreintegrated::BasketPreintegrated(const BasketParams& bp,
                                         const FactorMatrix& R,
                                         PreintOptions opt)
    : bp_(bp), R_(R), opt_(opt), rule_(opt.rule) {
    if (!(bp.S0 > 0.0)) throw std::invalid_argument("S0 must be positive");
    if (!(bp.K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
    if (!(bp.T > 0.0)) throw std::invalid_argument("T must be positive");
    if (bp.d < 1) throw std::invalid_argument("d must be at least 1");
    if (!(bp.w1 >= 0.0) || !(bp.w2 >= 0.0) || !(bp.w1 + bp.w2 > 0.0))
        throw std::invalid_argument("weights must be nonnegative and not both zero");
    if (R.n != 2 * bp.d) throw std::invalid_argument("factor order does not match 2d");
    if (opt.quad_nodes < 2 || opt.quad_nodes > 64)
        throw std::invalid_argument("quad_nodes out of range");
    if (!(opt.panel_width > 0.0))
        throw std::invalid_argument("panel_width must be positive");

    D_ = 2 * bp.d;
    int pos = 0, neg = 0;
    for (int i = 0; i < D_; ++i) {
        const double v = R_.at(i, 0);
        if (v > 0.0) ++pos;
        if (v < 0.0) ++neg;
    }
    if (neg == D_) {
        for (double& v : R_.a) v = -v;
        flipped_ = true;
    } else if (pos != D_) {
        if (!opt_.allow_mixed_sign)
            throw MonotonicityError(
                "pre-integration needs a strictly one-signed leading factor "
                "column (" + std::to_string(pos) + " positive, " +
                std::to_string(neg) + " negative of " + std::to_string(D_) +
                " entries); pass allow_mixed_sign to use segmented quadrature");
        if (rule_ == PreintRule::closed_form_kink) {
            rule_ = PreintRule::quadrature;
            std::fprintf(stderr,
                         "note: mixed-sign leading factor column; "
                         "pre-integrating by kink-split quadrature\n");
        }
    }

    const double dt = bp.T / bp.d;
    a_.resize(static_cast<size_t>(D_));
    logw_mu_.resize(static_cast<size_t>(D_));
    for (int i = 0; i < D_; ++i) {
        const bool leg2 = i >= bp.d;
        const int j = (i % bp.d) + 1;
        const double w = leg2 ? bp.w2 : bp.w1;
        const double r = leg2 ? bp.r2 : bp.r1;
        const double sg = leg2 ? bp.sigma2 : bp.sigma1;
        a_[static_cast<size_t>(i)] = R_.at(i, 0);
        logw_mu_[static_cast<size_t>(i)] =
            (w > 0.0 ? std::log(bp.S0 * w / bp.d) + (r - 0.5 * sg * sg) * j * dt
                     : -HUGE_VAL);
    }
    ft_rest_.resize(static_cast<size_t>(D_) * (D_ - 1));
    for (int k = 1; k < D_; ++k)
        for (int i = 0; i < D_; ++i)
            ft_rest_[static_cast<size_t>(k - 1) * D_ + i] = R_.at(i, k);
}

double BasketPreintegrated::operator()(const double* z_rest) const {
    return rule_ == PreintRule::closed_form_kink ? closed_form(z_rest)
                                                 : quadrature(z_rest);
}

void BasketPreintegrated::eval_batch(const double* z_rest, size_t n,
                                     double* out) const {
    const size_t stride = static_cast<size_t>(D_ - 1);
    for (size_t i = 0; i < n; ++i) out[i] = (*this)(z_rest + i * stride);
}

double BasketPreintegrated::closed_form(const double* z_rest) const {
    const auto& kk = simd::kernels();
    Workspace& ws = workspace();
    ws.ensure(D_);
    thread_local std::vector<double> zero;
    if (static_cast<int>(zero.size()) < D_) zero.assign(static_cast<size_t>(D_), 0.0);
    kk.affine_fold(ft_rest_.data(), zero.data(), z_rest, ws.c.data(),
                   static_cast<size_t>(D_), static_cast<size_t>(D_ - 1));
    for (int i = 0; i < D_; ++i)
        ws.logA[static_cast<size_t>(i)] =
            logw_mu_[static_cast<size_t>(i)] + ws.c[static_cast<size_t>(i)];

    const double gamma =
        bp_.K > 0.0 ? solve_log(ws.logA.data(), a_.data(), D_, std::log(bp_.K)).gamma
                    : -HUGE_VAL;

    size_t nterm = 0;
    double mx = -HUGE_VAL;
    for (int i = 0; i < D_; ++i) {
        const size_t si = static_cast<size_t>(i);
        if (logw_mu_[si] == -HUGE_VAL) continue;
        const double ai = a_[si];
        ws.lp[nterm] = ws.logA[si] + 0.5 * ai * ai + log_norm_cdf_upper(gamma - ai);
        ws.coef[nterm] = 1.0;
        if (ws.lp[nterm] > mx) mx = ws.lp[nterm];
        ++nterm;
    }
    if (bp_.K > 0.0) {
        ws.lp[nterm] = log_norm_cdf_upper(gamma);
        ws.coef[nterm] = -bp_.K;
        if (ws.lp[nterm] > mx) mx = ws.lp[nterm];
        ++nterm;
    }
    double value = 0.0;
    if (nterm > 0 && std::isfinite(mx)) {
        for (size_t i = 0; i < nterm; ++i) ws.ebuf[i] = ws.lp[i] - mx;
        kk.exp_vec(ws.ebuf.data(), ws.ebuf.data(), nterm);
        double s = 0.0;
        for (size_t i = 0; i < nterm; ++i) s += ws.coef[i] * ws.ebuf[i];
        if (s != 0.0)
            value = (s > 0.0 ? 1.0 : -1.0) * std::exp(mx + std::log(std::fabs(s)));
    }
    return value < 0.0 ? 0.0 : value;
}

double BasketPreintegrated::quadrature(const double* z_rest) const {
    const auto& kk = simd::kernels();
    Workspace& ws = workspace();
    ws.ensure(D_);
    thread_local std::vector<double> zero;
    if (static_cast<int>(zero.size()) < D_) zero.assign(static_cast<size_t>(D_), 0.0);
    kk.affine_fold(ft_rest_.data(), zero.data(), z_rest, ws.c.data(),
                   static_cast<size_t>(D_), static_cast<size_t>(D_ - 1));
    for (int i = 0; i < D_; ++i)
        ws.logA[static_cast<size_t>(i)] =
            logw_mu_[static_cast<size_t>(i)] + ws.c[static_cast<size_t>(i)];

    double amax = 0.0;
    bool one_sign = true;
    for (int i = 0; i < D_; ++i) {
        amax = std::max(amax, a_[static_cast<size_t>(i)]);
        if (!(a_[static_cast<size_t>(i)] > 0.0)) one_sign = false;
    }
    const double hi = amax + 40.0;

    std::vector<double> cuts;
    double lo;
    if (bp_.K <= 0.0) {
        lo = -44.0;
    } else if (one_sign) {
        const double gamma =
            solve_log(ws.logA.data(), a_.data(), D_, std::log(bp_.K)).gamma;
        if (gamma >= hi) return 0.0;
        lo = std::max(gamma, -44.0);
    } else {
        lo = -44.0;
        const double logK = std::log(bp_.K);
        const int grid = 257;
        double prev_z = -8.0;
        double prev_g =
            log_mean_at(ws.logA.data(), a_.data(), D_, prev_z, nullptr, ws.ebuf) - logK;
        for (int i = 1; i < grid; ++i) {
            const double z = -8.0 + 16.0 * i / (grid - 1);
            const double g =
                log_mean_at(ws.logA.data(), a_.data(), D_, z, nullptr, ws.ebuf) - logK;
            if ((prev_g <= 0.0) != (g <= 0.0)) {
                double zl = prev_z, zh = z;
                for (int it = 0; it < 100; ++it) {
                    const double zm = 0.5 * (zl + zh);
                    const double gm = log_mean_at(ws.logA.data(), a_.data(), D_,
                                                  zm, nullptr, ws.ebuf) - logK;
                    if ((prev_g <= 0.0) == (gm <= 0.0))
                        zl = zm;
                    else
                        zh = zm;
                }
                cuts.push_back(0.5 * (zl + zh));
            }
            prev_z = z;
            prev_g = g;
        }
    }

    std::vector<double> edges;
    edges.push_back(lo);
    for (double c : cuts)
        if (c > lo && c < hi) edges.push_back(c);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());

    const GLRule& rule = gl_rule(opt_.quad_nodes);
    ws.nodes.clear();
    ws.weights.clear();
    for (size_t e = 0; e + 1 < edges.size(); ++e) {
        const double s0 = edges[e], s1 = edges[e + 1];
        const int panels =
            std::max(1, static_cast<int>(std::ceil((s1 - s0) / opt_.panel_width)));
        for (int p = 0; p < panels; ++p) {
            const double p0 = s0 + (s1 - s0) * p / panels;
            const double p1 = s0 + (s1 - s0) * (p + 1) / panels;
            const double mid = 0.5 * (p0 + p1), half = 0.5 * (p1 - p0);
            for (int i = 0; i < opt_.quad_nodes; ++i) {
                const double z = mid + half * rule.x[static_cast<size_t>(i)];
                ws.nodes.push_back(z);
                ws.weights.push_back(half * rule.w[static_cast<size_t>(i)] *
                                     norm_pdf(z));
            }
        }
    }

    const size_t nn = ws.nodes.size();
    ws.zfull.resize(nn * static_cast<size_t>(D_));
    for (size_t i = 0; i < nn; ++i) {
        double* row = ws.zfull.data() + i * static_cast<size_t>(D_);
        row[0] = ws.nodes[i];
        for (int k = 1; k < D_; ++k) row[k] = z_rest[k - 1];
    }
    ws.vals.resize(nn);
    basket_eval_batch(bp_, R_, ws.zfull.data(), nn, ws.vals.data());
    double acc = 0.0;
    for (size_t i = 0; i < nn; ++i) acc += ws.weights[i] * ws.vals[i];
    return acc;
}

GeometricPreintegrated::GeometricPreintegrated(const MarketParams& mp,
                                               const FactorMatrix& R,
                                               PreintOptions opt)
    : mp_(mp), R_(R), opt_(opt), rule_(opt.rule) {
    if (!(mp.S0 > 0.0)) throw std::invalid_argument("S0 must be positive");
    if (!(mp.K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
    if (!(mp.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(mp.T > 0.0)) throw std::invalid_argument("T must be positive");
    if (mp.d < 1) throw std::invalid_argument("d must be at least 1");
    if (R.n != mp.d) throw std::invalid_argument("factor order does not match d");
    if (opt.quad_nodes < 2 || opt.quad_nodes > 64)
        throw std::invalid_argument("quad_nodes out of range");
    if (!(opt.panel_width > 0.0))
        throw std::invalid_argument("panel_width must be positive");

    d_ = mp.d;
    double mean0 = 0.0;
    for (int j = 0; j < d_; ++j) mean0 += R_.at(j, 0);
    mean0 /= d_;
    if (mp.sigma * mean0 < 0.0) {
        for (double& v : R_.a) v = -v;
        flipped_ = true;
        mean0 = -mean0;
    }
    abar_ = mp.sigma * mean0;
    if (!(abar_ > 0.0)) {
        if (!opt_.allow_mixed_sign)
            throw MonotonicityError(
                "geometric pre-integration needs a nonzero mean leading "
                "loading; pass allow_mixed_sign to use quadrature");
        if (rule_ == PreintRule::closed_form_kink) {
            rule_ = PreintRule::quadrature;
            std::fprintf(stderr,
                         "note: zero mean leading loading; pre-integrating "
                         "the geometric payoff by quadrature\n");
        }
    }

    base_ = std::log(mp.S0) +
            (mp.r - 0.5 * mp.sigma * mp.sigma) * mp.T * (d_ + 1) / (2.0 * d_);
    fbar_.resize(static_cast<size_t>(d_ - 1));
    for (int k = 1; k < d_; ++k) {
        double s = 0.0;
        for (int j = 0; j < d_; ++j) s += R_.at(j, k);
        fbar_[static_cast<size_t>(k - 1)] = mp.sigma * s / d_;
    }
}

double GeometricPreintegrated::operator()(const double* z_rest) const {
    return rule_ == PreintRule::closed_form_kink ? closed_form(z_rest)
                                                 : quadrature(z_rest);
}

void GeometricPreintegrated::eval_batch(const double* z_rest, size_t n,
                                        double* out) const {
    const size_t stride = static_cast<size_t>(d_ - 1);
    for (size_t i = 0; i < n; ++i) out[i] = (*this)(z_rest + i * stride);
}

double GeometricPreintegrated::closed_form(const double* z_rest) const {
    double logA = base_;
    for (int k = 0; k + 1 < d_; ++k) logA += fbar_[static_cast<size_t>(k)] * z_rest[k];
    const double gamma =
        mp_.K > 0.0 ? (std::log(mp_.K) - logA) / abar_ : -HUGE_VAL;
    const double lp0 = logA + 0.5 * abar_ * abar_ + log_norm_cdf_upper(gamma - abar_);
    double value;
    if (mp_.K > 0.0) {
        const double lp1 = std::log(mp_.K) + log_norm_cdf_upper(gamma);
        const double mx = std::max(lp0, lp1);
        const double s = std::exp(lp0 - mx) - std::exp(lp1 - mx);
        value = s == 0.0 ? 0.0 : (s > 0.0 ? 1.0 : -1.0) * std::exp(mx + std::log(std::fabs(s)));
    } else {
        value = std::exp(lp0) - mp_.K;
    }
    return value < 0.0 ? 0.0 : value;
}

double GeometricPreintegrated::quadrature(const double* z_rest) const {
    double logA = base_;
    for (int k = 0; k + 1 < d_; ++k) logA += fbar_[static_cast<size_t>(k)] * z_rest[k];
    const double hi = std::max(abar_, 0.0) + 40.0;
    double lo = -44.0;
    if (mp_.K > 0.0 && abar_ > 0.0) {
        const double gamma = (std::log(mp_.K) - logA) / abar_;
        if (gamma >= hi) return 0.0;
        lo = std::max(gamma, -44.0);
    }

    Workspace& ws = workspace();
    const GLRule& rule = gl_rule(opt_.quad_nodes);
    ws.nodes.clear();
    ws.weights.clear();
    const int panels =
        std::max(1, static_cast<int>(std::ceil((hi - lo) / opt_.panel_width)));
    for (int p = 0; p < panels; ++p) {
        const double p0 = lo + (hi - lo) * p / panels;
        const double p1 = lo + (hi - lo) * (p + 1) / panels;
        const double mid = 0.5 * (p0 + p1), half = 0.5 * (p1 - p0);
        for (int i = 0; i < opt_.quad_nodes; ++i) {
            const double z = mid + half * rule.x[static_cast<size_t>(i)];
            ws.nodes.push_back(z);
            ws.weights.push_back(half * rule.w[static_cast<size_t>(i)] * norm_pdf(z));
        }
    }
    const size_t nn = ws.nodes.size();
    ws.zfull.resize(nn * static_cast<size_t>(d_));
    for (size_t i = 0; i < nn; ++i) {
        double* row = ws.zfull.data() + i * static_cast<size_t>(d_);
        row[0] = ws.nodes[i];
        for (int k = 1; k < d_; ++k) row[k] = z_rest[k - 1];
    }
    ws.vals.resize(nn);
    geometric_eval_batch(mp_, R_, ws.zfull.data(), nn, ws.vals.data());
    double acc = 0.0;
    for (size_t i = 0; i < nn; ++i) acc += ws.weights[i] * ws.vals[i];
    return acc;
}

double preintegrate_call(const FactorMatrix& R, const MarketParams& mp,
                         const double* z_rest) {
    return PreintegratedIntegrand(mp, R, Greek::payoff)(z_rest);
}

double preintegrate_linear_kink(const FactorMatrix& R, const MarketParams& mp,
                                const double* z_rest, Greek greek) {
    return PreintegratedIntegrand(mp, R, greek)(z_rest);
}

RealFn assemble_qmc_integrand(const PreintegratedIntegrand& p) {
    auto sp = std::make_shared<const PreintegratedIntegrand>(p);
    return RealFn([sp](const double* z_rest) { return (*sp)(z_rest); });
}

}  // namespace pqmc
