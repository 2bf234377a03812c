#include "pqmc/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pqmc/errors.hpp"
#include "pqmc/normal.hpp"
#include "pqmc/rng.hpp"
#include "pqmc/sobol.hpp"

namespace pqmc {

namespace {

double now_sec() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// One of the three pre-integrated payoff families behind a single surface.
struct Preint {
    std::unique_ptr<PreintegratedIntegrand> asian;
    std::unique_ptr<BasketPreintegrated> basket;
    std::unique_ptr<GeometricPreintegrated> geo;

    int dim() const {
        if (asian) return asian->dim();
        if (basket) return basket->dim();
        return geo->dim();
    }
    double eval(const double* z) const {
        if (asian) return (*asian)(z);
        if (basket) return (*basket)(z);
        return (*geo)(z);
    }
    void eval_batch(const double* z, size_t n, double* out) const {
        if (asian)
            asian->eval_batch(z, n, out);
        else if (basket)
            basket->eval_batch(z, n, out);
        else
            geo->eval_batch(z, n, out);
    }
};

std::shared_ptr<Preint> make_preint(const Problem& prob, const FactorMatrix& R,
                                    const MethodOptions& opt) {
    PreintOptions po;
    po.allow_mixed_sign = opt.allow_quad_fallback;
    auto p = std::make_shared<Preint>();
    if (prob.is_basket)
        p->basket = std::make_unique<BasketPreintegrated>(prob.bp, R, po);
    else if (prob.is_geometric)
        p->geo = std::make_unique<GeometricPreintegrated>(prob.mp, R, po);
    else
        p->asian = std::make_unique<PreintegratedIntegrand>(prob.mp, R, prob.greek, po);
    return p;
}

RealFn preint_fn(std::shared_ptr<Preint> p) {
    return RealFn([p](const double* z) { return p->eval(z); });
}

std::vector<double> gaussian_net(int m, int d, Scramble kind, uint64_t seed) {
    return to_gaussian(scramble(generate_sobol(m, d), kind, seed));
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// diag(1, V) as a full rotation: the pre-integrated column stays put and the
// tail coordinates are mixed by V ((d-1) x (d-1) row-major).
FactorMatrix rotate_tail(const FactorMatrix& R, const std::vector<double>& V) {
    const int d = R.n;
    std::vector<double> Th(static_cast<size_t>(d) * d, 0.0);
    Th[0] = 1.0;
    for (int i = 0; i + 1 < d; ++i)
        for (int j = 0; j + 1 < d; ++j)
            Th[static_cast<size_t>(i + 1) * d + (j + 1)] =
                V[static_cast<size_t>(i) * (d - 1) + j];
    return rotate_factor(R, Th);
}

EstimateCOptions gradient_options(const MethodOptions& opt, uint64_t seed) {
    EstimateCOptions eo;
    eo.M = opt.M;
    eo.fd_epsilon = opt.fd_epsilon;
    eo.centered = opt.centered;
    eo.seed = seed;
    eo.scramble = opt.scramble;
    return eo;
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string truth_key(const Problem& prob, const TruthOptions& opt) {
    std::ostringstream os;
    os << prob.preset << '|' << prob.integrand << '|' << prob.construction
       << "|m=" << opt.m << "|reps=" << opt.reps << "|seed=" << opt.seed
       << "|M=" << opt.method.M << "|eps=" << fmt17(opt.method.fd_epsilon)
       << "|centered=" << (opt.method.centered ? 1 : 0)
       << "|scramble=" << static_cast<int>(opt.method.scramble);
    if (prob.is_basket) {
        const BasketParams& b = prob.bp;
        os << "|S0=" << fmt17(b.S0) << "|K=" << fmt17(b.K) << "|T=" << fmt17(b.T)
           << "|rho=" << fmt17(b.rho) << "|r1=" << fmt17(b.r1)
           << "|r2=" << fmt17(b.r2) << "|sigma1=" << fmt17(b.sigma1)
           << "|sigma2=" << fmt17(b.sigma2) << "|w1=" << fmt17(b.w1)
           << "|w2=" << fmt17(b.w2) << "|d=" << b.d;
    } else {
        const MarketParams& m = prob.mp;
        os << "|S0=" << fmt17(m.S0) << "|K=" << fmt17(m.K) << "|r=" << fmt17(m.r)
           << "|sigma=" << fmt17(m.sigma) << "|T=" << fmt17(m.T) << "|d=" << m.d;
    }
    return os.str();
}

struct SlopeFit {
    double slope = 0.0;
    bool valid = false;
};

// least squares of y on x
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return {};
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return {};
    return {sxy / sxx, true};
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::mc: return "mc";
        case Method::rqmc: return "rqmc";
        case Method::preint: return "preint";
        case Method::preint_dimred: return "preint-dimred";
        case Method::as_preint: return "as-preint";
    }
    throw std::invalid_argument("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "mc") return Method::mc;
    if (name == "rqmc") return Method::rqmc;
    if (name == "preint") return Method::preint;
    if (name == "preint-dimred") return Method::preint_dimred;
    if (name == "as-preint") return Method::as_preint;
    throw std::invalid_argument(
        "unknown method '" + name +
        "' (expected mc, rqmc, preint, preint-dimred, or as-preint)");
}

std::vector<Method> parse_methods(const std::string& csv) {
    std::vector<Method> out;
    std::string token;
    std::istringstream is(csv);
    while (std::getline(is, token, ',')) {
        const auto b = token.find_first_not_of(" \t");
        const auto e = token.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument("empty method name");
        out.push_back(method_from_name(token.substr(b, e - b + 1)));
    }
    if (out.empty()) throw std::invalid_argument("no methods given");
    return out;
}

Problem make_problem(const std::string& preset, const std::string& integrand,
                     const std::string& construction) {
    Problem p;
    p.preset = preset;
    p.integrand = integrand;
    p.construction = construction;
    if (preset == "asian50") {
        p.mp = market_preset(preset);
        p.dim = p.mp.d;
        if (integrand == "geometric") {
            p.is_geometric = true;
        } else {
            p.greek = greek_from_name(integrand);
        }
        if (construction == "standard")
            p.factor = standard_factor(p.mp.d, p.mp.T);
        else if (construction == "pca")
            p.factor = pca_factor(p.mp.d, p.mp.T);
        else
            throw std::invalid_argument(
                "asian construction must be standard or pca, got '" +
                construction + "'");
    } else if (preset == "basketA" || preset == "basketB") {
        p.bp = basket_preset(preset);
        p.is_basket = true;
        p.dim = 2 * p.bp.d;
        if (integrand != "payoff")
            throw std::invalid_argument(
                "basket presets support only the payoff integrand");
        BasketKind kind;
        if (construction == "ordinary-standard")
            kind = BasketKind::ordinary_standard;
        else if (construction == "ordinary-pca")
            kind = BasketKind::ordinary_pca;
        else if (construction == "full-standard")
            kind = BasketKind::full_standard;
        else if (construction == "full-pca")
            kind = BasketKind::full_pca;
        else
            throw std::invalid_argument(
                "basket construction must be ordinary-standard, ordinary-pca, "
                "full-standard, or full-pca, got '" + construction + "'");
        p.factor = basket_factor(p.bp, kind);
    } else {
        throw std::invalid_argument("unknown preset '" + preset +
                                    "' (expected asian50, basketA, or basketB)");
    }
    return p;
}

void problem_eval_batch(const Problem& prob, const FactorMatrix& R,
                        const double* z, size_t n, double* out) {
    if (prob.is_basket)
        basket_eval_batch(prob.bp, R, z, n, out);
    else if (prob.is_geometric)
        geometric_eval_batch(prob.mp, R, z, n, out);
    else
        asian_eval_batch(prob.mp, R, prob.greek, z, n, out);
}

RealFn problem_integrand(const Problem& prob, const FactorMatrix& R) {
    if (prob.is_basket) return basket_integrand(prob.bp, R);
    if (prob.is_geometric) return geometric_payoff(prob.mp, R);
    return asian_integrands(prob.mp, R).get(prob.greek);
}

double run_method(const Problem& prob, Method method, int m, uint64_t seed,
                  const MethodOptions& opt, MethodTiming* timing) {
    if (m < 3 || m > 17)
        throw std::invalid_argument("m must be between 3 and 17");
    const size_t n = size_t{1} << m;
    const uint64_t seed_points = derive_seed(seed, 101);
    const uint64_t seed_grad = derive_seed(seed, 202);
    const double t0 = now_sec();
    double grad_sec = 0.0;
    double estimate = 0.0;

    try {
        switch (method) {
            case Method::mc: {
                std::vector<double> z(n * static_cast<size_t>(prob.dim));
                for (size_t i = 0; i < z.size(); ++i)
                    z[i] = norm_inv_cdf(counter_unit(seed_points, i));
                std::vector<double> f(n);
                problem_eval_batch(prob, prob.factor, z.data(), n, f.data());
                estimate = mean_of(f);
                break;
            }
            case Method::rqmc: {
                std::vector<double> z =
                    gaussian_net(m, prob.dim, opt.scramble, seed_points);
                std::vector<double> f(n);
                problem_eval_batch(prob, prob.factor, z.data(), n, f.data());
                estimate = mean_of(f);
                break;
            }
            case Method::preint: {
                auto p = make_preint(prob, prob.factor, opt);
                if (p->dim() == 0) {
                    estimate = p->eval(nullptr);
                    break;
                }
                std::vector<double> z =
                    gaussian_net(m, p->dim(), opt.scramble, seed_points);
                std::vector<double> f(n);
                p->eval_batch(z.data(), n, f.data());
                estimate = mean_of(f);
                break;
            }
            case Method::preint_dimred: {
                const double tg = now_sec();
                auto p0 = make_preint(prob, prob.factor, opt);
                Rotation rot = gpca_dimred(preint_fn(p0), p0->dim(),
                                           gradient_options(opt, seed_grad));
                FactorMatrix R2 = rotate_tail(prob.factor, rot.Theta);
                grad_sec = now_sec() - tg;
                auto p = make_preint(prob, R2, opt);
                std::vector<double> z =
                    gaussian_net(m, p->dim(), opt.scramble, seed_points);
                std::vector<double> f(n);
                p->eval_batch(z.data(), n, f.data());
                estimate = mean_of(f);
                break;
            }
            case Method::as_preint: {
                const double tg = now_sec();
                SymMatrix C = estimate_C(problem_integrand(prob, prob.factor),
                                         prob.dim, gradient_options(opt, seed_grad));
                Rotation rot = rotation_from_C(C, opt.completion);
                FactorMatrix R2 = rotate_factor(prob.factor, rot.Theta);
                grad_sec = now_sec() - tg;
                auto p = make_preint(prob, R2, opt);
                std::vector<double> z =
                    gaussian_net(m, p->dim(), opt.scramble, seed_points);
                std::vector<double> f(n);
                p->eval_batch(z.data(), n, f.data());
                estimate = mean_of(f);
                break;
            }
        }
    } catch (const MonotonicityError& e) {
        throw MonotonicityError(std::string(e.what()) +
                                " [method=" + method_name(method) +
                                ", construction=" + prob.construction +
                                ", preset=" + prob.preset + "]");
    }

    if (timing) {
        timing->total = now_sec() - t0;
        timing->gradient = grad_sec;
    }
    return estimate;
}

TruthResult ground_truth(const Problem& prob, const TruthOptions& opt) {
    Problem tp = prob;
    if (prob.is_basket) {
        tp.construction = "full-pca";
        tp.factor = basket_factor(prob.bp, BasketKind::full_pca);
    } else {
        tp.construction = "pca";
        tp.factor = pca_factor(prob.mp.d, prob.mp.T);
    }

    const std::string key = truth_key(tp, opt);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key)));
    const std::filesystem::path path =
        std::filesystem::path(opt.cache_dir) / (std::string("truth-") + hex + ".txt");

    TruthResult out;
    out.reps = opt.reps;
    out.n = size_t{1} << opt.m;
    out.cache_path = path.string();

    std::ifstream in(path);
    if (in) {
        std::string line, stored_key;
        bool have_value = false, have_se = false;
        while (std::getline(in, line)) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) continue;
            const std::string name = line.substr(0, eq);
            const std::string val = line.substr(eq + 3);
            if (name == "key") stored_key = val;
            if (name == "value") {
                out.value = std::stod(val);
                have_value = true;
            }
            if (name == "stderr") {
                out.se = std::stod(val);
                have_se = true;
            }
        }
        if (stored_key == key && have_value && have_se) {
            out.from_cache = true;
            return out;
        }
    }

    std::vector<double> means;
    means.reserve(static_cast<size_t>(opt.reps));
    for (int rep = 0; rep < opt.reps; ++rep)
        means.push_back(run_method(tp, Method::preint_dimred, opt.m,
                                   derive_seed(opt.seed, 7001, rep), opt.method));
    out.value = mean_of(means);
    double s2 = 0.0;
    for (double v : means) s2 += (v - out.value) * (v - out.value);
    s2 /= std::max(1, opt.reps - 1);
    out.se = std::sqrt(s2 / opt.reps);

    std::filesystem::create_directories(opt.cache_dir);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write truth cache: " + path.string());
    os << "key = " << key << "\n";
    os << "value = " << fmt17(out.value) << "\n";
    os << "stderr = " << fmt17(out.se) << "\n";
    os << "reps = " << opt.reps << "\n";
    os << "n = " << out.n << "\n";
    return out;
}

ExperimentReport rmse_sweep(const Problem& prob,
                            const std::vector<Method>& methods,
                            const SweepOptions& opt) {
    if (opt.m_lo > opt.m_hi) throw std::invalid_argument("empty m range");
    if (opt.reps < 2) throw std::invalid_argument("need at least 2 replicates");

    TruthResult truth = ground_truth(prob, opt.truth);
    ExperimentReport report;
    report.truth = truth.value;
    report.truth_se = truth.se;

    for (size_t mi = 0; mi < methods.size(); ++mi) {
        const Method method = methods[mi];
        std::vector<double> ms, logr;
        std::vector<SummaryRow> rows_for_method;
        for (int m = opt.m_lo; m <= opt.m_hi; ++m) {
            std::vector<double> sq;
            sq.reserve(static_cast<size_t>(opt.reps));
            for (int rep = 0; rep < opt.reps; ++rep) {
                const uint64_t seed =
                    derive_seed(opt.master_seed,
                                static_cast<uint64_t>(method) + 1,
                                static_cast<uint64_t>(m),
                                static_cast<uint64_t>(rep));
                MethodTiming t;
                const double est = run_method(prob, method, m, seed, opt.method, &t);
                report.rows.push_back({prob.integrand, method_name(method),
                                       prob.construction, m, size_t{1} << m, rep,
                                       est, t.total});
                sq.push_back((est - truth.value) * (est - truth.value));
            }
            const double mse = mean_of(sq);
            const double rmse = std::sqrt(mse);
            double se_mse = 0.0;
            for (double v : sq) se_mse += (v - mse) * (v - mse);
            se_mse = std::sqrt(se_mse / (opt.reps - 1) / opt.reps);
            const double se_rmse = rmse > 0.0 ? se_mse / (2.0 * rmse) : 0.0;
            rows_for_method.push_back({prob.integrand, method_name(method),
                                       prob.construction, m, size_t{1} << m, rmse,
                                       se_rmse, 0.0});
            if (rmse > 0.0) {
                ms.push_back(static_cast<double>(m));
                logr.push_back(std::log2(rmse));
            }
        }
        const SlopeFit fit = fit_slope(ms, logr);
        for (SummaryRow& row : rows_for_method) {
            row.slope = fit.valid ? fit.slope : 0.0;
            report.summary.push_back(row);
        }
    }
    return report;
}

double report_slope(const ExperimentReport& report, Method method) {
    for (const SummaryRow& row : report.summary)
        if (row.method == method_name(method)) return row.slope;
    throw std::invalid_argument(std::string("no summary rows for method ") +
                                method_name(method));
}

std::vector<TimingRow> timing_run(const std::vector<Problem>& probs,
                                  const std::vector<Method>& methods, int m,
                                  int reps, uint64_t seed,
                                  const MethodOptions& opt) {
    std::vector<TimingRow> rows;
    for (size_t pi = 0; pi < probs.size(); ++pi) {
        for (size_t mi = 0; mi < methods.size(); ++mi) {
            double total = 0.0, grad = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                MethodTiming t;
                run_method(probs[pi], methods[mi], m,
                           derive_seed(seed, pi + 1, mi + 1,
                                       static_cast<uint64_t>(rep)),
                           opt, &t);
                total += t.total;
                grad += t.gradient;
            }
            rows.push_back({probs[pi].integrand, method_name(methods[mi]),
                            probs[pi].construction, size_t{1} << m, reps,
                            total / reps, grad / reps});
        }
    }
    return rows;
}

}  // namespace pqmc
