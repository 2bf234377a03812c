#include "pqmc/options.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "pqmc/normal.hpp"
#include "pqmc/simd.hpp"

namespace pqmc {

namespace {

void check_market(const MarketParams& mp) {
    if (!(mp.S0 > 0.0)) throw std::invalid_argument("S0 must be positive");
    if (!(mp.K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
    if (!(mp.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(mp.T > 0.0)) throw std::invalid_argument("T must be positive");
    if (mp.d < 1) throw std::invalid_argument("d must be at least 1");
    if (!std::isfinite(mp.r)) throw std::invalid_argument("r must be finite");
}

void check_basket(const BasketParams& bp) {
    if (!(bp.S0 > 0.0)) throw std::invalid_argument("S0 must be positive");
    if (!(bp.K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
    if (!(bp.T > 0.0)) throw std::invalid_argument("T must be positive");
    if (!(bp.sigma1 > 0.0) || !(bp.sigma2 > 0.0))
        throw std::invalid_argument("volatilities must be positive");
    if (!(std::fabs(bp.rho) < 1.0)) throw std::invalid_argument("|rho| must be below 1");
    if (bp.d < 1) throw std::invalid_argument("d must be at least 1");
}

// Factor transposed into the k-major layout the affine_fold kernel takes:
// ft[k*rows + j] = R_{jk}.
std::vector<double> fold_layout(const FactorMatrix& R) {
    const int n = R.n;
    std::vector<double> ft(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) ft[static_cast<size_t>(k) * n + j] = R.at(j, k);
    return ft;
}

struct AsianCtx {
    MarketParams mp;
    int d;
    double dt, disc, mu1;       // mu1 = r - sigma^2/2
    std::vector<double> ft;     // k-major factor
    std::vector<double> zero;   // fold drift
    std::vector<double> mu;     // mu1 * j * dt, j = 1..d
};

AsianCtx make_asian_ctx(const MarketParams& mp, const FactorMatrix& R) {
    check_market(mp);
    if (R.n != mp.d) throw std::invalid_argument("factor order does not match d");
    AsianCtx c;
    c.mp = mp;
    c.d = mp.d;
    c.dt = mp.T / mp.d;
    c.disc = std::exp(-mp.r * mp.T);
    c.mu1 = mp.r - 0.5 * mp.sigma * mp.sigma;
    c.ft = fold_layout(R);
    c.zero.assign(static_cast<size_t>(mp.d), 0.0);
    c.mu.resize(static_cast<size_t>(mp.d));
    for (int j = 1; j <= mp.d; ++j) c.mu[j - 1] = c.mu1 * j * c.dt;
    return c;
}

// One point: B = R z through the kernel fold, S_j = S0 exp(mu_j + sigma B_j)
// through the kernel exp, then a scalar reduction per integrand. Every
// provider-dependent operation goes through the kernel table, so scalar and
// SIMD providers give bit-identical values.
double asian_point(const AsianCtx& c, Greek g, const double* z,
                   double* B, double* X, double* S) {
    const auto& k = simd::kernels();
    const int d = c.d;
    const MarketParams& mp = c.mp;
    k.affine_fold(c.ft.data(), c.zero.data(), z, B, static_cast<size_t>(d),
                  static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) X[j] = c.mu[j] + mp.sigma * B[j];
    k.exp_vec(X, S, static_cast<size_t>(d));
    double sbar = 0.0;
    for (int j = 0; j < d; ++j) {
        S[j] *= mp.S0;
        sbar += S[j];
    }
    sbar /= d;
    const double pay = sbar >= mp.K ? sbar - mp.K : 0.0;
    if (g == Greek::payoff) return pay;
    const double ind = sbar >= mp.K ? 1.0 : 0.0;
    switch (g) {
        case Greek::delta:
            return c.disc * ind * sbar / mp.S0;
        case Greek::gamma:
            return c.disc * ind * (sbar / (mp.S0 * mp.S0)) *
                   (B[0] / (mp.sigma * c.dt) - 1.0);
        case Greek::rho: {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += S[j] * (j + 1) * c.dt;
            return c.disc * (-mp.T * pay + ind * acc / d);
        }
        case Greek::theta: {
            double acc = 0.0;
            for (int j = 0; j < d; ++j)
                acc += S[j] * (c.mu1 * (j + 1) / d + mp.sigma * B[j] / (2.0 * mp.T));
            return c.disc * (-mp.r * pay + ind * acc / d);
        }
        case Greek::vega: {
            double acc = 0.0;
            for (int j = 0; j < d; ++j)
                acc += S[j] * (B[j] - mp.sigma * (j + 1) * c.dt);
            return c.disc * ind * acc / d;
        }
        default:
            throw std::invalid_argument("unknown Greek");
    }
}

struct BasketCtx {
    BasketParams bp;
    int d;
    double dt;
    std::vector<double> ft;    // k-major, 2d x 2d
    std::vector<double> zero;
    std::vector<double> mu;    // leg drifts, 2d entries
};

BasketCtx make_basket_ctx(const BasketParams& bp, const FactorMatrix& R) {
    check_basket(bp);
    if (R.n != 2 * bp.d) throw std::invalid_argument("factor order must be 2d");
    BasketCtx c;
    c.bp = bp;
    c.d = bp.d;
    c.dt = bp.T / bp.d;
    c.ft = fold_layout(R);
    c.zero.assign(static_cast<size_t>(2 * bp.d), 0.0);
    c.mu.resize(static_cast<size_t>(2 * bp.d));
    const double m1 = bp.r1 - 0.5 * bp.sigma1 * bp.sigma1;
    const double m2 = bp.r2 - 0.5 * bp.sigma2 * bp.sigma2;
    for (int j = 1; j <= bp.d; ++j) {
        c.mu[j - 1] = m1 * j * c.dt;
        c.mu[bp.d + j - 1] = m2 * j * c.dt;
    }
    return c;
}

double basket_point(const BasketCtx& c, const double* z,
                    double* B, double* X, double* S) {
    const auto& k = simd::kernels();
    const int n = 2 * c.d;
    k.affine_fold(c.ft.data(), c.zero.data(), z, B, static_cast<size_t>(n),
                  static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) X[j] = c.mu[j] + B[j];
    k.exp_vec(X, S, static_cast<size_t>(n));
    double s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < c.d; ++j) {
        s1 += S[j];
        s2 += S[c.d + j];
    }
    const double mix = c.bp.S0 * (c.bp.w1 * s1 + c.bp.w2 * s2) / c.d;
    return mix >= c.bp.K ? mix - c.bp.K : 0.0;
}

struct GeoCtx {
    MarketParams mp;
    double base;  // log S0 + (r - sigma^2/2) dt (d+1)/2
    std::vector<double> ft;
    std::vector<double> zero;
};

GeoCtx make_geo_ctx(const MarketParams& mp, const FactorMatrix& R) {
    check_market(mp);
    if (R.n != mp.d) throw std::invalid_argument("factor order does not match d");
    GeoCtx c;
    c.mp = mp;
    const double dt = mp.T / mp.d;
    c.base = std::log(mp.S0) +
             (mp.r - 0.5 * mp.sigma * mp.sigma) * dt * (mp.d + 1) / 2.0;
    c.ft = fold_layout(R);
    c.zero.assign(static_cast<size_t>(mp.d), 0.0);
    return c;
}

double geo_point(const GeoCtx& c, const double* z, double* B) {
    const auto& k = simd::kernels();
    const int d = c.mp.d;
    k.affine_fold(c.ft.data(), c.zero.data(), z, B, static_cast<size_t>(d),
                  static_cast<size_t>(d));
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += B[j];
    double lg = c.base + c.mp.sigma * acc / d;
    double g;
    k.exp_vec(&lg, &g, 1);
    return g >= c.mp.K ? g - c.mp.K : 0.0;
}

struct Workspace {
    std::vector<double> B, X, S;
    void ensure(int n) {
        if (static_cast<int>(B.size()) < n) {
            B.resize(static_cast<size_t>(n));
            X.resize(static_cast<size_t>(n));
            S.resize(static_cast<size_t>(n));
        }
    }
};

Workspace& workspace() {
    thread_local Workspace w;
    return w;
}

}  // namespace

double asian_eval(const MarketParams& mp, const FactorMatrix& R, Greek g,
                  const double* z) {
    AsianCtx c = make_asian_ctx(mp, R);
    Workspace& w = workspace();
    w.ensure(c.d);
    return asian_point(c, g, z, w.B.data(), w.X.data(), w.S.data());
}

void asian_eval_batch(const MarketParams& mp, const FactorMatrix& R, Greek g,
                      const double* z, size_t n, double* out) {
    AsianCtx c = make_asian_ctx(mp, R);
    Workspace& w = workspace();
    w.ensure(c.d);
    for (size_t i = 0; i < n; ++i)
        out[i] = asian_point(c, g, z + i * static_cast<size_t>(c.d),
                             w.B.data(), w.X.data(), w.S.data());
}

const RealFn& AsianIntegrands::get(Greek g) const {
    switch (g) {
        case Greek::payoff: return payoff;
        case Greek::delta: return delta;
        case Greek::gamma: return gamma;
        case Greek::rho: return rho;
        case Greek::theta: return theta;
        case Greek::vega: return vega;
    }
    throw std::invalid_argument("unknown Greek");
}

AsianIntegrands asian_integrands(const MarketParams& mp, const FactorMatrix& R) {
    auto ctx = std::make_shared<const AsianCtx>(make_asian_ctx(mp, R));
    auto fn = [ctx](Greek g) {
        return RealFn([ctx, g](const double* z) {
            Workspace& w = workspace();
            w.ensure(ctx->d);
            return asian_point(*ctx, g, z, w.B.data(), w.X.data(), w.S.data());
        });
    };
    AsianIntegrands out;
    out.payoff = fn(Greek::payoff);
    out.delta = fn(Greek::delta);
    out.gamma = fn(Greek::gamma);
    out.rho = fn(Greek::rho);
    out.theta = fn(Greek::theta);
    out.vega = fn(Greek::vega);
    return out;
}

double basket_eval(const BasketParams& bp, const FactorMatrix& R, const double* z) {
    BasketCtx c = make_basket_ctx(bp, R);
    Workspace& w = workspace();
    w.ensure(2 * c.d);
    return basket_point(c, z, w.B.data(), w.X.data(), w.S.data());
}

void basket_eval_batch(const BasketParams& bp, const FactorMatrix& R,
                       const double* z, size_t n, double* out) {
    BasketCtx c = make_basket_ctx(bp, R);
    Workspace& w = workspace();
    w.ensure(2 * c.d);
    for (size_t i = 0; i < n; ++i)
        out[i] = basket_point(c, z + i * static_cast<size_t>(2 * c.d),
                              w.B.data(), w.X.data(), w.S.data());
}

RealFn basket_integrand(const BasketParams& bp, const FactorMatrix& R) {
    auto ctx = std::make_shared<const BasketCtx>(make_basket_ctx(bp, R));
    return RealFn([ctx](const double* z) {
        Workspace& w = workspace();
        w.ensure(2 * ctx->d);
        return basket_point(*ctx, z, w.B.data(), w.X.data(), w.S.data());
    });
}

double geometric_eval(const MarketParams& mp, const FactorMatrix& R, const double* z) {
    GeoCtx c = make_geo_ctx(mp, R);
    Workspace& w = workspace();
    w.ensure(c.mp.d);
    return geo_point(c, z, w.B.data());
}

void geometric_eval_batch(const MarketParams& mp, const FactorMatrix& R,
                          const double* z, size_t n, double* out) {
    GeoCtx c = make_geo_ctx(mp, R);
    Workspace& w = workspace();
    w.ensure(c.mp.d);
    for (size_t i = 0; i < n; ++i)
        out[i] = geo_point(c, z + i * static_cast<size_t>(c.mp.d), w.B.data());
}

RealFn geometric_payoff(const MarketParams& mp, const FactorMatrix& R) {
    auto ctx = std::make_shared<const GeoCtx>(make_geo_ctx(mp, R));
    return RealFn([ctx](const double* z) {
        Workspace& w = workspace();
        w.ensure(ctx->mp.d);
        return geo_point(*ctx, z, w.B.data());
    });
}

double geometric_asian_price(const MarketParams& mp) {
    check_market(mp);
    const double m = std::log(mp.S0) +
                     (mp.r - 0.5 * mp.sigma * mp.sigma) * mp.T * (mp.d + 1) /
                         (2.0 * mp.d);
    const double v = mp.sigma * mp.sigma * mp.T * (mp.d + 1) *
                     (2.0 * mp.d + 1) / (6.0 * static_cast<double>(mp.d) * mp.d);
    const double mean = std::exp(m + 0.5 * v);
    if (mp.K <= 0.0) return mean - mp.K;
    const double s = std::sqrt(v);
    const double d1 = (m - std::log(mp.K) + v) / s;
    const double d2 = d1 - s;
    return mean * norm_cdf(d1) - mp.K * norm_cdf(d2);
}

const char* greek_name(Greek g) {
    switch (g) {
        case Greek::payoff: return "payoff";
        case Greek::delta: return "delta";
        case Greek::gamma: return "gamma";
        case Greek::rho: return "rho";
        case Greek::theta: return "theta";
        case Greek::vega: return "vega";
    }
    return "?";
}

Greek greek_from_name(const std::string& name) {
    for (int i = 0; i < kGreekCount; ++i) {
        Greek g = static_cast<Greek>(i);
        if (name == greek_name(g)) return g;
    }
    throw std::invalid_argument("unknown integrand name: " + name);
}

MarketParams market_preset(const std::string& name) {
    if (name == "asian50") return MarketParams{};
    throw std::invalid_argument("unknown market preset: " + name);
}

BasketParams basket_preset(const std::string& name) {
    if (name == "basketA") return BasketParams{};
    if (name == "basketB") {
        BasketParams bp;
        bp.w1 = 0.2;
        bp.w2 = 0.8;
        return bp;
    }
    throw std::invalid_argument("unknown basket preset: " + name);
}

namespace {

std::map<std::string, double> read_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file: " + path);
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        size_t a = s.find_first_not_of(ws);
        if (a == std::string::npos) return std::string();
        size_t b = s.find_last_not_of(ws);
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos || t.find('=', eq + 1) != std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected one key = value pair");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": empty key or value");
        size_t used = 0;
        double x;
        try {
            x = std::stod(val, &used);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad numeric value '" + val + "'");
        }
        if (used != val.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad numeric value '" + val + "'");
        if (!kv.emplace(key, x).second)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": duplicate key '" + key + "'");
    }
    return kv;
}

int as_dim(double x) {
    int d = static_cast<int>(x);
    if (!(x == d) || d < 1) throw std::runtime_error("d must be a positive integer");
    return d;
}

void reject_leftovers(const std::map<std::string, double>& kv, const std::string& path) {
    if (!kv.empty())
        throw std::runtime_error(path + ": unknown parameter key '" +
                                 kv.begin()->first + "'");
}

bool take(std::map<std::string, double>& kv, const char* key, double* out) {
    auto it = kv.find(key);
    if (it == kv.end()) return false;
    *out = it->second;
    kv.erase(it);
    return true;
}

}  // namespace

MarketParams load_market_params(const std::string& path) {
    auto kv = read_kv(path);
    MarketParams mp;
    take(kv, "S0", &mp.S0);
    take(kv, "K", &mp.K);
    take(kv, "r", &mp.r);
    take(kv, "sigma", &mp.sigma);
    take(kv, "T", &mp.T);
    double dv;
    if (take(kv, "d", &dv)) mp.d = as_dim(dv);
    reject_leftovers(kv, path);
    check_market(mp);
    return mp;
}

BasketParams load_basket_params(const std::string& path) {
    auto kv = read_kv(path);
    BasketParams bp;
    take(kv, "S0", &bp.S0);
    take(kv, "K", &bp.K);
    take(kv, "T", &bp.T);
    take(kv, "rho", &bp.rho);
    take(kv, "r1", &bp.r1);
    take(kv, "r2", &bp.r2);
    take(kv, "sigma1", &bp.sigma1);
    take(kv, "sigma2", &bp.sigma2);
    take(kv, "w1", &bp.w1);
    take(kv, "w2", &bp.w2);
    double dv;
    if (take(kv, "d", &dv)) bp.d = as_dim(dv);
    reject_leftovers(kv, path);
    check_basket(bp);
    return bp;
}

namespace {

void write_lines(const std::string& path,
                 const std::vector<std::pair<const char*, double>>& vals, int d) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write parameter file: " + path);
    char buf[64];
    for (const auto& [key, val] : vals) {
        std::snprintf(buf, sizeof buf, "%.17g", val);
        out << key << " = " << buf << "\n";
    }
    out << "d = " << d << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void save_market_params(const std::string& path, const MarketParams& mp) {
    check_market(mp);
    write_lines(path,
                {{"S0", mp.S0}, {"K", mp.K}, {"r", mp.r}, {"sigma", mp.sigma}, {"T", mp.T}},
                mp.d);
}

void save_basket_params(const std::string& path, const BasketParams& bp) {
    check_basket(bp);
    write_lines(path,
                {{"S0", bp.S0},
                 {"K", bp.K},
                 {"T", bp.T},
                 {"rho", bp.rho},
                 {"r1", bp.r1},
                 {"r2", bp.r2},
                 {"sigma1", bp.sigma1},
                 {"sigma2", bp.sigma2},
                 {"w1", bp.w1},
                 {"w2", bp.w2}},
                bp.d);
}

std::string bundled_preset_file(const std::string& name) {
#ifdef PQMC_SOURCE_DATA_DIR
    return std::string(PQMC_SOURCE_DATA_DIR) + "/presets/" + name + ".txt";
#else
    return "data/presets/" + name + ".txt";
#endif
}

}  // namespace pqmc
