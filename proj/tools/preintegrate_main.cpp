// Command-line driver for the variance-reduction experiments.
//
//   preintegrate rmse       RMSE-versus-n sweep for a set of methods
//   preintegrate truth      print (and cache) the reference value
//   preintegrate timing     mean wall-clock cost per estimate
//   preintegrate walsh-lab  gain coefficients of a scrambled net on a
//                           dyadic step function, predicted vs empirical
//   preintegrate sobol-index per-coordinate total Sobol' indices and the
//                           mean dimension of a preset integrand
//
// Exit codes: 0 success, 2 a pre-integration direction was not monotone
// (rerun with --allow-quad-fallback to integrate by quadrature instead),
// 1 any other error.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pqmc/csvio.hpp"
#include "pqmc/errors.hpp"
#include "pqmc/harness.hpp"
#include "pqmc/jansen.hpp"
#include "pqmc/walsh.hpp"

using namespace pqmc;

namespace {

// "7" or "3..17" -> [lo, hi]
void parse_m_range(const std::string& text, int* lo, int* hi) {
    size_t dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            *lo = *hi = std::stoi(text);
        } else {
            *lo = std::stoi(text.substr(0, dots));
            *hi = std::stoi(text.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw CLI::ValidationError("--m", "expected an integer or lo..hi range");
    }
}

std::string summary_path(const std::string& out) {
    const std::string ext = ".csv";
    if (out.size() > ext.size() &&
        out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
        return out.substr(0, out.size() - ext.size()) + "-summary" + ext;
    return out + "-summary.csv";
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= text.size()) {
        size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        std::string field = text.substr(start, comma - start);
        size_t a = field.find_first_not_of(" \t");
        size_t b = field.find_last_not_of(" \t");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
        start = comma + 1;
    }
    return out;
}

Scramble scramble_from_name(const std::string& name) {
    if (name == "lms" || name == "linear-matrix-shift")
        return Scramble::linear_matrix_shift;
    if (name == "nested" || name == "nested-uniform") return Scramble::nested_uniform;
    throw CLI::ValidationError("--scramble", "expected lms or nested");
}

struct CommonFlags {
    std::string preset = "asian50";
    std::string integrand = "payoff";
    std::string construction = "standard";
    std::string methods = "mc,rqmc,preint,preint-dimred,as-preint";
    std::string m_text = "3..13";
    int reps = 50;
    uint64_t seed = 1;
    std::string out;
    std::string cache_dir = "truth_cache";
    int truth_m = 17;
    int truth_reps = 30;
    uint64_t truth_seed = 9001;
    MethodOptions opt;
    std::string scramble = "lms";
    std::string completion = "eigvec";

    void bind_problem(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "asian50, basketA, or basketB");
        cmd->add_option("--integrand", integrand,
                        "payoff, delta, gamma, rho, theta, vega, or geometric");
        cmd->add_option("--construction", construction,
                        "standard/pca, or ordinary-/full- standard/pca for baskets");
    }
    void bind_method(CLI::App* cmd) {
        cmd->add_option("--M", opt.M, "gradient sample size for the rotations");
        cmd->add_option("--fd-epsilon", opt.fd_epsilon, "finite-difference step");
        cmd->add_flag("--centered", opt.centered, "centered finite differences");
        cmd->add_option("--completion", completion,
                        "rotation completion: eigvec or householder");
        cmd->add_option("--scramble", scramble, "net randomization: lms or nested");
        cmd->add_flag("--allow-quad-fallback", opt.allow_quad_fallback,
                      "integrate non-monotone directions by quadrature");
    }
    void finish() {
        opt.scramble = scramble_from_name(scramble);
        if (completion == "eigvec" || completion == "eigvec-complement")
            opt.completion = CompletionMode::eigvec_complement;
        else if (completion == "householder")
            opt.completion = CompletionMode::householder;
        else
            throw CLI::ValidationError("--completion",
                                       "expected eigvec or householder");
    }
    TruthOptions truth_options() const {
        TruthOptions to;
        to.m = truth_m;
        to.reps = truth_reps;
        to.seed = truth_seed;
        to.cache_dir = cache_dir;
        to.method = opt;
        return to;
    }
};

int cmd_rmse(CommonFlags& f) {
    f.finish();
    Problem prob = make_problem(f.preset, f.integrand, f.construction);
    SweepOptions so;
    parse_m_range(f.m_text, &so.m_lo, &so.m_hi);
    so.reps = f.reps;
    so.master_seed = f.seed;
    so.method = f.opt;
    so.truth = f.truth_options();
    ExperimentReport rep = rmse_sweep(prob, parse_methods(f.methods), so);
    if (!f.out.empty()) {
        write_report_csv(f.out, rep);
        write_summary_csv(summary_path(f.out), rep);
        std::printf("# report: %s\n# summary: %s\n", f.out.c_str(),
                    summary_path(f.out).c_str());
    }
    std::printf("# truth %.10g (stderr %.3g)\n", rep.truth, rep.truth_se);
    std::printf("%-14s %3s %9s %12s %10s %8s\n", "method", "m", "n", "rmse",
                "stderr", "slope");
    for (const auto& s : rep.summary)
        std::printf("%-14s %3d %9zu %12.4e %10.2e %8.3f\n", s.method.c_str(),
                    s.m, s.n, s.rmse, s.se, s.slope);
    return 0;
}

int cmd_truth(CommonFlags& f) {
    f.finish();
    Problem prob = make_problem(f.preset, f.integrand, f.construction);
    TruthResult t = ground_truth(prob, f.truth_options());
    std::printf("value    %.17g\n", t.value);
    std::printf("stderr   %.6g\n", t.se);
    std::printf("reps     %d\n", t.reps);
    std::printf("n        %zu\n", t.n);
    std::printf("cache    %s%s\n", t.cache_path.c_str(),
                t.from_cache ? " (hit)" : " (computed)");
    return 0;
}

int cmd_timing(CommonFlags& f) {
    f.finish();
    int m_lo = 15, m_hi = 15;
    parse_m_range(f.m_text, &m_lo, &m_hi);
    if (m_lo != m_hi)
        throw CLI::ValidationError("--m", "timing takes a single m");
    std::vector<Problem> probs;
    for (const std::string& ig : split_csv(f.integrand))
        probs.push_back(make_problem(f.preset, ig, f.construction));
    std::vector<TimingRow> rows =
        timing_run(probs, parse_methods(f.methods), m_lo, f.reps, f.seed, f.opt);
    if (!f.out.empty()) {
        write_timing_csv(f.out, rows);
        std::printf("# timing: %s\n", f.out.c_str());
    }
    std::printf("%-10s %-14s %9s %4s %12s %12s\n", "integrand", "method", "n",
                "reps", "seconds", "grad_sec");
    for (const auto& r : rows)
        std::printf("%-10s %-14s %9zu %4d %12.6f %12.6f\n", r.integrand.c_str(),
                    r.method.c_str(), r.n, r.reps, r.seconds,
                    r.gradient_seconds);
    return 0;
}

// Gain coefficients of a scrambled Sobol' net applied to a random dyadic
// step function: one row per frequency group, then predicted vs empirical
// variance as comment lines.
int cmd_walsh_lab(int d, const std::string& r_text, int m, int reps,
                  uint64_t seed, const std::string& scramble_name,
                  const std::string& out) {
    std::vector<int> r;
    for (const std::string& s : split_csv(r_text)) r.push_back(std::stoi(s));
    if (static_cast<int>(r.size()) == 1 && d > 1) r.assign(d, r[0]);
    if (static_cast<int>(r.size()) != d)
        throw CLI::ValidationError("--r", "need one resolution per dimension");
    Scramble kind = scramble_from_name(scramble_name);

    DyadicStepFunction f = DyadicStepFunction::random(r, seed);
    PointSet base = generate_sobol(m, d);
    double n = static_cast<double>(base.points.size() / d);

    std::FILE* os = out.empty() ? stdout : std::fopen(out.c_str(), "w");
    if (!os) throw std::runtime_error("cannot open " + out);
    std::fprintf(os, "ell,gamma,sigma2,contribution\n");
    std::vector<int> ell(d, 0);
    double predicted = 0.0;
    for (;;) {
        int j = d - 1;
        while (j >= 0 && ell[j] == r[j]) ell[j--] = 0;
        if (j < 0) break;
        ++ell[j];
        double gamma = gain_fast(base, ell);
        double s2 = group_variance(f, ell);
        double contrib = gamma * s2 / n;
        predicted += contrib;
        std::string label;
        for (int k = 0; k < d; ++k)
            label += (k ? "-" : "") + std::to_string(ell[k]);
        std::fprintf(os, "%s,%.17g,%.17g,%.17g\n", label.c_str(), gamma, s2,
                     contrib);
    }
    ScrambleStats stats = empirical_scramble_variance(f, base, reps, seed, kind);
    std::fprintf(os, "# predicted_variance,%.17g\n", predicted);
    std::fprintf(os, "# empirical_variance,%.17g\n", stats.variance);
    std::fprintf(os, "# empirical_stderr,%.17g\n", stats.stderr_variance);
    std::fprintf(os, "# scrambles,%d\n", reps);
    std::fprintf(os, "# function_mean,%.17g\n", dyadic_mean(f));
    std::fprintf(os, "# function_variance,%.17g\n", dyadic_variance(f));
    if (os != stdout) std::fclose(os);
    if (!out.empty())
        std::printf("# walsh-lab: %s (predicted %.6g, empirical %.6g +- %.2g)\n",
                    out.c_str(), predicted, stats.variance,
                    stats.stderr_variance);
    return 0;
}

// Per-coordinate total Sobol' indices and the mean dimension of a preset
// integrand, one CSV row per target.
int cmd_sobol_index(CommonFlags& f, int m) {
    f.finish();
    Problem prob = make_problem(f.preset, f.integrand, f.construction);
    RealFn fn = problem_integrand(prob, prob.factor);
    JansenOptions jo;
    jo.m = m;
    jo.replicates = f.reps;
    jo.seed = f.seed;
    jo.scramble = f.opt.scramble;
    MeanDimensionEstimate md = mean_dimension(fn, prob.dim, jo);

    std::FILE* os = f.out.empty() ? stdout : std::fopen(f.out.c_str(), "w");
    if (!os) throw std::runtime_error("cannot open " + f.out);
    std::fprintf(os, "target,estimate,stderr\n");
    for (size_t j = 0; j < md.tau.size(); ++j)
        std::fprintf(os, "tau2[%zu],%.17g,%.17g\n", j + 1, md.tau[j],
                     md.tau_stderr[j]);
    std::fprintf(os, "variance,%.17g,%.17g\n", md.variance, md.stderr_variance);
    std::fprintf(os, "mean_dimension,%.17g,%.17g\n", md.nu, md.stderr_nu);
    if (os != stdout) std::fclose(os);
    if (!f.out.empty())
        std::printf("# sobol-index: %s (mean dimension %.4f +- %.4f)\n",
                    f.out.c_str(), md.nu, md.stderr_nu);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pre-integrated quasi-Monte Carlo experiment driver"};
    app.require_subcommand(1);

    CommonFlags rmse_f, truth_f, timing_f, sobol_f;

    CLI::App* rmse = app.add_subcommand("rmse", "RMSE-versus-n sweep");
    rmse_f.bind_problem(rmse);
    rmse_f.bind_method(rmse);
    rmse->add_option("--methods", rmse_f.methods, "comma-separated method list");
    rmse->add_option("--m", rmse_f.m_text, "points per estimate: 2^m, lo..hi");
    rmse->add_option("--reps", rmse_f.reps, "replicates per (method, m)");
    rmse->add_option("--seed", rmse_f.seed, "master seed");
    rmse->add_option("--out", rmse_f.out, "report CSV path (summary lands next to it)");
    rmse->add_option("--cache-dir", rmse_f.cache_dir, "reference-value cache");
    rmse->add_option("--truth-m", rmse_f.truth_m, "reference: points exponent");
    rmse->add_option("--truth-reps", rmse_f.truth_reps, "reference: replicates");
    rmse->add_option("--truth-seed", rmse_f.truth_seed, "reference: seed");

    CLI::App* truth = app.add_subcommand("truth", "print the reference value");
    truth_f.bind_problem(truth);
    truth_f.bind_method(truth);
    truth->add_option("--m", truth_f.truth_m, "points exponent (default 17)");
    truth->add_option("--reps", truth_f.truth_reps, "replicates (default 30)");
    truth->add_option("--seed", truth_f.truth_seed, "seed (default 9001)");
    truth->add_option("--cache-dir", truth_f.cache_dir, "cache directory");

    CLI::App* timing = app.add_subcommand("timing", "wall-clock cost per estimate");
    timing_f.m_text = "15";
    timing_f.reps = 10;
    timing_f.seed = 7;
    timing_f.bind_problem(timing);
    timing_f.bind_method(timing);
    timing->add_option("--methods", timing_f.methods, "comma-separated method list");
    timing->add_option("--m", timing_f.m_text, "points per estimate: 2^m");
    timing->add_option("--reps", timing_f.reps, "replicates to average");
    timing->add_option("--seed", timing_f.seed, "master seed");
    timing->add_option("--out", timing_f.out, "timing CSV path");

    int wl_d = 2, wl_m = 5, wl_reps = 1000;
    uint64_t wl_seed = 1;
    std::string wl_r = "3,3", wl_scramble = "lms", wl_out;
    CLI::App* wl = app.add_subcommand(
        "walsh-lab", "gain coefficients and the variance identity");
    wl->add_option("--d", wl_d, "dimension (<= 4)");
    wl->add_option("--r", wl_r, "dyadic resolutions, comma-separated");
    wl->add_option("--m", wl_m, "net size 2^m");
    wl->add_option("--reps", wl_reps, "independent scrambles");
    wl->add_option("--seed", wl_seed, "seed for the function and scrambles");
    wl->add_option("--scramble", wl_scramble, "lms or nested");
    wl->add_option("--out", wl_out, "CSV path (default stdout)");

    int si_m = 10;
    CLI::App* si = app.add_subcommand(
        "sobol-index", "per-coordinate total indices and mean dimension");
    sobol_f.construction = "pca";
    sobol_f.reps = 30;
    sobol_f.bind_problem(si);
    sobol_f.bind_method(si);
    si->add_option("--m", si_m, "pick-freeze sample exponent");
    si->add_option("--reps", sobol_f.reps, "replicates for standard errors");
    si->add_option("--seed", sobol_f.seed, "master seed");
    si->add_option("--out", sobol_f.out, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rmse->parsed()) return cmd_rmse(rmse_f);
        if (truth->parsed()) return cmd_truth(truth_f);
        if (timing->parsed()) return cmd_timing(timing_f);
        if (wl->parsed())
            return cmd_walsh_lab(wl_d, wl_r, wl_m, wl_reps, wl_seed,
                                 wl_scramble, wl_out);
        if (si->parsed()) return cmd_sobol_index(sobol_f, si_m);
    } catch (const MonotonicityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr,
                     "hint: --allow-quad-fallback integrates this direction "
                     "by quadrature\n");
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
