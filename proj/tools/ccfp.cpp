// ccfp: command-line front end for the chance-constrained fractional
// program toolkit.
//
// Subcommands:
//   check        run the structural assumption checks on an instance file
//   solve        solve one variant and optionally write a result file
//   bounds       secant/tangent objective brackets across segment counts
//   validate     Monte Carlo check of a result file against its instance
//   approx-dump  piecewise coefficient tables plus a dense sweep for plots
//
// Exit codes: 0 solved/passed, 1 usage or internal error, 2 infeasible or
// failed validation verdict, 3 iteration limit, 4 assumption checks failed,
// 5 file/digest mismatch.

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccfp/approx.hpp"
#include "ccfp/io.hpp"
#include "ccfp/model.hpp"
#include "ccfp/nlp.hpp"
#include "ccfp/solver.hpp"
#include "ccfp/validate.hpp"

namespace {

using namespace ccfp;

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_infeasible = 2;
constexpr int exit_iteration_limit = 3;
constexpr int exit_assumption_fail = 4;
constexpr int exit_io_mismatch = 5;

int status_exit_code(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return exit_ok;
        case SolveStatus::infeasible: return exit_infeasible;
        default: return exit_iteration_limit;
    }
}

std::string fmt_vec(const Vec& v) {
    std::string out = "[";
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", v[i]);
        out += (i ? ", " : "");
        out += buf;
    }
    return out + "]";
}

void print_report(const AssumptionReport& rep) {
    int pass = 0, warn = 0, fail = 0;
    for (const AssumptionCheck& c : rep.checks) {
        std::printf("  %-4s  %-38s slack=%-12.6g %s\n", to_string(c.status),
                    c.name.c_str(), c.slack, c.detail.c_str());
        if (c.status == CheckStatus::pass) ++pass;
        else if (c.status == CheckStatus::warn) ++warn;
        else ++fail;
    }
    std::printf("summary: %d pass, %d warn, %d fail\n", pass, warn, fail);
}

VariantMethod parse_method(const std::string& name) {
    if (name == "exact") return VariantMethod::exact;
    if (name == "tangent") return VariantMethod::tangent;
    return VariantMethod::secant;
}

struct SolveArgs {
    std::string instance_path;
    std::string method = "secant";
    int K = 3;
    double z_max = 1.0 - 1e-4;
    std::uint64_t seed = 0x00c0ffee;
    int starts = 5;
    std::string out_path;
};

int run_check(const std::string& instance_path) {
    const ProblemInstance inst = load_instance(instance_path);
    const AssumptionReport rep = validate_instance(inst);
    std::printf("assumption report for %s:\n", instance_path.c_str());
    print_report(rep);
    return rep.any_fail() ? exit_assumption_fail : exit_ok;
}

int run_solve(const SolveArgs& args) {
    const json doc = load_json(args.instance_path);
    const ProblemInstance inst = parse_instance(doc);
    const std::string digest = instance_digest(doc);

    Variant variant;
    variant.method = parse_method(args.method);
    variant.K = args.K;
    variant.z_max = args.z_max;

    const NlpProblem nlp = build_nlp(inst, variant);  // throws AssumptionError on gate failure
    SolveOptions opts;
    opts.seed = args.seed;
    opts.multistarts = args.starts;
    const SolveResult res = solve(nlp, opts);
    const ExactProbability prob = exact_probability(inst, res.x);

    std::printf("instance: %s\n", args.instance_path.c_str());
    std::printf("digest: %s\n", digest.c_str());
    if (variant.method == VariantMethod::exact)
        std::printf("variant: method=exact z_max=%.6g\n", variant.z_max);
    else
        std::printf("variant: method=%s K=%d z_max=%.6g\n", args.method.c_str(),
                    variant.K, variant.z_max);
    std::printf("status: %s\n", to_string(res.status));
    if (!res.diagnostic.empty()) std::printf("note: %s\n", res.diagnostic.c_str());
    std::printf("objective: %.12g\n", res.objective);
    std::printf("x: %s\n", fmt_vec(res.x).c_str());
    std::printf("z: %s\n", fmt_vec(res.z).c_str());
    if (!res.s.empty()) std::printf("s: %s\n", fmt_vec(res.s).c_str());
    std::printf("chance constraint: exact probability %.9f (requirement >= %.9g)\n",
                prob.total, 1.0 - inst.epsilon);
    std::printf("kkt: stationarity %.3g  complementarity %.3g  max violation %.3g\n",
                res.kkt_stationarity, res.kkt_complementarity, res.violation);
    std::printf("solver: %d starts, best start %d, %.1f ms\n", args.starts,
                res.best_start, res.wall_ms);

    if (!args.out_path.empty()) {
        ResultFile r;
        r.instance_digest = digest;
        r.method = args.method;
        r.K = variant.method == VariantMethod::exact ? 0 : variant.K;
        r.z_max = variant.z_max;
        r.status = to_string(res.status);
        r.objective = res.objective;
        r.x = res.x;
        r.z = res.z;
        r.s = res.s;
        r.kkt_stationarity = res.kkt_stationarity;
        r.kkt_complementarity = res.kkt_complementarity;
        r.violation = res.violation;
        r.wall_ms = res.wall_ms;
        r.p_exact = prob.total;
        r.exact_per_scenario = prob.per_scenario;
        save_json(args.out_path, result_to_json(r));
        std::printf("result written to %s\n", args.out_path.c_str());
    }
    return status_exit_code(res.status);
}

int run_bounds(const std::string& instance_path, std::vector<int> ks, double z_max,
               std::uint64_t seed, const std::string& out_path) {
    const ProblemInstance inst = load_instance(instance_path);
    if (ks.empty()) ks = {3, 4, 5, 6};

    std::vector<Vec> rows;
    int exit_code = exit_ok;
    std::printf("%4s %16s %12s %16s %12s %12s\n", "K", "secant_obj", "secant_ms",
                "tangent_obj", "tangent_ms", "gap");
    for (const int K : ks) {
        Variant variant;
        variant.K = K;
        variant.z_max = z_max;
        SolveOptions opts;
        opts.seed = seed;

        variant.method = VariantMethod::secant;
        const SolveResult lo = solve(build_nlp(inst, variant), opts);
        variant.method = VariantMethod::tangent;
        const SolveResult hi = solve(build_nlp(inst, variant), opts);

        const double gap = hi.objective - lo.objective;
        std::printf("%4d %16.8f %12.1f %16.8f %12.1f %12.3g\n", K, lo.objective,
                    lo.wall_ms, hi.objective, hi.wall_ms, gap);
        if (lo.status != SolveStatus::optimal)
            std::printf("     (secant status: %s)\n", to_string(lo.status));
        if (hi.status != SolveStatus::optimal)
            std::printf("     (tangent status: %s)\n", to_string(hi.status));
        rows.push_back({static_cast<double>(K), lo.objective, lo.wall_ms, hi.objective,
                        hi.wall_ms, gap});
        if (exit_code == exit_ok && lo.status != SolveStatus::optimal)
            exit_code = status_exit_code(lo.status);
        if (exit_code == exit_ok && hi.status != SolveStatus::optimal)
            exit_code = status_exit_code(hi.status);
    }
    if (!out_path.empty()) {
        std::ofstream file(out_path);
        if (!file) throw std::runtime_error("cannot write file: " + out_path);
        write_csv(file, {"K", "secant_obj", "secant_ms", "tangent_obj", "tangent_ms", "gap"},
                  rows);
        std::printf("table written to %s\n", out_path.c_str());
    }
    return exit_code;
}

int run_validate(const std::string& result_path, const std::string& instance_path,
                 std::uint64_t samples, std::uint64_t seed, unsigned threads,
                 const std::string& out_path) {
    ResultFile r = load_result(result_path);
    const json instance_doc = load_json(instance_path);
    const ProblemInstance inst = parse_instance(instance_doc);

    const std::string digest = instance_digest(instance_doc);
    if (digest != r.instance_digest) {
        std::fprintf(stderr,
                     "digest mismatch: result was produced from %s but %s hashes to %s\n",
                     r.instance_digest.c_str(), instance_path.c_str(), digest.c_str());
        return exit_io_mismatch;
    }

    const ValidationReport rep = mc_probability(inst, r.x, samples, seed, threads);
    r.p_exact = rep.p_exact;
    r.exact_per_scenario = rep.exact_per_scenario;
    r.p_mc = rep.p_mc;
    r.mc_halfwidth = rep.mc_halfwidth;
    r.mc_samples = rep.samples;
    r.mc_seed = rep.seed;
    const std::string dest = out_path.empty() ? result_path : out_path;
    save_json(dest, result_to_json(r));

    const double target = 1.0 - inst.epsilon;
    std::printf("instance: %s (digest match)\n", instance_path.c_str());
    std::printf("point: %s\n", fmt_vec(r.x).c_str());
    std::printf("exact probability: %.9f (requirement >= %.9g)\n", rep.p_exact, target);
    std::printf("monte carlo: %.6f +/- %.6f (N=%llu, seed %llu)\n", rep.p_mc,
                rep.mc_halfwidth, static_cast<unsigned long long>(rep.samples),
                static_cast<unsigned long long>(rep.seed));
    if (rep.denominator_violations > 0)
        std::printf("warning: %llu sampled denominators were non-positive\n",
                    static_cast<unsigned long long>(rep.denominator_violations));
    const double sigma_hat = rep.mc_halfwidth / 1.96;
    const double mc_gap = std::fabs(rep.p_mc - rep.p_exact);
    std::printf("agreement: |mc - exact| = %.2g (%s 4 sigma = %.2g)\n", mc_gap,
                mc_gap <= 4.0 * sigma_hat ? "within" : "OUTSIDE", 4.0 * sigma_hat);
    std::printf("updated result written to %s\n", dest.c_str());

    const bool inner_method = r.method == "secant" || r.method == "exact";
    if (inner_method && r.status == "optimal") {
        if (rep.p_exact >= target - 1e-9) {
            std::printf("verdict: PASS (probability requirement met)\n");
            return exit_ok;
        }
        std::printf("verdict: FAIL (probability %.9f below requirement %.9g)\n",
                    rep.p_exact, target);
        return exit_infeasible;
    }
    if (r.method == "tangent" && rep.p_exact < target)
        std::printf("note: tangent points bound the objective from above and may "
                    "fall short of the probability requirement (shortfall %.3g)\n",
                    target - rep.p_exact);
    std::printf("verdict: REPORT ONLY (method %s, status %s)\n", r.method.c_str(),
                r.status.c_str());
    return exit_ok;
}

int run_approx_dump(int K, double z_max, const std::string& stem) {
    const Breakpoints bp = make_breakpoints(K, z_max);
    const PiecewiseAffine secant = secant_coeffs(bp);
    const PiecewiseAffine tangent = tangent_coeffs(bp.grid);

    const std::string coeffs_path = stem + ".coeffs.csv";
    {
        std::ofstream file(coeffs_path);
        if (!file) throw std::runtime_error("cannot write file: " + coeffs_path);
        file << "family,piece,slope,intercept,z_lo,z_hi\n";
        for (std::size_t k = 0; k < secant.slopes.size(); ++k)
            file << "secant," << k << ',' << csv_number(secant.slopes[k]) << ','
                 << csv_number(secant.intercepts[k]) << ',' << csv_number(bp.grid[k])
                 << ',' << csv_number(bp.grid[k + 1]) << '\n';
        for (std::size_t k = 0; k < tangent.slopes.size(); ++k)
            file << "tangent," << k << ',' << csv_number(tangent.slopes[k]) << ','
                 << csv_number(tangent.intercepts[k]) << ',' << csv_number(tangent.z_lo)
                 << ',' << csv_number(tangent.z_hi) << '\n';
    }

    const std::string sweep_path = stem + ".sweep.csv";
    constexpr std::size_t points = 1000;
    std::vector<Vec> rows;
    rows.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        const double z = bp.grid.front() + t * (bp.grid.back() - bp.grid.front());
        const double f = z <= std_normal_cdf(1.0) ? 0.0 : log_quantile(z).value;
        rows.push_back({z, f, eval_pwa(secant, z).value, eval_pwa(tangent, z).value});
    }
    {
        std::ofstream file(sweep_path);
        if (!file) throw std::runtime_error("cannot write file: " + sweep_path);
        write_csv(file, {"z", "log_quantile", "secant", "tangent"}, rows);
    }
    std::printf("wrote %s (%zu secant + %zu tangent pieces) and %s (%zu samples)\n",
                coeffs_path.c_str(), secant.slopes.size(), tangent.slopes.size(),
                sweep_path.c_str(), points);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chance-constrained fractional program toolkit"};
    app.require_subcommand(1);

    std::string check_instance;
    CLI::App* check = app.add_subcommand("check", "run instance assumption checks");
    check->add_option("-i,--instance", check_instance, "instance JSON file")->required();

    SolveArgs solve_args;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve one variant");
    solve_cmd->add_option("-i,--instance", solve_args.instance_path, "instance JSON file")
        ->required();
    solve_cmd->add_option("--method", solve_args.method, "exact, secant, or tangent")
        ->check(CLI::IsMember({"exact", "secant", "tangent"}))
        ->capture_default_str();
    solve_cmd->add_option("-K,--segments", solve_args.K, "piecewise segment count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve_cmd->add_option("--z-max", solve_args.z_max, "upper limit for scenario probabilities")
        ->capture_default_str();
    solve_cmd->add_option("--seed", solve_args.seed, "multistart seed")->capture_default_str();
    solve_cmd->add_option("--starts", solve_args.starts, "number of multistarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve_cmd->add_option("-o,--out", solve_args.out_path, "write result JSON here");

    std::string bounds_instance, bounds_out;
    std::vector<int> bounds_ks;
    double bounds_z_max = 1.0 - 1e-4;
    std::uint64_t bounds_seed = 0x00c0ffee;
    CLI::App* bounds = app.add_subcommand("bounds", "secant/tangent objective brackets");
    bounds->add_option("-i,--instance", bounds_instance, "instance JSON file")->required();
    bounds->add_option("-K,--segments", bounds_ks,
                       "segment counts (repeatable; default 3 4 5 6)")
        ->check(CLI::PositiveNumber);
    bounds->add_option("--z-max", bounds_z_max, "upper limit for scenario probabilities")
        ->capture_default_str();
    bounds->add_option("--seed", bounds_seed, "multistart seed")->capture_default_str();
    bounds->add_option("-o,--out", bounds_out, "write the table as CSV here");

    std::string val_result, val_instance, val_out;
    std::uint64_t val_samples = 1000000, val_seed = 20240817;
    unsigned val_threads = 0;
    CLI::App* validate = app.add_subcommand("validate", "Monte Carlo check of a result");
    validate->add_option("-r,--result", val_result, "result JSON file")->required();
    validate->add_option("-i,--instance", val_instance, "instance JSON file")->required();
    validate->add_option("--samples", val_samples, "Monte Carlo sample count")
        ->check(CLI::Range(std::uint64_t{1000}, std::uint64_t{1000000000}))
        ->capture_default_str();
    validate->add_option("--seed", val_seed, "Monte Carlo seed")->capture_default_str();
    validate->add_option("--threads", val_threads,
                         "worker threads (0 = auto, also honors CCFP_THREADS)")
        ->capture_default_str();
    validate->add_option("-o,--out", val_out,
                         "write the updated result here instead of in place");

    int dump_K = 3;
    double dump_z_max = 1.0 - 1e-4;
    std::string dump_stem;
    CLI::App* dump = app.add_subcommand("approx-dump", "dump piecewise approximation tables");
    dump->add_option("-K,--segments", dump_K, "piecewise segment count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    dump->add_option("--z-max", dump_z_max, "upper limit for scenario probabilities")
        ->capture_default_str();
    dump->add_option("-o,--out", dump_stem, "output stem (writes STEM.coeffs.csv and STEM.sweep.csv)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return run_check(check_instance);
        if (solve_cmd->parsed()) return run_solve(solve_args);
        if (bounds->parsed())
            return run_bounds(bounds_instance, bounds_ks, bounds_z_max, bounds_seed,
                              bounds_out);
        if (validate->parsed())
            return run_validate(val_result, val_instance, val_samples, val_seed,
                                val_threads, val_out);
        if (dump->parsed()) return run_approx_dump(dump_K, dump_z_max, dump_stem);
    } catch (const ccfp::AssumptionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        print_report(e.report);
        return exit_assumption_fail;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io_mismatch;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io_mismatch;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return exit_internal;
    }
    return exit_internal;
}
