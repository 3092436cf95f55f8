// Acceptance gate for the toolkit.  Each numbered criterion prints exactly
// one PASS/FAIL line with the measured quantities and its runtime; the
// process exits nonzero if any criterion fails.  Criteria are evaluated
// as stated — a criterion that cannot hold on the bundled instance is
// reported FAIL with the measurement, not weakened until it passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ccfp/approx.hpp"
#include "ccfp/io.hpp"
#include "ccfp/model.hpp"
#include "ccfp/nlp.hpp"
#include "ccfp/normal.hpp"
#include "ccfp/rng.hpp"
#include "ccfp/solver.hpp"
#include "ccfp/validate.hpp"
#include "support/equivalence.hpp"
#include "support/reference_normal.hpp"
#include "support/test_instances.hpp"

namespace {

using namespace ccfp;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string economic_path() { return std::string(CCFP_DATA_DIR) + "/main_economic.json"; }

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

void report(int id, bool pass, const std::string& detail, double ms, int& failures) {
    std::printf("criterion %d: %s - %s (%.0f ms)\n", id, pass ? "PASS" : "FAIL",
                detail.c_str(), ms);
    std::fflush(stdout);
    if (!pass) ++failures;
}

// Shared between criteria 3 and 4: the bundled instance and the secant
// solutions per segment count.
struct Table1State {
    ProblemInstance inst;
    std::vector<SolveResult> secant;
    bool ready = false;
};

void criterion_1(int& failures) {
    const auto t0 = Clock::now();
    constexpr int points = 10000;
    double max_err = 0.0;
    for (int i = 0; i < points; ++i) {
        const double p = 1e-6 + (1.0 - 2e-6) * i / (points - 1);
        double lo = -9.0, hi = 9.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ccfp_test::ref_cdf(mid) < p ? lo : hi) = mid;
        }
        const double oracle = 0.5 * (lo + hi);
        max_err = std::max(max_err, std::fabs(std_normal_quantile(p) - oracle));
    }
    const double ms = ms_since(t0);
    const bool pass = max_err <= 1e-9 && ms < 5000.0;
    report(1, pass,
           fmt("max |quantile - 200-step bisection oracle| = %.3g over %d points in "
               "[1e-6, 1-1e-6], bound 1e-9",
               max_err, points),
           ms, failures);
}

void criterion_2(int& failures) {
    const auto t0 = Clock::now();
    const double z_lo = std_normal_cdf(1.0);
    const double z_hi = 1.0 - 1e-4;
    constexpr int points = 10000;
    double worst_slack = 0.0;   // positive when the sandwich inverts
    double sec_sup = 0.0, tan_sup = 0.0;
    for (const int K : {1, 3, 6, 64}) {
        const Breakpoints bp = make_breakpoints(K, z_hi);
        const PiecewiseAffine sec = secant_coeffs(bp);
        const PiecewiseAffine tan = tangent_coeffs(bp.grid);
        for (int i = 0; i < points; ++i) {
            const double z = z_lo + (z_hi - z_lo) * i / (points - 1);
            const double f = log_quantile(z).value;
            const double s = eval_pwa(sec, z).value;
            const double t = eval_pwa(tan, z).value;
            worst_slack = std::max({worst_slack, t - f, f - s});
            if (K == 64) {
                sec_sup = std::max(sec_sup, s - f);
                tan_sup = std::max(tan_sup, f - t);
            }
        }
    }
    const double ms = ms_since(t0);
    const bool sandwich_ok = worst_slack <= 1e-12;
    const bool sup_ok = sec_sup <= 2e-3 && tan_sup <= 2e-3;
    report(2, sandwich_ok && sup_ok,
           fmt("sandwich slack %.2g (bound 1e-12); K=64 sup-errors secant %.6f, "
               "tangent %.6f (bound 2e-3 each)",
               worst_slack, sec_sup, tan_sup),
           ms, failures);
}

void criterion_3(Table1State& state, int& failures) {
    const auto t0 = Clock::now();
    state.inst = load_instance(economic_path());
    state.ready = true;

    const int ks[] = {3, 4, 5, 6};
    const double secant_target[] = {292.3779, 292.5457, 292.5142, 292.4880};
    const double tangent_target[] = {292.5845, 292.6720, 292.5924, 292.5377};

    bool pass = true;
    std::string issue;
    double gap3 = 0.0, gap6 = 0.0;
    int non_optimal = 0;
    double worst_violation = 0.0;
    for (int idx = 0; idx < 4; ++idx) {
        Variant variant;
        variant.K = ks[idx];
        variant.method = VariantMethod::secant;
        const SolveResult lo = solve(build_nlp(state.inst, variant), {});
        variant.method = VariantMethod::tangent;
        const SolveResult hi = solve(build_nlp(state.inst, variant), {});
        state.secant.push_back(lo);

        for (const SolveResult* r : {&lo, &hi})
            if (r->status != SolveStatus::optimal) {
                ++non_optimal;
                worst_violation = std::max(worst_violation, r->violation);
            }
        pass = pass && lo.status == SolveStatus::optimal &&
               hi.status == SolveStatus::optimal &&
               std::fabs(lo.objective - secant_target[idx]) <= 0.5 &&
               std::fabs(hi.objective - tangent_target[idx]) <= 0.5 &&
               hi.objective >= lo.objective - 1e-4;
        if (ks[idx] == 3) gap3 = hi.objective - lo.objective;
        if (ks[idx] == 6) gap6 = hi.objective - lo.objective;
    }
    const double ms = ms_since(t0);
    pass = pass && gap6 < gap3 && ms < 60000.0;
    if (non_optimal > 0)
        issue = fmt("%d of 8 solves report infeasible (max violation %.3g): the "
                    "bundled box and range rows keep every scenario margin positive, "
                    "so objective targets near 292.4-292.7 are unreachable",
                    non_optimal, worst_violation);
    else
        issue = fmt("objectives within +/-0.5 of targets for K in {3,4,5,6}; "
                    "gap(3)=%.4g, gap(6)=%.4g", gap3, gap6);
    report(3, pass, issue, ms, failures);
}

void criterion_4(const Table1State& state, int& failures) {
    const auto t0 = Clock::now();
    if (!state.ready || state.secant.size() != 4) {
        report(4, false, "no secant solutions available from criterion 3", 0.0, failures);
        return;
    }
    constexpr std::uint64_t samples = 1000000;
    double min_p = 1.0, worst_gap = 0.0, worst_band = 0.0;
    bool pass = true;
    for (const SolveResult& res : state.secant) {
        const double p = exact_probability(state.inst, res.x).total;
        min_p = std::min(min_p, p);
        const ValidationReport mc =
            mc_probability(state.inst, res.x, samples, 20240817);
        const double band = 4.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) /
                                            static_cast<double>(samples));
        const double gap = std::fabs(mc.p_mc - p);
        if (gap > worst_gap) {
            worst_gap = gap;
            worst_band = band;
        }
        pass = pass && p >= 0.98 - 1e-9 && gap <= band;
    }
    const double ms = ms_since(t0);
    pass = pass && ms < 30000.0;
    report(4, pass,
           fmt("min exact probability %.6f (need >= 0.98); worst |mc - exact| %.3g "
               "vs 4-sigma band %.3g at N=1e6",
               min_p, worst_gap, worst_band),
           ms, failures);
}

void criterion_5(int& failures) {
    const auto t0 = Clock::now();
    const ProblemInstance inst = load_instance(economic_path());

    NlpProblem lp;
    lp.inst = inst;
    lp.variant.method = VariantMethod::exact;
    lp.m = inst.m;
    lp.J = 0;
    lp.nvar = inst.m;
    lp.has_s = false;
    lp.lower = inst.feasible_set.lower;
    lp.upper = inst.feasible_set.upper;
    for (std::size_t k = 0; k < inst.feasible_set.ranges.size(); ++k) {
        LinearRow row;
        row.coef = inst.feasible_set.ranges[k].a;
        row.lo = inst.feasible_set.ranges[k].lo;
        row.hi = inst.feasible_set.ranges[k].hi;
        row.name = "range[" + std::to_string(k) + "]";
        lp.linear_rows.push_back(std::move(row));
    }

    const SolveResult res = solve(lp, {});
    const Vec target = {0.0, 0.0, 5.0, 0.0, 0.0};
    double point_err = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
        point_err = std::max(point_err, std::fabs(res.x[i] - target[i]));
    const double obj_err = std::fabs(res.objective - 385.0);
    const double ms = ms_since(t0);
    const bool pass =
        res.status == SolveStatus::optimal && obj_err <= 1e-6 && point_err <= 1e-6;
    report(5, pass,
           fmt("chance constraint removed: objective 385 %+.3g, x distance %.3g from "
               "(0,0,5,0,0), status %s",
               res.objective - 385.0, point_err, to_string(res.status)),
           ms, failures);
}

void criterion_6(int& failures) {
    const auto t0 = Clock::now();
    const ProblemInstance inst = load_instance(economic_path());
    double worst = 0.0;
    for (const VariantMethod method :
         {VariantMethod::exact, VariantMethod::secant, VariantMethod::tangent}) {
        Variant variant;
        variant.method = method;
        const NlpProblem nlp = build_nlp(inst, variant);
        CounterRng rng(0x20260815ULL + static_cast<std::uint64_t>(method));
        for (int pt = 0; pt < 20; ++pt) {
            Vec v(nlp.nvar);
            for (std::size_t i = 0; i < nlp.nvar; ++i) {
                const double lo = nlp.lower[i], hi = nlp.upper[i];
                if (std::isfinite(lo) && std::isfinite(hi))
                    v[i] = lo + (0.2 + 0.6 * rng.uniform01()) * (hi - lo);
                else
                    v[i] = 0.25 + 4.75 * rng.uniform01();
            }
            worst = std::max(worst, check_gradients(nlp, v));
        }
    }
    const double ms = ms_since(t0);
    const bool pass = worst <= 1e-5;
    report(6, pass,
           fmt("max relative gradient error %.3g over 20 interior points x 3 "
               "variants (bound 1e-5)",
               worst),
           ms, failures);
}

void criterion_7(int& failures) {
    const auto t0 = Clock::now();
    std::size_t disagreements = 0, checked = 0;
    for (std::uint64_t inst_seed = 0; inst_seed < 100; ++inst_seed) {
        const ProblemInstance inst = ccfp_test::random_tiny_instance(inst_seed);
        const int K = 1 + static_cast<int>(inst_seed % 3);
        Variant variant;
        variant.method = VariantMethod::secant;
        variant.K = K;
        variant.z_max = 0.9999;
        const NlpProblem nlp = build_nlp(inst, variant);
        const std::optional<PiecewiseAffine> pwa = nlp.pwa;

        CounterRng rng(CounterRng::mix(inst_seed));
        const double phi1 = std_normal_cdf(1.0);
        for (int pt = 0; pt < 1000; ++pt) {
            Vec x(inst.m);
            for (std::size_t i = 0; i < inst.m; ++i)
                x[i] = inst.feasible_set.lower[i] +
                       (inst.feasible_set.upper[i] - inst.feasible_set.lower[i]) *
                           rng.uniform01();
            Vec z(nlp.J);
            for (double& zj : z) zj = phi1 + (0.9999 - phi1) * rng.uniform01();

            Vec v(nlp.nvar, 0.0);
            for (std::size_t i = 0; i < inst.m; ++i) v[i] = x[i];
            bool epigraph_ok = true;
            for (std::size_t j = 0; j < nlp.J; ++j) {
                v[nlp.zi(j)] = z[j];
                v[nlp.si(j)] = eval_pwa(nlp.pwa, z[j]).value;
            }
            for (std::size_t j = 0; j < nlp.J && epigraph_ok; ++j)
                epigraph_ok = nlp.constraint(j, v).value <= 0.0;

            const bool matrix_ok = ccfp_test::matrix_form_feasible(inst, pwa, x, z);
            disagreements += epigraph_ok != matrix_ok;
            ++checked;
        }
    }
    const double ms = ms_since(t0);
    report(7, disagreements == 0,
           fmt("%zu disagreements between epigraph rows and the minimal-Y matrix "
               "predicate over %zu instance-points",
               disagreements, checked),
           ms, failures);
}

void criterion_8(int& failures) {
    const auto t0 = Clock::now();
    json doc = load_json(economic_path());
    doc["epsilon"] = 0.05;

    const AssumptionReport rep = validate_instance(parse_instance(doc));
    const AssumptionCheck* check = rep.find("epsilon_within_scenario_budget");
    const double slack_target = 0.05 - 0.3 * (1.0 - std_normal_cdf(1.0));
    const bool check_ok = check != nullptr && check->status == CheckStatus::fail &&
                          std::fabs(check->slack - slack_target) <= 1e-5;

    const std::string tmp = "/tmp/ccfp_acceptance_higheps.json";
    save_json(tmp, doc);
    const std::string cmd =
        std::string(CCFP_CLI_PATH) + " solve -i " + tmp + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    const int exit_code = (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;

    const double ms = ms_since(t0);
    report(8, check_ok && exit_code == 4,
           fmt("epsilon 0.05 flagged %s with slack %.8f (target %.8f +/- 1e-5); "
               "solve exit code %d (want 4)",
               check != nullptr && check->status == CheckStatus::fail ? "fail" : "NOT fail",
               check ? check->slack : -1.0, slack_target, exit_code),
           ms, failures);
}

}  // namespace

int main() {
    int failures = 0;
    Table1State table1;

    const auto run = [&failures](int id, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            report(id, false, fmt("exception: %s", e.what()), 0.0, failures);
        }
    };

    run(1, [&] { criterion_1(failures); });
    run(2, [&] { criterion_2(failures); });
    run(3, [&] { criterion_3(table1, failures); });
    run(4, [&] { criterion_4(table1, failures); });
    run(5, [&] { criterion_5(failures); });
    run(6, [&] { criterion_6(failures); });
    run(7, [&] { criterion_7(failures); });
    run(8, [&] { criterion_8(failures); });

    std::printf("acceptance: %d of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
