#pragma once

// Solution validation: the exact probability that the random fraction
// meets its scenario benchmark at a fixed decision x, plus an
// independent Monte Carlo estimate of the same quantity.
//
// Per scenario j the satisfied event is
//
//   xi1' c(x) + eta1  <=  r_j * (a2^j' c(x) + b2^j),
//
// where (xi1, eta1) ~ N((mu1, l1), Gamma).  The left side is Gaussian
// with mean mu1' c(x) + l1 and standard deviation sigma(x), so the exact
// scenario probability is Phi((r_j (a2^j' c + b2^j) - l1 - mu1' c) / sigma)
// and the total is the probability-weighted sum over scenarios.
//
// The Monte Carlo estimator redraws everything the model treats as
// random: the scenario index and the Gaussian numerator.  Each sample i
// uses its own counter-derived stream, so the estimate depends only on
// (seed, N) — never on how the samples are sharded across threads.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ccfp/linalg.hpp"
#include "ccfp/model.hpp"
#include "ccfp/nlp.hpp"
#include "ccfp/normal.hpp"
#include "ccfp/rng.hpp"

namespace ccfp {

struct ExactProbability {
    double total = 0.0;
    Vec per_scenario;
};

inline ExactProbability exact_probability(const ProblemInstance& inst, const Vec& x) {
    if (x.size() != inst.m)
        throw std::invalid_argument("exact_probability: x has wrong dimension");
    const EvalC c = eval_c(inst.c_spec, x);
    const SigmaEval sg = sigma(inst, x);  // throws domain_error if degenerate

    ExactProbability out;
    out.per_scenario.reserve(inst.scenarios.size());
    for (const Scenario& sc : inst.scenarios) {
        const double threshold = sc.r * (dot(sc.a2, c.values) + sc.b2);
        const double mean = dot(inst.mu1, c.values) + inst.l1;
        const double p = std_normal_cdf((threshold - mean) / sg.value);
        out.per_scenario.push_back(p);
        out.total += sc.p * p;
    }
    return out;
}

struct ValidationReport {
    double p_exact = 0.0;
    Vec exact_per_scenario;

    double p_mc = 0.0;
    double mc_halfwidth = 0.0;  // 1.96 * sqrt(p(1-p)/N)
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    Vec mc_per_scenario;  // success rate conditional on the scenario draw
    std::uint64_t denominator_violations = 0;
};

namespace detail {

inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CCFP_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1 && n <= 64) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min(hw, 8u);
}

struct McShardTally {
    std::uint64_t successes = 0;
    std::uint64_t denominator_violations = 0;
    std::vector<std::uint64_t> draws;      // per scenario
    std::vector<std::uint64_t> hits;       // per scenario
};

}  // namespace detail

// Monte Carlo estimate of the satisfaction probability at x, with the
// exact counterpart filled in alongside.  Samples where the realized
// scenario denominator a2' c + b2 is nonpositive are counted as
// violations of the positivity assumption and never as successes.
inline ValidationReport mc_probability(const ProblemInstance& inst, const Vec& x,
                                       std::uint64_t samples, std::uint64_t seed,
                                       unsigned threads = 0) {
    if (x.size() != inst.m)
        throw std::invalid_argument("mc_probability: x has wrong dimension");
    if (samples < 1000)
        throw std::domain_error("mc_probability: need at least 1000 samples");

    const ExactProbability exact = exact_probability(inst, x);
    const EvalC c = eval_c(inst.c_spec, x);
    const std::size_t J = inst.scenarios.size();
    const std::size_t n = inst.n;

    // Numerator = mean + g' t with g ~ N(0, I_{n+1}) and t = L' y.
    const CholeskyFactor factor = cholesky(inst.gamma_cov);
    Vec y(n + 1);
    for (std::size_t i = 0; i < n; ++i) y[i] = c.values[i];
    y[n] = 1.0;
    Vec t(n + 1, 0.0);
    for (std::size_t k = 0; k < n + 1; ++k)
        for (std::size_t i = 0; i < n + 1; ++i)
            t[k] += factor.lower_triangular(i, k) * y[i];
    const double mean = dot(inst.mu1, c.values) + inst.l1;

    Vec cumulative(J);
    Vec threshold(J);
    std::vector<bool> denom_bad(J);
    double acc = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
        acc += inst.scenarios[j].p;
        cumulative[j] = acc;
        const double denom = dot(inst.scenarios[j].a2, c.values) + inst.scenarios[j].b2;
        threshold[j] = inst.scenarios[j].r * denom;
        denom_bad[j] = !(denom > 0.0);
    }

    const unsigned thread_count = static_cast<unsigned>(
        std::min<std::uint64_t>(detail::resolve_thread_count(threads), samples));
    std::vector<detail::McShardTally> tallies(thread_count);

    auto run_shard = [&](std::uint64_t begin, std::uint64_t end,
                         detail::McShardTally& tally) {
        tally.draws.assign(J, 0);
        tally.hits.assign(J, 0);
        for (std::uint64_t i = begin; i < end; ++i) {
            CounterRng rng = CounterRng::derive(seed, i);
            const double u = rng.uniform01();
            std::size_t j = 0;
            while (j + 1 < J && u > cumulative[j]) ++j;
            double num = mean;
            for (std::size_t k = 0; k < n + 1; ++k)
                num += std_normal_quantile(rng.uniform01()) * t[k];
            ++tally.draws[j];
            if (denom_bad[j]) {
                ++tally.denominator_violations;
            } else if (num <= threshold[j]) {
                ++tally.successes;
                ++tally.hits[j];
            }
        }
    };

    if (thread_count <= 1) {
        run_shard(0, samples, tallies[0]);
    } else {
        std::vector<std::thread> workers;
        const std::uint64_t chunk = samples / thread_count;
        for (unsigned w = 0; w < thread_count; ++w) {
            const std::uint64_t begin = w * chunk;
            const std::uint64_t end = w + 1 == thread_count ? samples : begin + chunk;
            workers.emplace_back(run_shard, begin, end, std::ref(tallies[w]));
        }
        for (std::thread& worker : workers) worker.join();
    }

    std::uint64_t successes = 0, violations = 0;
    std::vector<std::uint64_t> draws(J, 0), hits(J, 0);
    for (const detail::McShardTally& tally : tallies) {
        successes += tally.successes;
        violations += tally.denominator_violations;
        for (std::size_t j = 0; j < J; ++j) {
            draws[j] += tally.draws[j];
            hits[j] += tally.hits[j];
        }
    }

    ValidationReport report;
    report.p_exact = exact.total;
    report.exact_per_scenario = exact.per_scenario;
    report.samples = samples;
    report.seed = seed;
    report.denominator_violations = violations;
    report.p_mc = static_cast<double>(successes) / static_cast<double>(samples);
    report.mc_halfwidth =
        1.96 * std::sqrt(report.p_mc * (1.0 - report.p_mc) / static_cast<double>(samples));
    report.mc_per_scenario.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j)
        if (draws[j] > 0)
            report.mc_per_scenario[j] =
                static_cast<double>(hits[j]) / static_cast<double>(draws[j]);
    return report;
}

}  // namespace ccfp
