#pragma once

// Problem-instance data model and machine verification of the structural
// assumptions the reformulation relies on.
//
// The model: maximize the expected objective mu0' c0(x) subject to
//
//   P( (a1' c(x) + b1) / (a2' c(x) + b2) <= gamma ) >= 1 - epsilon,
//   x in a box plus linear ranges,
//
// where (a1, b1) is jointly Gaussian with mean (mu1, l1) and covariance
// gamma_cov, and (a2, b2, gamma) follows a discrete distribution with J
// scenarios (a2^j, b2^j, r_j) of probability p_j, independent of (a1, b1).

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccfp/linalg.hpp"
#include "ccfp/normal.hpp"

namespace ccfp {

// One joint realization of the denominator/benchmark randomness.
struct Scenario {
    double p = 0.0;  // probability
    Vec a2;          // denominator coefficients, componentwise >= 0
    double b2 = 0.0; // denominator constant, > 0
    double r = 0.0;  // benchmark realization
};

enum class SpecKind { affine, exp_affine };

// c_i(x) = W_i x + v_i (affine) or exp(W_i x + v_i) (exp-affine).
struct FunctionSpec {
    SpecKind kind = SpecKind::affine;
    Mat W;  // n x m
    Vec v;  // length n
};

struct LinearRange {
    Vec a;
    double lo = -inf;
    double hi = inf;
};

struct FeasibleSet {
    Vec lower;  // length m, -inf allowed
    Vec upper;  // length m, +inf allowed
    std::vector<LinearRange> ranges;
};

struct ProblemInstance {
    std::size_t m = 0;  // decision dimension
    std::size_t n = 0;  // fraction dimension (length of c)
    Vec mu0;            // objective mean (length of c0 output)
    FunctionSpec c0_spec;
    Vec mu1;            // numerator coefficient mean, length n
    double l1 = 0.0;    // numerator constant mean
    Mat gamma_cov;      // (n+1)x(n+1) covariance of (a1, b1)
    std::vector<Scenario> scenarios;
    double epsilon = 0.0;
    FunctionSpec c_spec;
    FeasibleSet feasible_set;
};

struct EvalC {
    Vec values;    // length n
    Mat jacobian;  // n x m
};

inline EvalC eval_c(const FunctionSpec& spec, const Vec& x) {
    if (spec.W.cols != x.size())
        throw std::invalid_argument("eval_c: x has length " + std::to_string(x.size()) +
                                    ", spec expects " + std::to_string(spec.W.cols));
    EvalC out;
    out.values = matvec(spec.W, x);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += spec.v[i];
    if (spec.kind == SpecKind::affine) {
        out.jacobian = spec.W;
    } else {
        out.jacobian = spec.W;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] = std::exp(out.values[i]);
            for (std::size_t j = 0; j < spec.W.cols; ++j)
                out.jacobian(i, j) *= out.values[i];
        }
    }
    return out;
}

// Mean of the scenario coefficient vector: sum_j p_j a2^j.
inline Vec expected_scenario_vector(const std::vector<Scenario>& scenarios) {
    if (scenarios.empty())
        throw std::invalid_argument("expected_scenario_vector: no scenarios");
    Vec out(scenarios.front().a2.size(), 0.0);
    for (const Scenario& s : scenarios)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += s.p * s.a2[i];
    return out;
}

enum class CheckStatus { pass, warn, fail };

struct AssumptionCheck {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    std::string detail;
    double slack = 0.0;  // margin when passing, violation magnitude when failing
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    const AssumptionCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
    bool any_fail() const {
        for (const auto& c : checks)
            if (c.status == CheckStatus::fail) return true;
        return false;
    }
};

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::warn: return "warn";
        default: return "fail";
    }
}

namespace detail {

inline void require_dims(const ProblemInstance& inst) {
    const std::size_t m = inst.m, n = inst.n;
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("instance structure: " + what);
    };
    if (m == 0 || n == 0) fail("m and n must be positive");
    if (inst.mu1.size() != n) fail("mu1 must have length n");
    if (inst.gamma_cov.rows != n + 1 || inst.gamma_cov.cols != n + 1)
        fail("gamma_cov must be (n+1)x(n+1)");
    if (inst.scenarios.empty()) fail("at least one scenario required");
    for (const Scenario& s : inst.scenarios)
        if (s.a2.size() != n) fail("scenario a2 must have length n");
    if (inst.c_spec.W.rows != n || inst.c_spec.W.cols != m)
        fail("c_spec.W must be n x m");
    if (inst.c_spec.v.size() != n) fail("c_spec.v must have length n");
    if (inst.c0_spec.W.cols != m) fail("c0_spec.W must have m columns");
    if (inst.c0_spec.v.size() != inst.c0_spec.W.rows)
        fail("c0_spec.v must match c0_spec.W rows");
    if (inst.mu0.size() != inst.c0_spec.W.rows)
        fail("mu0 must match c0_spec output dimension");
    if (inst.feasible_set.lower.size() != m || inst.feasible_set.upper.size() != m)
        fail("feasible_set box bounds must have length m");
    for (std::size_t i = 0; i < m; ++i)
        if (!(inst.feasible_set.lower[i] <= inst.feasible_set.upper[i]))
            fail("box lower bound exceeds upper bound at index " + std::to_string(i));
    for (const LinearRange& rg : inst.feasible_set.ranges) {
        if (rg.a.size() != m) fail("range coefficient vector must have length m");
        if (!(rg.lo <= rg.hi)) fail("range lo exceeds hi");
    }
    if (!(inst.epsilon > 0.0 && inst.epsilon < 1.0)) fail("epsilon must lie in (0,1)");
}

// Interval lower/upper bound of W_i x + v_i over the box.
inline std::pair<double, double> affine_row_interval(const Mat& W, double v,
                                                     std::size_t row, const Vec& lo,
                                                     const Vec& hi) {
    double lo_val = v, hi_val = v;
    for (std::size_t j = 0; j < W.cols; ++j) {
        const double w = W(row, j);
        if (w == 0.0) continue;
        const double contrib_lo = w > 0 ? w * lo[j] : w * hi[j];
        const double contrib_hi = w > 0 ? w * hi[j] : w * lo[j];
        lo_val += contrib_lo;
        hi_val += contrib_hi;
    }
    return {lo_val, hi_val};
}

}  // namespace detail

// Runs the full battery of assumption checks.  Failures are report
// entries, never exceptions; malformed dimensions throw beforehand.
inline AssumptionReport validate_instance(const ProblemInstance& inst) {
    detail::require_dims(inst);
    AssumptionReport rep;
    auto add = [&rep](std::string name, CheckStatus st, std::string detail, double slack) {
        rep.checks.push_back({std::move(name), st, std::move(detail), slack});
    };

    // Scenario probabilities sum to one.
    {
        double sum = 0.0;
        for (const Scenario& s : inst.scenarios) sum += s.p;
        const double err = std::fabs(sum - 1.0);
        add("scenario_probabilities_sum_to_one",
            err <= 1e-12 ? CheckStatus::pass : CheckStatus::fail,
            "sum of scenario probabilities = " + std::to_string(sum),
            err <= 1e-12 ? 1e-12 - err : err);
    }

    // Scenario coefficient signs: a2 >= 0, b2 > 0, p in (0,1].
    {
        double min_a2 = inf, min_b2 = inf, min_p = inf;
        for (const Scenario& s : inst.scenarios) {
            for (double a : s.a2) min_a2 = std::min(min_a2, a);
            min_b2 = std::min(min_b2, s.b2);
            min_p = std::min(min_p, s.p);
        }
        const bool ok = min_a2 >= 0.0 && min_b2 > 0.0 && min_p > 0.0 && min_p <= 1.0;
        add("scenario_coefficients_nonnegative", ok ? CheckStatus::pass : CheckStatus::fail,
            "min a2 entry = " + std::to_string(min_a2) +
                ", min b2 = " + std::to_string(min_b2) + ", min p = " + std::to_string(min_p),
            ok ? std::min(min_a2, min_b2) : -std::min({min_a2, min_b2, min_p}));
    }

    // Covariance entries nonnegative (and the matrix symmetric).
    {
        double min_entry = inf, max_asym = 0.0;
        const Mat& g = inst.gamma_cov;
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) {
                min_entry = std::min(min_entry, g(i, j));
                max_asym = std::max(max_asym, std::fabs(g(i, j) - g(j, i)));
            }
        const bool ok = min_entry >= 0.0 && max_asym <= 1e-12;
        add("covariance_entries_nonnegative", ok ? CheckStatus::pass : CheckStatus::fail,
            "min entry = " + std::to_string(min_entry) +
                ", max asymmetry = " + std::to_string(max_asym),
            ok ? min_entry : std::max(-min_entry, max_asym));
    }

    // Covariance positive definite.
    {
        bool ok = true;
        std::string detail = "all Cholesky pivots positive";
        try {
            cholesky(inst.gamma_cov);
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        add("covariance_positive_definite", ok ? CheckStatus::pass : CheckStatus::fail,
            std::move(detail), ok ? 1.0 : -1.0);
    }

    // Mean dominance: mu1 - r_j a2^j >= 0 componentwise for every scenario.
    {
        double min_coef = inf;
        for (const Scenario& s : inst.scenarios)
            for (std::size_t i = 0; i < inst.n; ++i)
                min_coef = std::min(min_coef, inst.mu1[i] - s.r * s.a2[i]);
        add("numerator_mean_dominates_benchmark",
            min_coef >= 0.0 ? CheckStatus::pass : CheckStatus::fail,
            "min over scenarios/components of mu1_i - r_j a2^j_i = " +
                std::to_string(min_coef),
            std::fabs(min_coef));
    }

    // Epsilon small enough that every per-scenario probability can sit in
    // the quantile's positive region: epsilon <= min_j p_j (1 - Phi(1)).
    {
        double min_p = inf;
        for (const Scenario& s : inst.scenarios) min_p = std::min(min_p, s.p);
        const double cap = min_p * (1.0 - std_normal_cdf(1.0));
        const double slack = cap - inst.epsilon;
        add("epsilon_within_scenario_budget",
            slack >= 0.0 ? CheckStatus::pass : CheckStatus::fail,
            "epsilon = " + std::to_string(inst.epsilon) +
                ", cap min_j p_j(1-Phi(1)) = " + std::to_string(cap),
            std::fabs(slack));
    }

    // Log-convexity of the fraction map c.
    {
        if (inst.c_spec.kind == SpecKind::exp_affine) {
            add("fraction_map_log_convex", CheckStatus::pass,
                "exp-affine components are log-convex by construction", 1.0);
        } else {
            add("fraction_map_log_convex", CheckStatus::warn,
                "affine components are not log-convex in general; the solver "
                "treats the reformulation as a smooth (possibly nonconvex) program",
                0.0);
        }
    }

    // Nonnegativity of c over the feasible box (interval arithmetic).
    {
        if (inst.c_spec.kind == SpecKind::exp_affine) {
            add("fraction_map_nonnegative_on_box", CheckStatus::pass,
                "exp-affine components are positive everywhere", 1.0);
        } else {
            double worst_lo = inf, worst_hi = inf;
            for (std::size_t i = 0; i < inst.n; ++i) {
                auto [lo, hi] = detail::affine_row_interval(
                    inst.c_spec.W, inst.c_spec.v[i], i, inst.feasible_set.lower,
                    inst.feasible_set.upper);
                worst_lo = std::min(worst_lo, lo);
                worst_hi = std::min(worst_hi, hi);
            }
            CheckStatus st = CheckStatus::pass;
            if (worst_hi < 0.0)
                st = CheckStatus::fail;  // some component negative everywhere
            else if (worst_lo < 0.0)
                st = CheckStatus::warn;  // sign not certified by the box alone
            add("fraction_map_nonnegative_on_box", st,
                "interval lower bound of min_i c_i over the box = " +
                    std::to_string(worst_lo),
                std::fabs(worst_lo));
        }
    }

    return rep;
}

}  // namespace ccfp
