#pragma once

// Deterministic reformulation of the chance-constrained fractional
// program as a smooth NLP with analytic gradients.
//
// Variables: x (m decision variables), z (J per-scenario confidence
// levels), and for the piecewise variants one epigraph scalar s_j per
// scenario representing max_k(slope_k z_j + intercept_k).
//
// Per scenario j the chance constraint becomes
//
//   g_j = (mu1 - r_j a2^j)' c(x) + E_j * sigma(x) - (r_j b2^j - l1) <= 0,
//
// with E_j = Phi^{-1}(z_j) (exact) or exp(s_j) (piecewise variants), plus
// the probability budget sum_j p_j z_j >= 1 - epsilon and bounds
// z_j in [Phi(1), z_max].
//
// The textbook matrix form of this constraint system introduces one
// (n+1)x(n+1) matrix Y^j per scenario, each entry bounded below by
// sqrt(sigma_pq * y_p * y_q) * E_j with y = (c(x), 1), and uses the
// Frobenius norm ||Y^j||_F in g_j.  Because every entry bound shares the
// factor E_j and the norm is minimized entrywise at the bound, the
// minimal Y gives ||Y^j||_F = E_j * sigma(x) exactly; we therefore solve
// in (x, z, s) instead of (x, z, Y).  The equivalence of the two
// feasibility predicates is property-tested, not assumed.

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccfp/approx.hpp"
#include "ccfp/linalg.hpp"
#include "ccfp/model.hpp"
#include "ccfp/normal.hpp"

namespace ccfp {

enum class VariantMethod { exact, secant, tangent };

struct Variant {
    VariantMethod method = VariantMethod::secant;
    int K = 3;                  // segment count (ignored by exact)
    double z_max = 1.0 - 1e-4;  // right edge of the z domain
};

inline const char* to_string(VariantMethod m) {
    switch (m) {
        case VariantMethod::exact: return "exact";
        case VariantMethod::secant: return "secant";
        default: return "tangent";
    }
}

struct SigmaEval {
    double value = 0.0;
    Vec grad;  // over x
};

// sigma(x) = sqrt(y' Gamma y) with y = (c(x), 1).
inline SigmaEval sigma(const ProblemInstance& inst, const Vec& x) {
    const EvalC c = eval_c(inst.c_spec, x);
    const std::size_t n = inst.n;
    Vec y(n + 1);
    for (std::size_t i = 0; i < n; ++i) y[i] = c.values[i];
    y[n] = 1.0;
    const Vec gy = matvec(inst.gamma_cov, y);
    const double s2 = dot(y, gy);
    if (!(s2 > 0.0))
        throw std::domain_error("sigma: variance form is not positive");
    SigmaEval out;
    out.value = std::sqrt(s2);
    // d sigma / dx = J' (Gamma y)_{1..n} / sigma
    out.grad.assign(inst.m, 0.0);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t j = 0; j < inst.m; ++j)
            out.grad[j] += c.jacobian(p, j) * gy[p];
    for (double& g : out.grad) g /= out.value;
    return out;
}

struct LinearRow {
    Vec coef;  // length nvar
    double lo = -inf;
    double hi = inf;
    std::string name;
};

struct ConstraintEval {
    double value = 0.0;
    Vec grad;  // over all nvar variables
};

struct AssumptionError : std::runtime_error {
    AssumptionReport report;
    AssumptionError(const std::string& msg, AssumptionReport rep)
        : std::runtime_error(msg), report(std::move(rep)) {}
};

struct NlpProblem {
    ProblemInstance inst;
    Variant variant;
    PiecewiseAffine pwa;  // empty for the exact variant

    std::size_t m = 0;     // decision variables
    std::size_t J = 0;     // scenarios
    std::size_t nvar = 0;  // m + J (+ J for piecewise variants)
    bool has_s = false;

    Vec lower, upper;                  // variable box
    std::vector<LinearRow> linear_rows;

    std::vector<Vec> w;  // w_j = mu1 - r_j a2^j
    Vec rhs;             // rhs_j = r_j b2^j - l1

    std::size_t xi(std::size_t i) const { return i; }
    std::size_t zi(std::size_t j) const { return m + j; }
    std::size_t si(std::size_t j) const { return m + J + j; }

    // Objective in the maximization sense: mu0' c0(x).
    double objective(const Vec& v, Vec* grad) const {
        const Vec x(v.begin(), v.begin() + m);
        const EvalC c0 = eval_c(inst.c0_spec, x);
        const double val = dot(inst.mu0, c0.values);
        if (grad) {
            grad->assign(nvar, 0.0);
            for (std::size_t p = 0; p < inst.mu0.size(); ++p)
                for (std::size_t j = 0; j < m; ++j)
                    (*grad)[j] += inst.mu0[p] * c0.jacobian(p, j);
        }
        return val;
    }

    // Nonlinear scenario row g_j (value and gradient over all variables).
    ConstraintEval constraint(std::size_t j, const Vec& v) const {
        const Vec x(v.begin(), v.begin() + m);
        const EvalC c = eval_c(inst.c_spec, x);
        const SigmaEval sg = sigma(inst, x);

        ConstraintEval out;
        out.grad.assign(nvar, 0.0);

        double E, dE_ds = 0.0, dE_dz = 0.0;
        if (has_s) {
            // exp with a clamped argument so wild line-search probes
            // cannot overflow; the clamp is far above any meaningful s.
            const double s = v[si(j)];
            if (s <= 50.0) {
                E = std::exp(s);
                dE_ds = E;
            } else {
                E = std::exp(50.0);
                dE_ds = 0.0;
            }
        } else {
            // Domain-safe evaluation of Phi^{-1}(z_j); the variable box
            // keeps iterates well inside (0.5, 1).
            const double z = std::min(std::max(v[zi(j)], 0.5 + 1e-9), 1.0 - 1e-12);
            E = std_normal_quantile(z);
            dE_dz = 1.0 / std_normal_pdf(E);
        }

        double wc = 0.0;
        for (std::size_t p = 0; p < inst.n; ++p) wc += w[j][p] * c.values[p];
        out.value = wc + E * sg.value - rhs[j];

        for (std::size_t q = 0; q < m; ++q) {
            double acc = E * sg.grad[q];
            for (std::size_t p = 0; p < inst.n; ++p) acc += w[j][p] * c.jacobian(p, q);
            out.grad[q] = acc;
        }
        if (has_s)
            out.grad[si(j)] = dE_ds * sg.value;
        else
            out.grad[zi(j)] = dE_dz * sg.value;
        return out;
    }
};

inline NlpProblem build_nlp(const ProblemInstance& inst, const Variant& variant) {
    AssumptionReport rep = validate_instance(inst);
    if (rep.any_fail()) {
        std::string names;
        for (const auto& c : rep.checks)
            if (c.status == CheckStatus::fail) names += (names.empty() ? "" : ", ") + c.name;
        throw AssumptionError("build_nlp: assumption checks failed: " + names,
                              std::move(rep));
    }

    NlpProblem nlp;
    nlp.inst = inst;
    nlp.variant = variant;
    nlp.m = inst.m;
    nlp.J = inst.scenarios.size();
    nlp.has_s = variant.method != VariantMethod::exact;
    nlp.nvar = nlp.m + nlp.J + (nlp.has_s ? nlp.J : 0);

    const double phi1 = std_normal_cdf(1.0);
    if (!(variant.z_max > phi1 && variant.z_max <= 1.0 - 1e-9))
        throw std::domain_error("build_nlp: z_max must lie in (Phi(1), 1-1e-9]");

    nlp.w.resize(nlp.J);
    nlp.rhs.resize(nlp.J);
    for (std::size_t j = 0; j < nlp.J; ++j) {
        const Scenario& s = inst.scenarios[j];
        nlp.w[j].resize(inst.n);
        for (std::size_t p = 0; p < inst.n; ++p)
            nlp.w[j][p] = inst.mu1[p] - s.r * s.a2[p];
        nlp.rhs[j] = s.r * s.b2 - inst.l1;
    }

    // Variable box: x from the feasible set, z in [Phi(1), z_max],
    // s in [-1, log Phi^{-1}(z_max) + 1] (log Phi^{-1} >= 0 on the domain;
    // the unit slack keeps these artificial bounds inactive).
    nlp.lower = inst.feasible_set.lower;
    nlp.upper = inst.feasible_set.upper;
    nlp.lower.resize(nlp.nvar);
    nlp.upper.resize(nlp.nvar);
    const double s_hi = std::log(std_normal_quantile(variant.z_max)) + 1.0;
    for (std::size_t j = 0; j < nlp.J; ++j) {
        nlp.lower[nlp.zi(j)] = phi1;
        nlp.upper[nlp.zi(j)] = variant.z_max;
        if (nlp.has_s) {
            nlp.lower[nlp.si(j)] = -1.0;
            nlp.upper[nlp.si(j)] = s_hi;
        }
    }

    if (nlp.has_s) {
        const Breakpoints bp = make_breakpoints(variant.K, variant.z_max);
        nlp.pwa = variant.method == VariantMethod::secant ? secant_coeffs(bp)
                                                          : tangent_coeffs(bp.grid);
        // Epigraph rows: s_j >= slope_k z_j + intercept_k, i.e.
        // slope_k z_j - s_j <= -intercept_k.
        for (std::size_t j = 0; j < nlp.J; ++j)
            for (std::size_t k = 0; k < nlp.pwa.slopes.size(); ++k) {
                LinearRow row;
                row.coef.assign(nlp.nvar, 0.0);
                row.coef[nlp.zi(j)] = nlp.pwa.slopes[k];
                row.coef[nlp.si(j)] = -1.0;
                row.lo = -inf;
                row.hi = -nlp.pwa.intercepts[k];
                row.name = "epigraph[j=" + std::to_string(j) + ",k=" + std::to_string(k) + "]";
                nlp.linear_rows.push_back(std::move(row));
            }
    }

    // Probability budget: sum_j p_j z_j >= 1 - epsilon.
    {
        LinearRow row;
        row.coef.assign(nlp.nvar, 0.0);
        for (std::size_t j = 0; j < nlp.J; ++j)
            row.coef[nlp.zi(j)] = inst.scenarios[j].p;
        row.lo = 1.0 - inst.epsilon;
        row.hi = inf;
        row.name = "probability_budget";
        nlp.linear_rows.push_back(std::move(row));
    }

    // Feasible-set linear ranges over x.
    for (std::size_t r = 0; r < inst.feasible_set.ranges.size(); ++r) {
        const LinearRange& rg = inst.feasible_set.ranges[r];
        LinearRow row;
        row.coef.assign(nlp.nvar, 0.0);
        for (std::size_t i = 0; i < nlp.m; ++i) row.coef[i] = rg.a[i];
        row.lo = rg.lo;
        row.hi = rg.hi;
        row.name = "range[" + std::to_string(r) + "]";
        nlp.linear_rows.push_back(std::move(row));
    }

    return nlp;
}

inline ConstraintEval eval_constraint(const NlpProblem& nlp, std::size_t j, const Vec& point) {
    if (j >= nlp.J)
        throw std::out_of_range("eval_constraint: scenario index out of range");
    if (point.size() != nlp.nvar)
        throw std::invalid_argument("eval_constraint: point has wrong dimension");
    return nlp.constraint(j, point);
}

}  // namespace ccfp
