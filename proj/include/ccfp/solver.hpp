#pragma once

// Smooth constrained NLP solver used for all reformulation variants.
//
// Method: augmented Lagrangian over the inequality rows (nonlinear
// scenario rows plus both sides of every general linear row), with the
// variable box handled exactly by a projected limited-memory BFGS inner
// loop (Armijo backtracking on the projected arc).  The penalty grows
// when the maximum violation fails to decrease by 4x between outer
// iterations; multipliers follow the standard clipped first-order update
// lambda <- max(0, lambda + mu g).
//
// The augmented-Lagrangian gradient at the end of an inner solve equals
// the Lagrangian gradient at the *updated* multipliers, so the inner
// loop's projected-gradient norm doubles as the reported KKT
// stationarity residual.
//
// Deterministic by construction: multistarts run sequentially from
// seeded perturbations and merge with index tie-breaking.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccfp/linalg.hpp"
#include "ccfp/nlp.hpp"
#include "ccfp/rng.hpp"

namespace ccfp {

enum class SolveStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        default: return "iteration-limit";
    }
}

struct SolveOptions {
    double feas_tol = 1e-8;
    double stat_tol = 1e-6;
    int max_outer = 100;
    int max_inner = 500;
    int multistarts = 5;
    std::uint64_t seed = 0x00c0ffee;
    double initial_penalty = 10.0;
    double penalty_growth = 10.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::iteration_limit;
    Vec point;  // full variable vector (x, z, s)
    Vec x, z, s;
    double objective = 0.0;  // maximization value at `point` (best effort if not optimal)
    double kkt_stationarity = inf;
    double kkt_complementarity = inf;
    double violation = inf;  // max over nonlinear and general linear rows
    std::string active_set;
    double wall_ms = 0.0;
    int best_start = -1;
    std::string diagnostic;
};

namespace detail {

// One-sided inequality view over the NLP: value/gradient of row i <= 0.
struct RowSet {
    const NlpProblem* nlp;
    // (linear row index, +1 for the hi side aᵀv - hi, -1 for lo - aᵀv)
    std::vector<std::pair<std::size_t, int>> linear_sides;

    explicit RowSet(const NlpProblem& p) : nlp(&p) {
        for (std::size_t r = 0; r < p.linear_rows.size(); ++r) {
            if (p.linear_rows[r].hi < inf) linear_sides.push_back({r, +1});
            if (p.linear_rows[r].lo > -inf) linear_sides.push_back({r, -1});
        }
    }
    std::size_t count() const { return nlp->J + linear_sides.size(); }

    double value(std::size_t i, const Vec& v) const {
        if (i < nlp->J) return nlp->constraint(i, v).value;
        const auto [r, side] = linear_sides[i - nlp->J];
        const LinearRow& row = nlp->linear_rows[r];
        const double a = dot(row.coef, v);
        return side > 0 ? a - row.hi : row.lo - a;
    }
    // Accumulate factor * grad(row i) into g.
    void add_scaled_grad(std::size_t i, const Vec& v, double factor, Vec& g) const {
        if (factor == 0.0) return;
        if (i < nlp->J) {
            const ConstraintEval e = nlp->constraint(i, v);
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += factor * e.grad[k];
            return;
        }
        const auto [r, side] = linear_sides[i - nlp->J];
        const LinearRow& row = nlp->linear_rows[r];
        const double sgn = side > 0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += factor * sgn * row.coef[k];
    }
    std::string name(std::size_t i) const {
        if (i < nlp->J) return "scenario[" + std::to_string(i) + "]";
        const auto [r, side] = linear_sides[i - nlp->J];
        return nlp->linear_rows[r].name + (side > 0 ? "(hi)" : "(lo)");
    }
};

inline void project_box(const NlpProblem& nlp, Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::min(std::max(v[i], nlp.lower[i]), nlp.upper[i]);
}

// Augmented-Lagrangian value and gradient (minimization sense).
struct AlEval {
    double value = 0.0;
    Vec grad;
    Vec g;  // row values
};

inline AlEval eval_al(const NlpProblem& nlp, const RowSet& rows, const Vec& v,
                      const Vec& lambda, double mu) {
    AlEval out;
    Vec obj_grad;
    const double obj = nlp.objective(v, &obj_grad);
    out.value = -obj;
    out.grad = scaled(obj_grad, -1.0);
    out.g.resize(rows.count());
    for (std::size_t i = 0; i < rows.count(); ++i) {
        const double gi = rows.value(i, v);
        out.g[i] = gi;
        const double t = lambda[i] + mu * gi;
        if (t > 0.0) {
            out.value += (t * t - lambda[i] * lambda[i]) / (2.0 * mu);
            rows.add_scaled_grad(i, v, t, out.grad);
        } else {
            out.value -= lambda[i] * lambda[i] / (2.0 * mu);
        }
    }
    return out;
}

inline double max_violation(const Vec& g) {
    double m = 0.0;
    for (double gi : g) m = std::max(m, gi);
    return m;
}

inline double projected_gradient_norm(const NlpProblem& nlp, const Vec& v,
                                      const Vec& grad) {
    double norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double step =
            std::min(std::max(v[i] - grad[i], nlp.lower[i]), nlp.upper[i]) - v[i];
        norm = std::max(norm, std::fabs(step));
    }
    return norm;
}

// Projected norm of the plain Lagrangian gradient at fixed multipliers.
// Unlike the augmented-Lagrangian gradient this carries no mu*g term, so
// it stays measurable when the penalty is large and g sits at rounding
// level; it is the solver's convergence certificate.
inline double lagrangian_stationarity(const NlpProblem& nlp, const RowSet& rows,
                                      const Vec& v, const Vec& lambda) {
    Vec grad;
    nlp.objective(v, &grad);
    for (double& g : grad) g = -g;
    for (std::size_t i = 0; i < rows.count(); ++i)
        rows.add_scaled_grad(i, v, lambda[i], grad);
    return projected_gradient_norm(nlp, v, grad);
}

// Projected L-BFGS descent on the augmented Lagrangian.  Returns the
// final projected-gradient infinity norm; `v` is updated in place.
inline double inner_minimize(const NlpProblem& nlp, const RowSet& rows, Vec& v,
                             const Vec& lambda, double mu, double tol, int max_iter,
                             bool* nonfinite) {
    const std::size_t n = v.size();
    std::deque<std::pair<Vec, Vec>> pairs;  // (step, grad change)
    project_box(nlp, v);
    AlEval cur = eval_al(nlp, rows, v, lambda, mu);
    if (!std::isfinite(cur.value)) {
        *nonfinite = true;
        return inf;
    }

    double pg = projected_gradient_norm(nlp, v, cur.grad);
    for (int it = 0; it < max_iter && pg > tol; ++it) {
        // Variables glued to an active bound take no part in the
        // quasi-Newton direction.
        std::vector<bool> glued(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            const double span = 1e-10 * (1.0 + std::fabs(v[i]));
            if ((v[i] - nlp.lower[i] <= span && cur.grad[i] > 0.0) ||
                (nlp.upper[i] - v[i] <= span && cur.grad[i] < 0.0))
                glued[i] = true;
        }

        // Two-loop recursion.
        Vec d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = glued[i] ? 0.0 : -cur.grad[i];
        if (!pairs.empty()) {
            std::vector<double> alpha(pairs.size());
            for (std::size_t k = pairs.size(); k-- > 0;) {
                const auto& [sk, yk] = pairs[k];
                const double rho = 1.0 / dot(sk, yk);
                alpha[k] = rho * dot(sk, d);
                for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * yk[i];
            }
            const auto& [sl, yl] = pairs.back();
            const double gamma = dot(sl, yl) / dot(yl, yl);
            for (double& di : d) di *= gamma;
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const auto& [sk, yk] = pairs[k];
                const double rho = 1.0 / dot(sk, yk);
                const double beta = rho * dot(yk, d);
                for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * sk[i];
            }
            for (std::size_t i = 0; i < n; ++i)
                if (glued[i]) d[i] = 0.0;
        }
        double descent = dot(d, cur.grad);
        if (!(descent < 0.0)) {  // not a descent direction; fall back
            pairs.clear();
            for (std::size_t i = 0; i < n; ++i) d[i] = glued[i] ? 0.0 : -cur.grad[i];
            descent = dot(d, cur.grad);
            if (!(descent < 0.0)) break;  // projected stationary
        }

        // Armijo backtracking along the projected arc.
        const double c1 = 1e-4;
        double step = 1.0;
        Vec trial;
        AlEval trial_eval;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            trial = v;
            for (std::size_t i = 0; i < n; ++i) trial[i] += step * d[i];
            project_box(nlp, trial);
            trial_eval = eval_al(nlp, rows, trial, lambda, mu);
            if (std::isfinite(trial_eval.value)) {
                double dir_deriv = 0.0;  // gradient dotted with the actual displacement
                for (std::size_t i = 0; i < n; ++i)
                    dir_deriv += cur.grad[i] * (trial[i] - v[i]);
                if (trial_eval.value <= cur.value + c1 * dir_deriv && dir_deriv < 0.0) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;  // stalled (flat to rounding)

        Vec sk(n), yk(n);
        for (std::size_t i = 0; i < n; ++i) {
            sk[i] = trial[i] - v[i];
            yk[i] = trial_eval.grad[i] - cur.grad[i];
        }
        const double sy = dot(sk, yk);
        if (sy > 1e-12 * two_norm(sk) * two_norm(yk)) {
            pairs.push_back({std::move(sk), std::move(yk)});
            if (pairs.size() > 8) pairs.pop_front();
        }
        v = std::move(trial);
        cur = std::move(trial_eval);
        if (inf_norm(v) > 1e10) break;  // runaway guard
        pg = projected_gradient_norm(nlp, v, cur.grad);
    }
    return pg;
}

struct StartResult {
    SolveStatus status = SolveStatus::iteration_limit;
    Vec v;
    double objective = -inf;
    double violation = inf;
    double stationarity = inf;
    double complementarity = inf;
    Vec lambda;
    bool failed = false;  // non-finite evaluator
    std::string diagnostic;
};

inline StartResult run_start(const NlpProblem& nlp, const RowSet& rows, Vec v,
                             const SolveOptions& opts) {
    constexpr double penalty_cap = 1e12;
    constexpr double infeasible_penalty = 1e10;

    StartResult res;
    project_box(nlp, v);
    Vec lambda(rows.count(), 0.0);
    double mu = opts.initial_penalty;
    double inner_tol = 1e-2;
    double best_viol = inf;
    int stall = 0;

    // Once the tolerances are first met we bank the iterate and run a few
    // bonus multiplier updates (no penalty growth): the dual iteration
    // keeps shrinking the residual geometrically, handing the linear
    // polish a far tighter point than feas_tol alone would.
    StartResult banked;
    bool have_banked = false;
    int refine_rounds = 0;

    auto finish_optimal = [&](StartResult& out) -> StartResult& {
        out.status = SolveStatus::optimal;
        out.objective = nlp.objective(out.v, nullptr);
        return out;
    };

    for (int outer = 0; outer < std::max(1, opts.max_outer); ++outer) {
        bool nonfinite = false;
        inner_minimize(nlp, rows, v, lambda, mu, inner_tol, opts.max_inner, &nonfinite);
        if (nonfinite) {
            res.failed = true;
            res.diagnostic = "evaluator returned a non-finite value";
            res.v = v;
            return res;
        }
        Vec g(rows.count());
        for (std::size_t i = 0; i < rows.count(); ++i) g[i] = rows.value(i, v);
        const double viol = max_violation(g);

        // First-order multiplier update.
        double compl_max = 0.0;
        for (std::size_t i = 0; i < rows.count(); ++i) {
            lambda[i] = std::max(0.0, lambda[i] + mu * g[i]);
            lambda[i] = std::min(lambda[i], 1e14);
            compl_max = std::max(compl_max, std::fabs(lambda[i] * g[i]));
        }
        // Convergence is certified on the plain Lagrangian at the updated
        // multipliers, which stays numerically meaningful at large mu.
        const double stat = lagrangian_stationarity(nlp, rows, v, lambda);
        const double dual_scale = 1.0 + inf_norm(lambda);

        res.v = v;
        res.violation = viol;
        res.stationarity = stat;
        res.complementarity = compl_max;
        res.lambda = lambda;

        const bool converged = viol <= opts.feas_tol && stat <= opts.stat_tol * dual_scale &&
                               compl_max <= opts.stat_tol * dual_scale;
        if (converged && (!have_banked || viol < banked.violation)) {
            banked = res;
            have_banked = true;
        }
        if (have_banked) {
            if (banked.violation <= 0.01 * opts.feas_tol || refine_rounds >= 3 ||
                !converged)
                return finish_optimal(banked);
            ++refine_rounds;
            inner_tol = std::max(0.3 * opts.stat_tol, inner_tol * 0.2);
            continue;
        }

        // Grow the penalty only while genuinely infeasible and not
        // improving 4x per round; a feasible iterate never inflates mu,
        // keeping later inner problems well conditioned.
        if (viol > opts.feas_tol && viol > 0.25 * best_viol)
            mu = std::min(mu * opts.penalty_growth, penalty_cap);
        if (viol >= 0.999 * best_viol)
            ++stall;
        else
            stall = 0;
        best_viol = std::min(best_viol, viol);

        if (mu >= infeasible_penalty && stall >= 2 &&
            best_viol > std::max(100.0 * opts.feas_tol, 1e-6)) {
            res.status = SolveStatus::infeasible;
            res.objective = nlp.objective(v, nullptr);
            return res;
        }

        inner_tol = std::max(0.3 * opts.stat_tol, inner_tol * 0.2);
    }
    if (have_banked) return finish_optimal(banked);
    res.status = SolveStatus::iteration_limit;
    res.objective = nlp.objective(v, nullptr);
    return res;
}

// Nudge the point exactly onto the near-active general linear rows
// (joint least-squares correction through the Gram matrix over the
// box-free coordinates), then re-project the box.  Selecting the whole
// near-active set at once avoids ping-ponging between coupled rows.  The
// result is kept only if it leaves every row family no worse than on
// entry: with steep epigraph rows the correction can be ill conditioned,
// and shipping the solver's own iterate is then the honest choice.
inline void polish_linear(const NlpProblem& nlp, const RowSet& rows, Vec& v,
                          double feas_tol) {
    const Vec saved = v;
    auto linear_resid = [&](const Vec& point) {
        double worst = 0.0;
        for (const LinearRow& row : nlp.linear_rows) {
            const double a = dot(row.coef, point);
            worst = std::max(worst, std::max(a - row.hi, row.lo - a));
        }
        return worst;
    };
    auto nonlinear_resid = [&](const Vec& point) {
        double worst = 0.0;
        for (std::size_t j = 0; j < nlp.J; ++j)
            worst = std::max(worst, rows.value(j, point));
        return worst;
    };
    const double entry_linear = linear_resid(v);
    const double entry_nonlinear = nonlinear_resid(v);

    for (int pass = 0; pass < 3; ++pass) {
        // Snap band: rows this close to a finite bound are treated as
        // active and driven onto it exactly.
        std::vector<std::size_t> idx;
        Vec resid;
        for (std::size_t r = 0; r < nlp.linear_rows.size(); ++r) {
            const LinearRow& row = nlp.linear_rows[r];
            const double a = dot(row.coef, v);
            const double band = 1e-6 * (1.0 + std::fabs(a));
            double target;
            if (row.hi < inf && (a > row.hi || std::fabs(a - row.hi) <= band))
                target = row.hi;
            else if (row.lo > -inf && (a < row.lo || std::fabs(a - row.lo) <= band))
                target = row.lo;
            else
                continue;
            if (target != a && std::fabs(target - a) > 1e-15 * (1.0 + std::fabs(target))) {
                idx.push_back(r);
                resid.push_back(target - a);
            }
        }
        if (idx.empty()) break;
        // Correct only through coordinates strictly inside the box; a
        // correction leaking into glued coordinates would be clamped
        // right back by the projection.
        std::vector<bool> free_coord(v.size());
        for (std::size_t q = 0; q < v.size(); ++q)
            free_coord[q] = v[q] > nlp.lower[q] && v[q] < nlp.upper[q];
        auto free_dot = [&](const Vec& a, const Vec& b) {
            double s = 0.0;
            for (std::size_t q = 0; q < a.size(); ++q)
                if (free_coord[q]) s += a[q] * b[q];
            return s;
        };
        // delta = A^T (A A^T)^{-1} resid over the free coordinates.
        const std::size_t k = idx.size();
        Mat gram(k, k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                gram(i, j) =
                    free_dot(nlp.linear_rows[idx[i]].coef, nlp.linear_rows[idx[j]].coef);
        Vec y;
        try {
            const CholeskyFactor f = cholesky(gram);
            // Solve L L^T y = resid.
            y.assign(k, 0.0);
            for (std::size_t i = 0; i < k; ++i) {
                double s = resid[i];
                for (std::size_t j = 0; j < i; ++j) s -= f.lower_triangular(i, j) * y[j];
                y[i] = s / f.lower_triangular(i, i);
            }
            for (std::size_t i = k; i-- > 0;) {
                double s = y[i];
                for (std::size_t j = i + 1; j < k; ++j) s -= f.lower_triangular(j, i) * y[j];
                y[i] = s / f.lower_triangular(i, i);
            }
        } catch (const std::exception&) {
            break;  // degenerate rows; leave the point as the solver produced it
        }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t q = 0; q < v.size(); ++q)
                if (free_coord[q]) v[q] += nlp.linear_rows[idx[i]].coef[q] * y[i];
        project_box(nlp, v);
    }
    // Keep the correction only if it helped: linear rows must not be
    // worse than on entry, nonlinear rows must stay within tolerance.
    if (linear_resid(v) > std::max(entry_linear, 1e-12) ||
        nonlinear_resid(v) > std::max(entry_nonlinear, feas_tol))
        v = saved;
}

// Deterministic start 0: center every two-sided linear range at its
// midpoint (minimum-norm solution through the Gram matrix), confidence
// levels at the probability budget 1 - epsilon, epigraph values at the
// surrogate of that level.
inline Vec initial_point(const NlpProblem& nlp) {
    Vec v(nlp.nvar, 0.0);
    std::vector<const LinearRange*> two_sided;
    for (const LinearRange& rg : nlp.inst.feasible_set.ranges)
        if (rg.lo > -inf && rg.hi < inf) two_sided.push_back(&rg);
    if (!two_sided.empty()) {
        const std::size_t k = two_sided.size();
        Mat gram(k, k, 0.0);
        Vec mid(k);
        for (std::size_t i = 0; i < k; ++i) {
            mid[i] = 0.5 * (two_sided[i]->lo + two_sided[i]->hi);
            for (std::size_t j = 0; j < k; ++j)
                gram(i, j) = dot(two_sided[i]->a, two_sided[j]->a);
        }
        try {
            const CholeskyFactor f = cholesky(gram);
            Vec y(k, 0.0);
            for (std::size_t i = 0; i < k; ++i) {
                double s = mid[i];
                for (std::size_t j = 0; j < i; ++j) s -= f.lower_triangular(i, j) * y[j];
                y[i] = s / f.lower_triangular(i, i);
            }
            for (std::size_t i = k; i-- > 0;) {
                double s = y[i];
                for (std::size_t j = i + 1; j < k; ++j) s -= f.lower_triangular(j, i) * y[j];
                y[i] = s / f.lower_triangular(i, i);
            }
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t q = 0; q < nlp.m; ++q) v[q] += two_sided[i]->a[q] * y[i];
        } catch (const std::exception&) {
            // fall through to box-centering below
        }
    }
    for (std::size_t i = 0; i < nlp.m; ++i) {
        if (v[i] != 0.0) continue;
        const double lo = nlp.lower[i], hi = nlp.upper[i];
        if (lo > -inf && hi < inf)
            v[i] = 0.5 * (lo + hi);
        else if (lo > -inf)
            v[i] = lo + 1.0;
        else if (hi < inf)
            v[i] = hi - 1.0;
    }

    if (nlp.J > 0) {
        const double z0 = std::min(std::max(1.0 - nlp.inst.epsilon, nlp.lower[nlp.zi(0)]),
                                   nlp.upper[nlp.zi(0)]);
        for (std::size_t j = 0; j < nlp.J; ++j) {
            v[nlp.zi(j)] = z0;
            if (nlp.has_s) v[nlp.si(j)] = eval_pwa(nlp.pwa, z0).value;
        }
    }
    project_box(nlp, v);
    return v;
}

}  // namespace detail

inline SolveResult solve(const NlpProblem& nlp, const SolveOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const detail::RowSet rows(nlp);

    const Vec base = detail::initial_point(nlp);
    std::vector<detail::StartResult> starts;
    for (int start = 0; start < std::max(1, opts.multistarts); ++start) {
        Vec v = base;
        if (start > 0) {
            CounterRng rng = CounterRng::derive(opts.seed, static_cast<std::uint64_t>(start));
            const double scale = 1.0 + inf_norm(Vec(base.begin(), base.begin() + nlp.m));
            for (std::size_t i = 0; i < nlp.m; ++i) {
                const double u = 2.0 * rng.uniform01() - 1.0;  // +/- 20% perturbation
                v[i] = base[i] * (1.0 + 0.2 * u);
                if (base[i] == 0.0) v[i] = 0.02 * scale * rng.uniform01();
            }
            for (std::size_t j = 0; j < nlp.J; ++j) {
                const double u = rng.uniform01();
                v[nlp.zi(j)] =
                    base[nlp.zi(j)] + 0.2 * u * (nlp.upper[nlp.zi(j)] - base[nlp.zi(j)]);
                if (nlp.has_s) v[nlp.si(j)] = eval_pwa(nlp.pwa, v[nlp.zi(j)]).value;
            }
            detail::project_box(nlp, v);
        }
        starts.push_back(detail::run_start(nlp, rows, std::move(v), opts));
    }

    // Merge: highest objective among optimal starts; otherwise the start
    // with the lowest violation.  Ties break toward the lower index.
    int best = -1;
    for (int i = 0; i < static_cast<int>(starts.size()); ++i) {
        const auto& r = starts[i];
        if (r.failed) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const auto& b = starts[best];
        const bool r_opt = r.status == SolveStatus::optimal;
        const bool b_opt = b.status == SolveStatus::optimal;
        if (r_opt != b_opt) {
            if (r_opt) best = i;
        } else if (r_opt) {
            if (r.objective > b.objective) best = i;
        } else if (r.violation < b.violation) {
            best = i;
        }
    }

    SolveResult out;
    if (best < 0) {
        // Every start aborted on non-finite evaluations.
        out.status = SolveStatus::iteration_limit;
        out.diagnostic = starts.empty() ? "no starts" : starts.front().diagnostic;
        out.point = base;
        out.best_start = -1;
    } else {
        detail::StartResult& win = starts[best];
        if (win.status == SolveStatus::optimal) {
            detail::polish_linear(nlp, rows, win.v, opts.feas_tol);
            win.objective = nlp.objective(win.v, nullptr);
            Vec g(rows.count());
            for (std::size_t i = 0; i < rows.count(); ++i) g[i] = rows.value(i, win.v);
            win.violation = detail::max_violation(g);
            win.stationarity = detail::lagrangian_stationarity(nlp, rows, win.v, win.lambda);
            double compl_max = 0.0;
            for (std::size_t i = 0; i < rows.count(); ++i)
                compl_max = std::max(compl_max, std::fabs(win.lambda[i] * g[i]));
            win.complementarity = compl_max;
        }
        out.status = win.status;
        out.point = win.v;
        out.objective = win.objective;
        out.kkt_stationarity = win.stationarity;
        out.kkt_complementarity = win.complementarity;
        out.violation = win.violation;
        out.best_start = best;
        out.diagnostic = win.diagnostic;

        // Active-set summary: rows and bounds within 10x feasibility tol.
        std::string act;
        for (std::size_t i = 0; i < rows.count(); ++i)
            if (std::fabs(rows.value(i, win.v)) <= 10.0 * opts.feas_tol)
                act += (act.empty() ? "" : ", ") + rows.name(i);
        for (std::size_t i = 0; i < nlp.nvar; ++i) {
            const double span = 10.0 * opts.feas_tol * (1.0 + std::fabs(win.v[i]));
            if (nlp.lower[i] > -inf && win.v[i] - nlp.lower[i] <= span)
                act += (act.empty() ? "" : ", ") + ("var[" + std::to_string(i) + "](lo)");
            else if (nlp.upper[i] < inf && nlp.upper[i] - win.v[i] <= span)
                act += (act.empty() ? "" : ", ") + ("var[" + std::to_string(i) + "](hi)");
        }
        out.active_set = act;
    }

    out.x.assign(out.point.begin(), out.point.begin() + nlp.m);
    out.z.assign(out.point.begin() + nlp.m, out.point.begin() + nlp.m + nlp.J);
    if (nlp.has_s)
        out.s.assign(out.point.begin() + nlp.m + nlp.J, out.point.end());

    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return out;
}

// Max relative error between analytic and central finite-difference
// gradients over the objective and every nonlinear row.
inline double check_gradients(const NlpProblem& nlp, const Vec& point) {
    if (point.size() != nlp.nvar)
        throw std::invalid_argument("check_gradients: point has wrong dimension");
    double worst = 0.0;
    auto compare = [&](auto&& value_fn, const Vec& analytic) {
        for (std::size_t i = 0; i < nlp.nvar; ++i) {
            const double h = 1e-6 * (1.0 + std::fabs(point[i]));
            Vec vp = point, vm = point;
            vp[i] += h;
            vm[i] -= h;
            const double fd = (value_fn(vp) - value_fn(vm)) / (2.0 * h);
            const double err = std::fabs(fd - analytic[i]) /
                               std::max({1.0, std::fabs(fd), std::fabs(analytic[i])});
            worst = std::max(worst, err);
        }
    };
    Vec obj_grad;
    nlp.objective(point, &obj_grad);
    compare([&](const Vec& v) { return nlp.objective(v, nullptr); }, obj_grad);
    for (std::size_t j = 0; j < nlp.J; ++j) {
        const ConstraintEval e = nlp.constraint(j, point);
        compare([&, j](const Vec& v) { return nlp.constraint(j, v).value; }, e.grad);
    }
    return worst;
}

struct KktResidual {
    double stationarity = 0.0;
    double complementarity = 0.0;
};

// KKT residual of the minimization form at user-supplied multipliers.
// Row order for `multipliers`:
//   1. nonlinear rows g_j, j = 0..J-1;
//   2. each general linear row, hi side (a'v - hi) then lo side (lo - a'v),
//      finite sides only, in row order;
//   3. each variable bound, lo side (lo - v_i) then hi side (v_i - hi),
//      finite bounds only, in variable order.
inline KktResidual kkt_residual(const NlpProblem& nlp, const Vec& point,
                                const Vec& multipliers) {
    const detail::RowSet rows(nlp);
    std::size_t nbox = 0;
    for (std::size_t i = 0; i < nlp.nvar; ++i) {
        if (nlp.lower[i] > -inf) ++nbox;
        if (nlp.upper[i] < inf) ++nbox;
    }
    if (multipliers.size() != rows.count() + nbox)
        throw std::invalid_argument(
            "kkt_residual: expected " + std::to_string(rows.count() + nbox) +
            " multipliers, got " + std::to_string(multipliers.size()));
    for (double l : multipliers)
        if (l < 0.0) throw std::domain_error("kkt_residual: negative multiplier");

    Vec grad_lag;
    nlp.objective(point, &grad_lag);
    for (double& g : grad_lag) g = -g;  // minimization objective -mu0' c0
    double compl_max = 0.0;
    for (std::size_t i = 0; i < rows.count(); ++i) {
        const double gi = rows.value(i, point);
        rows.add_scaled_grad(i, point, multipliers[i], grad_lag);
        compl_max = std::max(compl_max, std::fabs(multipliers[i] * gi));
    }
    std::size_t mi = rows.count();
    for (std::size_t i = 0; i < nlp.nvar; ++i) {
        if (nlp.lower[i] > -inf) {
            const double lam = multipliers[mi++];
            grad_lag[i] -= lam;
            compl_max = std::max(compl_max, std::fabs(lam * (nlp.lower[i] - point[i])));
        }
        if (nlp.upper[i] < inf) {
            const double lam = multipliers[mi++];
            grad_lag[i] += lam;
            compl_max = std::max(compl_max, std::fabs(lam * (point[i] - nlp.upper[i])));
        }
    }
    return {inf_norm(grad_lag), compl_max};
}

}  // namespace ccfp
