#pragma once

// Piecewise-affine approximations of log(Phi^{-1}(z)) on [Phi(1), z_max].
//
// The function is convex and increasing there, so
//   * chords between breakpoints (secants) OVER-estimate it -> a
//     conservative inner approximation of the chance constraint;
//   * supporting tangent lines UNDER-estimate it -> a relaxation.
// Together the two bound the true optimum from both sides.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "ccfp/linalg.hpp"
#include "ccfp/normal.hpp"

namespace ccfp {

struct Breakpoints {
    Vec grid;        // xi_1 < ... < xi_{K+1}
    std::size_t K;   // segment count = grid.size() - 1
};

// Uniform grid of K+1 points from Phi(1) to z_max inclusive.  Phi(1) is
// computed from the CDF here, never hard-coded, so there is a single
// source of truth for the domain's left edge.
inline Breakpoints make_breakpoints(int K, double z_max) {
    if (K < 1)
        throw std::domain_error("make_breakpoints: K must be >= 1, got " +
                                std::to_string(K));
    const double lo = std_normal_cdf(1.0);
    if (!(z_max > lo && z_max <= 1.0 - 1e-9))
        throw std::domain_error("make_breakpoints: z_max must lie in (Phi(1), 1-1e-9], got " +
                                std::to_string(z_max));
    Breakpoints bp;
    bp.K = static_cast<std::size_t>(K);
    bp.grid.resize(bp.K + 1);
    for (std::size_t k = 0; k <= bp.K; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(bp.K);
        bp.grid[k] = lo + t * (z_max - lo);
    }
    bp.grid.front() = lo;     // exact endpoints regardless of rounding
    bp.grid.back() = z_max;
    return bp;
}

enum class PwaKind { secant, tangent };

struct PiecewiseAffine {
    PwaKind kind = PwaKind::secant;
    Vec slopes;      // u_k (secant) or d_k (tangent)
    Vec intercepts;  // t_k (secant) or b_k (tangent)
    double z_lo = 0.0;
    double z_hi = 0.0;
};

// Chords of log Phi^{-1} between consecutive breakpoints:
//   u_k = (f(xi_{k+1}) - f(xi_k)) / (xi_{k+1} - xi_k)
//   t_k = (xi_{k+1} f(xi_k) - xi_k f(xi_{k+1})) / (xi_{k+1} - xi_k)
inline PiecewiseAffine secant_coeffs(const Breakpoints& bp) {
    if (bp.grid.size() < 2)
        throw std::domain_error("secant_coeffs: need at least two breakpoints");
    PiecewiseAffine pwa;
    pwa.kind = PwaKind::secant;
    pwa.z_lo = bp.grid.front();
    pwa.z_hi = bp.grid.back();
    Vec f(bp.grid.size());
    // f(xi_1) = log Phi^{-1}(Phi(1)) = 0 exactly; evaluate the rest.
    f[0] = bp.grid.front() == std_normal_cdf(1.0) ? 0.0 : log_quantile(bp.grid.front()).value;
    for (std::size_t k = 1; k < bp.grid.size(); ++k) f[k] = log_quantile(bp.grid[k]).value;
    pwa.slopes.resize(bp.K);
    pwa.intercepts.resize(bp.K);
    for (std::size_t k = 0; k < bp.K; ++k) {
        const double x0 = bp.grid[k], x1 = bp.grid[k + 1];
        const double dx = x1 - x0;
        pwa.slopes[k] = (f[k + 1] - f[k]) / dx;
        pwa.intercepts[k] = (x1 * f[k] - x0 * f[k + 1]) / dx;
    }
    return pwa;
}

// Supporting tangents of log Phi^{-1} at the given points:
//   d_k = 1 / (pdf(Phi^{-1}(xi_k)) * Phi^{-1}(xi_k)),  b_k = -d_k xi_k + log Phi^{-1}(xi_k)
inline PiecewiseAffine tangent_coeffs(const Vec& points) {
    if (points.empty())
        throw std::domain_error("tangent_coeffs: need at least one point");
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (points[k] <= 0.5)
            throw std::domain_error("tangent_coeffs: point " + std::to_string(points[k]) +
                                    " is <= 0.5 where log Phi^{-1} is undefined");
        if (k > 0 && !(points[k] > points[k - 1]))
            throw std::domain_error("tangent_coeffs: points must be strictly increasing");
    }
    PiecewiseAffine pwa;
    pwa.kind = PwaKind::tangent;
    pwa.z_lo = points.front();
    pwa.z_hi = points.back();
    pwa.slopes.resize(points.size());
    pwa.intercepts.resize(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const LogQuantile lq = log_quantile(points[k]);
        pwa.slopes[k] = lq.derivative;
        pwa.intercepts[k] = -lq.derivative * points[k] + lq.value;
    }
    return pwa;
}

struct PwaValue {
    double value = 0.0;
    bool clamped = false;  // z fell outside [z_lo, z_hi]; endpoint piece extrapolated
};

// F(z) = max_k (slope_k z + intercept_k).
inline PwaValue eval_pwa(const PiecewiseAffine& pwa, double z) {
    PwaValue out;
    out.clamped = z < pwa.z_lo || z > pwa.z_hi;
    double best = -inf;
    for (std::size_t k = 0; k < pwa.slopes.size(); ++k)
        best = std::max(best, pwa.slopes[k] * z + pwa.intercepts[k]);
    out.value = best;
    return out;
}

}  // namespace ccfp
