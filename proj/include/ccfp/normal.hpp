#pragma once

// Standard-normal numerics: density, CDF, quantile, log-quantile (with
// derivative), dense Cholesky factorization and correlated Gaussian
// sampling.
//
// CDF: W. J. Cody's rational-approximation scheme for erf/erfc
// ("Rational Chebyshev approximation for the error function", 1969),
// which gives near machine-precision relative accuracy uniformly across
// the tails; Phi(x) = erfc(-x/sqrt(2))/2.
//
// Quantile: Wichura's algorithm AS241 (rational minimax, central + two
// tail branches), refined by one Newton step on the implemented CDF so
// the pair is self-consistent to ~1e-15.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "ccfp/linalg.hpp"
#include "ccfp/rng.hpp"

namespace ccfp {

inline constexpr double inv_sqrt_two = 0.70710678118654752440;
inline constexpr double inv_sqrt_two_pi = 0.39894228040143267794;

namespace detail {

// Cody's CALERF: jint = 0 -> erf(x), jint = 1 -> erfc(x).
inline double calerf(double x, int jint) {
    static const double a[5] = {3.1611237438705656, 113.864154151050156,
                                377.485237685302021, 3209.37758913846947,
                                .185777706184603153};
    static const double b[4] = {23.6012909523441209, 244.024637934444173,
                                1282.61652607737228, 2844.23683343917062};
    static const double c[9] = {.564188496988670089, 8.88314979438837594,
                                66.1191906371416295, 298.635138197400131,
                                881.95222124176909,  1712.04761263407058,
                                2051.07837782607147, 1230.33935479799725,
                                2.15311535474403846e-8};
    static const double d[8] = {15.7449261107098347, 117.693950891312499,
                                537.181101862009858, 1621.38957456669019,
                                3290.79923573345963, 4362.61909014324716,
                                3439.36767414372164, 1230.33935480374942};
    static const double p[6] = {.305326634961232344, .360344899949804439,
                                .125781726111229246, .0160837851487422766,
                                6.58749161529837803e-4, .0163153871373020978};
    static const double q[5] = {2.56852019228982242, 1.87295284992346047,
                                .527905102951428412, .0605183413124413191,
                                .00233520497626869185};

    const double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
    const double thresh = .46875;
    const double sixten = 16.;
    const double xsmall = 1.11e-16;
    const double xbig = 26.543;

    const double y = std::fabs(x);
    double result;

    if (y <= thresh) {
        // erf for |x| <= 0.46875
        double ysq = 0.0;
        if (y > xsmall) ysq = y * y;
        double xnum = a[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + a[i]) * ysq;
            xden = (xden + b[i]) * ysq;
        }
        result = x * (xnum + a[3]) / (xden + b[3]);
        if (jint != 0) result = 1.0 - result;
        return result;
    }

    if (y <= 4.0) {
        // erfc for 0.46875 <= |x| <= 4
        double xnum = c[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + c[i]) * y;
            xden = (xden + d[i]) * y;
        }
        result = (xnum + c[7]) / (xden + d[7]);
        // exp(-y^2) split into exact-square and residual parts so the
        // argument of each exp stays well conditioned.
        const double ysq = std::trunc(y * sixten) / sixten;
        const double del = (y - ysq) * (y + ysq);
        result = std::exp(-ysq * ysq) * std::exp(-del) * result;
    } else {
        // erfc for |x| > 4
        result = 0.0;
        if (y < xbig) {
            const double ysq_inv = 1.0 / (y * y);
            double xnum = p[5] * ysq_inv;
            double xden = ysq_inv;
            for (int i = 0; i < 4; ++i) {
                xnum = (xnum + p[i]) * ysq_inv;
                xden = (xden + q[i]) * ysq_inv;
            }
            result = ysq_inv * (xnum + p[4]) / (xden + q[4]);
            result = (sqrpi - result) / y;
            const double ysq = std::trunc(y * sixten) / sixten;
            const double del = (y - ysq) * (y + ysq);
            result = std::exp(-ysq * ysq) * std::exp(-del) * result;
        }
    }

    // Fix up for negative argument.
    if (jint == 0) {
        result = (0.5 - result) + 0.5;
        if (x < 0.0) result = -result;
    } else {
        if (x < 0.0) result = 2.0 - result;
    }
    return result;
}

// AS241 rational approximation to the normal quantile (before refinement).
inline double as241(double u) {
    const double split1 = 0.425;
    const double split2 = 5.0;
    const double const1 = 0.180625;
    const double const2 = 1.6;

    const double A0 = 3.3871328727963666080E0;
    const double A1 = 1.3314166789178437745E+2;
    const double A2 = 1.9715909503065514427E+3;
    const double A3 = 1.3731693765509461125E+4;
    const double A4 = 4.5921953931549871457E+4;
    const double A5 = 6.7265770927008700853E+4;
    const double A6 = 3.3430575583588128105E+4;
    const double A7 = 2.5090809287301226727E+3;
    const double B1 = 4.2313330701600911252E+1;
    const double B2 = 6.8718700749205790830E+2;
    const double B3 = 5.3941960214247511077E+3;
    const double B4 = 2.1213794301586595867E+4;
    const double B5 = 3.9307895800092710610E+4;
    const double B6 = 2.8729085735721942674E+4;
    const double B7 = 5.2264952788528545610E+3;
    const double C0 = 1.42343711074968357734E0;
    const double C1 = 4.63033784615654529590E0;
    const double C2 = 5.76949722146069140550E0;
    const double C3 = 3.64784832476320460504E0;
    const double C4 = 1.27045825245236838258E0;
    const double C5 = 2.41780725177450611770E-1;
    const double C6 = 2.27238449892691845833E-2;
    const double C7 = 7.74545014278341407640E-4;
    const double D1 = 2.05319162663775882187E0;
    const double D2 = 1.67638483018380384940E0;
    const double D3 = 6.89767334985100004550E-1;
    const double D4 = 1.48103976427480074590E-1;
    const double D5 = 1.51986665636164571966E-2;
    const double D6 = 5.47593808499534494600E-4;
    const double D7 = 1.05075007164441684324E-9;
    const double E0 = 6.65790464350110377720E0;
    const double E1 = 5.46378491116411436990E0;
    const double E2 = 1.78482653991729133580E0;
    const double E3 = 2.96560571828504891230E-1;
    const double E4 = 2.65321895265761230930E-2;
    const double E5 = 1.24266094738807843860E-3;
    const double E6 = 2.71155556874348757815E-5;
    const double E7 = 2.01033439929228813265E-7;
    const double F1 = 5.99832206555887937690E-1;
    const double F2 = 1.36929880922735805310E-1;
    const double F3 = 1.48753612908506148525E-2;
    const double F4 = 7.86869131145613259100E-4;
    const double F5 = 1.84631831751005468180E-5;
    const double F6 = 1.42151175831644588870E-7;
    const double F7 = 2.04426310338993978564E-15;

    const double qd = u - 0.5;
    if (std::fabs(qd) <= split1) {
        const double r = const1 - qd * qd;
        return qd *
               (((((((A7 * r + A6) * r + A5) * r + A4) * r + A3) * r + A2) * r + A1) * r + A0) /
               (((((((B7 * r + B6) * r + B5) * r + B4) * r + B3) * r + B2) * r + B1) * r + 1.0);
    }
    double r = qd < 0.0 ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double ret;
    if (r < split2) {
        r -= const2;
        ret = (((((((C7 * r + C6) * r + C5) * r + C4) * r + C3) * r + C2) * r + C1) * r + C0) /
              (((((((D7 * r + D6) * r + D5) * r + D4) * r + D3) * r + D2) * r + D1) * r + 1.0);
    } else {
        r -= split2;
        ret = (((((((E7 * r + E6) * r + E5) * r + E4) * r + E3) * r + E2) * r + E1) * r + E0) /
              (((((((F7 * r + F6) * r + F5) * r + F4) * r + F3) * r + F2) * r + F1) * r + 1.0);
    }
    return qd < 0.0 ? -ret : ret;
}

}  // namespace detail

inline double std_normal_pdf(double x) {
    return inv_sqrt_two_pi * std::exp(-0.5 * x * x);
}

inline double std_normal_cdf(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("std_normal_cdf: non-finite input");
    return 0.5 * detail::calerf(-x * inv_sqrt_two, 1);
}

inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("std_normal_quantile: p must lie in (0,1), got " +
                                std::to_string(p));
    // Work in the lower tail so that Phi(x) - p is free of cancellation;
    // 1 - p is exact for p >= 0.5 (Sterbenz).
    const bool flipped = p > 0.5;
    const double pl = flipped ? 1.0 - p : p;
    double x = detail::as241(pl);
    // One Newton step on the implemented CDF.
    const double density = std_normal_pdf(x);
    if (density > 0.0) {
        double step = (std_normal_cdf(x) - pl) / density;
        if (std::fabs(step) > 0.1) step = step > 0 ? 0.1 : -0.1;  // safety clamp
        x -= step;
    }
    return flipped ? -x : x;
}

struct LogQuantile {
    double value;       // log(Phi^{-1}(p))
    double derivative;  // d/dp log(Phi^{-1}(p)) = 1 / (phi(Phi^{-1}(p)) * Phi^{-1}(p))
};

// Defined for p where Phi^{-1}(p) > 0, i.e. p > 1/2 (log is singular at 1/2).
inline LogQuantile log_quantile(double p) {
    if (!(p > 0.5 + 1e-12 && p < 1.0))
        throw std::domain_error("log_quantile: p must lie in (0.5, 1), got " +
                                std::to_string(p));
    const double qv = std_normal_quantile(p);
    return {std::log(qv), 1.0 / (std_normal_pdf(qv) * qv)};
}

struct CholeskyFactor {
    std::size_t dim = 0;
    Mat lower_triangular;  // L with Gamma = L * L^T
};

// Dense Cholesky of a symmetric positive-definite matrix.  Only the lower
// triangle of the input is read.  The positivity threshold is scale-aware:
// a pivot must exceed 1e-10 * trace/dim.
inline CholeskyFactor cholesky(const Mat& gamma) {
    if (gamma.rows != gamma.cols)
        throw std::invalid_argument("cholesky: matrix must be square");
    const std::size_t n = gamma.rows;
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += gamma(i, i);
    const double pivot_floor = 1e-10 * trace / static_cast<double>(n);

    Mat L(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = gamma(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
        if (!(diag > pivot_floor))
            throw std::runtime_error(
                "cholesky: matrix is not positive definite (pivot " +
                std::to_string(j + 1) + " = " + std::to_string(diag) + ")");
        L(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = gamma(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return {n, std::move(L)};
}

// count x dim matrix of correlated Gaussian draws, row i = mean + L * g_i.
// Each sample derives its own RNG stream from (seed, i), so the output is
// independent of any later sharding of the same index range.
inline Mat sample_gaussian(const Vec& mean, const CholeskyFactor& factor,
                           std::size_t count, std::uint64_t seed) {
    const std::size_t dim = factor.dim;
    if (mean.size() != dim)
        throw std::invalid_argument("sample_gaussian: mean length " +
                                    std::to_string(mean.size()) +
                                    " does not match factor dim " + std::to_string(dim));
    if (count == 0)
        throw std::invalid_argument("sample_gaussian: count must be positive");
    Mat out(count, dim, 0.0);
    Vec g(dim);
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng = CounterRng::derive(seed, i);
        for (std::size_t k = 0; k < dim; ++k)
            g[k] = std_normal_quantile(rng.uniform01());
        for (std::size_t r = 0; r < dim; ++r) {
            double s = mean[r];
            for (std::size_t k = 0; k <= r; ++k) s += factor.lower_triangular(r, k) * g[k];
            out(i, r) = s;
        }
    }
    return out;
}

}  // namespace ccfp
