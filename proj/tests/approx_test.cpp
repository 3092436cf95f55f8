#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ccfp/approx.hpp"
#include "support/reference_normal.hpp"

using namespace ccfp;

TEST_CASE("make_breakpoints endpoints and spacing", "[approx]") {
    const double phi1 = std_normal_cdf(1.0);
    {
        const Breakpoints bp = make_breakpoints(1, 0.9999);
        REQUIRE(bp.grid.size() == 2);
        CHECK(bp.grid[0] == phi1);
        CHECK(bp.grid[1] == 0.9999);
    }
    {
        const Breakpoints bp = make_breakpoints(3, 0.9999);
        REQUIRE(bp.grid.size() == 4);
        // Spacing (0.9999 - Phi(1))/3; 20-digit reference value.
        CHECK_THAT(bp.grid[1] - bp.grid[0],
                   Catch::Matchers::WithinAbs(0.052851751310485683805, 1e-12));
        for (std::size_t k = 0; k + 1 < bp.grid.size(); ++k)
            REQUIRE(bp.grid[k] < bp.grid[k + 1]);
    }
    CHECK_THROWS_AS(make_breakpoints(0, 0.9999), std::domain_error);
    CHECK_THROWS_AS(make_breakpoints(3, phi1), std::domain_error);
    CHECK_THROWS_AS(make_breakpoints(3, 1.0), std::domain_error);
}

TEST_CASE("secant coefficients interpolate at breakpoints", "[approx]") {
    const Breakpoints bp = make_breakpoints(5, 0.9999);
    const PiecewiseAffine pwa = secant_coeffs(bp);
    REQUIRE(pwa.slopes.size() == 5);
    for (std::size_t k = 0; k < bp.grid.size(); ++k) {
        const double want =
            k == 0 ? 0.0 : std::log(std_normal_quantile(bp.grid[k]));
        CHECK_THAT(eval_pwa(pwa, bp.grid[k]).value,
                   Catch::Matchers::WithinAbs(want, 1e-12));
    }
}

TEST_CASE("single-segment secant slope matches the reference value", "[approx]") {
    const PiecewiseAffine pwa = secant_coeffs(make_breakpoints(1, 0.9999));
    // (log Phi^{-1}(0.9999) - 0) / (0.9999 - Phi(1)); 20-digit reference.
    CHECK_THAT(pwa.slopes[0],
               Catch::Matchers::WithinAbs(8.2839213153202988276, 1e-9));
}

TEST_CASE("secant overestimates between nodes", "[approx]") {
    const Breakpoints bp = make_breakpoints(4, 0.9999);
    const PiecewiseAffine pwa = secant_coeffs(bp);
    for (std::size_t k = 0; k + 1 < bp.grid.size(); ++k) {
        const double mid = 0.5 * (bp.grid[k] + bp.grid[k + 1]);
        CHECK(eval_pwa(pwa, mid).value >= log_quantile(mid).value);
    }
}

TEST_CASE("tangent coefficients at Phi(1) and tangency", "[approx]") {
    const double phi1 = std_normal_cdf(1.0);
    const Breakpoints bp = make_breakpoints(3, 0.9999);
    const PiecewiseAffine pwa = tangent_coeffs(bp.grid);
    REQUIRE(pwa.slopes.size() == 4);
    // d at Phi(1) is 1/pdf(1); b = -d*Phi(1) + 0.  20-digit references.
    CHECK_THAT(pwa.slopes[0], Catch::Matchers::WithinAbs(4.1327313541224929385, 1e-9));
    CHECK_THAT(pwa.intercepts[0],
               Catch::Matchers::WithinAbs(-3.4770518117036944669, 1e-9));
    for (std::size_t k = 0; k < bp.grid.size(); ++k) {
        const double z = bp.grid[k];
        const double want = k == 0 ? 0.0 : log_quantile(z).value;
        const double tangent_k = pwa.slopes[k] * z + pwa.intercepts[k];
        CHECK_THAT(tangent_k, Catch::Matchers::WithinAbs(want, 1e-12));
    }
    (void)phi1;
}

TEST_CASE("tangent underestimates everywhere on the domain", "[approx]") {
    const Breakpoints bp = make_breakpoints(6, 0.9999);
    const PiecewiseAffine pwa = tangent_coeffs(bp.grid);
    for (int i = 0; i <= 10000; ++i) {
        const double z = bp.grid.front() + (bp.grid.back() - bp.grid.front()) * i / 10000.0;
        REQUIRE(eval_pwa(pwa, z).value <= log_quantile(z).value + 1e-12);
    }
}

TEST_CASE("tangent_coeffs rejects bad points", "[approx]") {
    CHECK_THROWS_AS(tangent_coeffs({0.4, 0.9}), std::domain_error);
    CHECK_THROWS_AS(tangent_coeffs({0.9, 0.9}), std::domain_error);
    CHECK_THROWS_AS(tangent_coeffs({}), std::domain_error);
}

TEST_CASE("sandwich property on a dense grid", "[approx]") {
    for (int K : {1, 3, 6, 64}) {
        const Breakpoints bp = make_breakpoints(K, 1.0 - 1e-4);
        const PiecewiseAffine sec = secant_coeffs(bp);
        const PiecewiseAffine tan = tangent_coeffs(bp.grid);
        for (int i = 0; i <= 10000; ++i) {
            const double z =
                bp.grid.front() + (bp.grid.back() - bp.grid.front()) * i / 10000.0;
            const double truth = z == bp.grid.front() ? 0.0 : log_quantile(z).value;
            REQUIRE(eval_pwa(tan, z).value <= truth + 1e-12);
            REQUIRE(eval_pwa(sec, z).value >= truth - 1e-12);
        }
    }
}

TEST_CASE("secant sup-error non-increasing when K doubles", "[approx]") {
    double prev = inf;
    for (int K : {4, 8, 16, 32, 64, 128}) {
        const Breakpoints bp = make_breakpoints(K, 1.0 - 1e-4);
        const PiecewiseAffine sec = secant_coeffs(bp);
        double sup = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double z =
                bp.grid.front() + (bp.grid.back() - bp.grid.front()) * i / 10000.0;
            const double truth = z == bp.grid.front() ? 0.0 : log_quantile(z).value;
            sup = std::max(sup, eval_pwa(sec, z).value - truth);
        }
        REQUIRE(sup <= prev + 1e-13);
        prev = sup;
    }
}

TEST_CASE("slopes strictly increasing for both kinds", "[approx]") {
    for (int K : {2, 5, 16}) {
        const Breakpoints bp = make_breakpoints(K, 0.9999);
        const PiecewiseAffine sec = secant_coeffs(bp);
        const PiecewiseAffine tan = tangent_coeffs(bp.grid);
        for (std::size_t k = 1; k < sec.slopes.size(); ++k)
            REQUIRE(sec.slopes[k] > sec.slopes[k - 1]);
        for (std::size_t k = 1; k < tan.slopes.size(); ++k)
            REQUIRE(tan.slopes[k] > tan.slopes[k - 1]);
    }
}

TEST_CASE("eval_pwa clamping flag and brute-force max", "[approx]") {
    PiecewiseAffine pwa;
    pwa.kind = PwaKind::secant;
    pwa.slopes = {1.0, 2.0};
    pwa.intercepts = {0.0, -0.5};
    pwa.z_lo = 0.0;
    pwa.z_hi = 1.0;
    // Crossing point at z = 0.5.
    CHECK(eval_pwa(pwa, 0.3).value == std::max(0.3, 2 * 0.3 - 0.5));
    CHECK(eval_pwa(pwa, 0.8).value == std::max(0.8, 2 * 0.8 - 0.5));
    CHECK_FALSE(eval_pwa(pwa, 0.8).clamped);
    CHECK(eval_pwa(pwa, 1.2).clamped);
    CHECK(eval_pwa(pwa, -0.1).clamped);
}
