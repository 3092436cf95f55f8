#pragma once

// Shared instance fixtures for the test suite.

#include <cstdint>

#include "ccfp/model.hpp"
#include "ccfp/rng.hpp"

namespace ccfp_test {

// The bundled economic application: a manufactory choosing output levels
// x of five products, maximizing expected profit subject to a chance
// constraint that the realized cost/profit ratio stays below a random
// benchmark, with an expenditure quota 50 <= E(cost) <= 100 and x >= 0.
inline ccfp::ProblemInstance economic_instance() {
    using namespace ccfp;
    ProblemInstance inst;
    inst.m = 5;
    inst.n = 5;
    inst.mu0 = {52, 97, 77, 92, 87};
    inst.c0_spec = {SpecKind::affine, Mat::identity(5), Vec(5, 0.0)};
    inst.mu1 = {40, 80, 60, 70, 70};
    inst.l1 = 2.0;
    const double g[36] = {6, 7, 1, 2, 2, 1, 7, 9, 2, 4, 4, 2, 1, 2, 6, 1, 1, 1,
                          2, 4, 1, 9, 3, 1, 2, 4, 1, 3, 7, 1, 1, 2, 1, 1, 1, 6};
    inst.gamma_cov = Mat(6, 6);
    for (std::size_t i = 0; i < 36; ++i) inst.gamma_cov.data[i] = g[i];
    inst.scenarios = {
        {0.7, {55, 100, 80, 95, 90}, 5.0, 0.4},
        {0.3, {45, 90, 70, 85, 80}, 3.0, 0.6},
    };
    inst.epsilon = 0.02;
    inst.c_spec = {SpecKind::affine, Mat::identity(5), Vec(5, 0.0)};
    inst.feasible_set.lower = Vec(5, 0.0);
    inst.feasible_set.upper = Vec(5, inf);
    inst.feasible_set.ranges = {{{30, 50, 20, 40, 30}, 50.0, 100.0}};
    return inst;
}

// A small two-product instance that is strictly feasible with the chance
// constraint binding at the optimum, used to exercise the happy path.
inline ccfp::ProblemInstance demo_instance() {
    using namespace ccfp;
    ProblemInstance inst;
    inst.m = 2;
    inst.n = 2;
    inst.mu0 = {3, 2};
    inst.c0_spec = {SpecKind::affine, Mat::identity(2), Vec(2, 0.0)};
    inst.mu1 = {2, 1};
    inst.l1 = 1.0;
    inst.gamma_cov = Mat(3, 3);
    const double g[9] = {0.04, 0.01, 0.0, 0.01, 0.09, 0.01, 0.0, 0.01, 0.05};
    for (std::size_t i = 0; i < 9; ++i) inst.gamma_cov.data[i] = g[i];
    inst.scenarios = {
        {0.6, {3.0, 1.5}, 10.0, 0.5},
        {0.4, {2.0, 1.0}, 8.0, 0.6},
    };
    inst.epsilon = 0.02;
    inst.c_spec = {SpecKind::affine, Mat::identity(2), Vec(2, 0.0)};
    inst.feasible_set.lower = Vec(2, 0.0);
    inst.feasible_set.upper = Vec(2, 10.0);
    inst.feasible_set.ranges = {{{1.0, 1.0}, 0.5, 6.0}};
    return inst;
}

// Random tiny instance (n <= 2, J <= 2) satisfying all hard assumptions,
// with strictly positive fraction maps so log(c_i) is defined wherever
// the equivalence predicates sample.
inline ccfp::ProblemInstance random_tiny_instance(std::uint64_t seed) {
    using namespace ccfp;
    CounterRng rng(seed);
    ProblemInstance inst;
    inst.n = 1 + (rng.next_u64() % 2);
    inst.m = 1 + (rng.next_u64() % 2);
    const std::size_t n = inst.n, m = inst.m;
    const std::size_t J = 1 + (rng.next_u64() % 2);

    const bool exp_kind = (rng.next_u64() % 2) == 0;
    FunctionSpec cs;
    cs.kind = exp_kind ? SpecKind::exp_affine : SpecKind::affine;
    cs.W = Mat(n, m);
    cs.v = Vec(n);
    for (double& w : cs.W.data) w = 0.2 + 0.8 * rng.uniform01();
    for (double& v : cs.v) v = exp_kind ? -0.5 + rng.uniform01() : 0.3 + rng.uniform01();
    inst.c_spec = cs;
    inst.c0_spec = cs;
    inst.mu0 = Vec(n);
    for (double& v : inst.mu0) v = 0.5 + rng.uniform01();

    inst.mu1 = Vec(n);
    for (double& v : inst.mu1) v = 1.0 + 2.0 * rng.uniform01();
    inst.l1 = 0.5 + rng.uniform01();

    // Random SPD covariance with nonnegative entries: A A^T + diag boost
    // where A has nonnegative entries.
    const std::size_t d = n + 1;
    Mat A(d, d);
    for (double& a : A.data) a = 0.3 * rng.uniform01();
    inst.gamma_cov = Mat(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += A(i, k) * A(j, k);
            inst.gamma_cov(i, j) = s + (i == j ? 0.05 : 0.0);
        }

    inst.scenarios.resize(J);
    double psum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
        Scenario& s = inst.scenarios[j];
        s.p = 0.2 + rng.uniform01();
        psum += s.p;
        s.a2 = Vec(n);
        for (double& a : s.a2) a = rng.uniform01();
        s.b2 = 1.0 + rng.uniform01();
        // Keep r small enough that mu1 - r a2 >= 0 holds with margin.
        s.r = 0.2 + 0.3 * rng.uniform01();
    }
    for (Scenario& s : inst.scenarios) s.p /= psum;

    double min_p = 1.0;
    for (const Scenario& s : inst.scenarios) min_p = std::min(min_p, s.p);
    inst.epsilon = 0.5 * min_p * (1.0 - 0.8413447460685429);

    inst.feasible_set.lower = Vec(m, 0.1);
    inst.feasible_set.upper = Vec(m, 3.0);
    return inst;
}

}  // namespace ccfp_test
