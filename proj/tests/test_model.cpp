#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_helpers.hpp"

using namespace spinglass;
using test_helpers::rel_diff;

TEST_CASE("log_cosh basics") {
    CHECK(log_cosh(0.0) == 0.0);
    // asymptote |x| - log 2
    CHECK(std::abs(log_cosh(1000.0) - (1000.0 - std::log(2.0))) < 1e-12);
    CHECK(std::abs(log_cosh(-1000.0) - (1000.0 - std::log(2.0))) < 1e-12);
    // safe range: matches the naive evaluation
    CHECK(std::abs(log_cosh(0.5) - std::log(std::cosh(0.5))) < 1e-14);
    CHECK(std::isfinite(log_cosh(1e308)));
    CHECK(log_cosh(-3.25) == log_cosh(3.25));
}

TEST_CASE("sech_squared is 1 - tanh^2") {
    for (const double x : {0.0, 0.1, -0.7, 3.0, -12.5, 40.0}) {
        const double t = std::tanh(x);
        CHECK(std::abs(sech_squared(x) - (1.0 - t * t)) < 1e-14);
    }
    CHECK(sech_squared(0.0) == 1.0);
    CHECK(sech_squared(400.0) == 0.0);  // past the clamp the limit is exact
}

TEST_CASE("pseudolikelihood at beta=h=0 is -n log 2") {
    const LocalFields fields(std::vector<double>{0.5, -1.0, 2.0, 0.0});
    const SpinConfiguration sigma{1, -1, 1, -1};
    CHECK(pseudo_loglik({0.0, 0.0}, sigma, fields) == -4.0 * 0.6931471805599453094172321214582);
}

TEST_CASE("single isolated site: L increases in h with supremum 0") {
    const LocalFields fields(std::vector<double>{0.0});
    const SpinConfiguration sigma{1};
    double prev = -1e300;
    for (double h = -5.0; h <= 8.0; h += 0.5) {
        const double l = pseudo_loglik({0.7, h}, sigma, fields);
        CHECK(l > prev);
        CHECK(l <= 0.0);
        prev = l;
    }
    // approaches 0 from below
    CHECK(pseudo_loglik({0.7, 25.0}, sigma, fields) > -1e-9);
    CHECK(pseudo_loglik({0.7, 25.0}, sigma, fields) <= 0.0);
}

TEST_CASE("L is nonpositive on random instances") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto inst = test_helpers::random_instance(24, seed, 3.0);
        CHECK(pseudo_loglik(inst.params, inst.sigma, inst.fields) <= 0.0);
    }
}

TEST_CASE("score at beta=h=0 reduces to plain sums") {
    const auto inst = test_helpers::random_instance(32, 5);
    const auto sc = score({0.0, 0.0}, inst.sigma, inst.fields);
    double s = 0.0, q = 0.0;
    for (std::size_t i = 0; i < inst.sigma.size(); ++i) {
        s += inst.fields.m[i] * static_cast<double>(inst.sigma[i]);
        q += static_cast<double>(inst.sigma[i]);
    }
    CHECK(sc.s == s);
    CHECK(sc.q == q);
}

TEST_CASE("score matches central finite differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = test_helpers::random_instance(24, seed, 3.0);
        const auto sc = score(inst.params, inst.sigma, inst.fields);
        const auto fd = test_helpers::fd_score(inst.params, inst.sigma, inst.fields);
        CHECK(rel_diff(sc.s, fd.s) < 1e-6);
        CHECK(rel_diff(sc.q, fd.q) < 1e-6);
    }
}

TEST_CASE("all-equal fields factor the score exactly") {
    // power-of-two constant keeps products and sums exact
    const double c = 0.5;
    const LocalFields fields(std::vector<double>(8, c));
    const SpinConfiguration sigma{1, -1, 1, 1, -1, -1, 1, -1};
    const auto sc = score({0.8, -0.2}, sigma, fields);
    CHECK(fields.mean() == c);
    CHECK(sc.s == c * sc.q);
}

TEST_CASE("negative Hessian of a single site") {
    const LocalFields fields(std::vector<double>{0.0});
    const auto hs = neg_hessian({1.3, 0.4}, fields);
    CHECK(hs.s_theta_m2 == 0.0);
    CHECK(hs.s_theta_m == 0.0);
    CHECK(hs.s_theta == sech_squared(0.4));
    CHECK(hs.det() == 0.0);
    CHECK(hs.t_tilde() == 0.0);
}

TEST_CASE("determinant identity det H = (n^2/2) T~ against the double sum") {
    Rng pick(2);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + static_cast<int>(pick.uniform_below(21));
        const auto inst = test_helpers::random_instance(n, 1000 + static_cast<std::uint64_t>(trial));
        const auto hs = neg_hessian(inst.params, inst.fields);
        const double lhs = hs.det();
        const double rhs = 0.5 * static_cast<double>(n) * static_cast<double>(n) *
                           t_tilde_double_sum(inst.params, inst.fields);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("negative Hessian matches finite differences") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto inst = test_helpers::random_instance(20, 50 + seed, 2.0);
        const auto hs = neg_hessian(inst.params, inst.fields);
        const auto fd = test_helpers::fd_neg_hessian(inst.params, inst.sigma, inst.fields);
        CHECK(rel_diff(hs.s_theta_m2, fd[0]) < 1e-5);
        CHECK(rel_diff(hs.s_theta_m, fd[1]) < 1e-5);
        CHECK(rel_diff(hs.s_theta, fd[2]) < 1e-5);
    }
}

TEST_CASE("Hessian is positive semidefinite") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = test_helpers::random_instance(16, 200 + seed, 3.0);
        const auto hs = neg_hessian(inst.params, inst.fields);
        CHECK(hs.min_eigenvalue() >= -1e-12 * hs.trace());
    }
}

TEST_CASE("t_stat hand values") {
    CHECK(t_stat(LocalFields(std::vector<double>(7, 3.14))) == 0.0);
    const LocalFields f(std::vector<double>{1.0, -1.0, 0.0});
    CHECK(rel_diff(t_stat(f), 4.0 / 3.0) < 1e-15);
    // degree-2 homogeneity, exact for a power-of-two scaling
    const LocalFields f2(std::vector<double>{2.0, -2.0, 0.0});
    CHECK(t_stat(f2) == 4.0 * t_stat(f));
}

TEST_CASE("t_stat equals the pairwise double sum") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = test_helpers::random_instance(18, 300 + seed);
        const double direct = t_stat(inst.fields);
        double pairs = 0.0;
        const std::size_t n = inst.fields.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double d = inst.fields.m[i] - inst.fields.m[j];
                pairs += d * d;
            }
        pairs /= static_cast<double>(n) * static_cast<double>(n);
        CHECK(rel_diff(direct, pairs) < 1e-12);
    }
}

TEST_CASE("t_tilde basics and the O(n) identity") {
    CHECK(t_tilde({0.7, 0.1}, LocalFields(std::vector<double>(5, 2.0))) == 0.0);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = test_helpers::random_instance(20, 400 + seed, 2.5);
        const double fast = t_tilde(inst.params, inst.fields);
        const double slow = t_tilde_double_sum(inst.params, inst.fields);
        CHECK(rel_diff(fast, slow) < 1e-12);
        // theta <= 1 squeezes the weighted sum below the unweighted one
        CHECK(fast >= 0.0);
        CHECK(fast <= t_stat(inst.fields) * (1.0 + 1e-12));
        // theta = 1 at beta = h = 0
        CHECK(rel_diff(t_tilde({0.0, 0.0}, inst.fields), t_stat(inst.fields)) < 1e-12);
    }
}

TEST_CASE("L is concave along random segments") {
    Rng rng(77);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto inst = test_helpers::random_instance(16, 500 + seed);
        const ModelParams p1{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        const ModelParams p2{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        const double t = rng.uniform();
        const ModelParams mid{t * p1.beta + (1.0 - t) * p2.beta, t * p1.h + (1.0 - t) * p2.h};
        const double lmid = pseudo_loglik(mid, inst.sigma, inst.fields);
        const double bound = t * pseudo_loglik(p1, inst.sigma, inst.fields) +
                             (1.0 - t) * pseudo_loglik(p2, inst.sigma, inst.fields);
        CHECK(lmid >= bound - 1e-9);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const LocalFields fields(std::vector<double>{0.0, 1.0});
    const SpinConfiguration sigma{1, -1, 1};
    CHECK_THROWS_AS(pseudo_loglik({0.1, 0.1}, sigma, fields), DimensionMismatchError);
    CHECK_THROWS_AS(score({0.1, 0.1}, sigma, fields), DimensionMismatchError);
}
