#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "spinglass/errors.hpp"
#include "spinglass/types.hpp"

namespace spinglass {

// log cosh(x) = |x| + log1p(e^{-2|x|}) - log 2; monotone in |x|, no overflow.
inline double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094172321214582;
}

// sech^2(x) = 4 e^{-2|x|} / (1 + e^{-2|x|})^2. The exponent is nonpositive,
// so nothing can overflow; past |x| ~ 372 the value underflows to 0, which is
// the correct limit.
inline double sech_squared(double x) {
    const double e = std::exp(-2.0 * std::abs(x));
    const double r = 1.0 + e;
    return 4.0 * e / (r * r);
}

// Log pseudolikelihood: sum_i sigma_i (beta m_i + h) - sum_i log cosh(beta m_i + h)
// - n log 2. Each site's conditional carries a 2 cosh normalizer, hence the
// per-site -log 2. Always <= 0.
inline double pseudo_loglik(ModelParams p, const SpinConfiguration& sigma, const LocalFields& fields) {
    require_same_size(sigma.size(), fields.size(), "pseudo_loglik");
    double lin = 0.0, lc = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double x = p.beta * fields.m[i] + p.h;
        lin += static_cast<double>(sigma[i]) * x;
        lc += log_cosh(x);
    }
    return lin - lc - static_cast<double>(sigma.size()) * 0.6931471805599453094172321214582;
}

// Score (gradient of the log pseudolikelihood in (beta, h)).
struct Score {
    double s = 0.0;  // d/d beta
    double q = 0.0;  // d/d h
    double inf_norm() const { return std::max(std::abs(s), std::abs(q)); }
};

inline Score score(ModelParams p, const SpinConfiguration& sigma, const LocalFields& fields) {
    require_same_size(sigma.size(), fields.size(), "score");
    Score sc;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double mi = fields.m[i];
        const double resid = static_cast<double>(sigma[i]) - std::tanh(p.beta * mi + p.h);
        sc.s += mi * resid;
        sc.q += resid;
    }
    return sc;
}

// Negative Hessian of the log pseudolikelihood,
//   [ sum theta m^2   sum theta m ]
//   [ sum theta m     sum theta   ]
// with theta_i = sech^2(beta m_i + h). Positive semidefinite; positive
// definite exactly when t_tilde > 0, and det = (n^2/2) t_tilde.
struct HessianSummary {
    std::size_t n = 0;
    double s_theta = 0.0;
    double s_theta_m = 0.0;
    double s_theta_m2 = 0.0;

    double det() const { return s_theta_m2 * s_theta - s_theta_m * s_theta_m; }
    double trace() const { return s_theta_m2 + s_theta; }
    double t_tilde() const {
        const double v = 2.0 * det() / (static_cast<double>(n) * static_cast<double>(n));
        return std::max(v, 0.0);  // tiny negatives are cancellation noise
    }
    double min_eigenvalue() const {
        const double tr = trace();
        const double disc = std::sqrt(std::max(tr * tr - 4.0 * det(), 0.0));
        return 0.5 * (tr - disc);
    }
};

inline HessianSummary neg_hessian(ModelParams p, const LocalFields& fields) {
    HessianSummary hs;
    hs.n = fields.size();
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const double mi = fields.m[i];
        const double th = sech_squared(p.beta * mi + p.h);
        hs.s_theta += th;
        hs.s_theta_m += th * mi;
        hs.s_theta_m2 += th * mi * mi;
    }
    return hs;
}

// T_N = (2/n) sum_i (m_i - mbar)^2, the unweighted pairwise field variability.
inline double t_stat(const LocalFields& fields) {
    const std::size_t n = fields.size();
    if (n == 0) throw InvalidSizeError("t_stat: empty fields");
    const double mbar = fields.mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = fields.m[i] - mbar;
        acc += d * d;
    }
    return 2.0 * acc / static_cast<double>(n);
}

// T~_N in O(n) via 2[(sum theta)(sum theta m^2) - (sum theta m)^2]/n^2.
inline double t_tilde(ModelParams p, const LocalFields& fields) {
    if (fields.size() == 0) throw InvalidSizeError("t_tilde: empty fields");
    return neg_hessian(p, fields).t_tilde();
}

// O(n^2) double-sum form of T~_N. Reference route for tests; do not use in
// hot paths.
inline double t_tilde_double_sum(ModelParams p, const LocalFields& fields) {
    const std::size_t n = fields.size();
    if (n == 0) throw InvalidSizeError("t_tilde_double_sum: empty fields");
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = sech_squared(p.beta * fields.m[i] + p.h);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = fields.m[i] - fields.m[j];
            acc += theta[i] * theta[j] * d * d;
        }
    return acc / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace spinglass
