#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "spinglass/errors.hpp"
#include "spinglass/model.hpp"
#include "spinglass/parallel.hpp"
#include "spinglass/types.hpp"

namespace spinglass {

// Witness for the divergence of L at infinity: a threshold a and four distinct
// sites with sigma_i=+1, m_i>a; sigma_j=-1, m_j>a; sigma_k=+1, m_k<a;
// sigma_l=-1, m_l<a.
struct ExistenceWitness {
    bool exists = false;
    double a = 0.0;
    std::array<int, 4> sites = {-1, -1, -1, -1};  // i, j, k, l
    std::string reason;
};

// O(n log n): sort sites by field, try the midpoint between each pair of
// consecutive distinct values as the threshold a (smallest a first), and test
// the four sign/side conditions with prefix counts.
inline ExistenceWitness existence_check(const SpinConfiguration& sigma, const LocalFields& fields) {
    require_same_size(sigma.size(), fields.size(), "existence_check");
    const std::size_t n = sigma.size();
    ExistenceWitness w;
    if (n < 4) {
        w.reason = "fewer than four sites";
        return w;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a_, int b_) {
        return fields.m[static_cast<std::size_t>(a_)] < fields.m[static_cast<std::size_t>(b_)];
    });
    // prefix_plus[k] = #(sigma=+1) among the k smallest fields; same for minus.
    std::vector<int> prefix_plus(n + 1, 0), prefix_minus(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const bool up = sigma[static_cast<std::size_t>(order[k])] > 0;
        prefix_plus[k + 1] = prefix_plus[k] + (up ? 1 : 0);
        prefix_minus[k + 1] = prefix_minus[k] + (up ? 0 : 1);
    }
    const int total_plus = prefix_plus[n], total_minus = prefix_minus[n];
    for (std::size_t k = 1; k < n; ++k) {
        const double lo = fields.m[static_cast<std::size_t>(order[k - 1])];
        const double hi = fields.m[static_cast<std::size_t>(order[k])];
        if (!(lo < hi)) continue;
        const bool below_ok = prefix_plus[k] > 0 && prefix_minus[k] > 0;
        const bool above_ok = (total_plus - prefix_plus[k]) > 0 && (total_minus - prefix_minus[k]) > 0;
        if (!below_ok || !above_ok) continue;
        w.exists = true;
        w.a = 0.5 * (lo + hi);
        // smallest-index representative for each role
        int i = -1, j = -1, kk = -1, l = -1;
        for (std::size_t v = 0; v < n; ++v) {
            const double m = fields.m[v];
            const bool up = sigma[v] > 0;
            if (m > w.a && up && i < 0) i = static_cast<int>(v);
            if (m > w.a && !up && j < 0) j = static_cast<int>(v);
            if (m < w.a && up && kk < 0) kk = static_cast<int>(v);
            if (m < w.a && !up && l < 0) l = static_cast<int>(v);
        }
        w.sites = {i, j, kk, l};
        return w;
    }
    w.reason = "no threshold separates all four sign/side patterns";
    return w;
}

struct IterateRecord {
    double beta, h, loglik, score_inf;
};

enum class SolveStatus { Converged, LineSearchFailed, MaxIterExceeded };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::LineSearchFailed: return "line-search-failed";
        case SolveStatus::MaxIterExceeded: return "max-iter-exceeded";
    }
    return "?";
}

struct EstimationReport {
    double beta_hat = 0.0;
    double h_hat = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_score_norm = 0.0;
    double final_t_tilde = 0.0;
    SolveStatus status = SolveStatus::MaxIterExceeded;
    bool existence_verified = false;
    bool degenerate_fallback_used = false;
    std::vector<IterateRecord> trace;
};

struct NewtonOptions {
    ModelParams init{0.0, 0.0};
    double tol = 1e-10;  // stop when ||(S,Q)||_inf <= tol * n
    int max_iters = 200;
    bool force = false;  // solve even without an existence witness
};

// Joint MPLE by damped Newton ascent on the strictly concave L. Direction
// H^{-1}(S,Q) with backtracking line search (Armijo 1e-4); falls back to plain
// gradient ascent when the Hessian is numerically singular
// (t_tilde < 1e-12 (1 + T_N)). Throws NonExistenceError unless opts.force.
inline EstimationReport mple_newton(const SpinConfiguration& sigma, const LocalFields& fields,
                                    NewtonOptions opts = {}) {
    require_same_size(sigma.size(), fields.size(), "mple_newton");
    const std::size_t n = sigma.size();
    const ExistenceWitness witness = existence_check(sigma, fields);
    if (!witness.exists && !opts.force)
        throw NonExistenceError("MPLE existence witness not found: " + witness.reason);

    EstimationReport rep;
    rep.existence_verified = witness.exists;
    const double stop = opts.tol * static_cast<double>(n);
    const double t_n = t_stat(fields);

    double beta = opts.init.beta, h = opts.init.h;
    double loglik = pseudo_loglik({beta, h}, sigma, fields);
    Score sc = score({beta, h}, sigma, fields);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const HessianSummary hess = neg_hessian({beta, h}, fields);
        rep.trace.push_back({beta, h, loglik, sc.inf_norm()});
        rep.iterations = iter;
        if (sc.inf_norm() <= stop) {
            rep.status = SolveStatus::Converged;
            rep.converged = hess.det() > 0.0 && hess.trace() > 0.0;
            break;
        }

        double db, dh;
        const double tt = hess.t_tilde();
        if (tt < 1e-12 * (1.0 + t_n)) {
            db = sc.s;  // gradient ascent fallback
            dh = sc.q;
            rep.degenerate_fallback_used = true;
        } else {
            const double det = hess.det();
            db = (hess.s_theta * sc.s - hess.s_theta_m * sc.q) / det;
            dh = (-hess.s_theta_m * sc.s + hess.s_theta_m2 * sc.q) / det;
        }
        const double slope = sc.s * db + sc.q * dh;  // > 0 for an ascent direction

        double step = 1.0;
        bool accepted = false;
        for (int half = 0; half <= 30; ++half, step *= 0.5) {
            const double nb = beta + step * db, nh = h + step * dh;
            const double nl = pseudo_loglik({nb, nh}, sigma, fields);
            const double gain = 1e-4 * step * slope;
            bool take = nl >= loglik + gain;
            if (!take && gain <= 1e-12 * (1.0 + std::abs(loglik))) {
                // Armijo term below ulp(L): L cannot certify progress any
                // more, but the score still contracts quadratically. Accept
                // on strict score-norm decrease instead.
                const Score nsc = score({nb, nh}, sigma, fields);
                take = nsc.inf_norm() < sc.inf_norm();
            }
            if (take) {
                beta = nb;
                h = nh;
                loglik = nl;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            rep.status = SolveStatus::LineSearchFailed;
            rep.iterations = iter + 1;
            break;
        }
        sc = score({beta, h}, sigma, fields);
        if (iter + 1 == opts.max_iters) {
            rep.status = SolveStatus::MaxIterExceeded;
            rep.iterations = iter + 1;
            rep.trace.push_back({beta, h, loglik, sc.inf_norm()});
        }
    }

    rep.beta_hat = beta;
    rep.h_hat = h;
    rep.final_score_norm = sc.inf_norm();
    rep.final_t_tilde = t_tilde({beta, h}, fields);
    return rep;
}

struct GridBox {
    double beta_lo, beta_hi, h_lo, h_hi;
};

struct GridSearchResult {
    ModelParams argmax;
    double value = 0.0;
    bool on_boundary = false;
};

// Exhaustive argmax of L over the grid; ties broken by the smallest (beta, h).
// Row-parallel with a deterministic reduction.
inline GridSearchResult mple_grid_oracle(const SpinConfiguration& sigma, const LocalFields& fields,
                                         GridBox box, double resolution, int threads = 1) {
    require_same_size(sigma.size(), fields.size(), "mple_grid_oracle");
    if (!(resolution > 0.0) || !(box.beta_hi >= box.beta_lo) || !(box.h_hi >= box.h_lo) ||
        !std::isfinite(box.beta_lo) || !std::isfinite(box.beta_hi) || !std::isfinite(box.h_lo) ||
        !std::isfinite(box.h_hi))
        throw ConfigError("mple_grid_oracle: bad box or resolution");
    const long nb = static_cast<long>(std::floor((box.beta_hi - box.beta_lo) / resolution + 1e-9)) + 1;
    const long nh = static_cast<long>(std::floor((box.h_hi - box.h_lo) / resolution + 1e-9)) + 1;

    struct RowBest {
        double value;
        long h_index;
    };
    std::vector<RowBest> rows(static_cast<std::size_t>(nb));
    parallel_for(nb, threads, [&](std::int64_t bi) {
        const double beta = box.beta_lo + static_cast<double>(bi) * resolution;
        RowBest best{-std::numeric_limits<double>::infinity(), 0};
        for (long hi = 0; hi < nh; ++hi) {
            const double h = box.h_lo + static_cast<double>(hi) * resolution;
            const double l = pseudo_loglik({beta, h}, sigma, fields);
            if (l > best.value) best = {l, hi};  // first max kept => smallest h on ties
        }
        rows[static_cast<std::size_t>(bi)] = best;
    });
    long best_b = 0, best_h = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (long bi = 0; bi < nb; ++bi)
        if (rows[static_cast<std::size_t>(bi)].value > best_v) {
            best_v = rows[static_cast<std::size_t>(bi)].value;
            best_b = bi;
            best_h = rows[static_cast<std::size_t>(bi)].h_index;
        }
    GridSearchResult res;
    res.argmax = {box.beta_lo + static_cast<double>(best_b) * resolution,
                  box.h_lo + static_cast<double>(best_h) * resolution};
    res.value = best_v;
    res.on_boundary = best_b == 0 || best_b == nb - 1 || best_h == 0 || best_h == nh - 1;
    return res;
}

}  // namespace spinglass
