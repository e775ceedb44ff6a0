#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "spinglass/coupling.hpp"
#include "spinglass/estimator.hpp"
#include "spinglass/graph.hpp"
#include "spinglass/model.hpp"
#include "spinglass/parallel.hpp"
#include "spinglass/sampler.hpp"

namespace spinglass {

struct NormCheck {
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
    bool converged = false;
};

// Condition (i): bounded operator norm. Default threshold 4.0.
inline NormCheck check_operator_norm(const CouplingMatrix& jm, double threshold = 4.0,
                                     double tol = 1e-8, int max_iters = 10000,
                                     std::uint64_t seed = 0) {
    if (!(threshold > 0.0)) throw ConfigError("check_operator_norm: threshold must be positive");
    const NormEstimate est = operator_norm(jm, tol, max_iters, seed);
    return {est.value, threshold, est.value <= threshold, est.converged};
}

inline constexpr int kBruteForceCap = 14;

struct BruteForceMin {
    double min_value = 0.0;
    SpinConfiguration argmin;
};

namespace detail {

inline double t_tilde_of_mask(const CouplingMatrix& jm, ModelParams p, std::uint32_t mask) {
    const SpinConfiguration sigma = spins_from_mask(mask, jm.n);
    return t_tilde(p, matvec(jm, sigma));
}

}  // namespace detail

// Exact min over the discrete cube of T~_N(beta, h | sigma); n <= 14. For
// h = 0, theta is even in the fields and T~(sigma) = T~(-sigma), so only the
// half-cube with the top spin fixed is scanned. Deterministic reduction:
// smallest value, ties by smallest bitmask.
inline BruteForceMin t_tilde_min_bruteforce(const CouplingMatrix& jm, ModelParams p, int threads = 1) {
    if (jm.n > kBruteForceCap)
        throw TooLargeError("brute-force scan capped at n = " + std::to_string(kBruteForceCap));
    if (jm.n < 1) throw InvalidSizeError("t_tilde_min_bruteforce: empty system");
    const bool half_cube = p.h == 0.0 && jm.n >= 2;
    const std::uint32_t states = 1u << (half_cube ? jm.n - 1 : jm.n);

    const int nthreads = resolve_threads(threads);
    const std::uint32_t chunks = std::min<std::uint32_t>(states, static_cast<std::uint32_t>(nthreads) * 8);
    const std::uint32_t per = (states + chunks - 1) / chunks;
    struct Local {
        double value = std::numeric_limits<double>::infinity();
        std::uint32_t mask = 0;
    };
    std::vector<Local> best(chunks);
    parallel_for(chunks, nthreads, [&](std::int64_t c) {
        const std::uint32_t lo = static_cast<std::uint32_t>(c) * per;
        const std::uint32_t hi = std::min(states, lo + per);
        Local loc;
        for (std::uint32_t mask = lo; mask < hi; ++mask) {
            const double v = detail::t_tilde_of_mask(jm, p, mask);
            if (v < loc.value || (v == loc.value && mask < loc.mask)) loc = {v, mask};
        }
        best[static_cast<std::size_t>(c)] = loc;
    });
    Local global;
    for (const auto& loc : best)
        if (loc.value < global.value || (loc.value == global.value && loc.mask < global.mask))
            global = loc;
    return {global.value, spins_from_mask(global.mask, jm.n)};
}

// Sampled surrogate for the brute-force minimum: num_configs uniform draws
// plus the adversarial all-equal and alternating patterns, always included.
// Lower bound only in probability.
inline double t_tilde_min_sampled(const CouplingMatrix& jm, ModelParams p, int num_configs,
                                  std::uint64_t seed, int threads = 1) {
    if (num_configs < 1) throw ConfigError("t_tilde_min_sampled: need num_configs >= 1");
    const int n = jm.n;
    std::vector<SpinConfiguration> fixed;
    fixed.push_back(SpinConfiguration(static_cast<std::size_t>(n), 1));
    fixed.push_back(SpinConfiguration(static_cast<std::size_t>(n), -1));
    SpinConfiguration alt(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) alt[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1 : -1;
    fixed.push_back(alt);
    for (auto& s : alt) s = static_cast<std::int8_t>(-s);
    fixed.push_back(alt);

    const std::int64_t total = static_cast<std::int64_t>(fixed.size()) + num_configs;
    std::vector<double> values(static_cast<std::size_t>(total));
    parallel_for(total, threads, [&](std::int64_t c) {
        SpinConfiguration sigma;
        if (c < static_cast<std::int64_t>(fixed.size())) {
            sigma = fixed[static_cast<std::size_t>(c)];
        } else {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c - fixed.size())));
            sigma.resize(static_cast<std::size_t>(n));
            for (auto& s : sigma) s = static_cast<std::int8_t>(rng.rademacher());
        }
        values[static_cast<std::size_t>(c)] = t_tilde(p, matvec(jm, sigma));
    });
    return *std::min_element(values.begin(), values.end());
}

struct ScoreMoments {
    double s2_over_n = 0.0;
    double q2_over_n = 0.0;
};

// Monte Carlo <S^2>/n and <Q^2>/n at the sampling parameters, over independent
// Gibbs replicates (seed mixed per replicate).
inline ScoreMoments score_moment_check(const CouplingMatrix& jm, ModelParams p, int num_samples,
                                       std::uint64_t seed, int threads = 1, int burnin = -1) {
    if (num_samples < 2) throw ConfigError("score_moment_check: need num_samples >= 2");
    const int sweeps = burnin > 0 ? burnin : default_burnin(jm.n);
    std::vector<double> s2(static_cast<std::size_t>(num_samples)), q2(static_cast<std::size_t>(num_samples));
    parallel_for(num_samples, threads, [&](std::int64_t r) {
        const SpinConfiguration sigma = sample_gibbs(jm, p, sweeps, mix_seed(seed, static_cast<std::uint64_t>(r)));
        const Score sc = score(p, sigma, matvec(jm, sigma));
        s2[static_cast<std::size_t>(r)] = sc.s * sc.s;
        q2[static_cast<std::size_t>(r)] = sc.q * sc.q;
    });
    double ms = 0.0, mq = 0.0;
    for (int r = 0; r < num_samples; ++r) {
        ms += s2[static_cast<std::size_t>(r)];
        mq += q2[static_cast<std::size_t>(r)];
    }
    const double denom = static_cast<double>(num_samples) * static_cast<double>(jm.n);
    return {ms / denom, mq / denom};
}

// |{ i in T : |m_i| <= cap_m }| / |T|.
inline double bounded_fields_fraction(const LocalFields& fields, const VertexSubset& t, double cap_m) {
    if (t.members.empty()) throw InvalidSizeError("bounded_fields_fraction: empty subset");
    std::size_t count = 0;
    for (const int v : t.members)
        if (std::abs(fields.m[static_cast<std::size_t>(v)]) <= cap_m) ++count;
    return static_cast<double>(count) / static_cast<double>(t.members.size());
}

// min over gamma in the grid of sqrt( sum of the ceil(|T|/2) smallest
// (m_i - gamma)^2 ), normalized by sqrt(n). Realizes the min over subsets
// A of T with |A| >= |T|/2 of ||m_A - gamma 1_A||_2 / sqrt(n).
inline double trimmed_smallball(const LocalFields& fields, const VertexSubset& t, double gamma_lo,
                                double gamma_hi, double gamma_step) {
    if (t.members.empty()) throw InvalidSizeError("trimmed_smallball: empty subset");
    if (!(gamma_step > 0.0) || gamma_hi < gamma_lo) throw ConfigError("trimmed_smallball: bad gamma grid");
    const std::size_t keep = (t.members.size() + 1) / 2;
    std::vector<double> sq(t.members.size());
    double best = std::numeric_limits<double>::infinity();
    const long steps = static_cast<long>(std::floor((gamma_hi - gamma_lo) / gamma_step + 1e-9));
    for (long g = 0; g <= steps; ++g) {
        const double gamma = gamma_lo + static_cast<double>(g) * gamma_step;
        for (std::size_t k = 0; k < t.members.size(); ++k) {
            const double d = fields.m[static_cast<std::size_t>(t.members[k])] - gamma;
            sq[k] = d * d;
        }
        std::nth_element(sq.begin(), sq.begin() + static_cast<long>(keep) - 1, sq.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < keep; ++k) sum += sq[k];
        best = std::min(best, sum);
    }
    return std::sqrt(best) / std::sqrt(static_cast<double>(t.parent_n));
}

struct RestrictedVariability {
    double cap_m = std::numeric_limits<double>::infinity();
    double restricted_sum = 0.0;  // (1/n^2) sum_{i,j in I_M} (m_i - m_j)^2
    bool achieved = false;
};

// Doubling search over M in {1, 2, 4, ..., 1024} for the smallest M whose
// restricted pair-sum reaches c/2. Sentinel M = inf with the full T_N when
// no tested M works.
inline RestrictedVariability restricted_variability(const LocalFields& fields, double c) {
    const std::size_t n = fields.size();
    if (n == 0) throw InvalidSizeError("restricted_variability: empty fields");
    for (double cap = 1.0; cap <= 1024.0; cap *= 2.0) {
        double sum = 0.0, sum2 = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = fields.m[i];
            if (std::abs(m) <= cap) {
                sum += m;
                sum2 += m * m;
                ++count;
            }
        }
        // sum_{i,j in I} (m_i - m_j)^2 = 2|I| sum m^2 - 2 (sum m)^2
        const double pair_sum = (2.0 * static_cast<double>(count) * sum2 - 2.0 * sum * sum) /
                                (static_cast<double>(n) * static_cast<double>(n));
        if (pair_sum >= c / 2.0) return {cap, pair_sum, true};
    }
    return {std::numeric_limits<double>::infinity(), t_stat(fields), false};
}

struct FieldSplit {
    int r = 0;
    long count_left = 0;   // |{ i : m_i in [-K, (r-1) delta] }|
    long count_right = 0;  // |{ i : m_i in [r delta, K] }|
};

// First integer r (by |r| ascending, positive first on ties) whose two
// intervals [-K, (r-1)d] and [rd, K] both hold at least eps*n fields. Both
// intervals are kept inside [-K, K].
inline std::optional<FieldSplit> field_split(const LocalFields& fields, double cap_k, double delta,
                                             double eps) {
    if (!(cap_k > 0.0) || !(delta > 0.0) || !(eps > 0.0))
        throw ConfigError("field_split: cap_k, delta, eps must be positive");
    const double need = eps * static_cast<double>(fields.size());
    const int r_max = static_cast<int>(std::floor(cap_k / delta));
    auto count_in = [&](double lo, double hi) {
        long c = 0;
        for (const double m : fields.m)
            if (m >= lo && m <= hi) ++c;
        return c;
    };
    auto try_r = [&](int r) -> std::optional<FieldSplit> {
        const double left_hi = (static_cast<double>(r) - 1.0) * delta;
        const double right_lo = static_cast<double>(r) * delta;
        if (left_hi < -cap_k || right_lo > cap_k) return std::nullopt;
        const long cl = count_in(-cap_k, left_hi);
        const long cr = count_in(right_lo, cap_k);
        if (static_cast<double>(cl) >= need && static_cast<double>(cr) >= need)
            return FieldSplit{r, cl, cr};
        return std::nullopt;
    };
    for (int a = 0; a <= r_max; ++a) {
        if (auto hit = try_r(a)) return hit;
        if (a > 0)
            if (auto hit = try_r(-a)) return hit;
    }
    return std::nullopt;
}

// lambda_1(H) >= det H / trace H for the PSD 2x2 negative Hessian; 0 when the
// trace vanishes.
inline double min_eig_lower_bound(const HessianSummary& hess) {
    const double tr = hess.trace();
    if (tr == 0.0) return 0.0;
    return hess.det() / tr;
}

inline double min_eig_lower_bound(ModelParams p, const LocalFields& fields) {
    return min_eig_lower_bound(neg_hessian(p, fields));
}

// Bundle of runnable checks on one (J, beta, h) instance: condition (i)
// (operator norm), condition (ii) surrogate (T~ minimum: exact for n <= 14,
// sampled otherwise), witness prevalence, and score second moments. All
// thresholds overridable; the pass flags are pure functions of the numbers.
struct ConditionOptions {
    double jnorm_threshold = 4.0;
    double jnorm_tol = 1e-7;
    int jnorm_max_iters = 2000;
    double t_tilde_threshold = 1e-3;
    double existence_threshold = 0.95;
    double score_cap = 10.0;
    int replicates = 20;        // Gibbs samples for T~, existence, score moments
    int sampled_configs = 10000;  // random sigmas in the sampled minimum
    int burnin = -1;            // -1: default rule
    std::uint64_t seed = 1;
    int threads = 0;            // 0: resolve from env/cores
};

struct ConditionReport {
    int n = 0;
    double beta = 0.0, h = 0.0;
    double j_norm = 0.0;
    double j_norm_threshold = 4.0;
    bool j_norm_converged = false;
    bool j_norm_passed = false;
    double t_tilde_sample = 0.0;             // median realized T~ over replicates
    std::vector<double> t_tilde_samples;     // per replicate
    double t_tilde_min = 0.0;
    bool t_tilde_min_exact = false;
    double t_tilde_threshold = 0.0;
    bool t_tilde_passed = false;
    double existence_fraction = 0.0;
    double existence_threshold = 0.0;
    bool existence_passed = false;
    double score_moment_s = 0.0;
    double score_moment_q = 0.0;
    double score_cap = 0.0;
    bool score_passed = false;
    int replicates = 0;
    int sampled_configs = 0;
    std::uint64_t seed = 0;
    bool all_passed = false;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

inline ConditionReport run_condition_checks(const CouplingMatrix& jm, ModelParams p,
                                            const ConditionOptions& opt = {}) {
    if (opt.replicates < 1) throw ConfigError("run_condition_checks: need replicates >= 1");
    ConditionReport rep;
    rep.n = jm.n;
    rep.beta = p.beta;
    rep.h = p.h;
    rep.seed = opt.seed;
    rep.replicates = opt.replicates;
    rep.sampled_configs = opt.sampled_configs;

    const NormCheck nc = check_operator_norm(jm, opt.jnorm_threshold, opt.jnorm_tol,
                                             opt.jnorm_max_iters, mix_seed(opt.seed, 0));
    rep.j_norm = nc.value;
    rep.j_norm_threshold = nc.threshold;
    rep.j_norm_converged = nc.converged;
    rep.j_norm_passed = nc.passed;

    const int sweeps = opt.burnin > 0 ? opt.burnin : default_burnin(jm.n);
    std::vector<double> tts(static_cast<std::size_t>(opt.replicates));
    std::vector<char> witness(static_cast<std::size_t>(opt.replicates), 0);
    std::vector<double> s2(static_cast<std::size_t>(opt.replicates)), q2(static_cast<std::size_t>(opt.replicates));
    parallel_for(opt.replicates, opt.threads, [&](std::int64_t r) {
        const SpinConfiguration sigma =
            sample_gibbs(jm, p, sweeps, mix_seed(opt.seed, 1000 + static_cast<std::uint64_t>(r)));
        const LocalFields fields = matvec(jm, sigma);
        tts[static_cast<std::size_t>(r)] = t_tilde(p, fields);
        witness[static_cast<std::size_t>(r)] = existence_check(sigma, fields).exists ? 1 : 0;
        const Score sc = score(p, sigma, fields);
        s2[static_cast<std::size_t>(r)] = sc.s * sc.s;
        q2[static_cast<std::size_t>(r)] = sc.q * sc.q;
    });
    rep.t_tilde_samples = tts;
    rep.t_tilde_sample = median_of(tts);
    std::size_t hits = 0;
    double ms = 0.0, mq = 0.0;
    for (int r = 0; r < opt.replicates; ++r) {
        hits += witness[static_cast<std::size_t>(r)] ? 1u : 0u;
        ms += s2[static_cast<std::size_t>(r)];
        mq += q2[static_cast<std::size_t>(r)];
    }
    rep.existence_fraction = static_cast<double>(hits) / static_cast<double>(opt.replicates);
    const double denom = static_cast<double>(opt.replicates) * static_cast<double>(jm.n);
    rep.score_moment_s = ms / denom;
    rep.score_moment_q = mq / denom;

    double min_tt;
    if (jm.n <= kBruteForceCap) {
        min_tt = t_tilde_min_bruteforce(jm, p, opt.threads).min_value;
        rep.t_tilde_min_exact = true;
    } else {
        min_tt = t_tilde_min_sampled(jm, p, opt.sampled_configs, mix_seed(opt.seed, 2), opt.threads);
        // Keep min <= every reported sample by folding the replicates in.
        for (const double tt : tts) min_tt = std::min(min_tt, tt);
    }
    rep.t_tilde_min = min_tt;

    rep.t_tilde_threshold = opt.t_tilde_threshold;
    rep.existence_threshold = opt.existence_threshold;
    rep.score_cap = opt.score_cap;
    rep.t_tilde_passed = rep.t_tilde_min >= opt.t_tilde_threshold;
    rep.existence_passed = rep.existence_fraction >= opt.existence_threshold;
    rep.score_passed = rep.score_moment_s <= opt.score_cap && rep.score_moment_q <= opt.score_cap;
    rep.all_passed = rep.j_norm_passed && rep.t_tilde_passed && rep.existence_passed && rep.score_passed;
    return rep;
}

inline nlohmann::json to_json(const ConditionReport& r) {
    return nlohmann::json{{"n", r.n},
                          {"beta", r.beta},
                          {"h", r.h},
                          {"j_norm", r.j_norm},
                          {"j_norm_threshold", r.j_norm_threshold},
                          {"j_norm_converged", r.j_norm_converged},
                          {"j_norm_passed", r.j_norm_passed},
                          {"t_tilde_sample", r.t_tilde_sample},
                          {"t_tilde_samples", r.t_tilde_samples},
                          {"t_tilde_min", r.t_tilde_min},
                          {"t_tilde_min_exact", r.t_tilde_min_exact},
                          {"t_tilde_threshold", r.t_tilde_threshold},
                          {"t_tilde_passed", r.t_tilde_passed},
                          {"existence_fraction", r.existence_fraction},
                          {"existence_threshold", r.existence_threshold},
                          {"existence_passed", r.existence_passed},
                          {"score_moment_s", r.score_moment_s},
                          {"score_moment_q", r.score_moment_q},
                          {"score_cap", r.score_cap},
                          {"score_passed", r.score_passed},
                          {"replicates", r.replicates},
                          {"sampled_configs", r.sampled_configs},
                          {"seed", r.seed},
                          {"all_passed", r.all_passed}};
}

}  // namespace spinglass
