#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spinglass/coupling.hpp"
#include "spinglass/errors.hpp"
#include "spinglass/model.hpp"
#include "spinglass/rng.hpp"
#include "spinglass/types.hpp"

namespace spinglass {

// Full Gibbs law on {-1,+1}^n, tabulated by spin bitmask (bit i set => sigma_i = +1).
struct ExactDistribution {
    int n = 0;
    std::vector<double> probs;   // size 2^n, sums to 1
    double log_partition = 0.0;  // log Z
};

inline constexpr int kExactEnumerationCap = 20;

inline SpinConfiguration spins_from_mask(std::uint32_t mask, int n) {
    SpinConfiguration sigma(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sigma[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? 1 : -1;
    return sigma;
}

inline std::uint32_t mask_from_spins(const SpinConfiguration& sigma) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        if (sigma[i] > 0) mask |= 1u << i;
    return mask;
}

// Tabulates exp(beta <J sigma, sigma>/2 + h <sigma, 1>)/Z over all 2^n states.
// Gray-code walk keeps the energy update O(degree) per state.
inline ExactDistribution exact_enumerate(const CouplingMatrix& jm, ModelParams p) {
    if (jm.n > kExactEnumerationCap)
        throw TooLargeError("exact enumeration capped at n = " + std::to_string(kExactEnumerationCap));
    const int n = jm.n;
    const std::uint32_t states = 1u << n;

    ExactDistribution dist;
    dist.n = n;
    std::vector<double> logw(states);

    SpinConfiguration sigma(static_cast<std::size_t>(n), -1);  // mask 0
    LocalFields fields = matvec(jm, sigma);
    // energy = sum_{i<j} J_ij sigma_i sigma_j = <J sigma, sigma>/2
    double energy = 0.0;
    for (int i = 0; i < n; ++i) energy += 0.5 * fields.m[static_cast<std::size_t>(i)] * sigma[static_cast<std::size_t>(i)];
    double mag = -static_cast<double>(n);

    std::uint32_t gray = 0;
    for (std::uint32_t k = 0;; ++k) {
        logw[gray] = p.beta * energy + p.h * mag;
        if (k + 1 == states) break;
        const int b = std::countr_zero(k + 1);  // bit flipped between gray(k) and gray(k+1)
        const double old_s = sigma[static_cast<std::size_t>(b)];
        energy += -2.0 * old_s * fields.m[static_cast<std::size_t>(b)];
        mag += -2.0 * old_s;
        sigma[static_cast<std::size_t>(b)] = static_cast<std::int8_t>(-old_s);
        for (int kk = jm.row_ptr[static_cast<std::size_t>(b)]; kk < jm.row_ptr[static_cast<std::size_t>(b) + 1]; ++kk)
            fields.m[static_cast<std::size_t>(jm.col_idx[static_cast<std::size_t>(kk)])] +=
                -2.0 * old_s * jm.values[static_cast<std::size_t>(kk)];
        gray ^= 1u << b;
    }

    const double lmax = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (const double lw : logw) z += std::exp(lw - lmax);
    dist.log_partition = lmax + std::log(z);
    dist.probs.resize(states);
    for (std::uint32_t s = 0; s < states; ++s) dist.probs[s] = std::exp(logw[s] - dist.log_partition);
    return dist;
}

// Inverse-CDF draw over the tabulated law.
inline SpinConfiguration exact_sample(const ExactDistribution& dist, std::uint64_t seed) {
    Rng rng(seed);
    const double u = rng.uniform();
    double cum = 0.0;
    const std::uint32_t states = static_cast<std::uint32_t>(dist.probs.size());
    for (std::uint32_t s = 0; s < states; ++s) {
        cum += dist.probs[s];
        if (u < cum) return spins_from_mask(s, dist.n);
    }
    return spins_from_mask(states - 1, dist.n);  // u landed in the rounding tail
}

// (1/n) log Z.
inline double free_energy_exact(const CouplingMatrix& jm, ModelParams p) {
    return exact_enumerate(jm, p).log_partition / static_cast<double>(jm.n);
}

// One Glauber chain: spins plus incrementally maintained local fields. The
// fields are revalidated against a fresh matvec every kRevalidateInterval
// sweeps (and the accumulated drift discarded).
struct ChainState {
    SpinConfiguration sigma;
    LocalFields fields;
    long sweep_count = 0;

    static constexpr long kRevalidateInterval = 4096;
    static constexpr double kRevalidateTol = 1e-9;
};

inline ChainState make_chain(const CouplingMatrix& jm, Rng& rng) {
    ChainState st;
    st.sigma.resize(static_cast<std::size_t>(jm.n));
    for (auto& s : st.sigma) s = static_cast<std::int8_t>(rng.rademacher());
    st.fields = matvec(jm, st.sigma);
    return st;
}

inline double logistic_clamped(double two_x) {
    const double a = std::clamp(two_x, -700.0, 700.0);
    return 1.0 / (1.0 + std::exp(-a));
}

// One systematic sweep i = 0..n-1 of heat-bath (Glauber) updates:
// sigma_i <- +1 with probability 1/(1+e^{-2(beta m_i + h)}). J_ii = 0, so m_i
// never contains the site's own spin. Detailed balance holds per site.
inline void glauber_sweep(ChainState& st, const CouplingMatrix& jm, ModelParams p, Rng& rng) {
    const int n = jm.n;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
        const double x = p.beta * st.fields.m[static_cast<std::size_t>(i)] + p.h;
        const double p_up = logistic_clamped(2.0 * x);
        const std::int8_t next = rng.uniform() < p_up ? std::int8_t{1} : std::int8_t{-1};
        if (next != st.sigma[static_cast<std::size_t>(i)]) {
            const double delta = 2.0 * static_cast<double>(next);  // next - old
            st.sigma[static_cast<std::size_t>(i)] = next;
            for (int k = jm.row_ptr[static_cast<std::size_t>(i)]; k < jm.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                st.fields.m[static_cast<std::size_t>(jm.col_idx[static_cast<std::size_t>(k)])] +=
                    jm.values[static_cast<std::size_t>(k)] * delta;
            st.fields.note_increment(delta * jm.row_sums[static_cast<std::size_t>(i)] * inv_n);
        }
    }
    ++st.sweep_count;
    if (st.sweep_count % ChainState::kRevalidateInterval == 0) {
        LocalFields fresh = matvec(jm, st.sigma);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < fresh.size(); ++i)
            max_diff = std::max(max_diff, std::abs(fresh.m[i] - st.fields.m[i]));
        if (max_diff > ChainState::kRevalidateTol)
            throw Error("glauber chain: incremental fields drifted by " + std::to_string(max_diff));
        st.fields = std::move(fresh);
    }
}

inline int default_burnin(int n) {
    const double rule = 50.0 * std::log2(static_cast<double>(std::max(n, 2)));
    return std::max(2000, static_cast<int>(std::ceil(rule)));
}

namespace detail {

// Crude equilibration check: means of the two halves of the magnetization
// trace must agree within 3 pooled standard errors. SEs come from batch means
// (8 batches per half) since successive sweeps are correlated.
inline bool halves_agree(const std::vector<double>& mags) {
    const std::size_t half = mags.size() / 2;
    if (half < 16) return true;  // too short to test
    constexpr std::size_t kBatches = 8;
    auto half_stats = [&](std::size_t begin) {
        const std::size_t per = half / kBatches;
        double batch_means[kBatches];
        for (std::size_t b = 0; b < kBatches; ++b) {
            double s = 0.0;
            for (std::size_t t = 0; t < per; ++t) s += mags[begin + b * per + t];
            batch_means[b] = s / static_cast<double>(per);
        }
        double mean = 0.0;
        for (const double bm : batch_means) mean += bm;
        mean /= static_cast<double>(kBatches);
        double var = 0.0;
        for (const double bm : batch_means) var += (bm - mean) * (bm - mean);
        var /= static_cast<double>(kBatches - 1);
        return std::pair<double, double>{mean, var / static_cast<double>(kBatches)};  // mean, SE^2
    };
    const auto [m1, se2_1] = half_stats(0);
    const auto [m2, se2_2] = half_stats(half);
    const double pooled = std::sqrt(se2_1 + se2_2);
    return std::abs(m1 - m2) <= 3.0 * pooled;
}

}  // namespace detail

// Draws one configuration: random +-1 start, then burn-in sweeps. If the
// halves of the magnetization trace disagree (see above), the burn-in is
// doubled, up to 3 times. Deterministic per (inputs, seed).
inline SpinConfiguration sample_gibbs(const CouplingMatrix& jm, ModelParams p, int burnin_sweeps,
                                      std::uint64_t seed) {
    if (burnin_sweeps < 1) throw ConfigError("sample_gibbs: burn-in must be >= 1");
    Rng rng(seed);
    ChainState st = make_chain(jm, rng);
    const double inv_n = 1.0 / static_cast<double>(jm.n);
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(burnin_sweeps));
    auto run = [&](int sweeps) {
        for (int t = 0; t < sweeps; ++t) {
            glauber_sweep(st, jm, p, rng);
            double mag = 0.0;
            for (const auto s : st.sigma) mag += static_cast<double>(s);
            mags.push_back(mag * inv_n);
        }
    };
    run(burnin_sweeps);
    for (int doubling = 0; doubling < 3 && !detail::halves_agree(mags); ++doubling)
        run(static_cast<int>(mags.size()));  // double the total
    return st.sigma;
}

}  // namespace spinglass
