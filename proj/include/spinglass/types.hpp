#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "spinglass/errors.hpp"

namespace spinglass {

// +-1 valued spins. int8_t keeps Glauber sweeps cache-friendly.
using SpinConfiguration = std::vector<std::int8_t>;

inline bool is_spin_configuration(const SpinConfiguration& sigma) {
    for (const auto s : sigma)
        if (s != 1 && s != -1) return false;
    return !sigma.empty();
}

struct ModelParams {
    double beta = 0.0;
    double h = 0.0;
};

// Local fields m_i = sum_j J_ij sigma_j together with a cached mean. The mean
// is maintained incrementally during sampling and refreshed from scratch every
// kMeanRefreshInterval increments to bound drift.
class LocalFields {
public:
    static constexpr int kMeanRefreshInterval = 1024;

    LocalFields() = default;
    explicit LocalFields(std::vector<double> values) : m(std::move(values)) { refresh_mean(); }

    std::vector<double> m;

    std::size_t size() const { return m.size(); }
    double operator[](std::size_t i) const { return m[i]; }

    double mean() const { return mean_; }

    void refresh_mean() {
        double s = 0.0;
        for (const double v : m) s += v;
        mean_ = m.empty() ? 0.0 : s / static_cast<double>(m.size());
        increments_ = 0;
    }

    // Caller has already applied the per-entry updates; mean_delta is the
    // induced change of the average.
    void note_increment(double mean_delta) {
        mean_ += mean_delta;
        if (++increments_ >= kMeanRefreshInterval) refresh_mean();
    }

private:
    double mean_ = 0.0;
    int increments_ = 0;
};

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DimensionMismatchError(std::string(what) + ": size mismatch");
}

}  // namespace spinglass
