#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "spinglass/errors.hpp"
#include "spinglass/graph.hpp"
#include "spinglass/rng.hpp"
#include "spinglass/types.hpp"

namespace spinglass {

// Edge-weight distributions. All are centered with unit variance and finite
// third absolute moment E|g|^3:
//   standard gaussian   2*sqrt(2/pi) ~= 1.5957691216057308
//   rademacher          1
//   uniform[-s3, s3]    3*sqrt(3)/4  ~= 1.2990381056766580
enum class DisorderFamily { StandardGaussian, Rademacher, CenteredUniform };

struct DisorderSpec {
    DisorderFamily family = DisorderFamily::StandardGaussian;

    double third_abs_moment() const {
        switch (family) {
            case DisorderFamily::StandardGaussian: return 2.0 * std::sqrt(2.0 / 3.14159265358979323846);
            case DisorderFamily::Rademacher: return 1.0;
            case DisorderFamily::CenteredUniform: return 3.0 * std::sqrt(3.0) / 4.0;
        }
        return 0.0;
    }

    double draw(Rng& rng) const {
        switch (family) {
            case DisorderFamily::StandardGaussian: return rng.normal();
            case DisorderFamily::Rademacher: return static_cast<double>(rng.rademacher());
            case DisorderFamily::CenteredUniform: {
                const double s3 = 1.7320508075688772935;  // sqrt(3)
                return (2.0 * rng.uniform() - 1.0) * s3;
            }
        }
        return 0.0;
    }
};

inline const char* to_string(DisorderFamily f) {
    switch (f) {
        case DisorderFamily::StandardGaussian: return "gaussian";
        case DisorderFamily::Rademacher: return "rademacher";
        case DisorderFamily::CenteredUniform: return "uniform";
    }
    return "?";
}

inline DisorderFamily parse_disorder(const std::string& name) {
    if (name == "gaussian" || name == "standard-gaussian") return DisorderFamily::StandardGaussian;
    if (name == "rademacher") return DisorderFamily::Rademacher;
    if (name == "uniform" || name == "centered-uniform") return DisorderFamily::CenteredUniform;
    throw ConfigError("unknown disorder family: " + name);
}

struct CouplingEntry {
    int i, j;  // i < j
    double w;
};

// Sparse symmetric coupling matrix with zero diagonal, stored in CSR over the
// full symmetric structure for fast row traversal. Immutable after build.
class CouplingMatrix {
public:
    int n = 0;
    double d_avg = 0.0;  // scaling degree copied from the source graph

    std::vector<int> row_ptr;      // size n+1
    std::vector<int> col_idx;      // size 2|E|
    std::vector<double> values;    // symmetric: value at (i,j) equals (j,i)
    std::vector<double> row_sums;  // sum_j J_ij, used for incremental means

    static CouplingMatrix from_entries(int n, double d_avg, std::vector<CouplingEntry> upper) {
        if (n < 1) throw InvalidSizeError("coupling matrix needs n >= 1");
        for (auto& e : upper) {
            if (e.i == e.j) throw SelfLoopError("diagonal coupling entries must be zero");
            if (e.i > e.j) std::swap(e.i, e.j);
            if (e.i < 0 || e.j >= n) throw ParseError("coupling entry out of range");
        }
        std::sort(upper.begin(), upper.end(),
                  [](const CouplingEntry& a, const CouplingEntry& b) {
                      return std::tie(a.i, a.j) < std::tie(b.i, b.j);
                  });
        for (std::size_t k = 1; k < upper.size(); ++k)
            if (upper[k].i == upper[k - 1].i && upper[k].j == upper[k - 1].j)
                throw DuplicateEdgeError("duplicate coupling entry");

        CouplingMatrix m;
        m.n = n;
        m.d_avg = d_avg;
        std::vector<int> counts(static_cast<std::size_t>(n), 0);
        for (const auto& e : upper) {
            ++counts[static_cast<std::size_t>(e.i)];
            ++counts[static_cast<std::size_t>(e.j)];
        }
        m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        for (int i = 0; i < n; ++i) m.row_ptr[static_cast<std::size_t>(i) + 1] = m.row_ptr[static_cast<std::size_t>(i)] + counts[static_cast<std::size_t>(i)];
        m.col_idx.assign(static_cast<std::size_t>(m.row_ptr.back()), 0);
        m.values.assign(static_cast<std::size_t>(m.row_ptr.back()), 0.0);
        std::vector<int> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
        for (const auto& e : upper) {
            m.col_idx[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.i)])] = e.j;
            m.values[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.i)]++)] = e.w;
            m.col_idx[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.j)])] = e.i;
            m.values[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.j)]++)] = e.w;
        }
        m.row_sums.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = m.row_ptr[static_cast<std::size_t>(i)]; k < m.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                s += m.values[static_cast<std::size_t>(k)];
            m.row_sums[static_cast<std::size_t>(i)] = s;
        }
        return m;
    }

    std::size_t nnz() const { return values.size(); }          // 2|E|
    std::size_t edge_count() const { return values.size() / 2; }

    double weight(int i, int j) const {
        if (i == j) return 0.0;
        const int lo = row_ptr[static_cast<std::size_t>(i)];
        const int hi = row_ptr[static_cast<std::size_t>(i) + 1];
        const auto begin = col_idx.begin() + lo;
        const auto end = col_idx.begin() + hi;
        const auto it = std::lower_bound(begin, end, j);
        if (it == end || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - col_idx.begin())];
    }

    // Visits each stored entry once, (i, j, w) with i < j, sorted.
    template <typename Fn>
    void for_each_upper(Fn&& fn) const {
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                if (col_idx[static_cast<std::size_t>(k)] > i)
                    fn(i, col_idx[static_cast<std::size_t>(k)], values[static_cast<std::size_t>(k)]);
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        for_each_upper([&](int i, int j, double w) {
            a(i, j) = w;
            a(j, i) = w;
        });
        return a;
    }
};

// J = A (.) G / sqrt(d): one disorder draw per edge, consumed in sorted edge
// order (i < j) so relabeling the input graph cannot silently permute the
// stream; d is the realized average degree of the graph.
inline CouplingMatrix build_coupling(const InteractionGraph& g, DisorderSpec spec, std::uint64_t seed) {
    const double d = g.avg_degree();
    if (!(d > 0.0)) throw DegenerateGraphError("coupling needs average degree > 0");
    const double scale = 1.0 / std::sqrt(d);
    Rng rng(seed);
    std::vector<CouplingEntry> upper;
    upper.reserve(g.edges.size());
    for (const auto& [i, j] : g.edges) upper.push_back({i, j, spec.draw(rng) * scale});
    return CouplingMatrix::from_entries(g.n, d, std::move(upper));
}

// m_i = sum_j J_ij sigma_j over stored nonzeros.
inline LocalFields matvec(const CouplingMatrix& jm, const SpinConfiguration& sigma) {
    require_same_size(static_cast<std::size_t>(jm.n), sigma.size(), "matvec");
    std::vector<double> m(static_cast<std::size_t>(jm.n), 0.0);
    for (int i = 0; i < jm.n; ++i) {
        double acc = 0.0;
        for (int k = jm.row_ptr[static_cast<std::size_t>(i)]; k < jm.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            acc += jm.values[static_cast<std::size_t>(k)] * static_cast<double>(sigma[static_cast<std::size_t>(jm.col_idx[static_cast<std::size_t>(k)])]);
        m[static_cast<std::size_t>(i)] = acc;
    }
    return LocalFields(std::move(m));
}

inline std::vector<double> multiply(const CouplingMatrix& jm, const std::vector<double>& x) {
    std::vector<double> y(static_cast<std::size_t>(jm.n), 0.0);
    for (int i = 0; i < jm.n; ++i) {
        double acc = 0.0;
        for (int k = jm.row_ptr[static_cast<std::size_t>(i)]; k < jm.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            acc += jm.values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(jm.col_idx[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
}

struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Spectral norm by dense symmetric eigendecomposition. Exact up to LAPACK-level
// accuracy; used directly for n <= 512 and as the cross-check oracle elsewhere.
inline double operator_norm_dense(const CouplingMatrix& jm) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jm.dense(), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// ||J||. Power iteration on J^2 (signed spectrum) from a seeded random unit
// start; stops when successive Rayleigh quotients differ by less than tol.
// Small instances (n <= 512) are handled by the dense eigensolver instead.
inline NormEstimate operator_norm(const CouplingMatrix& jm, double tol = 1e-8,
                                  int max_iters = 10000, std::uint64_t seed = 0) {
    if (!(tol > 0.0)) throw ConfigError("operator_norm: tol must be positive");
    if (jm.n <= 512) return {operator_norm_dense(jm), true, 0};

    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(jm.n));
    double norm2 = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;

    double rq_prev = -1.0;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        const std::vector<double> w = multiply(jm, multiply(jm, v));  // J^2 v
        double rq = 0.0, wn2 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            rq += v[i] * w[i];
            wn2 += w[i] * w[i];
        }
        if (wn2 == 0.0) return {0.0, true, iter + 1};  // start was in the kernel
        const double wn = std::sqrt(wn2);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
        if (iter > 0 && std::abs(rq - rq_prev) < tol)
            return {std::sqrt(std::max(rq, 0.0)), true, iter + 1};
        rq_prev = rq;
    }
    return {std::sqrt(std::max(rq_prev, 0.0)), false, iter};
}

namespace detail {

inline std::string format_double(double v, bool hexfloat) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), hexfloat ? "%a" : "%.17g", v);
    return buf;
}

}  // namespace detail

// Coupling file: optional '#' comment lines, then a header "n d_avg", then one
// "i j w" line per stored entry (i < j). Hexfloat output round-trips bit-exactly.
inline void save_coupling(const CouplingMatrix& jm, std::ostream& out, bool hexfloat = false,
                          const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << jm.n << ' ' << detail::format_double(jm.d_avg, hexfloat) << '\n';
    jm.for_each_upper([&](int i, int j, double w) {
        out << i << ' ' << j << ' ' << detail::format_double(w, hexfloat) << '\n';
    });
}

inline CouplingMatrix load_coupling(std::istream& in) {
    std::string line;
    int line_no = 0;
    auto next_content_line = [&](std::string& dst) -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            dst = line;
            return true;
        }
        return false;
    };
    std::string header;
    if (!next_content_line(header)) throw ParseError("coupling file: missing header");
    int n = 0;
    double d_avg = 0.0;
    {
        std::istringstream hs(header);
        std::string dtok;
        if (!(hs >> n >> dtok)) throw ParseError("coupling file: bad header (want \"n d_avg\")");
        char* endp = nullptr;
        d_avg = std::strtod(dtok.c_str(), &endp);  // decimal or hexfloat
        if (endp == dtok.c_str() || *endp != '\0')
            throw ParseError("coupling file: bad d_avg in header");
    }
    std::vector<CouplingEntry> upper;
    std::string body;
    while (next_content_line(body)) {
        std::istringstream ls(body);
        int i, j;
        std::string wtok;
        if (!(ls >> i >> j >> wtok))
            throw ParseError("coupling file line " + std::to_string(line_no) + ": want \"i j w\"");
        char* endp = nullptr;
        const double w = std::strtod(wtok.c_str(), &endp);  // accepts decimal and hexfloat
        if (endp == wtok.c_str() || *endp != '\0')
            throw ParseError("coupling file line " + std::to_string(line_no) + ": bad weight");
        upper.push_back({i, j, w});
    }
    return CouplingMatrix::from_entries(n, d_avg, std::move(upper));
}

}  // namespace spinglass
