#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinglass/coupling.hpp"
#include "spinglass/diagnostics.hpp"
#include "spinglass/estimator.hpp"
#include "spinglass/graph.hpp"
#include "spinglass/parallel.hpp"
#include "spinglass/sampler.hpp"
#include "spinglass/version.hpp"

namespace spinglass {

enum class GraphKind { Complete, ErdosRenyi };

inline const char* to_string(GraphKind k) {
    return k == GraphKind::Complete ? "complete" : "er";
}

inline GraphKind parse_graph_kind(const std::string& s) {
    if (s == "complete") return GraphKind::Complete;
    if (s == "er" || s == "erdos-renyi") return GraphKind::ErdosRenyi;
    throw ConfigError("unknown graph kind: " + s);
}

// Default dilution rule keeps d well above log n.
inline double er_probability_rule(int n) {
    return std::max(0.05, 10.0 * std::log(static_cast<double>(n)) / static_cast<double>(n));
}

struct BenchConfig {
    GraphKind graph = GraphKind::Complete;
    double er_p = -1.0;  // <= 0: use er_probability_rule(n)
    DisorderFamily disorder = DisorderFamily::StandardGaussian;
    double beta0 = 0.5;
    double h0 = 0.3;
    std::vector<int> n_grid;
    int replicates = 50;
    int burnin_override = -1;  // <= 0: default rule
    std::uint64_t master_seed = 1;
    int threads = 0;
    // Per-row ||J|| diagnostic; loose on purpose (see ledger in project notes).
    double jnorm_tol = 1e-5;
    int jnorm_max_iters = 200;

    double p_for(int n) const { return er_p > 0.0 ? er_p : er_probability_rule(n); }

    void validate() const {
        if (!(beta0 > 0.0)) throw ConfigError("bench: beta0 must be > 0");
        if (!std::isfinite(h0)) throw ConfigError("bench: h0 must be finite");
        if (n_grid.empty()) throw ConfigError("bench: empty n grid");
        for (std::size_t k = 0; k < n_grid.size(); ++k) {
            if (n_grid[k] < 32) throw ConfigError("bench: every n must be >= 32");
            if (k > 0 && n_grid[k] <= n_grid[k - 1])
                throw ConfigError("bench: n grid must be strictly increasing");
        }
        if (replicates < 10) throw ConfigError("bench: need at least 10 replicates");
        if (graph == GraphKind::ErdosRenyi && er_p > 1.0)
            throw ConfigError("bench: er_p must be in (0, 1]");
    }
};

inline nlohmann::json to_json(const BenchConfig& cfg) {
    return nlohmann::json{{"graph", to_string(cfg.graph)},
                          {"er_p", cfg.er_p},
                          {"disorder", to_string(cfg.disorder)},
                          {"beta0", cfg.beta0},
                          {"h0", cfg.h0},
                          {"n_grid", cfg.n_grid},
                          {"replicates", cfg.replicates},
                          {"burnin_override", cfg.burnin_override},
                          {"master_seed", cfg.master_seed},
                          {"jnorm_tol", cfg.jnorm_tol},
                          {"jnorm_max_iters", cfg.jnorm_max_iters}};
}

struct BenchRow {
    int n = 0;
    int replicate = 0;
    double beta_hat = std::numeric_limits<double>::quiet_NaN();
    double h_hat = std::numeric_limits<double>::quiet_NaN();
    double err2 = std::numeric_limits<double>::quiet_NaN();
    double t_tilde = std::numeric_limits<double>::quiet_NaN();  // at the ground truth
    double j_norm = std::numeric_limits<double>::quiet_NaN();
    bool exists = false;
    int iters = 0;
    double wall_ms = 0.0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

// Every bit of randomness in a cell flows from this.
inline std::uint64_t bench_cell_seed(std::uint64_t master, int n, int replicate) {
    return mix_seed(mix_seed(master, static_cast<std::uint64_t>(n)),
                    static_cast<std::uint64_t>(replicate));
}

inline BenchRow run_bench_cell(const BenchConfig& cfg, int n, int replicate) {
    const auto t0 = std::chrono::steady_clock::now();
    BenchRow row;
    row.n = n;
    row.replicate = replicate;
    const std::uint64_t cell = bench_cell_seed(cfg.master_seed, n, replicate);
    try {
        const InteractionGraph g = cfg.graph == GraphKind::Complete
                                       ? gen_complete(n)
                                       : gen_erdos_renyi(n, cfg.p_for(n), mix_seed(cell, 1));
        const CouplingMatrix jm = build_coupling(g, {cfg.disorder}, mix_seed(cell, 2));
        const int burnin = cfg.burnin_override > 0 ? cfg.burnin_override : default_burnin(n);
        const SpinConfiguration tau = sample_gibbs(jm, {cfg.beta0, cfg.h0}, burnin, mix_seed(cell, 3));
        const LocalFields fields = matvec(jm, tau);

        row.t_tilde = t_tilde({cfg.beta0, cfg.h0}, fields);
        row.j_norm = operator_norm(jm, cfg.jnorm_tol, cfg.jnorm_max_iters, mix_seed(cell, 4)).value;
        row.exists = existence_check(tau, fields).exists;

        const EstimationReport est = mple_newton(tau, fields);
        row.beta_hat = est.beta_hat;
        row.h_hat = est.h_hat;
        row.err2 = std::hypot(est.beta_hat - cfg.beta0, est.h_hat - cfg.h0);
        row.iters = est.iterations;
        if (!est.converged) row.status = to_string(est.status);
    } catch (const NonExistenceError&) {
        row.status = "nonexistence";
    } catch (const Error& e) {
        row.status = std::string("error: ") + e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

// One row per (n, replicate), deterministic order and (wall time aside)
// deterministic values regardless of the thread count. Cells already present
// in `done` are copied through untouched (resume support).
inline std::vector<BenchRow> run_consistency(const BenchConfig& cfg,
                                             const std::vector<BenchRow>& done = {}) {
    cfg.validate();
    std::map<std::pair<int, int>, const BenchRow*> have;
    for (const auto& r : done) have[{r.n, r.replicate}] = &r;

    struct Cell {
        int n, replicate;
    };
    std::vector<Cell> cells;
    for (const int n : cfg.n_grid)
        for (int r = 0; r < cfg.replicates; ++r) cells.push_back({n, r});

    std::vector<BenchRow> rows(cells.size());
    parallel_for(static_cast<std::int64_t>(cells.size()), cfg.threads, [&](std::int64_t k) {
        const auto [n, rep] = cells[static_cast<std::size_t>(k)];
        const auto it = have.find({n, rep});
        rows[static_cast<std::size_t>(k)] = it != have.end() ? *it->second : run_bench_cell(cfg, n, rep);
    });
    return rows;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    struct PerN {
        int n;
        double median_err2;
        int successes;
    };
    std::vector<PerN> medians;
};

// Least squares of log(median err2) against log n over successful rows.
inline SlopeFit fit_slope(const std::vector<BenchRow>& rows) {
    std::map<int, std::vector<double>> per_n;
    for (const auto& r : rows)
        if (r.ok() && std::isfinite(r.err2)) per_n[r.n].push_back(r.err2);

    SlopeFit fit;
    for (auto& [n, errs] : per_n)
        if (errs.size() >= 10)
            fit.medians.push_back({n, median_of(errs), static_cast<int>(errs.size())});
    if (fit.medians.size() < 3)
        throw InsufficientDataError("fit_slope: need >= 3 distinct n with >= 10 successful rows");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double cnt = static_cast<double>(fit.medians.size());
    for (const auto& m : fit.medians) {
        const double x = std::log(static_cast<double>(m.n));
        const double y = std::log(m.median_err2);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / cnt;
    return fit;
}

// max/min over the n grid of sqrt(n) * median err2; tightness surrogate.
inline double sqrt_n_median_ratio(const SlopeFit& fit) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& m : fit.medians) {
        const double v = std::sqrt(static_cast<double>(m.n)) * m.median_err2;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi / lo;
}

inline const char* kBenchCsvHeader = "n,replicate,beta_hat,h_hat,err2,t_tilde,j_norm,exists,iters,wall_ms,status";

inline void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out,
                            const BenchConfig& cfg) {
    out << "# spinglass bench v" << kVersion << '\n';
    out << "# config: " << to_json(cfg).dump() << '\n';
    out << "# seed: " << cfg.master_seed << '\n';
    out << kBenchCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.n << ',' << r.replicate << ',' << detail::format_double(r.beta_hat, false) << ','
            << detail::format_double(r.h_hat, false) << ',' << detail::format_double(r.err2, false)
            << ',' << detail::format_double(r.t_tilde, false) << ','
            << detail::format_double(r.j_norm, false) << ',' << (r.exists ? 1 : 0) << ',' << r.iters
            << ',' << detail::format_double(r.wall_ms, false) << ',' << r.status << '\n';
    }
}

inline std::vector<BenchRow> read_bench_csv(std::istream& in) {
    std::vector<BenchRow> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("n,replicate", 0) != 0)
                throw ParseError("bench csv: unexpected header: " + line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (int k = 0; k < 10; ++k) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) throw ParseError("bench csv: short row: " + line);
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        fields.push_back(line.substr(start));  // status may not contain commas
        BenchRow r;
        r.n = std::stoi(fields[0]);
        r.replicate = std::stoi(fields[1]);
        r.beta_hat = std::strtod(fields[2].c_str(), nullptr);
        r.h_hat = std::strtod(fields[3].c_str(), nullptr);
        r.err2 = std::strtod(fields[4].c_str(), nullptr);
        r.t_tilde = std::strtod(fields[5].c_str(), nullptr);
        r.j_norm = std::strtod(fields[6].c_str(), nullptr);
        r.exists = fields[7] == "1";
        r.iters = std::stoi(fields[8]);
        r.wall_ms = std::strtod(fields[9].c_str(), nullptr);
        r.status = fields[10];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::json bench_summary_json(const BenchConfig& cfg, const std::vector<BenchRow>& rows) {
    nlohmann::json summary{{"version", kVersion},
                           {"config", to_json(cfg)},
                           {"seed", cfg.master_seed},
                           {"rows", rows.size()}};
    try {
        const SlopeFit fit = fit_slope(rows);
        summary["slope"] = fit.slope;
        summary["intercept"] = fit.intercept;
        summary["sqrt_n_median_ratio"] = sqrt_n_median_ratio(fit);
        nlohmann::json med = nlohmann::json::array();
        for (const auto& m : fit.medians)
            med.push_back({{"n", m.n}, {"median_err2", m.median_err2}, {"successes", m.successes}});
        summary["medians"] = med;
    } catch (const InsufficientDataError& e) {
        summary["slope_error"] = e.what();
    }
    return summary;
}

}  // namespace spinglass
