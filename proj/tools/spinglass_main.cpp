// spinglass: generate, sample, estimate, verify, bench.
//
// Exit codes: 0 success, 1 usage/validation, 2 existence failure,
// 3 convergence failure, 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spinglass/spinglass.hpp"

namespace sg = spinglass;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNonExistence = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitIo = 4;

// JSON config file with per-flag defaults; command-line flags win. Each option is
// bound to a key so that values absent from the command line are filled from
// the file after parsing.
struct ConfigBinder {
    std::vector<std::function<void(const json&)>> entries;

    template <typename T>
    void bind(CLI::Option* opt, T& var, std::string key) {
        entries.push_back([opt, &var, key = std::move(key)](const json& j) {
            if (opt->count() == 0 && j.contains(key)) var = j.at(key).get<T>();
        });
    }

    void apply_file(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw sg::IoError("cannot open config file: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw sg::ConfigError("config file " + path + ": " + e.what());
        }
        for (auto& fn : entries) fn(j);
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw sg::IoError("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sg::IoError("cannot read " + path);
    return in;
}

std::vector<std::string> provenance(const json& resolved, std::uint64_t seed) {
    return {std::string("spinglass v") + sg::kVersion, "config: " + resolved.dump(),
            "seed: " + std::to_string(seed)};
}

std::vector<sg::SpinConfiguration> load_samples(std::istream& in) {
    std::vector<sg::SpinConfiguration> configs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        sg::SpinConfiguration sigma;
        int v;
        while (ls >> v) {
            if (v != 1 && v != -1)
                throw sg::ParseError("sample line " + std::to_string(line_no) + ": spins must be +-1");
            sigma.push_back(static_cast<std::int8_t>(v));
        }
        if (!sigma.empty()) configs.push_back(std::move(sigma));
    }
    return configs;
}

struct GenSpec {
    std::string graph = "complete";
    int n = 0;
    double p = -1.0;
    std::string disorder = "gaussian";
    std::uint64_t seed = 1;
};

sg::InteractionGraph build_graph(const GenSpec& spec) {
    const sg::GraphKind kind = sg::parse_graph_kind(spec.graph);
    if (kind == sg::GraphKind::Complete) return sg::gen_complete(spec.n);
    const double p = spec.p > 0.0 ? spec.p : sg::er_probability_rule(spec.n);
    return sg::gen_erdos_renyi(spec.n, p, sg::mix_seed(spec.seed, 7));
}

int cmd_gen(const GenSpec& spec, const std::string& out_graph, const std::string& out_coupling,
            bool hexfloat) {
    if (spec.n < 2) throw sg::ConfigError("gen: need --n >= 2");
    const sg::InteractionGraph g = build_graph(spec);
    const sg::CouplingMatrix jm = sg::build_coupling(g, {sg::parse_disorder(spec.disorder)},
                                                     sg::mix_seed(spec.seed, 8));
    const json resolved{{"graph", spec.graph}, {"n", spec.n},       {"p", spec.p},
                        {"disorder", spec.disorder}, {"seed", spec.seed}, {"hexfloat", hexfloat}};
    {
        auto out = open_out(out_graph);
        sg::save_edge_list(g, out, provenance(resolved, spec.seed));
    }
    {
        auto out = open_out(out_coupling);
        sg::save_coupling(jm, out, hexfloat, provenance(resolved, spec.seed));
    }
    std::cout << "n        " << g.n << "\n"
              << "edges    " << g.edge_count() << "\n"
              << "d_avg    " << g.avg_degree() << "\n"
              << "d_max    " << g.max_degree() << "\n"
              << "ratio_c  " << g.degree_ratio() << "\n";
    if (g.isolated_warning)
        std::cout << "warning: draw contains an isolated vertex (expected degree < 8)\n";
    if (g.avg_degree() < 4.0 * std::log(static_cast<double>(g.n)))
        std::cout << "warning: d_avg " << g.avg_degree() << " < 4 log n = "
                  << 4.0 * std::log(static_cast<double>(g.n)) << " (sparser than the assumed regime)\n";
    std::cout << "wrote " << out_graph << " and " << out_coupling << "\n";
    return kExitOk;
}

int cmd_sample(const std::string& coupling_path, double beta, double h, int sweeps, int num,
               std::uint64_t seed, const std::string& out_path, bool exact) {
    auto in = open_in(coupling_path);
    const sg::CouplingMatrix jm = sg::load_coupling(in);
    if (num < 1) throw sg::ConfigError("sample: need --num >= 1");
    const sg::ModelParams p{beta, h};
    const json resolved{{"coupling", coupling_path}, {"beta", beta},   {"h", h},
                        {"sweeps", sweeps},          {"num", num},     {"seed", seed},
                        {"exact", exact}};
    auto out = open_out(out_path);
    for (const auto& c : provenance(resolved, seed)) out << "# " << c << '\n';

    if (exact) {
        if (jm.n > 16) throw sg::ConfigError("sample --exact is limited to n <= 16");
        const sg::ExactDistribution dist = sg::exact_enumerate(jm, p);
        for (int r = 0; r < num; ++r) {
            const auto sigma = sg::exact_sample(dist, sg::mix_seed(seed, static_cast<std::uint64_t>(r)));
            for (std::size_t i = 0; i < sigma.size(); ++i)
                out << (i ? " " : "") << static_cast<int>(sigma[i]);
            out << '\n';
        }
    } else {
        const int burnin = sweeps > 0 ? sweeps : sg::default_burnin(jm.n);
        for (int r = 0; r < num; ++r) {
            const auto sigma =
                sg::sample_gibbs(jm, p, burnin, sg::mix_seed(seed, static_cast<std::uint64_t>(r)));
            for (std::size_t i = 0; i < sigma.size(); ++i)
                out << (i ? " " : "") << static_cast<int>(sigma[i]);
            out << '\n';
        }
    }
    std::cout << "wrote " << num << " configuration(s) to " << out_path << "\n";
    return kExitOk;
}

json report_to_json(const sg::EstimationReport& rep, bool with_trace) {
    json j{{"beta_hat", rep.beta_hat},
           {"h_hat", rep.h_hat},
           {"converged", rep.converged},
           {"iterations", rep.iterations},
           {"final_score_norm", rep.final_score_norm},
           {"final_t_tilde", rep.final_t_tilde},
           {"status", sg::to_string(rep.status)},
           {"existence_verified", rep.existence_verified},
           {"degenerate_fallback_used", rep.degenerate_fallback_used}};
    if (with_trace) {
        json tr = json::array();
        for (const auto& it : rep.trace)
            tr.push_back({{"beta", it.beta}, {"h", it.h}, {"loglik", it.loglik}, {"score_inf", it.score_inf}});
        j["trace"] = tr;
    }
    return j;
}

int cmd_estimate(const std::string& coupling_path, const std::string& sample_path, int index,
                 double tol, int max_iters, double init_beta, double init_h, bool force,
                 bool oracle_grid, double grid_halfwidth, double grid_resolution, int threads,
                 bool with_trace) {
    auto cin_ = open_in(coupling_path);
    const sg::CouplingMatrix jm = sg::load_coupling(cin_);
    auto sin_ = open_in(sample_path);
    const auto configs = load_samples(sin_);
    if (configs.empty()) throw sg::ParseError("sample file holds no configurations");
    if (index < 0 || index >= static_cast<int>(configs.size()))
        throw sg::ConfigError("sample index out of range");
    const sg::SpinConfiguration& sigma = configs[static_cast<std::size_t>(index)];
    const sg::LocalFields fields = sg::matvec(jm, sigma);

    json out{{"version", sg::kVersion},
             {"config", {{"coupling", coupling_path},
                         {"sample", sample_path},
                         {"index", index},
                         {"tol", tol},
                         {"max_iters", max_iters},
                         {"init_beta", init_beta},
                         {"init_h", init_h},
                         {"force", force}}}};
    const sg::ExistenceWitness witness = sg::existence_check(sigma, fields);
    out["existence"] = {{"exists", witness.exists},
                        {"a", witness.a},
                        {"sites", witness.sites},
                        {"reason", witness.reason}};

    sg::NewtonOptions opts;
    opts.init = {init_beta, init_h};
    opts.tol = tol;
    opts.max_iters = max_iters;
    opts.force = force;
    sg::EstimationReport rep;
    try {
        rep = sg::mple_newton(sigma, fields, opts);
    } catch (const sg::NonExistenceError& e) {
        out["error"] = e.what();
        std::cout << out.dump(2) << std::endl;
        return kExitNonExistence;
    }
    out["report"] = report_to_json(rep, with_trace);

    if (oracle_grid) {
        const sg::GridBox box{rep.beta_hat - grid_halfwidth, rep.beta_hat + grid_halfwidth,
                              rep.h_hat - grid_halfwidth, rep.h_hat + grid_halfwidth};
        const auto grid = sg::mple_grid_oracle(sigma, fields, box, grid_resolution, threads);
        out["oracle"] = {{"beta", grid.argmax.beta},
                         {"h", grid.argmax.h},
                         {"value", grid.value},
                         {"on_boundary", grid.on_boundary},
                         {"within_cell", std::abs(grid.argmax.beta - rep.beta_hat) <= grid_resolution &&
                                             std::abs(grid.argmax.h - rep.h_hat) <= grid_resolution}};
    }
    std::cout << out.dump(2) << std::endl;
    return rep.converged ? kExitOk : kExitNoConvergence;
}

int cmd_verify(const std::string& coupling_path, const GenSpec& gen, double beta, double h,
               sg::ConditionOptions opt, const std::string& out_path, bool json_stdout) {
    sg::CouplingMatrix jm;
    if (!coupling_path.empty()) {
        auto in = open_in(coupling_path);
        jm = sg::load_coupling(in);
    } else {
        if (gen.n < 2) throw sg::ConfigError("verify: give --coupling or --graph/--n");
        jm = sg::build_coupling(build_graph(gen), {sg::parse_disorder(gen.disorder)},
                                sg::mix_seed(gen.seed, 8));
    }
    const sg::ConditionReport rep = sg::run_condition_checks(jm, {beta, h}, opt);
    json j = sg::to_json(rep);
    j["version"] = sg::kVersion;

    if (json_stdout) {
        std::cout << j.dump(2) << std::endl;
    } else {
        auto line = [&](const char* name, bool passed, const std::string& detail) {
            std::cout << (passed ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n";
        };
        std::ostringstream d1, d2, d3, d4;
        d1 << "||J|| = " << rep.j_norm << " (threshold " << rep.j_norm_threshold
           << (rep.j_norm_converged ? ")" : ", unconverged estimate)");
        d2 << "min T~ = " << rep.t_tilde_min << (rep.t_tilde_min_exact ? " (exact)" : " (sampled)")
           << ", sample median = " << rep.t_tilde_sample << " (threshold " << rep.t_tilde_threshold << ")";
        d3 << "witness fraction = " << rep.existence_fraction << " over " << rep.replicates
           << " samples (threshold " << rep.existence_threshold << ")";
        d4 << "<S^2>/n = " << rep.score_moment_s << ", <Q^2>/n = " << rep.score_moment_q
           << " (cap " << rep.score_cap << ")";
        line("operator-norm", rep.j_norm_passed, d1.str());
        line("hessian-positivity", rep.t_tilde_passed, d2.str());
        line("existence-witness", rep.existence_passed, d3.str());
        line("score-moments", rep.score_passed, d4.str());
        std::cout << (rep.all_passed ? "all checks passed" : "some checks FAILED") << "\n";
    }
    if (!out_path.empty()) {
        auto out = open_out(out_path);
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_bench(sg::BenchConfig cfg, const std::string& out_path, std::string summary_path,
              bool dry_run, bool resume) {
    cfg.validate();
    if (summary_path.empty()) summary_path = out_path + ".summary.json";
    if (dry_run) {
        json plan{{"version", sg::kVersion},
                  {"config", sg::to_json(cfg)},
                  {"cells", cfg.n_grid.size() * static_cast<std::size_t>(cfg.replicates)},
                  {"out", out_path},
                  {"summary", summary_path},
                  {"threads", sg::resolve_threads(cfg.threads)}};
        std::cout << plan.dump(2) << std::endl;
        return kExitOk;
    }
    std::vector<sg::BenchRow> done;
    if (resume && std::filesystem::exists(out_path)) {
        auto in = open_in(out_path);
        done = sg::read_bench_csv(in);
        std::cout << "resume: " << done.size() << " rows already present\n";
    }
    const auto rows = sg::run_consistency(cfg, done);
    {
        auto out = open_out(out_path);
        sg::write_bench_csv(rows, out, cfg);
    }
    const json summary = sg::bench_summary_json(cfg, rows);
    {
        auto out = open_out(summary_path);
        out << summary.dump(2) << '\n';
    }
    std::cout << summary.dump(2) << std::endl;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint (beta, h) pseudolikelihood estimation for spin glasses"};
    app.require_subcommand(1);
    // the external-field flag is --h, so keep only the long help form
    app.set_help_flag("--help", "print help and exit");

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a graph and coupling file");
    gen->set_help_flag("--help", "print help and exit");
    GenSpec gen_spec;
    std::string gen_out_graph = "graph.txt", gen_out_coupling = "coupling.txt", gen_config;
    bool gen_hexfloat = false;
    ConfigBinder gen_bind;
    gen_bind.bind(gen->add_option("--graph", gen_spec.graph, "complete|er"), gen_spec.graph, "graph");
    gen_bind.bind(gen->add_option("--n", gen_spec.n, "vertex count"), gen_spec.n, "n");
    gen_bind.bind(gen->add_option("--p", gen_spec.p, "ER edge probability"), gen_spec.p, "p");
    gen_bind.bind(gen->add_option("--disorder", gen_spec.disorder, "gaussian|rademacher|uniform"),
                  gen_spec.disorder, "disorder");
    gen_bind.bind(gen->add_option("--seed", gen_spec.seed, "master seed"), gen_spec.seed, "seed");
    gen_bind.bind(gen->add_option("--out-graph", gen_out_graph, "edge list path"), gen_out_graph, "out_graph");
    gen_bind.bind(gen->add_option("--out-coupling", gen_out_coupling, "coupling path"), gen_out_coupling,
                  "out_coupling");
    gen_bind.bind(gen->add_flag("--hexfloat", gen_hexfloat, "write weights as hexfloat"), gen_hexfloat,
                  "hexfloat");
    gen->add_option("--config", gen_config, "JSON config file (flags win)");

    // ---- sample ----
    auto* sample = app.add_subcommand("sample", "draw configurations from the Gibbs measure");
    sample->set_help_flag("--help", "print help and exit");
    std::string sample_coupling, sample_out = "samples.txt", sample_config;
    double sample_beta = 0.0, sample_h = 0.0;
    int sample_sweeps = -1, sample_num = 1;
    std::uint64_t sample_seed = 1;
    bool sample_exact = false;
    ConfigBinder sample_bind;
    sample_bind.bind(sample->add_option("--coupling", sample_coupling, "coupling file"), sample_coupling,
                     "coupling");
    sample_bind.bind(sample->add_option("--beta", sample_beta, "inverse temperature"), sample_beta, "beta");
    sample_bind.bind(sample->add_option("--h", sample_h, "external field"), sample_h, "h");
    sample_bind.bind(sample->add_option("--sweeps", sample_sweeps, "burn-in sweeps (default: rule)"),
                     sample_sweeps, "sweeps");
    sample_bind.bind(sample->add_option("--num", sample_num, "number of configurations"), sample_num, "num");
    sample_bind.bind(sample->add_option("--seed", sample_seed, "master seed"), sample_seed, "seed");
    sample_bind.bind(sample->add_option("--out", sample_out, "output path"), sample_out, "out");
    sample_bind.bind(sample->add_flag("--exact", sample_exact, "exact enumeration sampler (n <= 16)"),
                     sample_exact, "exact");
    sample->add_option("--config", sample_config, "JSON config file (flags win)");

    // ---- estimate ----
    auto* estimate = app.add_subcommand("estimate", "joint MPLE from a coupling and a sample");
    estimate->set_help_flag("--help", "print help and exit");
    std::string est_coupling, est_sample, est_config;
    int est_index = 0, est_max_iters = 200, est_threads = 0;
    double est_tol = 1e-10, est_init_beta = 0.0, est_init_h = 0.0;
    double est_grid_halfwidth = 0.5, est_grid_resolution = 1e-3;
    bool est_force = false, est_oracle = false, est_trace = false;
    ConfigBinder est_bind;
    est_bind.bind(estimate->add_option("--coupling", est_coupling, "coupling file"), est_coupling, "coupling");
    est_bind.bind(estimate->add_option("--sample", est_sample, "sample file"), est_sample, "sample");
    est_bind.bind(estimate->add_option("--index", est_index, "configuration index in the file"), est_index,
                  "index");
    est_bind.bind(estimate->add_option("--tol", est_tol, "stop at ||(S,Q)||_inf <= tol*n"), est_tol, "tol");
    est_bind.bind(estimate->add_option("--max-iters", est_max_iters, "iteration cap"), est_max_iters,
                  "max_iters");
    est_bind.bind(estimate->add_option("--init-beta", est_init_beta, "initial beta"), est_init_beta,
                  "init_beta");
    est_bind.bind(estimate->add_option("--init-h", est_init_h, "initial h"), est_init_h, "init_h");
    est_bind.bind(estimate->add_flag("--force", est_force, "solve even without a witness"), est_force,
                  "force");
    est_bind.bind(estimate->add_flag("--oracle-grid", est_oracle, "cross-check against grid search"),
                  est_oracle, "oracle_grid");
    est_bind.bind(estimate->add_option("--grid-halfwidth", est_grid_halfwidth, "oracle box half width"),
                  est_grid_halfwidth, "grid_halfwidth");
    est_bind.bind(estimate->add_option("--grid-resolution", est_grid_resolution, "oracle grid resolution"),
                  est_grid_resolution, "grid_resolution");
    est_bind.bind(estimate->add_flag("--trace", est_trace, "include the iterate trace"), est_trace, "trace");
    estimate->add_option("--threads", est_threads, "worker threads")->envname("SPINGLASS_THREADS");
    estimate->add_option("--config", est_config, "JSON config file (flags win)");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run the condition diagnostics");
    verify->set_help_flag("--help", "print help and exit");
    std::string ver_coupling, ver_out, ver_config;
    GenSpec ver_gen;
    double ver_beta = 0.5, ver_h = 0.3;
    sg::ConditionOptions ver_opt;
    bool ver_json = false;
    ConfigBinder ver_bind;
    ver_bind.bind(verify->add_option("--coupling", ver_coupling, "coupling file"), ver_coupling, "coupling");
    ver_bind.bind(verify->add_option("--graph", ver_gen.graph, "complete|er (when generating)"),
                  ver_gen.graph, "graph");
    ver_bind.bind(verify->add_option("--n", ver_gen.n, "vertex count (when generating)"), ver_gen.n, "n");
    ver_bind.bind(verify->add_option("--p", ver_gen.p, "ER edge probability"), ver_gen.p, "p");
    ver_bind.bind(verify->add_option("--disorder", ver_gen.disorder, "disorder family"), ver_gen.disorder,
                  "disorder");
    ver_bind.bind(verify->add_option("--gen-seed", ver_gen.seed, "generation seed"), ver_gen.seed,
                  "gen_seed");
    ver_bind.bind(verify->add_option("--beta", ver_beta, "inverse temperature"), ver_beta, "beta");
    ver_bind.bind(verify->add_option("--h", ver_h, "external field"), ver_h, "h");
    ver_bind.bind(verify->add_option("--replicates", ver_opt.replicates, "Gibbs replicates"),
                  ver_opt.replicates, "replicates");
    ver_bind.bind(verify->add_option("--configs", ver_opt.sampled_configs, "sampled sigmas for min T~"),
                  ver_opt.sampled_configs, "configs");
    ver_bind.bind(verify->add_option("--burnin", ver_opt.burnin, "burn-in override"), ver_opt.burnin,
                  "burnin");
    ver_bind.bind(verify->add_option("--seed", ver_opt.seed, "master seed"), ver_opt.seed, "seed");
    ver_bind.bind(verify->add_option("--jnorm-threshold", ver_opt.jnorm_threshold, "condition (i) threshold"),
                  ver_opt.jnorm_threshold, "jnorm_threshold");
    ver_bind.bind(
        verify->add_option("--ttilde-threshold", ver_opt.t_tilde_threshold, "condition (ii) threshold"),
        ver_opt.t_tilde_threshold, "ttilde_threshold");
    ver_bind.bind(verify->add_option("--existence-threshold", ver_opt.existence_threshold,
                                     "witness prevalence threshold"),
                  ver_opt.existence_threshold, "existence_threshold");
    ver_bind.bind(verify->add_option("--score-cap", ver_opt.score_cap, "score moment cap"),
                  ver_opt.score_cap, "score_cap");
    ver_bind.bind(verify->add_option("--out", ver_out, "write the JSON report here"), ver_out, "out");
    ver_bind.bind(verify->add_flag("--json", ver_json, "JSON to stdout instead of the table"), ver_json,
                  "json");
    verify->add_option("--threads", ver_opt.threads, "worker threads")->envname("SPINGLASS_THREADS");
    verify->add_option("--config", ver_config, "JSON config file (flags win)");

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "consistency experiment: sweep n, estimate, fit the slope");
    bench->set_help_flag("--help", "print help and exit");
    sg::BenchConfig bench_cfg;
    std::string bench_graph = "complete", bench_disorder = "gaussian";
    std::string bench_out = "bench.csv", bench_summary, bench_config;
    bool bench_dry = false, bench_resume = false;
    ConfigBinder bench_bind;
    bench_bind.bind(bench->add_option("--graph", bench_graph, "complete|er"), bench_graph, "graph");
    bench_bind.bind(bench->add_option("--p", bench_cfg.er_p, "ER probability (default: rule)"),
                    bench_cfg.er_p, "er_p");
    bench_bind.bind(bench->add_option("--disorder", bench_disorder, "disorder family"), bench_disorder,
                    "disorder");
    bench_bind.bind(bench->add_option("--beta0", bench_cfg.beta0, "ground truth beta"), bench_cfg.beta0,
                    "beta0");
    bench_bind.bind(bench->add_option("--h0", bench_cfg.h0, "ground truth h"), bench_cfg.h0, "h0");
    bench_bind.bind(
        bench->add_option("--n-grid", bench_cfg.n_grid, "system sizes, e.g. 128,256,512")->delimiter(','),
        bench_cfg.n_grid, "n_grid");
    bench_bind.bind(bench->add_option("--replicates", bench_cfg.replicates, "replicates per n"),
                    bench_cfg.replicates, "replicates");
    bench_bind.bind(bench->add_option("--burnin", bench_cfg.burnin_override, "burn-in override"),
                    bench_cfg.burnin_override, "burnin");
    bench_bind.bind(bench->add_option("--seed", bench_cfg.master_seed, "master seed"), bench_cfg.master_seed,
                    "seed");
    bench_bind.bind(bench->add_option("--jnorm-tol", bench_cfg.jnorm_tol, "row ||J|| tolerance"),
                    bench_cfg.jnorm_tol, "jnorm_tol");
    bench_bind.bind(bench->add_option("--jnorm-iters", bench_cfg.jnorm_max_iters, "row ||J|| iteration cap"),
                    bench_cfg.jnorm_max_iters, "jnorm_iters");
    bench_bind.bind(bench->add_option("--out", bench_out, "CSV path"), bench_out, "out");
    bench_bind.bind(bench->add_option("--summary", bench_summary, "summary JSON path"), bench_summary,
                    "summary");
    bench_bind.bind(bench->add_flag("--dry-run", bench_dry, "print the plan, run nothing"), bench_dry,
                    "dry_run");
    bench_bind.bind(bench->add_flag("--resume", bench_resume, "reuse completed rows from --out"),
                    bench_resume, "resume");
    bench->add_option("--threads", bench_cfg.threads, "worker threads")->envname("SPINGLASS_THREADS");
    bench->add_option("--config", bench_config, "JSON config file (flags win)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            gen_bind.apply_file(gen_config);
            return cmd_gen(gen_spec, gen_out_graph, gen_out_coupling, gen_hexfloat);
        }
        if (sample->parsed()) {
            sample_bind.apply_file(sample_config);
            if (sample_coupling.empty()) throw sg::ConfigError("sample: --coupling is required");
            return cmd_sample(sample_coupling, sample_beta, sample_h, sample_sweeps, sample_num,
                              sample_seed, sample_out, sample_exact);
        }
        if (estimate->parsed()) {
            est_bind.apply_file(est_config);
            if (est_coupling.empty() || est_sample.empty())
                throw sg::ConfigError("estimate: --coupling and --sample are required");
            return cmd_estimate(est_coupling, est_sample, est_index, est_tol, est_max_iters,
                                est_init_beta, est_init_h, est_force, est_oracle, est_grid_halfwidth,
                                est_grid_resolution, est_threads, est_trace);
        }
        if (verify->parsed()) {
            ver_bind.apply_file(ver_config);
            return cmd_verify(ver_coupling, ver_gen, ver_beta, ver_h, ver_opt, ver_out, ver_json);
        }
        if (bench->parsed()) {
            bench_bind.apply_file(bench_config);
            bench_cfg.graph = sg::parse_graph_kind(bench_graph);
            bench_cfg.disorder = sg::parse_disorder(bench_disorder);
            return cmd_bench(bench_cfg, bench_out, bench_summary, bench_dry, bench_resume);
        }
    } catch (const sg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const sg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const sg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
