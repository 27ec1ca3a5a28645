// Command-line driver: simulate / fit / effects / evaluate / diagnose.
// Exit codes: 0 success, 2 validation error, 3 numeric failure.

#include <CLI11.hpp>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <omp.h>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dagprobit/causal.hpp"
#include "dagprobit/dag.hpp"
#include "dagprobit/errors.hpp"
#include "dagprobit/io.hpp"
#include "dagprobit/mcmc.hpp"
#include "dagprobit/prior.hpp"
#include "dagprobit/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dagprobit;

namespace {

constexpr long kQuickMaxIterations = 50000;
constexpr int kQuickMaxNodes = 30;
constexpr int kQuickMaxReps = 20;

struct FitOptions {
    std::string data_path, out_dir, config_path, fixed_dag_path;
    long iterations = -1, burn_in = -2, thin = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double a = -1, g = -1, pi = -1, sigma0_sq = -1;
    int max_edges = -1;
    bool standardize = false, full = false;
};

void add_fit_flags(CLI::App* cmd, FitOptions& opt) {
    cmd->add_option("--config", opt.config_path, "key = value config file");
    cmd->add_option("-T,--iterations", opt.iterations, "MCMC iterations");
    cmd->add_option("--burn-in", opt.burn_in, "burn-in iterations (default T/5)");
    cmd->add_option("--thin", opt.thin, "thinning stride");
    cmd->add_option("--seed", opt.seed, "RNG seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--a", opt.a, "Wishart shape (default q+1)");
    cmd->add_option("--g", opt.g, "Wishart scale multiplier (default 1/n)");
    cmd->add_option("--pi", opt.pi, "prior edge probability (default 3/(2q-2))");
    cmd->add_option("--sigma0-sq", opt.sigma0_sq, "theta0 proposal variance");
    cmd->add_option("--max-edges", opt.max_edges, "cap on proposal edge count");
    cmd->add_flag("--standardize", opt.standardize, "center/scale covariates");
    cmd->add_flag("--full", opt.full, "lift quick-scale safety caps");
    cmd->add_option("--fixed-dag", opt.fixed_dag_path,
                    "edge-list file; fixes the DAG and skips structure moves");
}

// config file fills anything the flags left at its sentinel
void merge_config_file(FitOptions& opt) {
    if (opt.config_path.empty()) return;
    const auto kv = io::read_config_file(opt.config_path);
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (opt.iterations < 0)
        if (auto v = get("iterations")) opt.iterations = std::stol(*v);
    if (opt.burn_in < -1)
        if (auto v = get("burn_in")) opt.burn_in = std::stol(*v);
    if (opt.thin < 0)
        if (auto v = get("thin")) opt.thin = std::stol(*v);
    if (!opt.seed_set)
        if (auto v = get("seed")) {
            opt.seed = std::stoull(*v);
            opt.seed_set = true;
        }
    if (opt.a < 0)
        if (auto v = get("a")) opt.a = std::stod(*v);
    if (opt.g < 0)
        if (auto v = get("g")) opt.g = std::stod(*v);
    if (opt.pi < 0)
        if (auto v = get("pi")) opt.pi = std::stod(*v);
    if (opt.sigma0_sq < 0)
        if (auto v = get("sigma0_sq")) opt.sigma0_sq = std::stod(*v);
    if (!opt.standardize)
        if (auto v = get("standardize")) opt.standardize = (*v == "true" || *v == "1");
    if (opt.fixed_dag_path.empty())
        if (auto v = get("fixed_dag")) opt.fixed_dag_path = *v;
}

int run_fit(FitOptions opt) {
    merge_config_file(opt);
    if (opt.iterations < 0) opt.iterations = 10000;
    if (opt.thin < 0) opt.thin = 1;
    if (opt.burn_in < -1) opt.burn_in = -1;

    Dataset data = io::read_dataset_csv(opt.data_path);
    if (!opt.full) {
        if (opt.iterations > kQuickMaxIterations)
            throw ValidationError("fit: T > " + std::to_string(kQuickMaxIterations) +
                                  " needs --full");
        if (data.q() > kQuickMaxNodes)
            throw ValidationError("fit: q > " + std::to_string(kQuickMaxNodes) +
                                  " needs --full");
    }
    if (opt.standardize) data.standardize();

    Hyperparameters hp;
    if (opt.a > 0) hp.a = opt.a;
    if (opt.g > 0) hp.g = opt.g;
    if (opt.pi > 0) hp.pi = opt.pi;
    if (opt.sigma0_sq > 0) hp.sigma0_sq = opt.sigma0_sq;
    const Hyperparameters resolved = hp.resolved(data.q(), data.n());

    ChainConfig cfg;
    cfg.iterations = opt.iterations;
    cfg.burn_in = opt.burn_in;
    cfg.thin = opt.thin;
    cfg.seed = opt.seed;
    if (opt.max_edges >= 0) cfg.max_edges = opt.max_edges;
    if (!opt.fixed_dag_path.empty())
        cfg.fixed_dag = io::read_dag_edgelist(opt.fixed_dag_path, data.q());

    const ChainOutput chain = run_chain(data, resolved, cfg);

    io::RunMeta meta;
    meta.iterations = cfg.iterations;
    meta.burn_in = cfg.resolved_burn_in();
    meta.thin = cfg.thin;
    meta.seed = cfg.seed;
    meta.a = resolved.a;
    meta.g = resolved.g;
    meta.pi = resolved.pi;
    meta.sigma0_sq = resolved.sigma0_sq;
    meta.standardize = opt.standardize;
    meta.q = data.q();
    meta.n = data.n();
    io::save_run_dir(opt.out_dir, chain, data, meta);
    std::cout << "fit: " << chain.num_samples() << " samples -> " << opt.out_dir
              << " (dag accept " << chain.dag_accept_rate() << ", theta0 accept "
              << chain.theta0_accept_rate() << ")\n";
    return 0;
}

std::vector<Vertex> parse_nodes(const std::string& spec, int q) {
    std::vector<Vertex> nodes;
    if (spec == "all") {
        for (Vertex s = 1; s < q; ++s) nodes.push_back(s);
        return nodes;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const long v = std::stol(tok);
        if (v < 2 || v > q)
            throw ValidationError("effects: node " + tok + " out of range 2.." +
                                  std::to_string(q));
        nodes.push_back(static_cast<Vertex>(v - 1));
    }
    if (nodes.empty()) throw ValidationError("effects: no nodes requested");
    return nodes;
}

Eigen::VectorXd parse_grid(const std::string& spec, const Dataset& data, Vertex s) {
    if (spec == "observed") return data.xobs.col(s - 1);
    const auto c1 = spec.find(':');
    if (c1 == std::string::npos) {
        Eigen::VectorXd one(1);
        one[0] = std::stod(spec);
        return one;
    }
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw ValidationError("effects: grid must be 'observed', a value, or lo:hi:n");
    const double lo = std::stod(spec.substr(0, c1));
    const double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const long m = std::stol(spec.substr(c2 + 1));
    if (m < 1 || (m > 1 && !(hi > lo)))
        throw ValidationError("effects: bad grid spec");
    Eigen::VectorXd grid(m);
    for (long i = 0; i < m; ++i)
        grid[i] = m == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(m - 1);
    return grid;
}

int run_effects(const std::string& run_dir, const std::string& nodes_spec,
                const std::string& grid_spec, double level, int jobs) {
    const ChainOutput chain = io::load_run_chain(run_dir);
    const Dataset data = io::load_run_data(run_dir);
    omp_set_num_threads(std::max(jobs, 1));
    std::vector<CausalEffectTable> tables;
    for (Vertex s : parse_nodes(nodes_spec, chain.q)) {
        const Eigen::VectorXd grid = parse_grid(grid_spec, data, s);
        tables.push_back(jobs > 1 ? bma_effects(chain, s, grid, level)
                                  : bma_effects_serial(chain, s, grid, level));
    }
    io::write_effects_csv(fs::path(run_dir) / "causal_effects.csv", tables);
    std::cout << "effects: wrote " << (fs::path(run_dir) / "causal_effects.csv").string()
              << '\n';
    return 0;
}

int run_evaluate(const std::vector<std::string>& truth_dirs,
                 const std::vector<std::string>& run_dirs, const std::string& out_dir,
                 int k_points, bool skeleton, int jobs) {
    if (truth_dirs.size() != run_dirs.size() || truth_dirs.empty())
        throw ValidationError("evaluate: need matching --truth/--run pairs");
    const auto k_grid = default_k_grid(k_points);
    const int reps = static_cast<int>(truth_dirs.size());
    std::vector<double> aucs(reps), pstars(reps);
    std::vector<std::vector<RocPoint>> rocs(reps);
    std::vector<std::vector<double>> maes(reps);
    omp_set_num_threads(std::max(jobs, 1));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (jobs > 1)
    for (int r = 0; r < reps; ++r) {
        try {
            const Dag truth =
                io::read_dag_adjacency_csv(fs::path(truth_dirs[r]) / "truth_dag.csv");
            const ChainOutput chain = io::load_run_chain(run_dirs[r]);
            if (chain.q != truth.num_vertices())
                throw ValidationError("evaluate: truth and run dimensions differ");
            const PosteriorSummary summary = edge_probs(chain);
            const EvalReport report = structure_metrics(truth, summary, k_grid, skeleton);
            aucs[r] = report.auc;
            pstars[r] = report.p_star;
            rocs[r] = report.roc;
            const Dataset data = io::load_run_data(run_dirs[r]);
            const Eigen::MatrixXd beta_true = io::read_true_effects_csv(
                fs::path(truth_dirs[r]) / "true_effects.csv", chain.q, data.n());
            for (Vertex s = 1; s < chain.q; ++s) {
                const auto table = bma_effects_serial(chain, s, data.xobs.col(s - 1));
                maes[r].push_back(mean_absolute_error(beta_true.col(s - 1), table.bma));
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const fs::path out(out_dir);
    fs::create_directories(out);
    if (reps == 1) io::write_roc_csv(out / "roc.csv", rocs[0]);
    else io::write_roc_band_csv(out / "roc.csv", rocs);
    {
        json j;
        j["auc"] = aucs;
        j["auc_mean"] = std::accumulate(aucs.begin(), aucs.end(), 0.0) / reps;
        std::ofstream(out / "auc.json") << j.dump(2) << '\n';
    }
    {
        json j;
        j["p_star"] = pstars;
        j["p_star_median"] = median(pstars);
        std::ofstream(out / "pstar.json") << j.dump(2) << '\n';
    }
    {
        std::ofstream mf(out / "mae.csv");
        mf << "rep,s,mae\n";
        for (int r = 0; r < reps; ++r)
            for (size_t s = 0; s < maes[r].size(); ++s)
                mf << r << ',' << s + 2 << ',' << io::fmt(maes[r][s]) << '\n';
    }
    std::cout << "evaluate: auc_mean="
              << std::accumulate(aucs.begin(), aucs.end(), 0.0) / reps
              << " p_star_median=" << median(pstars) << " -> " << out_dir << '\n';
    return 0;
}

int run_diagnose(FitOptions opt, const std::string& out_dir, long t1, long t2,
                 int jobs) {
    merge_config_file(opt);
    Dataset data = io::read_dataset_csv(opt.data_path);
    if (opt.standardize) data.standardize();
    Hyperparameters hp;
    if (opt.a > 0) hp.a = opt.a;
    if (opt.g > 0) hp.g = opt.g;
    if (opt.pi > 0) hp.pi = opt.pi;
    if (opt.sigma0_sq > 0) hp.sigma0_sq = opt.sigma0_sq;
    ChainConfig base;
    base.seed = opt.seed;
    if (opt.thin > 0) base.thin = opt.thin;
    omp_set_num_threads(std::max(jobs, 1));
    const TwoChainReport report =
        two_chain_diagnostic(data, hp.resolved(data.q(), data.n()), base, t1, t2);

    const fs::path out(out_dir);
    fs::create_directories(out);
    {
        std::ofstream pf(out / "diagnostic_pairs.csv");
        pf << "s,x_tilde,bma_chain1,bma_chain2\n";
        for (size_t i = 0; i < report.nodes.size(); ++i) {
            const auto& t1_table = report.chain1[i];
            const auto& t2_table = report.chain2[i];
            for (long r = 0; r < t1_table.x_values.size(); ++r)
                pf << report.nodes[i] + 1 << ',' << io::fmt(t1_table.x_values[r]) << ','
                   << io::fmt(t1_table.bma[r]) << ',' << io::fmt(t2_table.bma[r]) << '\n';
        }
    }
    {
        json j;
        j["t1"] = t1;
        j["t2"] = t2;
        json per_node = json::object();
        double worst = 0.0;
        for (size_t i = 0; i < report.nodes.size(); ++i) {
            per_node[std::to_string(report.nodes[i] + 1)] = report.max_abs_diff[i];
            worst = std::max(worst, report.max_abs_diff[i]);
        }
        j["max_abs_diff_per_node"] = per_node;
        j["max_abs_diff"] = worst;
        std::ofstream(out / "diagnostic_summary.json") << j.dump(2) << '\n';
        std::cout << "diagnose: max BMA difference " << worst << " -> " << out_dir
                  << '\n';
    }
    return 0;
}

int run_simulate(SimConfig cfg, const std::string& out_dir, bool full) {
    if (!full) {
        if (cfg.reps > kQuickMaxReps)
            throw ValidationError("simulate: reps > " + std::to_string(kQuickMaxReps) +
                                  " needs --full");
        if (cfg.q > kQuickMaxNodes)
            throw ValidationError("simulate: q > " + std::to_string(kQuickMaxNodes) +
                                  " needs --full");
    }
    cfg.validate();
    const fs::path out(out_dir);
    for (int r = 0; r < cfg.reps; ++r) {
        Rng rng(derive_seed(cfg.seed, 2 * r));
        const Dag dag = random_dag(cfg.q, cfg.resolved_edge_prob(), rng);
        auto [data, truth] = generate_dataset(dag, cfg, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "rep_%03d", r);
        io::save_fixture_dir(out / name, data, truth);
    }
    std::cout << "simulate: wrote " << cfg.reps << " replicate(s) under " << out_dir
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian DAG-probit structure learning and causal effects"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate synthetic fixtures");
    SimConfig sim_cfg;
    std::string sim_out;
    bool sim_full = false;
    sim->add_option("--q", sim_cfg.q, "number of nodes (response included)")->required();
    sim->add_option("--n", sim_cfg.n, "sample size")->required();
    sim->add_option("--reps", sim_cfg.reps, "replicate count");
    sim->add_option("--seed", sim_cfg.seed, "RNG seed");
    sim->add_option("--edge-prob", sim_cfg.edge_prob, "edge probability (default 3/(2q-2))");
    sim->add_option("--coeff-lo", sim_cfg.coeff_lo, "coefficient magnitude lower bound");
    sim->add_option("--coeff-hi", sim_cfg.coeff_hi, "coefficient magnitude upper bound");
    sim->add_option("--theta0", sim_cfg.theta0_true, "true threshold");
    sim->add_flag("--full", sim_full, "lift quick-scale safety caps");
    sim->add_option("-o,--out", sim_out, "output directory")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "run the MCMC sampler on a dataset");
    FitOptions fit_opt;
    fit->add_option("--data", fit_opt.data_path, "input CSV (y, x2..xq)")->required();
    fit->add_option("-o,--out", fit_opt.out_dir, "run directory")->required();
    add_fit_flags(fit, fit_opt);

    // effects
    auto* eff = app.add_subcommand("effects", "BMA causal effects from a run directory");
    std::string eff_run, eff_nodes = "all", eff_grid = "observed";
    double eff_level = 0.95;
    int eff_jobs = 1;
    eff->add_option("--run", eff_run, "run directory from fit")->required();
    eff->add_option("--nodes", eff_nodes, "comma list of 1-based nodes, or 'all'");
    eff->add_option("--grid", eff_grid, "'observed', a single value, or lo:hi:n");
    eff->add_option("--level", eff_level, "credible level");
    eff->add_option("--jobs", eff_jobs, "parallel workers");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score runs against simulation truth");
    std::vector<std::string> ev_truth, ev_runs;
    std::string ev_out;
    int ev_kpoints = 101, ev_jobs = 1;
    bool ev_skeleton = false;
    ev->add_option("--truth", ev_truth, "fixture directory (repeatable)")->required();
    ev->add_option("--run", ev_runs, "run directory (repeatable)")->required();
    ev->add_option("-o,--out", ev_out, "report directory")->required();
    ev->add_option("--k-points", ev_kpoints, "threshold grid size");
    ev->add_flag("--skeleton", ev_skeleton, "score skeletons instead of directed edges");
    ev->add_option("--jobs", ev_jobs, "parallel workers");

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "two-chain convergence diagnostic");
    FitOptions diag_opt;
    std::string diag_out;
    long diag_t1 = 5000, diag_t2 = 10000;
    int diag_jobs = 1;
    diag->add_option("--data", diag_opt.data_path, "input CSV")->required();
    diag->add_option("-o,--out", diag_out, "report directory")->required();
    diag->add_option("--t1", diag_t1, "first chain length");
    diag->add_option("--t2", diag_t2, "second chain length");
    diag->add_option("--jobs", diag_jobs, "parallel workers");
    add_fit_flags(diag, diag_opt);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return run_simulate(sim_cfg, sim_out, sim_full);
        if (fit->parsed()) return run_fit(fit_opt);
        if (eff->parsed())
            return run_effects(eff_run, eff_nodes, eff_grid, eff_level, eff_jobs);
        if (ev->parsed())
            return run_evaluate(ev_truth, ev_runs, ev_out, ev_kpoints, ev_skeleton,
                                ev_jobs);
        if (diag->parsed())
            return run_diagnose(diag_opt, diag_out, diag_t1, diag_t2, diag_jobs);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
