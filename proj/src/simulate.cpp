#include "dagprobit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "dagprobit/errors.hpp"

namespace dagprobit {

double SimConfig::resolved_edge_prob() const {
    return edge_prob > 0.0 ? edge_prob : default_edge_prob(q);
}

void SimConfig::validate() const {
    if (q < 2) throw ValidationError("simulate: need q >= 2 (at least one covariate)");
    if (n < 1) throw ValidationError("simulate: need n >= 1");
    if (reps < 1) throw ValidationError("simulate: need reps >= 1");
    const double p = resolved_edge_prob();
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("simulate: edge_prob outside (0,1)");
    if (!(coeff_lo >= 0.0) || !(coeff_hi > coeff_lo))
        throw ValidationError("simulate: coefficient interval must have positive length");
}

Dag random_dag(int q, double p, Rng& rng) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("random_dag: p outside (0,1)");
    Dag dag(q);
    for (Vertex v = 0; v < q; ++v)
        for (Vertex u = v + 1; u < q; ++u)
            if (rng.uniform() < p) dag.add_edge(u, v);  // higher label -> lower
    return dag;
}

std::pair<Dataset, GroundTruth> generate_dataset(const Dag& dag, const SimConfig& cfg,
                                                 Rng& rng) {
    cfg.validate();
    if (!dag.is_valid()) throw ValidationError("generate_dataset: invalid DAG");
    const int q = dag.num_vertices();
    const long n = cfg.n;

    GroundTruth truth;
    truth.dag = dag;
    truth.theta0 = cfg.theta0_true;
    truth.chol = CholeskyFactor::identity(q);  // D = I
    for (Vertex j = 0; j < q; ++j) {
        const size_t p = dag.parents(j).size();
        truth.chol.coeffs[j].resize(p);
        for (size_t a = 0; a < p; ++a) {
            const double mag = cfg.coeff_lo + (cfg.coeff_hi - cfg.coeff_lo) * rng.uniform();
            truth.chol.coeffs[j][a] = rng.uniform() < 0.5 ? -mag : mag;
        }
    }
    truth.sigma = sigma_from_cholesky(dag, truth.chol);

    const auto topo = topological_order(dag);
    Eigen::MatrixXd x(n, q);
    Dataset data;
    data.y.resize(n);
    for (int attempt = 0;; ++attempt) {
        for (long i = 0; i < n; ++i) {
            for (Vertex j : topo) {
                double v = rng.normal();  // sigma_j = 1
                const auto& pa = dag.parents(j);
                for (size_t a = 0; a < pa.size(); ++a)
                    v -= truth.chol.coeffs[j][a] * x(i, pa[a]);
                x(i, j) = v;
            }
            data.y[i] = x(i, kResponse) > truth.theta0 ? 1 : 0;
        }
        const long ones = data.y.sum();
        if (ones > 0 && ones < n) break;
        if (attempt + 1 >= cfg.max_retries)
            throw ValidationError(
                "generate_dataset: y degenerate after " +
                std::to_string(cfg.max_retries) +
                " redraws; both response classes are required");
    }
    data.xobs = x.rightCols(q - 1);

    truth.beta_true.resize(n, q - 1);
    for (Vertex s = 1; s < q; ++s) {
        const auto params = post_intervention(truth.sigma, s, dag.parents(s));
        for (long i = 0; i < n; ++i)
            truth.beta_true(i, s - 1) = causal_effect(params, truth.theta0, x(i, s));
    }
    return {std::move(data), std::move(truth)};
}

std::vector<double> default_k_grid(int points) {
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / (points - 1);
    return grid;
}

EvalReport structure_metrics(const Dag& truth, const PosteriorSummary& summary,
                             const std::vector<double>& k_grid, bool skeleton) {
    const int q = truth.num_vertices();
    if (summary.edge_probs.rows() != q)
        throw ValidationError("structure_metrics: dimension mismatch");
    EvalReport report;
    report.roc.reserve(k_grid.size());
    for (double k : k_grid) {
        RocPoint pt;
        pt.k = k;
        for (Vertex u = 0; u < q; ++u) {
            for (Vertex v = 0; v < q; ++v) {
                if (u == v || (skeleton && u > v)) continue;
                bool actual, predicted;
                if (skeleton) {
                    actual = truth.has_edge(u, v) || truth.has_edge(v, u);
                    // directions are exclusive within a sample, so the
                    // skeleton probability is the sum
                    predicted = summary.edge_probs(u, v) + summary.edge_probs(v, u) >= k;
                } else {
                    actual = truth.has_edge(u, v);
                    predicted = summary.edge_probs(u, v) >= k;
                }
                if (actual && predicted) ++pt.tp;
                else if (actual) ++pt.fn;
                else if (predicted) ++pt.fp;
                else ++pt.tn;
            }
        }
        pt.sen = pt.tp + pt.fn > 0 ? static_cast<double>(pt.tp) / (pt.tp + pt.fn) : 1.0;
        pt.spe = pt.tn + pt.fp > 0 ? static_cast<double>(pt.tn) / (pt.tn + pt.fp) : 1.0;
        pt.fpr = 1.0 - pt.spe;
        report.roc.push_back(pt);
    }
    report.auc = auc_from_roc(report.roc);
    report.p_star = predictor_recovery(truth, summary);
    return report;
}

double auc_from_roc(std::vector<RocPoint> roc) {
    RocPoint origin, corner;
    corner.fpr = corner.sen = 1.0;
    roc.push_back(origin);
    roc.push_back(corner);
    std::sort(roc.begin(), roc.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.fpr != b.fpr ? a.fpr < b.fpr : a.sen < b.sen;
    });
    double auc = 0.0;
    for (size_t i = 1; i < roc.size(); ++i)
        auc += 0.5 * (roc[i].fpr - roc[i - 1].fpr) * (roc[i].sen + roc[i - 1].sen);
    return auc;
}

double predictor_recovery(const Dag& truth, const PosteriorSummary& summary,
                          double k_star) {
    const int q = truth.num_vertices();
    if (q < 2) throw ValidationError("predictor_recovery: need q >= 2");
    long correct = 0;
    for (Vertex u = 0; u < q; ++u) {
        if (u == kResponse) continue;
        const bool selected = summary.edge_probs(u, kResponse) >= k_star;
        if (selected == truth.has_edge(u, kResponse)) ++correct;
    }
    return static_cast<double>(correct) / (q - 1);
}

double mean_absolute_error(const Eigen::VectorXd& truth, const Eigen::VectorXd& est) {
    if (truth.size() != est.size())
        throw ValidationError("mean_absolute_error: length mismatch");
    return (truth - est).cwiseAbs().mean();
}

Dag naive_dag(int q) {
    Dag dag(q);
    for (Vertex u = 1; u < q; ++u) dag.add_edge(u, kResponse);
    return dag;
}

std::vector<CausalEffectTable> naive_baseline(const Dataset& data,
                                              const Hyperparameters& hp,
                                              ChainConfig cfg) {
    cfg.fixed_dag = naive_dag(data.q());
    const ChainOutput chain = run_chain(data, hp, cfg);
    std::vector<CausalEffectTable> tables;
    tables.reserve(data.q() - 1);
    for (Vertex s = 1; s < data.q(); ++s)
        tables.push_back(bma_effects(chain, s, data.xobs.col(s - 1)));
    return tables;
}

TwoChainReport two_chain_diagnostic(const Dataset& data, const Hyperparameters& hp,
                                    const ChainConfig& base, long t1, long t2) {
    if (t1 < 10 || t2 < 10)
        throw ValidationError("two_chain_diagnostic: chains too short");
    TwoChainReport report;
    ChainConfig c1 = base, c2 = base;
    c1.iterations = t1;
    c2.iterations = t2;
    c1.burn_in = base.burn_in < 0 ? -1 : std::min(base.burn_in, t1 / 5);
    c2.burn_in = base.burn_in < 0 ? -1 : std::min(base.burn_in, t2 / 5);
    c1.seed = derive_seed(base.seed, 1);
    c2.seed = derive_seed(base.seed, 2);
    const ChainOutput chain1 = run_chain(data, hp, c1);
    const ChainOutput chain2 = run_chain(data, hp, c2);
    for (Vertex s = 1; s < data.q(); ++s) {
        report.nodes.push_back(s);
        report.chain1.push_back(bma_effects(chain1, s, data.xobs.col(s - 1)));
        report.chain2.push_back(bma_effects(chain2, s, data.xobs.col(s - 1)));
        report.max_abs_diff.push_back(
            (report.chain1.back().bma - report.chain2.back().bma)
                .cwiseAbs()
                .maxCoeff());
    }
    return report;
}

ReplicateResult evaluate_replicate(const Dataset& data, const GroundTruth& truth,
                                   const Hyperparameters& hp, const ChainConfig& cfg,
                                   const std::vector<double>& k_grid) {
    const ChainOutput chain = run_chain(data, hp, cfg);
    const PosteriorSummary summary = edge_probs(chain);
    EvalReport metrics = structure_metrics(truth.dag, summary, k_grid);
    ReplicateResult result;
    result.auc = metrics.auc;
    result.p_star = metrics.p_star;
    result.roc = std::move(metrics.roc);
    result.mae_per_node.reserve(data.q() - 1);
    for (Vertex s = 1; s < data.q(); ++s) {
        const auto table = bma_effects_serial(chain, s, data.xobs.col(s - 1));
        result.mae_per_node.push_back(
            mean_absolute_error(truth.beta_true.col(s - 1), table.bma));
    }
    return result;
}

std::vector<ReplicateResult> run_scenario(const SimConfig& cfg,
                                          const Hyperparameters& hp, long iterations,
                                          int jobs) {
    cfg.validate();
    std::vector<ReplicateResult> results(cfg.reps);
    const auto k_grid = default_k_grid();
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(jobs, 1)) \
    if (jobs > 1)
    for (int r = 0; r < cfg.reps; ++r) {
        try {
            Rng rng(derive_seed(cfg.seed, 2 * r));
            const Dag dag = random_dag(cfg.q, cfg.resolved_edge_prob(), rng);
            auto [data, truth] = generate_dataset(dag, cfg, rng);
            ChainConfig chain_cfg;
            chain_cfg.iterations = iterations;
            chain_cfg.seed = derive_seed(cfg.seed, 2 * r + 1);
            results[r] = evaluate_replicate(data, truth, hp, chain_cfg, k_grid);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median: empty input");
    const size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
    return 0.5 * (values[mid - 1] + hi);
}

}  // namespace dagprobit
