// Acceptance suite: every criterion pinned in code, one PASS/FAIL line each.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <omp.h>

#include "dagprobit/causal.hpp"
#include "dagprobit/dag.hpp"
#include "dagprobit/gauss.hpp"
#include "dagprobit/io.hpp"
#include "dagprobit/mcmc.hpp"
#include "dagprobit/prior.hpp"
#include "dagprobit/rng.hpp"
#include "dagprobit/simulate.hpp"
#include "oracles.hpp"

using namespace dagprobit;

namespace {

void report(int criterion, const char* name, bool pass) {
    std::printf("[ACCEPT] criterion %2d (%s): %s\n", criterion, name,
                pass ? "PASS" : "FAIL");
    std::fflush(stdout);
}

Hyperparameters default_hp(int q, long n) {
    Hyperparameters hp;
    return hp.resolved(q, n);
}

// q = 10 scenario grid shared by criteria 4-6: 10 replicates, T = 10^4,
// common master seed so the same DAGs appear at every sample size
const std::map<long, std::vector<ReplicateResult>>& scenario_grid() {
    static const std::map<long, std::vector<ReplicateResult>> grid = [] {
        std::map<long, std::vector<ReplicateResult>> out;
        const int jobs = omp_get_max_threads();
        for (long n : {10L, 20L, 40L, 100L, 200L, 500L}) {
            SimConfig cfg;
            cfg.q = 10;
            cfg.n = n;
            cfg.reps = 10;
            cfg.seed = 90210;
            Hyperparameters hp;
            out[n] = run_scenario(cfg, hp, 10000, jobs);
        }
        return out;
    }();
    return grid;
}

std::vector<double> pooled_mae(const std::vector<ReplicateResult>& reps) {
    std::vector<double> values;
    for (const auto& r : reps)
        values.insert(values.end(), r.mae_per_node.begin(), r.mae_per_node.end());
    return values;
}

}  // namespace

TEST_CASE("criterion 1: marginal-likelihood quadrature oracle") {
    Rng rng(20240101);
    const int q = 5;
    bool pass = true;
    double worst_rel = 0.0, worst_resp = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const long n = 1 + static_cast<long>(rng.uniform() * 5);
        Eigen::MatrixXd x(n, q);
        for (long i = 0; i < n; ++i)
            for (int j = 0; j < q; ++j) x(i, j) = rng.normal();
        Hyperparameters hp;
        hp.g = 0.2 + 2.0 * rng.uniform();
        hp.a = q + 1.0 + 2.0 * rng.uniform();
        hp.pi = 0.2;

        const bool with_parent = trial % 2 == 1;
        const std::vector<Vertex> pa = with_parent ? std::vector<Vertex>{2}
                                                   : std::vector<Vertex>{};
        // non-response node (Normal-Inverse-Gamma parameters integrated out)
        const double lm = log_marginal_node(3, pa, x, hp);
        const double shape = node_shape(hp, q, static_cast<int>(pa.size()));
        const double oracle = oracles::quad_marginal_nonresponse(
            x.col(3), x.col(2), with_parent, shape, hp.g);
        const double rel = std::fabs(std::expm1(lm - std::log(oracle)));
        worst_rel = std::max(worst_rel, rel);

        // response node (fixed unit variance; settles the printed-sign question)
        const double lm0 = log_marginal_node(0, pa.empty() ? pa : std::vector<Vertex>{2},
                                             x, hp);
        const double oracle0 = oracles::quad_marginal_response(
            x.col(0), x.col(2), with_parent, hp.g);
        const double rel0 = std::fabs(std::expm1(lm0 - std::log(oracle0)));
        worst_resp = std::max(worst_resp, rel0);
    }
    pass = worst_rel < 1e-4 && worst_resp < 1e-6;
    report(1, "marginal likelihood vs adaptive quadrature", pass);
    CAPTURE(worst_rel);
    CAPTURE(worst_resp);
    CHECK(worst_rel < 1e-4);
    CHECK(worst_resp < 1e-6);
}

TEST_CASE("criterion 2: exact posterior equivalence at q = 3") {
    const int q = 3;
    const long n = 100;
    Rng gen(555);
    Eigen::MatrixXd x(n, q);
    for (long i = 0; i < n; ++i) {
        x(i, 2) = gen.normal();
        x(i, 1) = 1.1 * x(i, 2) + gen.normal();
        x(i, 0) = -0.8 * x(i, 1) + gen.normal();
    }
    const Hyperparameters hp = default_hp(q, n);

    const auto dags = oracles::enumerate_dags(q);
    REQUIRE(dags.size() == 12);
    std::vector<double> exact;
    for (const Dag& d : dags) {
        double lp = log_prior_dag(d, hp);
        for (Vertex j = 0; j < q; ++j)
            lp += log_marginal_node(j, d.parents(j), x, hp);
        exact.push_back(lp);
    }
    const double lmax = *std::max_element(exact.begin(), exact.end());
    double z = 0.0;
    for (double& v : exact) z += (v = std::exp(v - lmax));
    for (double& v : exact) v /= z;

    Dataset data;
    data.y.resize(n);
    for (long i = 0; i < n; ++i) data.y[i] = x(i, 0) > 0 ? 1 : 0;
    data.xobs = x.rightCols(q - 1);
    ChainConfig cfg;
    cfg.iterations = 200000;
    cfg.burn_in = 10000;
    cfg.seed = 2468;
    cfg.update_latent = false;
    cfg.update_theta0 = false;
    cfg.observed_x1 = x.col(0);
    const ChainOutput out = run_chain(data, hp, cfg);

    std::map<std::vector<Edge>, long> counts;
    out.for_each_dag([&](long, const Dag& d) { counts[d.edges()] += 1; });
    double tv = 0.0;
    for (size_t k = 0; k < dags.size(); ++k) {
        const auto it = counts.find(dags[k].edges());
        const double f =
            it == counts.end() ? 0.0
                               : static_cast<double>(it->second) / out.num_samples();
        tv += std::fabs(f - exact[k]);
    }
    tv /= 2.0;
    const bool pass = tv < 0.02;
    report(2, "q=3 enumerated posterior, total variation", pass);
    CAPTURE(tv);
    CHECK(tv < 0.02);
}

TEST_CASE("criterion 3: proposition 3.1 vs interventional Monte Carlo") {
    Rng rng(31415);
    bool pass = true;
    for (int trial = 0; trial < 10; ++trial) {
        const int q = 3 + static_cast<int>(rng.uniform() * 4);  // up to 6
        Dag dag(q);
        for (Vertex v = 0; v < q; ++v)
            for (Vertex u = v + 1; u < q; ++u)
                if (rng.uniform() < 0.5) dag.add_edge(u, v);
        CholeskyFactor chol;
        chol.sigma2.resize(q);
        chol.coeffs.resize(q);
        for (Vertex j = 0; j < q; ++j) {
            chol.sigma2[j] = j == kResponse ? 1.0 : 0.4 + 1.2 * rng.uniform();
            chol.coeffs[j].resize(dag.parents(j).size());
            for (auto& c : chol.coeffs[j])
                c = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
        }
        const Eigen::MatrixXd sigma = sigma_from_cholesky(dag, chol);
        const Vertex s = 1 + static_cast<Vertex>(rng.uniform() * (q - 1));
        const double x_tilde = 4.0 * rng.uniform() - 2.0;
        const double theta0 = 0.5 * rng.normal();

        const auto params = post_intervention(sigma, s, dag.parents(s));
        const long draws = 1000000;
        const auto mc =
            oracles::simulate_do(dag, chol, s, x_tilde, theta0, draws, rng);

        const double mean_se = std::sqrt(params.tau1_sq / draws);
        const double var_se = params.tau1_sq * std::sqrt(2.0 / (draws - 1.0));
        const double eff = causal_effect(params, theta0, x_tilde);
        const bool ok_mean = std::fabs(mc.mean - params.gamma_s * x_tilde) < 3.0 * mean_se;
        const bool ok_var = std::fabs(mc.var - params.tau1_sq) < 3.0 * var_se;
        const bool ok_eff = std::fabs(mc.prob_above - eff) < 0.005;
        CAPTURE(trial);
        CHECK(ok_mean);
        CHECK(ok_var);
        CHECK(ok_eff);
        pass = pass && ok_mean && ok_var && ok_eff;
    }
    report(3, "post-intervention law vs truncated-factorization MC", pass);
}

TEST_CASE("criterion 4: scaled AUC replication, q = 10") {
    const auto& grid = scenario_grid();
    double auc100 = 0.0, auc500 = 0.0;
    for (const auto& r : grid.at(100)) auc100 += r.auc;
    for (const auto& r : grid.at(500)) auc500 += r.auc;
    auc100 /= grid.at(100).size();
    auc500 /= grid.at(500).size();
    const bool pass = auc100 >= 0.85 && auc500 >= 0.90;
    std::printf("  mean AUC: n=100 %.4f (>= 0.85), n=500 %.4f (>= 0.90)\n", auc100,
                auc500);
    report(4, "mean AUC at n=100 and n=500", pass);
    CHECK(auc100 >= 0.85);
    CHECK(auc500 >= 0.90);
}

TEST_CASE("criterion 5: scaled MAE replication and trend, q = 10") {
    const auto& grid = scenario_grid();
    const double m500 = median(pooled_mae(grid.at(500)));
    const double m200 = median(pooled_mae(grid.at(200)));
    const double m100 = median(pooled_mae(grid.at(100)));
    const double m40 = median(pooled_mae(grid.at(40)));
    const double m20 = median(pooled_mae(grid.at(20)));
    const double m10 = median(pooled_mae(grid.at(10)));
    const bool level_ok = m500 <= 0.05;
    const bool trend_big = m100 >= m200 && m200 >= m500;
    const bool trend_small = m10 >= m20 && m20 >= m40;
    const bool pass = level_ok && trend_big && trend_small;
    std::printf(
        "  median MAE by n: 10:%.4f 20:%.4f 40:%.4f | 100:%.4f 200:%.4f 500:%.4f "
        "(n=500 <= 0.05)\n",
        m10, m20, m40, m100, m200, m500);
    report(5, "median MAE level and monotone trends", pass);
    CHECK(level_ok);
    CHECK(trend_big);
    CHECK(trend_small);
}

TEST_CASE("criterion 6: scaled predictor recovery, q = 10") {
    const auto& grid = scenario_grid();
    std::vector<double> p100, p500;
    for (const auto& r : grid.at(100)) p100.push_back(r.p_star);
    for (const auto& r : grid.at(500)) p500.push_back(r.p_star);
    const double med100 = median(p100);
    const double med500 = median(p500);
    const bool pass = med100 >= 0.8 && med500 >= 0.95;
    std::printf("  median p*: n=100 %.3f (>= 0.80), n=500 %.3f (>= 0.95)\n", med100,
                med500);
    report(6, "median p* at n=100 and n=500", pass);
    CHECK(med100 >= 0.8);
    CHECK(med500 >= 0.95);
}

TEST_CASE("criterion 7: sampler unit laws") {
    const long n = 100000;
    const double crit = 1.6276 / std::sqrt(static_cast<double>(n));
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<TruncatedNormalSpec> configs = {
        {0.0, 1.0, -inf, inf},   {0.0, 1.0, 0.0, inf},    {1.5, 4.0, -1.0, 2.0},
        {0.0, 1.0, 6.0, inf},    {-2.0, 0.25, -inf, -3.2},
    };
    bool pass = true;
    int idx = 0;
    for (const auto& spec : configs) {
        Rng rng(777 + idx++);
        std::vector<double> draws(n);
        for (long i = 0; i < n; ++i) draws[i] = sample_truncated_normal(spec, rng);
        const double d = oracles::ks_statistic(
            draws, [&](double v) { return truncated_normal_cdf(spec, v); });
        CAPTURE(idx);
        CAPTURE(d);
        CHECK(d < crit);
        pass = pass && d < crit;
    }
    {
        Rng rng(31);
        double ig = 0.0;
        for (long i = 0; i < n; ++i) ig += sample_inverse_gamma(3.0, 4.0, rng);
        ig /= n;
        const bool ok = std::fabs(ig - 2.0) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n));
        CHECK(ok);
        pass = pass && ok;

        Eigen::VectorXd mean(2);
        mean << -1.0, 2.0;
        Eigen::MatrixXd cov(2, 2);
        cov << 1.5, -0.4, -0.4, 0.8;
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
        Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(2, 2);
        for (long i = 0; i < n; ++i) {
            const Eigen::VectorXd v = sample_mvn(mean, cov, rng);
            sum += v;
            ss += (v - mean) * (v - mean).transpose();
        }
        for (int i = 0; i < 2; ++i) {
            const bool ok_mean =
                std::fabs(sum[i] / n - mean[i]) < 3.0 * std::sqrt(cov(i, i) / n);
            const bool ok_var = std::fabs(ss(i, i) / n - cov(i, i)) <
                                3.0 * cov(i, i) * std::sqrt(2.0 / n);
            CHECK(ok_mean);
            CHECK(ok_var);
            pass = pass && ok_mean && ok_var;
        }
    }
    report(7, "truncated-normal KS + moment checks", pass);
}

TEST_CASE("criterion 8: structural invariants across a full fit") {
    SimConfig sim;
    sim.q = 6;
    sim.n = 150;
    sim.seed = 8080;
    Rng rng(sim.seed);
    const Dag dag = random_dag(sim.q, sim.resolved_edge_prob(), rng);
    const auto [data, truth] = generate_dataset(dag, sim, rng);
    const Hyperparameters hp = default_hp(sim.q, sim.n);

    ChainConfig cfg;
    cfg.iterations = 10000;
    cfg.seed = 1234;
    long violations = 0;
    cfg.on_iteration = [&](const McmcState& st, long) {
        if (!st.dag.is_valid()) ++violations;
        if (st.chol.sigma2[kResponse] != 1.0) ++violations;
        for (long i = 0; i < data.n(); ++i) {
            const bool ok =
                data.y[i] == 1 ? st.x1[i] > st.theta0 : st.x1[i] <= st.theta0;
            if (!ok) ++violations;
        }
    };
    const ChainOutput out1 = run_chain(data, hp, cfg);
    bool stored_valid = true;
    out1.for_each_dag([&](long, const Dag& d) { stored_valid &= d.is_valid(); });

    cfg.on_iteration = nullptr;
    const ChainOutput out2 = run_chain(data, hp, cfg);
    bool identical = out1.theta0_trace == out2.theta0_trace &&
                     out1.dag_accepted == out2.dag_accepted &&
                     out1.theta0_accepted == out2.theta0_accepted;
    const auto dags1 = out1.materialize_dags();
    const auto dags2 = out2.materialize_dags();
    identical = identical && dags1.size() == dags2.size();
    for (size_t t = 0; identical && t < dags1.size(); ++t) {
        identical = dags1[t] == dags2[t] &&
                    out1.chol_samples[t].sigma2 == out2.chol_samples[t].sigma2 &&
                    out1.chol_samples[t].coeffs == out2.chol_samples[t].coeffs;
    }
    const bool pass = violations == 0 && stored_valid && identical;
    report(8, "DAG validity, thresholding invariant, determinism", pass);
    CAPTURE(violations);
    CHECK(violations == 0);
    CHECK(stored_valid);
    CHECK(identical);
}

TEST_CASE("criterion 9: prior recovery with DAG moves only (n = 0)") {
    const int q = 5;
    Hyperparameters hp;
    hp.a = q + 1.0;
    hp.g = 1.0;
    hp.pi = default_edge_prob(q);  // 3/8

    Dataset empty;
    empty.y.resize(0);
    empty.xobs.resize(0, q - 1);
    ChainConfig cfg;
    cfg.iterations = 100000;
    cfg.burn_in = 5000;
    cfg.seed = 424242;
    cfg.update_latent = false;
    cfg.update_theta0 = false;
    const ChainOutput out = run_chain(empty, hp, cfg);
    const PosteriorSummary summary = edge_probs(out);

    // the letter of the criterion: inclusion frequency of the response's
    // incoming edges equals pi (each pair {u, response} has exactly one legal
    // orientation, so its prior marginal is exactly Bernoulli(pi))
    double into_response = 0.0;
    for (Vertex u = 1; u < q; ++u) into_response += summary.edge_probs(u, kResponse);
    into_response /= (q - 1);
    const bool letter_ok = std::fabs(into_response - hp.pi) < 0.02;

    // stronger check: every directed-pair frequency matches its exactly
    // enumerated marginal under the acyclicity-restricted prior
    const auto dags = oracles::enumerate_dags(q);
    Eigen::MatrixXd exact = Eigen::MatrixXd::Zero(q, q);
    double z = 0.0;
    const double logit = std::log(hp.pi / (1.0 - hp.pi));
    for (const Dag& d : dags) {
        const double w = std::exp(logit * d.num_edges());
        z += w;
        for (const auto& [u, v] : d.edges()) exact(u, v) += w;
    }
    exact /= z;
    double worst_pair = 0.0;
    for (Vertex u = 0; u < q; ++u)
        for (Vertex v = 0; v < q; ++v)
            if (u != v)
                worst_pair = std::max(
                    worst_pair, std::fabs(summary.edge_probs(u, v) - exact(u, v)));
    const bool pairs_ok = worst_pair < 0.02;

    const bool pass = letter_ok && pairs_ok;
    std::printf(
        "  into-response frequency %.4f vs pi %.4f; worst pair deviation %.4f\n",
        into_response, hp.pi, worst_pair);
    report(9, "n=0 chain recovers the DAG prior", pass);
    CHECK(letter_ok);
    CHECK(pairs_ok);
}

TEST_CASE("criterion 10: confounding-adjustment ordering vs the naive arm") {
    // confounded truth: 3 -> 2 -> 1 plus 3 -> 1 (1-based), coefficients
    // resampled per replicate
    const int q = 3;
    const long n = 200;
    const Dag truth_dag = Dag::from_edges(q, {{2, 1}, {1, 0}, {2, 0}});
    int full_wins = 0;
    std::vector<double> full_medians, naive_medians;
    for (int rep = 0; rep < 10; ++rep) {
        SimConfig sim;
        sim.q = q;
        sim.n = n;
        sim.seed = derive_seed(606060, rep);
        Rng rng(sim.seed);
        const auto [data, truth] = generate_dataset(truth_dag, sim, rng);
        const Hyperparameters hp = default_hp(q, n);

        ChainConfig cfg;
        cfg.iterations = 5000;
        cfg.seed = derive_seed(707070, rep);

        const ChainOutput full = run_chain(data, hp, cfg);
        std::vector<double> full_mae, naive_mae;
        for (Vertex s = 1; s < q; ++s) {
            const auto table = bma_effects_serial(full, s, data.xobs.col(s - 1));
            full_mae.push_back(
                mean_absolute_error(truth.beta_true.col(s - 1), table.bma));
        }
        const auto naive_tables = naive_baseline(data, hp, cfg);
        for (Vertex s = 1; s < q; ++s)
            naive_mae.push_back(mean_absolute_error(truth.beta_true.col(s - 1),
                                                    naive_tables[s - 1].bma));
        const double fm = median(full_mae), nm = median(naive_mae);
        full_medians.push_back(fm);
        naive_medians.push_back(nm);
        if (fm < nm) ++full_wins;
    }
    const bool pass = full_wins >= 8;
    for (int r = 0; r < 10; ++r)
        std::printf("  rep %d: full MAE %.4f vs naive %.4f\n", r, full_medians[r],
                    naive_medians[r]);
    report(10, "full method beats naive baseline on confounded data", pass);
    CAPTURE(full_wins);
    CHECK(full_wins >= 8);

    // well-specified side condition: on data generated from the naive DAG the
    // two arms agree within noise
    SimConfig sim;
    sim.q = q;
    sim.n = n;
    sim.seed = 131313;
    Rng rng(sim.seed);
    const auto [data, truth] = generate_dataset(naive_dag(q), sim, rng);
    const Hyperparameters hp = default_hp(q, n);
    ChainConfig cfg;
    cfg.iterations = 5000;
    cfg.seed = 999;
    const ChainOutput full = run_chain(data, hp, cfg);
    std::vector<double> full_mae, naive_mae;
    for (Vertex s = 1; s < q; ++s) {
        const auto t1 = bma_effects_serial(full, s, data.xobs.col(s - 1));
        full_mae.push_back(mean_absolute_error(truth.beta_true.col(s - 1), t1.bma));
    }
    const auto naive_tables = naive_baseline(data, hp, cfg);
    for (Vertex s = 1; s < q; ++s)
        naive_mae.push_back(
            mean_absolute_error(truth.beta_true.col(s - 1), naive_tables[s - 1].bma));
    CHECK(std::fabs(median(full_mae) - median(naive_mae)) < 0.05);
}
