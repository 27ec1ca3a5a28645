#include <doctest.h>

#include <cmath>

#include "dagprobit/errors.hpp"
#include "dagprobit/simulate.hpp"
#include "oracles.hpp"

using namespace dagprobit;

TEST_CASE("random dag: construction guarantees and edge count") {
    Rng rng(3);
    long edges = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        const Dag d = random_dag(20, 3.0 / 38.0, rng);
        CHECK(d.is_valid());
        edges += d.num_edges();
    }
    // expected edge count p * q(q-1)/2 = 15
    const double mean_edges = static_cast<double>(edges) / trials;
    CHECK(mean_edges == doctest::Approx(15.0).epsilon(0.05));
    CHECK_THROWS_AS(random_dag(5, 1.5, rng), ValidationError);
}

TEST_CASE("generate dataset: SEM covariance identity and thresholding") {
    SimConfig cfg;
    cfg.q = 5;
    cfg.n = 60000;
    cfg.seed = 10;
    Rng rng(cfg.seed);
    const Dag dag = random_dag(cfg.q, 0.4, rng);
    const auto [data, truth] = generate_dataset(dag, cfg, rng);

    CHECK(data.n() == cfg.n);
    CHECK(truth.sigma.rows() == cfg.q);
    // implied covariance equals (L D^{-1} L')^{-1} exactly
    const Eigen::MatrixXd omega = omega_from_cholesky(dag, truth.chol);
    CHECK((truth.sigma * omega - Eigen::MatrixXd::Identity(cfg.q, cfg.q)).norm() <
          1e-10);

    // sample covariance of the covariates matches the implied Sigma block
    Eigen::MatrixXd centered = data.xobs;
    for (int c = 0; c < centered.cols(); ++c)
        centered.col(c).array() -= centered.col(c).mean();
    const Eigen::MatrixXd sample_cov =
        centered.transpose() * centered / static_cast<double>(cfg.n - 1);
    for (int i = 0; i < cfg.q - 1; ++i)
        for (int j = 0; j < cfg.q - 1; ++j) {
            const double truth_ij = truth.sigma(i + 1, j + 1);
            const double scale =
                std::sqrt(truth.sigma(i + 1, i + 1) * truth.sigma(j + 1, j + 1));
            CHECK(std::fabs(sample_cov(i, j) - truth_ij) < 4.0 * scale / std::sqrt(cfg.n * 0.5));
        }

    // theta0 = 0 and a symmetric latent give y ~ Bernoulli(1/2)
    const double ybar = data.y.cast<double>().mean();
    CHECK(std::fabs(ybar - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(cfg.n)));

    // empty DAG: independent unit normals
    SimConfig small = cfg;
    small.n = 20000;
    const auto [d2, t2] = generate_dataset(Dag(3), small, rng);
    CHECK(t2.sigma == Eigen::MatrixXd::Identity(3, 3));
    CHECK(std::fabs(d2.xobs.col(0).mean()) < 4.0 / std::sqrt(static_cast<double>(small.n)));
    // flat effects for the diagonal model: beta_true constant in x
    for (long i = 1; i < small.n; ++i)
        CHECK(t2.beta_true(i, 0) == doctest::Approx(t2.beta_true(0, 0)));
}

TEST_CASE("structure metrics: perfect and degenerate summaries") {
    const Dag truth = Dag::from_edges(4, {{1, 0}, {3, 2}});
    const int q = 4;
    PosteriorSummary perfect{Eigen::MatrixXd::Zero(q, q)};
    perfect.edge_probs(1, 0) = 1.0;
    perfect.edge_probs(3, 2) = 1.0;
    const auto grid = default_k_grid(11);
    const EvalReport r1 = structure_metrics(truth, perfect, grid);
    CHECK(r1.auc == doctest::Approx(1.0));
    CHECK(r1.p_star == doctest::Approx(1.0));
    for (const auto& pt : r1.roc) {
        if (pt.k > 0.0 && pt.k < 1.0) {
            CHECK(pt.sen == doctest::Approx(1.0));
            CHECK(pt.spe == doctest::Approx(1.0));
        }
    }

    // all-0.5 summary: at k <= 0.5 everything is included
    PosteriorSummary half{Eigen::MatrixXd::Constant(q, q, 0.5)};
    half.edge_probs.diagonal().setZero();
    const EvalReport r2 = structure_metrics(truth, half, {0.3});
    CHECK(r2.roc[0].sen == doctest::Approx(1.0));
    CHECK(r2.roc[0].spe == doctest::Approx(0.0));
    // SEN + FN rate = 1 and SPE + FP rate = 1 by construction
    const auto& pt = r2.roc[0];
    CHECK(pt.sen + static_cast<double>(pt.fn) / (pt.tp + pt.fn) == doctest::Approx(1.0));
    CHECK(pt.spe + static_cast<double>(pt.fp) / (pt.tn + pt.fp) == doctest::Approx(1.0));
}

TEST_CASE("auc is invariant under monotone transformation of probabilities") {
    Rng rng(21);
    const Dag truth = Dag::from_edges(5, {{1, 0}, {4, 2}, {3, 1}});
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(5, 5);
    for (int u = 0; u < 5; ++u)
        for (int v = 0; v < 5; ++v)
            if (u != v) probs(u, v) = rng.uniform() * 0.9;
    PosteriorSummary raw{probs};
    // monotone map p -> p^3 (grid rescaled the same way keeps thresholds aligned)
    PosteriorSummary cubed{probs.array().pow(3.0).matrix()};
    auto grid = default_k_grid(201);
    std::vector<double> grid3;
    for (double k : grid) grid3.push_back(k * k * k);
    const double a1 = structure_metrics(truth, raw, grid).auc;
    const double a2 = structure_metrics(truth, cubed, grid3).auc;
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-9));
}

TEST_CASE("predictor recovery counts matches") {
    const int q = 5;
    const Dag truth = Dag::from_edges(q, {{1, 0}});
    PosteriorSummary summary{Eigen::MatrixXd::Zero(q, q)};
    summary.edge_probs(2, 0) = 0.9;  // wrong pick: selects 3->1, misses 2->1
    CHECK(predictor_recovery(truth, summary) == doctest::Approx(0.5));
    summary.edge_probs(2, 0) = 0.0;
    summary.edge_probs(1, 0) = 0.9;
    CHECK(predictor_recovery(truth, summary) == doctest::Approx(1.0));
    // empty summary, empty truth into the response
    const Dag none = Dag::from_edges(q, {{3, 2}});
    PosteriorSummary zero{Eigen::MatrixXd::Zero(q, q)};
    CHECK(predictor_recovery(none, zero) == doctest::Approx(1.0));
}

TEST_CASE("mae basics") {
    Eigen::VectorXd a(3), b(3);
    a << 0.2, 0.4, 0.6;
    b = a;
    CHECK(mean_absolute_error(a, b) == doctest::Approx(0.0));
    b.array() += 0.1;
    CHECK(mean_absolute_error(a, b) == doctest::Approx(0.1));
    Eigen::VectorXd c(2);
    CHECK_THROWS_AS(mean_absolute_error(a, c), ValidationError);
}

TEST_CASE("naive baseline pins the star DAG") {
    SimConfig cfg;
    cfg.q = 4;
    cfg.n = 80;
    cfg.seed = 44;
    Rng rng(cfg.seed);
    const Dag dag = random_dag(cfg.q, 0.4, rng);
    const auto [data, truth] = generate_dataset(dag, cfg, rng);
    Hyperparameters hp;
    ChainConfig chain_cfg;
    chain_cfg.iterations = 300;
    chain_cfg.seed = 5;
    chain_cfg.fixed_dag = naive_dag(cfg.q);
    const ChainOutput out = run_chain(data, hp.resolved(cfg.q, cfg.n), chain_cfg);
    out.for_each_dag([&](long, const Dag& d) {
        CHECK(d == naive_dag(cfg.q));
    });
    CHECK(out.dag_proposed == 0);
    const auto tables = naive_baseline(data, hp.resolved(cfg.q, cfg.n), chain_cfg);
    CHECK(tables.size() == static_cast<size_t>(cfg.q - 1));
}

TEST_CASE("two-chain diagnostic: identical seeds agree exactly") {
    SimConfig cfg;
    cfg.q = 4;
    cfg.n = 60;
    cfg.seed = 3;
    Rng rng(cfg.seed);
    const auto [data, truth] =
        generate_dataset(random_dag(cfg.q, 0.4, rng), cfg, rng);
    Hyperparameters hp;
    ChainConfig base;
    base.seed = 71;
    const auto report =
        two_chain_diagnostic(data, hp.resolved(cfg.q, cfg.n), base, 400, 400);
    CHECK(report.nodes.size() == static_cast<size_t>(cfg.q - 1));
    // equal lengths and the same derived seed index would only coincide if we
    // asked for it; instead check the self-consistency path: same config run
    // twice gives the same report
    const auto report2 =
        two_chain_diagnostic(data, hp.resolved(cfg.q, cfg.n), base, 400, 400);
    for (size_t i = 0; i < report.nodes.size(); ++i)
        CHECK(report.max_abs_diff[i] == report2.max_abs_diff[i]);
    CHECK_THROWS_AS(
        two_chain_diagnostic(data, hp.resolved(cfg.q, cfg.n), base, 5, 400),
        ValidationError);
}

TEST_CASE("run_scenario: serial and parallel replicate paths agree") {
    SimConfig cfg;
    cfg.q = 5;
    cfg.n = 60;
    cfg.reps = 3;
    cfg.seed = 12;
    Hyperparameters hp;
    const auto serial = run_scenario(cfg, hp, 300, 1);
    const auto parallel = run_scenario(cfg, hp, 300, 4);
    REQUIRE(serial.size() == parallel.size());
    for (size_t r = 0; r < serial.size(); ++r) {
        CHECK(serial[r].auc == parallel[r].auc);
        CHECK(serial[r].p_star == parallel[r].p_star);
        CHECK(serial[r].mae_per_node == parallel[r].mae_per_node);
    }
}

TEST_CASE("median helper") {
    CHECK(median({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
    CHECK_THROWS_AS(median({}), ValidationError);
}
