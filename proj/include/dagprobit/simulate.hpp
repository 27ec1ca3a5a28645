#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dagprobit/causal.hpp"
#include "dagprobit/dag.hpp"
#include "dagprobit/gauss.hpp"
#include "dagprobit/mcmc.hpp"

namespace dagprobit {

struct SimConfig {
    int q = 10;
    long n = 100;
    int reps = 1;
    double edge_prob = -1.0;  // negative -> 3/(2q-2)
    double coeff_lo = 1.0;    // |L| drawn uniformly from [lo, hi], random sign
    double coeff_hi = 2.0;
    double theta0_true = 0.0;
    std::uint64_t seed = 0;
    int max_retries = 100;  // redraws when y comes out single-class

    double resolved_edge_prob() const;
    void validate() const;
};

// each unordered pair becomes an edge with probability p, oriented from the
// higher to the lower label; acyclic and response-childless by construction
Dag random_dag(int q, double p, Rng& rng);

struct GroundTruth {
    Dag dag{1};
    CholeskyFactor chol;
    Eigen::MatrixXd sigma;
    double theta0 = 0.0;
    // beta_true(i, s-1) = true effect of do(X_s = x_{i,s}), s = 2..q 1-based
    Eigen::MatrixXd beta_true;
};

// n draws from the structural equation model with D = I, thresholded into y
std::pair<Dataset, GroundTruth> generate_dataset(const Dag& dag, const SimConfig& cfg,
                                                 Rng& rng);

struct RocPoint {
    double k = 0.0, fpr = 0.0, sen = 0.0, spe = 0.0;
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct EvalReport {
    std::vector<RocPoint> roc;
    double auc = 0.0;
    double p_star = 0.0;
    std::vector<double> mae_per_node;  // indexed s-2 (1-based speak)
};

std::vector<double> default_k_grid(int points = 101);

// classify every ordered pair by edge_probs >= k against the true DAG;
// skeleton mode pools both directions of a pair before thresholding
EvalReport structure_metrics(const Dag& truth, const PosteriorSummary& summary,
                             const std::vector<double>& k_grid,
                             bool skeleton = false);

double auc_from_roc(std::vector<RocPoint> roc);

// p* = fraction of covariates whose edge-into-response call at k_star matches
// the true DAG
double predictor_recovery(const Dag& truth, const PosteriorSummary& summary,
                          double k_star = 0.5);

double mean_absolute_error(const Eigen::VectorXd& truth, const Eigen::VectorXd& est);

// the fixed star DAG (every covariate a parent of the response) used as the
// no-adjustment comparison arm
Dag naive_dag(int q);

// run the chain under the fixed naive DAG, then BMA effects for every
// intervened node at its observed values
std::vector<CausalEffectTable> naive_baseline(const Dataset& data,
                                              const Hyperparameters& hp,
                                              ChainConfig cfg);

struct TwoChainReport {
    std::vector<Vertex> nodes;
    std::vector<double> max_abs_diff;      // per node
    std::vector<CausalEffectTable> chain1;  // per node, aligned with nodes
    std::vector<CausalEffectTable> chain2;
};

// two independently seeded chains of lengths T1, T2; BMA agreement per node
TwoChainReport two_chain_diagnostic(const Dataset& data, const Hyperparameters& hp,
                                    const ChainConfig& base, long t1, long t2);

// One simulated replicate fitted and scored end to end.
struct ReplicateResult {
    double auc = 0.0;
    double p_star = 0.0;
    std::vector<double> mae_per_node;
    std::vector<RocPoint> roc;
};

ReplicateResult evaluate_replicate(const Dataset& data, const GroundTruth& truth,
                                   const Hyperparameters& hp, const ChainConfig& cfg,
                                   const std::vector<double>& k_grid);

// reps independent replicates with split RNG streams; jobs > 1 fans out via
// OpenMP, jobs == 1 is the serial reference (identical output either way)
std::vector<ReplicateResult> run_scenario(const SimConfig& cfg,
                                          const Hyperparameters& hp, long iterations,
                                          int jobs = 1);

double median(std::vector<double> values);

}  // namespace dagprobit
