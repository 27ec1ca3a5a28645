#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dagprobit/dag.hpp"
#include "dagprobit/gauss.hpp"
#include "dagprobit/prior.hpp"
#include "dagprobit/rng.hpp"

namespace dagprobit {

// Observed data: binary response y and the continuous covariates X_2..X_q
// (column j-1 of xobs holds variable j, 1-based speak). The latent response
// column lives in McmcState, not here.
struct Dataset {
    Eigen::VectorXi y;
    Eigen::MatrixXd xobs;  // n x (q-1)

    long n() const { return y.size(); }
    int q() const { return static_cast<int>(xobs.cols()) + 1; }

    // require_both_classes enforces the posterior-propriety condition
    // (at least one 0 and one 1 in y)
    void validate(bool require_both_classes = true) const;
    void standardize();  // center and scale each covariate column
};

struct McmcState {
    Dag dag;
    CholeskyFactor chol;
    double theta0 = 0.0;
    Eigen::VectorXd x1;  // latent response column
};

struct ChainConfig {
    long iterations = 10000;
    long burn_in = -1;  // negative -> iterations/5
    long thin = 1;
    std::uint64_t seed = 0;
    std::optional<Dag> fixed_dag;     // skip DAG moves (naive-DAG baseline)
    std::optional<int> max_edges;     // optional sparsity cap on proposals
    bool update_latent = true;        // disable + supply observed_x1 for
    bool update_theta0 = true;        // fully observed Gaussian data
    std::optional<Eigen::VectorXd> observed_x1;
    // invoked after every iteration (tests use this to check invariants)
    std::function<void(const McmcState&, long)> on_iteration;

    long resolved_burn_in() const { return burn_in < 0 ? iterations / 5 : burn_in; }
    void validate() const;
};

// one stored DAG sample relative to the previous one (the chain changes at
// most one edge per iteration, so deltas stay tiny even under thinning)
struct DagDelta {
    std::vector<Edge> add, del;
};

struct ChainOutput {
    int q = 0;
    Dag first_dag{1};               // DAG of stored sample 0
    std::vector<DagDelta> deltas;   // deltas[t] maps sample t -> t+1
    std::vector<CholeskyFactor> chol_samples;
    std::vector<double> theta0_trace;

    long dag_proposed = 0, dag_accepted = 0;
    long theta0_proposed = 0, theta0_accepted = 0;
    std::uint64_t seed = 0;
    long iterations = 0, burn_in = 0, thin = 1;

    long num_samples() const { return static_cast<long>(theta0_trace.size()); }
    void for_each_dag(const std::function<void(long, const Dag&)>& fn) const;
    std::vector<Dag> materialize_dags() const;
    double dag_accept_rate() const;
    double theta0_accept_rate() const;

    // concatenation (used when pooling chains); requires matching q
    void append(const ChainOutput& other);
};

// log m(X_j | X_pa, D): closed-form node marginal likelihood with the
// Normal-Inverse-Gamma prior integrated out (fixed unit variance for the
// response node). X is the n x q augmented matrix, response in column 0.
double log_marginal_node(Vertex j, const std::vector<Vertex>& parents,
                         const Eigen::MatrixXd& x_aug, const Hyperparameters& hp);

// Full sampler: reversible-jump DAG moves with the partial-analytic-structure
// acceptance ratio, conjugate Cholesky updates, truncated-normal latent
// refresh, and the random-walk threshold step. Deterministic given seed.
ChainOutput run_chain(const Dataset& data, const Hyperparameters& hp,
                      const ChainConfig& cfg);

namespace detail {

// Gram-matrix backend shared by the sampler and the public wrapper
double log_marginal_node_gram(Vertex j, const std::vector<Vertex>& parents,
                              const Eigen::MatrixXd& gram, long n,
                              const Hyperparameters& hp, bool response_node);

// log acceptance ratio of the threshold move theta0 -> cand given per-row
// latent means mu (variance 1); exposed for unit tests
double theta0_log_ratio(const Eigen::VectorXi& y, const Eigen::VectorXd& mu,
                        double theta0, double cand);

// draw the Cholesky parameters from their full conditional given the Gram
// matrix of the augmented data
CholeskyFactor sample_chol_posterior_gram(const Dag& dag, const Eigen::MatrixXd& gram,
                                          long n, const Hyperparameters& hp, Rng& rng);

std::pair<Dag, bool> dag_move_gram(const Dag& dag, const Eigen::MatrixXd& gram, long n,
                                   const Hyperparameters& hp, Rng& rng,
                                   std::optional<int> max_edges);

}  // namespace detail

// posterior draw of (D, L) given the augmented data matrix
CholeskyFactor sample_chol_posterior(const Dag& dag, const Eigen::MatrixXd& x_aug,
                                     const Hyperparameters& hp, Rng& rng);

// latent full conditional: per row, N(-L_resp' x_pa, 1) truncated to the
// class interval (theta_{y-1}, theta_y]
Eigen::VectorXd update_latent(const Dataset& data, const Dag& dag,
                              const CholeskyFactor& chol, double theta0, Rng& rng);

// One structure move: propose uniformly from the valid-operator set, accept
// with the collapsed ratio (node marginals for every node whose parent set
// changed, prior ratio, proposal-normalizer ratio). Returns the next DAG and
// whether the proposal was taken.
std::pair<Dag, bool> dag_move(const Dag& dag, const Eigen::MatrixXd& x_aug,
                              const Hyperparameters& hp, Rng& rng,
                              std::optional<int> max_edges = std::nullopt);

// Random-walk threshold move with the latent column integrated out of the
// ratio (the response node has no children, so the integral is a product of
// normal CDF differences). Requires both classes in y.
std::pair<double, bool> update_theta0(const Dataset& data, const Dag& dag,
                                      const CholeskyFactor& chol, double theta0,
                                      const Hyperparameters& hp, Rng& rng);

}  // namespace dagprobit
