#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dagprobit/dag.hpp"
#include "dagprobit/rng.hpp"

namespace dagprobit {

// Cholesky parameters (D, L) of a DAG-constrained precision matrix
// Omega = L D^{-1} L^T: per-node conditional variances sigma2[j] and edge
// coefficients coeffs[j], aligned entrywise with dag.parents(j) (which is
// sorted ascending). sigma2[kResponse] is pinned to 1 for identifiability.
struct CholeskyFactor {
    std::vector<double> sigma2;
    std::vector<std::vector<double>> coeffs;

    int num_vertices() const { return static_cast<int>(sigma2.size()); }
    static CholeskyFactor identity(int q);
};

// throws ValidationError when shapes disagree with the DAG or variances are
// not positive
void check_consistent(const Dag& dag, const CholeskyFactor& chol);

// Omega = L D^{-1} L^T, assembled from per-node family outer products
Eigen::MatrixXd omega_from_cholesky(const Dag& dag, const CholeskyFactor& chol);

// Sigma = Omega^{-1} via triangular solves against the SEM factors
Eigen::MatrixXd sigma_from_cholesky(const Dag& dag, const CholeskyFactor& chol);

// single column of Sigma (all that causal-effect reconstruction needs)
Eigen::VectorXd sigma_column(const Dag& dag, const CholeskyFactor& chol, Vertex k);

// L_{<j]} = -(Sigma_pa,pa)^{-1} Sigma_pa,j ; sigma_j^2 = Sigma_jj|pa(j).
// Requires Sigma s.p.d.; round-trips exactly when Sigma is Markov w.r.t. dag.
CholeskyFactor cholesky_from_sigma(const Dag& dag, const Eigen::MatrixXd& sigma);

struct TruncatedNormalSpec {
    double mean = 0.0;
    double variance = 1.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

// Draw from N(mean, variance) restricted to (lower, upper). Inverse-CDF in
// the bulk; Robert-style exponential rejection once the interval sits beyond
// 6 standard deviations, so tail draws never stall or lose support.
double sample_truncated_normal(const TruncatedNormalSpec& spec, Rng& rng);

// analytic CDF of the truncated law, for KS-style checks
double truncated_normal_cdf(const TruncatedNormalSpec& spec, double x);

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           Rng& rng);

// I-Ga(shape, rate): density ~ x^{-shape-1} exp(-rate/x), mean rate/(shape-1)
double sample_inverse_gamma(double shape, double rate, Rng& rng);

}  // namespace dagprobit
