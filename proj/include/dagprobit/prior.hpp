#pragma once

#include "dagprobit/dag.hpp"
#include "dagprobit/gauss.hpp"
#include "dagprobit/rng.hpp"

namespace dagprobit {

// Prior hyperparameters: Omega | D ~ derived from a single Wishart W_q(a, gI)
// through the complete-DAG transfer construction, Bernoulli(pi) on skeleton
// edges, and the N(theta0, sigma0_sq) random-walk proposal scale.
struct Hyperparameters {
    double a = 0.0;         // Wishart shape; defaulted to q+1 when <= 0
    double g = 0.0;         // scale multiplier, U = g I; defaulted to 1/n when <= 0
    double pi = 0.0;        // edge-inclusion prior; defaulted to 3/(2q-2) when <= 0
    double sigma0_sq = 0.25;

    // fills unset values from (q, n) and checks all invariants
    Hyperparameters resolved(int q, long n) const;
    void validate(int q) const;
};

inline double default_edge_prob(int q) { return 3.0 / (2.0 * q - 2.0); }

// a_j^* = (a + |pa(j)| - q + 3)/2 - 1; throws when not positive
double node_shape(const Hyperparameters& hp, int q, int n_parents);

// sigma_j^2 ~ I-Ga(a_j^*, g/2) for non-response nodes (sigma_response = 1),
// L_{<j]} | sigma_j^2 ~ N(0, sigma_j^2/g I); independent across nodes.
CholeskyFactor sample_prior_cholesky(const Dag& dag, const Hyperparameters& hp,
                                     Rng& rng);

double log_prior_cholesky(const Dag& dag, const Hyperparameters& hp,
                          const CholeskyFactor& chol);

// log p(D) up to its normalizing constant over DAG space
double log_prior_dag(const Dag& dag, const Hyperparameters& hp);

namespace detail {
// variant that also samples the response node's variance; only used to test
// agreement with unconstrained Wishart moments on the complete DAG
CholeskyFactor sample_prior_cholesky_unconstrained(const Dag& dag,
                                                   const Hyperparameters& hp,
                                                   Rng& rng);
}  // namespace detail

}  // namespace dagprobit
