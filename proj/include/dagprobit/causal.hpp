#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dagprobit/dag.hpp"
#include "dagprobit/mcmc.hpp"

namespace dagprobit {

// Parameters of the post-intervention law of the latent response under
// do(X_s = x): X_1 | do ~ N(gamma_s * x, tau1_sq).
struct InterventionParams {
    double gamma_s = 0.0;
    Eigen::VectorXd gamma;   // over pa(s)
    double delta1_sq = 0.0;  // Sigma_{1|fa(s)}
    Eigen::MatrixXd t_mat;   // (Sigma_pa,pa)^{-1} + gamma gamma' / delta1_sq
    double tau1_sq = 0.0;
};

// (gamma_s, gamma') = Sigma_{1,fa(s)} (Sigma_{fa,fa})^{-1} with fa(s) ordered
// (s, pa(s)); tau1^2 = delta1^2 / (1 - gamma' T^{-1} gamma / delta1^2).
InterventionParams post_intervention(const Eigen::MatrixXd& sigma, Vertex s,
                                     const std::vector<Vertex>& pa_s);

// causal effect on Y: P(Y = 1 | do(X_s = x)) = 1 - Phi((theta0 - gamma_s x)/tau1)
double causal_effect(const InterventionParams& params, double theta0, double x);

struct PosteriorSummary {
    Eigen::MatrixXd edge_probs;  // (u,v) = MCMC frequency of edge u -> v
};

PosteriorSummary edge_probs(const ChainOutput& chain);

// median-probability-model style selection: edges with posterior probability
// >= k, reported as-is (no acyclicity repair)
std::vector<Edge> dag_model_selection(const PosteriorSummary& summary, double k);

struct CausalEffectTable {
    Vertex s = 0;
    Eigen::VectorXd x_values;
    Eigen::VectorXd bma;  // mean over iterations, per x value
    Eigen::VectorXd lo, hi;
    double level = 0.95;
    // per-iteration effect parameters (gamma_s, tau1, theta0 define
    // beta^{(t)}(x) for every x)
    Eigen::VectorXd gamma_s_trace, tau1_trace, theta0_trace;

    double effect_at(long t, double x) const;
};

// Per stored sample: rebuild Sigma from the Cholesky parameters, read pa(s),
// form the post-intervention parameters, evaluate the effect at each x value;
// BMA = mean, bounds = empirical quantiles at (1 +- level)/2. The OpenMP
// version and the serial reference produce bit-identical tables.
CausalEffectTable bma_effects(const ChainOutput& chain, Vertex s,
                              const Eigen::VectorXd& x_values, double level = 0.95);
CausalEffectTable bma_effects_serial(const ChainOutput& chain, Vertex s,
                                     const Eigen::VectorXd& x_values,
                                     double level = 0.95);

}  // namespace dagprobit
