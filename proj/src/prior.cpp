#include "dagprobit/prior.hpp"

#include <cmath>

#include "dagprobit/errors.hpp"

namespace dagprobit {

Hyperparameters Hyperparameters::resolved(int q, long n) const {
    Hyperparameters out = *this;
    if (out.a <= 0.0) out.a = q + 1.0;
    if (out.g <= 0.0) {
        if (n <= 0) throw ValidationError("hyperparameters: g unset and n unknown");
        out.g = 1.0 / static_cast<double>(n);
    }
    if (out.pi <= 0.0) out.pi = default_edge_prob(q);
    out.validate(q);
    return out;
}

void Hyperparameters::validate(int q) const {
    if (!(a > q - 1.0))
        throw ValidationError("hyperparameters: require a > q - 1");
    if (!(g > 0.0)) throw ValidationError("hyperparameters: require g > 0");
    if (!(pi > 0.0 && pi < 1.0))
        throw ValidationError("hyperparameters: require 0 < pi < 1");
    if (!(sigma0_sq > 0.0))
        throw ValidationError("hyperparameters: require sigma0_sq > 0");
}

double node_shape(const Hyperparameters& hp, int q, int n_parents) {
    const double shape = (hp.a + n_parents - q + 3.0) / 2.0 - 1.0;
    if (!(shape > 0.0))
        throw ValidationError("node_shape: (a + |pa| - q + 3)/2 - 1 must be positive; a too small");
    return shape;
}

namespace {

CholeskyFactor sample_prior_impl(const Dag& dag, const Hyperparameters& hp, Rng& rng,
                                 bool fix_response_variance) {
    const int q = dag.num_vertices();
    hp.validate(q);
    CholeskyFactor chol;
    chol.sigma2.resize(q);
    chol.coeffs.resize(q);
    for (Vertex j = 0; j < q; ++j) {
        const int p = static_cast<int>(dag.parents(j).size());
        if (j == kResponse && fix_response_variance) {
            chol.sigma2[j] = 1.0;
        } else {
            chol.sigma2[j] = sample_inverse_gamma(node_shape(hp, q, p), hp.g / 2.0, rng);
        }
        const double sd = std::sqrt(chol.sigma2[j] / hp.g);
        chol.coeffs[j].resize(p);
        for (int aidx = 0; aidx < p; ++aidx) chol.coeffs[j][aidx] = sd * rng.normal();
    }
    return chol;
}

double log_inv_gamma_pdf(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) -
           rate / x;
}

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

}  // namespace

CholeskyFactor sample_prior_cholesky(const Dag& dag, const Hyperparameters& hp,
                                     Rng& rng) {
    return sample_prior_impl(dag, hp, rng, true);
}

CholeskyFactor detail::sample_prior_cholesky_unconstrained(const Dag& dag,
                                                           const Hyperparameters& hp,
                                                           Rng& rng) {
    return sample_prior_impl(dag, hp, rng, false);
}

double log_prior_cholesky(const Dag& dag, const Hyperparameters& hp,
                          const CholeskyFactor& chol) {
    check_consistent(dag, chol);
    const int q = dag.num_vertices();
    hp.validate(q);
    double lp = 0.0;
    for (Vertex j = 0; j < q; ++j) {
        const int p = static_cast<int>(dag.parents(j).size());
        if (j != kResponse)
            lp += log_inv_gamma_pdf(chol.sigma2[j], node_shape(hp, q, p), hp.g / 2.0);
        const double var = chol.sigma2[j] / hp.g;
        for (int aidx = 0; aidx < p; ++aidx)
            lp += log_normal_pdf(chol.coeffs[j][aidx], 0.0, var);
    }
    return lp;
}

double log_prior_dag(const Dag& dag, const Hyperparameters& hp) {
    const int q = dag.num_vertices();
    const double n_pairs = q * (q - 1) / 2.0;
    const double k = dag.num_edges();  // one skeleton edge per directed edge
    return k * std::log(hp.pi) + (n_pairs - k) * std::log1p(-hp.pi);
}

}  // namespace dagprobit
