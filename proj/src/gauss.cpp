#include "dagprobit/gauss.hpp"

#include <cmath>

#include "dagprobit/errors.hpp"

namespace dagprobit {

CholeskyFactor CholeskyFactor::identity(int q) {
    CholeskyFactor c;
    c.sigma2.assign(q, 1.0);
    c.coeffs.assign(q, {});
    return c;
}

void check_consistent(const Dag& dag, const CholeskyFactor& chol) {
    const int q = dag.num_vertices();
    if (chol.num_vertices() != q || static_cast<int>(chol.coeffs.size()) != q)
        throw ValidationError("CholeskyFactor: dimension mismatch with DAG");
    for (Vertex j = 0; j < q; ++j) {
        if (chol.coeffs[j].size() != dag.parents(j).size())
            throw ValidationError("CholeskyFactor: coeffs[" + std::to_string(j + 1) +
                                  "] does not match parent count");
        if (!(chol.sigma2[j] > 0.0))
            throw ValidationError("CholeskyFactor: sigma2 must be positive");
    }
}

Eigen::MatrixXd omega_from_cholesky(const Dag& dag, const CholeskyFactor& chol) {
    check_consistent(dag, chol);
    const int q = dag.num_vertices();
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(q, q);
    // column j of L is the family vector of node j (1 at j, coeffs at parents)
    for (Vertex j = 0; j < q; ++j) {
        const auto& pa = dag.parents(j);
        const double w = 1.0 / chol.sigma2[j];
        omega(j, j) += w;
        for (size_t a = 0; a < pa.size(); ++a) {
            const double ca = chol.coeffs[j][a];
            omega(pa[a], j) += w * ca;
            omega(j, pa[a]) += w * ca;
            for (size_t b = 0; b < pa.size(); ++b)
                omega(pa[a], pa[b]) += w * ca * chol.coeffs[j][b];
        }
    }
    return omega;
}

namespace {

// Solve L w = b then L^T z = D^{-1}-free w scaling: z = Sigma b, using the SEM
// structure (L^T x = eps). L has unit diagonal with L[u][j] = coeffs at
// parents u of j; solves run along a topological order of the DAG.
Eigen::VectorXd sigma_apply(const Dag& dag, const CholeskyFactor& chol,
                            const std::vector<Vertex>& topo,
                            const Eigen::VectorXd& b) {
    const int q = dag.num_vertices();
    // forward phase: (L w)_u = w_u + sum_{j in ch(u)} L_{uj} w_j = b_u,
    // children first -> reverse topological order
    Eigen::VectorXd w = b;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Vertex j = *it;
        const auto& pa = dag.parents(j);
        for (size_t a = 0; a < pa.size(); ++a) w[pa[a]] -= chol.coeffs[j][a] * w[j];
    }
    for (Vertex j = 0; j < q; ++j) w[j] *= chol.sigma2[j];
    // backward phase: (L^T z)_j = z_j + sum_{u in pa(j)} L_{uj} z_u = w_j,
    // parents first -> topological order
    Eigen::VectorXd z = std::move(w);
    for (Vertex j : topo) {
        const auto& pa = dag.parents(j);
        for (size_t a = 0; a < pa.size(); ++a) z[j] -= chol.coeffs[j][a] * z[pa[a]];
    }
    return z;
}

}  // namespace

Eigen::MatrixXd sigma_from_cholesky(const Dag& dag, const CholeskyFactor& chol) {
    check_consistent(dag, chol);
    const int q = dag.num_vertices();
    const auto topo = topological_order(dag);
    Eigen::MatrixXd sigma(q, q);
    for (Vertex k = 0; k < q; ++k)
        sigma.col(k) = sigma_apply(dag, chol, topo, Eigen::VectorXd::Unit(q, k));
    return sigma;
}

Eigen::VectorXd sigma_column(const Dag& dag, const CholeskyFactor& chol, Vertex k) {
    const auto topo = topological_order(dag);
    return sigma_apply(dag, chol, topo, Eigen::VectorXd::Unit(dag.num_vertices(), k));
}

CholeskyFactor cholesky_from_sigma(const Dag& dag, const Eigen::MatrixXd& sigma) {
    const int q = dag.num_vertices();
    if (sigma.rows() != q || sigma.cols() != q)
        throw ValidationError("cholesky_from_sigma: dimension mismatch");
    CholeskyFactor chol;
    chol.sigma2.resize(q);
    chol.coeffs.resize(q);
    for (Vertex j = 0; j < q; ++j) {
        const auto& pa = dag.parents(j);
        const int p = static_cast<int>(pa.size());
        if (p == 0) {
            chol.sigma2[j] = sigma(j, j);
        } else {
            Eigen::MatrixXd spp(p, p);
            Eigen::VectorXd spj(p);
            for (int a = 0; a < p; ++a) {
                spj[a] = sigma(pa[a], j);
                for (int b = 0; b < p; ++b) spp(a, b) = sigma(pa[a], pa[b]);
            }
            Eigen::LLT<Eigen::MatrixXd> llt(spp);
            if (llt.info() != Eigen::Success)
                throw NumericError("cholesky_from_sigma: parent block not s.p.d.");
            Eigen::VectorXd beta = llt.solve(spj);
            chol.coeffs[j].assign(beta.data(), beta.data() + p);
            for (double& c : chol.coeffs[j]) c = -c;
            chol.sigma2[j] = sigma(j, j) - spj.dot(beta);
        }
        if (!(chol.sigma2[j] > 0.0))
            throw NumericError("cholesky_from_sigma: input not positive definite");
    }
    return chol;
}

namespace {

// Robert (1995) rejection for N(0,1) on [a, b], a > 0; the exponential
// proposal is conditioned to the interval so narrow windows cannot stall
double sample_right_tail(double a, double b, Rng& rng) {
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    const double tail_mass =
        std::isinf(b) ? 1.0 : -std::expm1(-lambda * (b - a));
    for (;;) {
        double z = -std::log1p(-rng.uniform() * tail_mass) / lambda;
        double x = a + z;
        double rho = std::exp(-0.5 * (x - lambda) * (x - lambda));
        if (rng.uniform() <= rho) return x;
    }
}

}  // namespace

double sample_truncated_normal(const TruncatedNormalSpec& spec, Rng& rng) {
    if (!(spec.variance > 0.0))
        throw ValidationError("truncated normal: variance must be positive");
    if (!(spec.lower < spec.upper))
        throw ValidationError("truncated normal: lower must be below upper");
    const double sd = std::sqrt(spec.variance);
    double a = (spec.lower - spec.mean) / sd;
    double b = (spec.upper - spec.mean) / sd;
    bool flipped = false;
    if (b <= 0.0) {  // reflect left-tail intervals into the right tail
        std::swap(a, b);
        a = -a;
        b = -b;
        flipped = true;
    }
    double z;
    if (a > 6.0) {
        z = sample_right_tail(a, b, rng);
    } else {
        // inverse CDF on upper-tail probabilities keeps precision for a >= 0
        const double pa = norm_cdf_upper(a);
        const double pb = norm_cdf_upper(b);
        const double u = rng.uniform();
        double p = pa + u * (pb - pa);  // in (pb, pa), upper-tail scale
        z = -norm_quantile(p);
    }
    if (flipped) z = -z;
    double x = spec.mean + sd * z;
    // guard rounding onto the endpoints; the draw must stay inside
    if (x <= spec.lower) x = std::nextafter(spec.lower, spec.upper);
    if (x >= spec.upper) x = std::nextafter(spec.upper, spec.lower);
    return x;
}

double truncated_normal_cdf(const TruncatedNormalSpec& spec, double x) {
    const double sd = std::sqrt(spec.variance);
    const double a = (spec.lower - spec.mean) / sd;
    const double b = (spec.upper - spec.mean) / sd;
    const double xi = (x - spec.mean) / sd;
    if (xi <= a) return 0.0;
    if (xi >= b) return 1.0;
    // upper-tail differences stay accurate deep in either tail
    const double ua = norm_cdf_upper(a);
    const double ub = norm_cdf_upper(b);
    return (ua - norm_cdf_upper(xi)) / (ua - ub);
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           Rng& rng) {
    const int d = static_cast<int>(mean.size());
    if (cov.rows() != d || cov.cols() != d)
        throw ValidationError("sample_mvn: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("sample_mvn: covariance not s.p.d.");
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    return mean + llt.matrixL() * z;
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw ValidationError("inverse gamma: shape and rate must be positive");
    return rate / rng.gamma(shape);
}

}  // namespace dagprobit
