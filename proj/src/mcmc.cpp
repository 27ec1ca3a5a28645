#include "dagprobit/mcmc.hpp"

#include <cmath>

#include "dagprobit/errors.hpp"

namespace dagprobit {

void Dataset::validate(bool require_both_classes) const {
    if (xobs.rows() != y.size())
        throw ValidationError("dataset: y and X row counts differ");
    if (xobs.cols() < 1)
        throw ValidationError("dataset: need at least one covariate (q >= 2)");
    bool any0 = false, any1 = false;
    for (long i = 0; i < y.size(); ++i) {
        if (y[i] == 0) any0 = true;
        else if (y[i] == 1) any1 = true;
        else throw ValidationError("dataset: y must be 0/1");
    }
    if (!xobs.allFinite()) throw ValidationError("dataset: X contains non-finite values");
    if (require_both_classes && !(any0 && any1))
        throw ValidationError(
            "dataset: y must contain both classes (posterior of theta0 is improper "
            "otherwise)");
}

void Dataset::standardize() {
    const long n = xobs.rows();
    if (n < 2) throw ValidationError("standardize: need at least two rows");
    for (long c = 0; c < xobs.cols(); ++c) {
        const double mean = xobs.col(c).mean();
        xobs.col(c).array() -= mean;
        const double sd = std::sqrt(xobs.col(c).squaredNorm() / (n - 1));
        if (!(sd > 0.0))
            throw ValidationError("standardize: column " + std::to_string(c + 2) +
                                  " is constant");
        xobs.col(c) /= sd;
    }
}

void ChainConfig::validate() const {
    if (iterations <= 0) throw ValidationError("chain: iterations must be positive");
    if (resolved_burn_in() >= iterations)
        throw ValidationError("chain: burn-in must be below the iteration count");
    if (thin < 1) throw ValidationError("chain: thin must be >= 1");
    if (max_edges && *max_edges < 0) throw ValidationError("chain: negative edge cap");
}

void ChainOutput::for_each_dag(const std::function<void(long, const Dag&)>& fn) const {
    if (num_samples() == 0) return;
    Dag current = first_dag;
    fn(0, current);
    for (long t = 1; t < num_samples(); ++t) {
        const DagDelta& d = deltas[t - 1];
        for (const auto& [u, v] : d.del) current.remove_edge(u, v);
        for (const auto& [u, v] : d.add) current.add_edge(u, v);
        fn(t, current);
    }
}

std::vector<Dag> ChainOutput::materialize_dags() const {
    std::vector<Dag> dags;
    dags.reserve(num_samples());
    for_each_dag([&](long, const Dag& d) { dags.push_back(d); });
    return dags;
}

double ChainOutput::dag_accept_rate() const {
    return dag_proposed > 0 ? static_cast<double>(dag_accepted) / dag_proposed : 0.0;
}

double ChainOutput::theta0_accept_rate() const {
    return theta0_proposed > 0 ? static_cast<double>(theta0_accepted) / theta0_proposed
                               : 0.0;
}

void ChainOutput::append(const ChainOutput& other) {
    if (other.num_samples() == 0) return;
    if (q != other.q) throw ValidationError("ChainOutput::append: dimension mismatch");
    if (num_samples() == 0) {
        *this = other;
        return;
    }
    // bridge delta from our last sample to the other's first
    Dag last{1};
    for_each_dag([&](long, const Dag& d) { last = d; });
    DagDelta bridge;
    for (const auto& e : last.edges())
        if (!other.first_dag.has_edge(e.first, e.second)) bridge.del.push_back(e);
    for (const auto& e : other.first_dag.edges())
        if (!last.has_edge(e.first, e.second)) bridge.add.push_back(e);
    deltas.push_back(std::move(bridge));
    deltas.insert(deltas.end(), other.deltas.begin(), other.deltas.end());
    chol_samples.insert(chol_samples.end(), other.chol_samples.begin(),
                        other.chol_samples.end());
    theta0_trace.insert(theta0_trace.end(), other.theta0_trace.begin(),
                        other.theta0_trace.end());
    dag_proposed += other.dag_proposed;
    dag_accepted += other.dag_accepted;
    theta0_proposed += other.theta0_proposed;
    theta0_accepted += other.theta0_accepted;
}

namespace detail {

double log_marginal_node_gram(Vertex j, const std::vector<Vertex>& parents,
                              const Eigen::MatrixXd& gram, long n,
                              const Hyperparameters& hp, bool response_node) {
    const int p = static_cast<int>(parents.size());
    const double g = hp.g;
    double half_logdet_ratio;  // (1/2) log |T_j| - (1/2) log |Tbar_j|
    double quad;               // X_j' X_j - Lhat' Tbar Lhat
    if (p == 0) {
        half_logdet_ratio = 0.0;
        quad = gram(j, j);
    } else {
        Eigen::MatrixXd tbar(p, p);
        Eigen::VectorXd b(p);
        for (int a = 0; a < p; ++a) {
            b[a] = gram(parents[a], j);
            for (int c = 0; c < p; ++c) tbar(a, c) = gram(parents[a], parents[c]);
            tbar(a, a) += g;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(tbar);
        if (llt.info() != Eigen::Success)
            throw NumericError("log_marginal_node: Tbar not s.p.d. (corrupt data?)");
        double logdet_tbar = 0.0;
        for (int a = 0; a < p; ++a) logdet_tbar += std::log(llt.matrixLLT()(a, a));
        logdet_tbar *= 2.0;
        half_logdet_ratio = 0.5 * (p * std::log(g) - logdet_tbar);
        quad = gram(j, j) - b.dot(llt.solve(b));
    }
    const double log2pi = std::log(2.0 * M_PI);
    if (response_node) {
        return -0.5 * n * log2pi + half_logdet_ratio - 0.5 * quad;
    }
    const double aj = node_shape(hp, static_cast<int>(gram.rows()), p);
    if (!(g + quad > 0.0))
        throw NumericError("log_marginal_node: nonpositive posterior rate");
    return -0.5 * n * log2pi + half_logdet_ratio + std::lgamma(aj + 0.5 * n) -
           std::lgamma(aj) + aj * std::log(0.5 * g) -
           (aj + 0.5 * n) * std::log(0.5 * (g + quad));
}

std::pair<Dag, bool> dag_move_gram(const Dag& dag, const Eigen::MatrixXd& gram, long n,
                                   const Hyperparameters& hp, Rng& rng,
                                   std::optional<int> max_edges) {
    const auto ops = valid_operators(dag, max_edges);
    if (ops.empty()) return {dag, false};
    auto k = static_cast<size_t>(rng.uniform() * ops.size());
    if (k >= ops.size()) k = ops.size() - 1;
    const DagOperator op = ops[k];
    Dag proposed = apply_operator(dag, op);

    auto marg = [&](Vertex j, const std::vector<Vertex>& pa) {
        return log_marginal_node_gram(j, pa, gram, n, hp, j == kResponse);
    };
    double log_ratio =
        marg(op.v, proposed.parents(op.v)) - marg(op.v, dag.parents(op.v));
    switch (op.kind) {
        case OpKind::InsertD:
            log_ratio += std::log(hp.pi) - std::log1p(-hp.pi);
            break;
        case OpKind::DeleteD:
            log_ratio -= std::log(hp.pi) - std::log1p(-hp.pi);
            break;
        case OpKind::ReverseD:
            // delete u->v then insert v->u: both endpoints' parent sets
            // change, the skeleton (hence the prior) does not
            log_ratio +=
                marg(op.u, proposed.parents(op.u)) - marg(op.u, dag.parents(op.u));
            break;
    }
    log_ratio += std::log(static_cast<double>(ops.size())) -
                 std::log(static_cast<double>(valid_operators(proposed, max_edges).size()));
    if (std::log(rng.uniform()) < log_ratio) return {std::move(proposed), true};
    return {dag, false};
}

CholeskyFactor sample_chol_posterior_gram(const Dag& dag, const Eigen::MatrixXd& gram,
                                          long n, const Hyperparameters& hp, Rng& rng) {
    const int q = dag.num_vertices();
    CholeskyFactor chol;
    chol.sigma2.resize(q);
    chol.coeffs.resize(q);
    for (Vertex j = 0; j < q; ++j) {
        const auto& pa = dag.parents(j);
        const int p = static_cast<int>(pa.size());
        if (p == 0) {
            if (j == kResponse) {
                chol.sigma2[j] = 1.0;
            } else {
                const double aj = node_shape(hp, q, 0);
                chol.sigma2[j] =
                    sample_inverse_gamma(aj + 0.5 * n, 0.5 * (hp.g + gram(j, j)), rng);
            }
            continue;
        }
        Eigen::MatrixXd tbar(p, p);
        Eigen::VectorXd b(p);
        for (int a = 0; a < p; ++a) {
            b[a] = gram(pa[a], j);
            for (int c = 0; c < p; ++c) tbar(a, c) = gram(pa[a], pa[c]);
            tbar(a, a) += hp.g;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(tbar);
        if (llt.info() != Eigen::Success)
            throw NumericError("chol posterior: Tbar not s.p.d.");
        Eigen::VectorXd lhat = llt.solve(b);
        if (j == kResponse) {
            chol.sigma2[j] = 1.0;
        } else {
            const double aj = node_shape(hp, q, p);
            const double rate = 0.5 * (hp.g + gram(j, j) - b.dot(lhat));
            if (!(rate > 0.0)) throw NumericError("chol posterior: nonpositive rate");
            chol.sigma2[j] = sample_inverse_gamma(aj + 0.5 * n, rate, rng);
        }
        // L | sigma2 ~ N(-Lhat, sigma2 Tbar^{-1}); U' z has covariance Tbar^{-1}
        Eigen::VectorXd z(p);
        for (int a = 0; a < p; ++a) z[a] = rng.normal();
        Eigen::VectorXd dev =
            llt.matrixU().solve(z) * std::sqrt(chol.sigma2[j]);
        chol.coeffs[j].resize(p);
        for (int a = 0; a < p; ++a) chol.coeffs[j][a] = -lhat[a] + dev[a];
    }
    return chol;
}

double theta0_log_ratio(const Eigen::VectorXi& y, const Eigen::VectorXd& mu,
                        double theta0, double cand) {
    double lr = 0.0;
    for (long i = 0; i < y.size(); ++i) {
        if (y[i] == 1) {
            // P(X1 > t) = Phi(mu - t)
            lr += log_norm_cdf(mu[i] - cand) - log_norm_cdf(mu[i] - theta0);
        } else {
            lr += log_norm_cdf(cand - mu[i]) - log_norm_cdf(theta0 - mu[i]);
        }
    }
    return lr;
}

}  // namespace detail

double log_marginal_node(Vertex j, const std::vector<Vertex>& parents,
                         const Eigen::MatrixXd& x_aug, const Hyperparameters& hp) {
    const int q = static_cast<int>(x_aug.cols());
    if (j < 0 || j >= q) throw ValidationError("log_marginal_node: vertex out of range");
    Eigen::MatrixXd gram = x_aug.transpose() * x_aug;
    return detail::log_marginal_node_gram(j, parents, gram, x_aug.rows(), hp,
                                          j == kResponse);
}

CholeskyFactor sample_chol_posterior(const Dag& dag, const Eigen::MatrixXd& x_aug,
                                     const Hyperparameters& hp, Rng& rng) {
    Eigen::MatrixXd gram = x_aug.transpose() * x_aug;
    return detail::sample_chol_posterior_gram(dag, gram, x_aug.rows(), hp, rng);
}

namespace {

double draw_truncated_unit(double mean, int yi, double theta0, Rng& rng) {
    TruncatedNormalSpec spec;
    spec.mean = mean;
    spec.variance = 1.0;
    if (yi == 1) spec.lower = theta0;
    else spec.upper = theta0;
    return sample_truncated_normal(spec, rng);
}

struct Sampler {
    const Dataset& data;
    const Hyperparameters& hp;
    const ChainConfig& cfg;
    long n;
    int q;
    Eigen::MatrixXd x_aug;  // n x q, column 0 latent
    Eigen::MatrixXd gram;   // q x q, kept in sync with x_aug
    McmcState state;
    Eigen::VectorXd mu;     // per-row conditional mean of the latent column
    Rng rng;
    ChainOutput out;

    Sampler(const Dataset& d, const Hyperparameters& h, const ChainConfig& c)
        : data(d), hp(h), cfg(c), n(d.n()), q(d.q()),
          state{cfg.fixed_dag ? *cfg.fixed_dag : Dag(q), CholeskyFactor::identity(q),
                0.0, Eigen::VectorXd::Zero(n)},
          mu(Eigen::VectorXd::Zero(n)), rng(cfg.seed) {
        if (cfg.fixed_dag) {
            if (cfg.fixed_dag->num_vertices() != q)
                throw ValidationError("fixed DAG: vertex count mismatch");
            if (!cfg.fixed_dag->is_valid())
                throw ValidationError("fixed DAG: cyclic or response node has children");
            state.chol.coeffs.assign(q, {});
            for (Vertex j = 0; j < q; ++j)
                state.chol.coeffs[j].assign(state.dag.parents(j).size(), 0.0);
        }
        x_aug.resize(n, q);
        if (n > 0) x_aug.rightCols(q - 1) = data.xobs;

        if (cfg.observed_x1) {
            if (cfg.observed_x1->size() != n)
                throw ValidationError("observed_x1: length mismatch");
            state.x1 = *cfg.observed_x1;
        } else if (cfg.update_latent) {
            // x1^(0) ~ N(0,1) truncated to the class interval at theta0 = 0
            for (long i = 0; i < n; ++i)
                state.x1[i] = draw_latent(0.0, data.y[i], 0.0);
        } else if (n > 0) {
            throw ValidationError(
                "chain: latent updates disabled but no observed_x1 supplied");
        }
        if (n > 0) {
            x_aug.col(0) = state.x1;
            gram = x_aug.transpose() * x_aug;
        } else {
            gram = Eigen::MatrixXd::Zero(q, q);
        }
    }

    double draw_latent(double mean, int yi, double theta0) {
        return draw_truncated_unit(mean, yi, theta0, rng);
    }

    void dag_move() {
        ++out.dag_proposed;
        auto [next, accepted] =
            detail::dag_move_gram(state.dag, gram, n, hp, rng, cfg.max_edges);
        if (accepted) {
            state.dag = std::move(next);
            ++out.dag_accepted;
        }
    }

    void refresh_mu() {
        const auto& pa = state.dag.parents(kResponse);
        mu.setZero();
        for (size_t a = 0; a < pa.size(); ++a)
            mu -= state.chol.coeffs[kResponse][a] * x_aug.col(pa[a]);
    }

    void update_latent() {
        for (long i = 0; i < n; ++i)
            state.x1[i] = draw_latent(mu[i], data.y[i], state.theta0);
        x_aug.col(0) = state.x1;
        // only row/column 0 of the Gram matrix involves the latent column
        Eigen::VectorXd g0 = x_aug.transpose() * state.x1;
        gram.col(0) = g0;
        gram.row(0) = g0.transpose();
    }

    void update_theta0() {
        ++out.theta0_proposed;
        const double cand = state.theta0 + std::sqrt(hp.sigma0_sq) * rng.normal();
        const double lr = detail::theta0_log_ratio(data.y, mu, state.theta0, cand);
        if (std::log(rng.uniform()) < lr) {
            state.theta0 = cand;
            ++out.theta0_accepted;
            // restore the thresholding invariant under the new threshold by
            // refreshing the latent column from its full conditional
            if (cfg.update_latent) update_latent();
        }
    }

    ChainOutput run() {
        out.q = q;
        out.seed = cfg.seed;
        out.iterations = cfg.iterations;
        out.burn_in = cfg.resolved_burn_in();
        out.thin = cfg.thin;

        Dag prev_stored{q};
        bool have_stored = false;
        for (long t = 1; t <= cfg.iterations; ++t) {
            if (!cfg.fixed_dag) dag_move();
            state.chol = detail::sample_chol_posterior_gram(state.dag, gram, n, hp, rng);
            refresh_mu();
            if (cfg.update_latent) update_latent();
            if (cfg.update_theta0) update_theta0();

            if (t > out.burn_in && (t - out.burn_in - 1) % cfg.thin == 0) {
                if (!have_stored) {
                    out.first_dag = state.dag;
                    have_stored = true;
                } else {
                    DagDelta delta;
                    for (const auto& e : prev_stored.edges())
                        if (!state.dag.has_edge(e.first, e.second))
                            delta.del.push_back(e);
                    for (const auto& e : state.dag.edges())
                        if (!prev_stored.has_edge(e.first, e.second))
                            delta.add.push_back(e);
                    out.deltas.push_back(std::move(delta));
                }
                prev_stored = state.dag;
                out.chol_samples.push_back(state.chol);
                out.theta0_trace.push_back(state.theta0);
            }
            if (cfg.on_iteration) cfg.on_iteration(state, t);
        }
        return std::move(out);
    }
};

}  // namespace

std::pair<Dag, bool> dag_move(const Dag& dag, const Eigen::MatrixXd& x_aug,
                              const Hyperparameters& hp, Rng& rng,
                              std::optional<int> max_edges) {
    Eigen::MatrixXd gram = x_aug.transpose() * x_aug;
    return detail::dag_move_gram(dag, gram, x_aug.rows(), hp, rng, max_edges);
}

Eigen::VectorXd update_latent(const Dataset& data, const Dag& dag,
                              const CholeskyFactor& chol, double theta0, Rng& rng) {
    check_consistent(dag, chol);
    const long n = data.n();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    const auto& pa = dag.parents(kResponse);
    for (size_t a = 0; a < pa.size(); ++a)
        mu -= chol.coeffs[kResponse][a] * data.xobs.col(pa[a] - 1);
    Eigen::VectorXd x1(n);
    for (long i = 0; i < n; ++i)
        x1[i] = draw_truncated_unit(mu[i], data.y[i], theta0, rng);
    return x1;
}

std::pair<double, bool> update_theta0(const Dataset& data, const Dag& dag,
                                      const CholeskyFactor& chol, double theta0,
                                      const Hyperparameters& hp, Rng& rng) {
    data.validate(true);
    check_consistent(dag, chol);
    const long n = data.n();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    const auto& pa = dag.parents(kResponse);
    for (size_t a = 0; a < pa.size(); ++a)
        mu -= chol.coeffs[kResponse][a] * data.xobs.col(pa[a] - 1);
    const double cand = theta0 + std::sqrt(hp.sigma0_sq) * rng.normal();
    if (std::log(rng.uniform()) < detail::theta0_log_ratio(data.y, mu, theta0, cand))
        return {cand, true};
    return {theta0, false};
}

ChainOutput run_chain(const Dataset& data, const Hyperparameters& hp,
                      const ChainConfig& cfg) {
    cfg.validate();
    // the propriety condition on y only binds when the threshold moves
    data.validate(cfg.update_theta0);
    const Hyperparameters resolved = hp.resolved(data.q(), std::max<long>(data.n(), 1));
    Sampler sampler(data, resolved, cfg);
    return sampler.run();
}

}  // namespace dagprobit
