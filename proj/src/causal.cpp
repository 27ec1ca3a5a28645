#include "dagprobit/causal.hpp"

#include <algorithm>
#include <cmath>

#include "dagprobit/errors.hpp"
#include "dagprobit/gauss.hpp"
#include "dagprobit/rng.hpp"

namespace dagprobit {

InterventionParams post_intervention(const Eigen::MatrixXd& sigma, Vertex s,
                                     const std::vector<Vertex>& pa_s) {
    const int q = static_cast<int>(sigma.rows());
    if (sigma.cols() != q) throw ValidationError("post_intervention: Sigma not square");
    if (s == kResponse || s < 0 || s >= q)
        throw ValidationError("post_intervention: intervened node out of range");
    for (Vertex u : pa_s)
        if (u == kResponse || u == s || u < 0 || u >= q)
            throw ValidationError("post_intervention: invalid parent set");

    const int p = static_cast<int>(pa_s.size());
    // fa(s) with s in first position
    std::vector<Vertex> fa(1, s);
    fa.insert(fa.end(), pa_s.begin(), pa_s.end());
    const int f = p + 1;

    Eigen::MatrixXd sff(f, f);
    Eigen::VectorXd sf0(f);
    for (int a = 0; a < f; ++a) {
        sf0[a] = sigma(fa[a], kResponse);
        for (int b = 0; b < f; ++b) sff(a, b) = sigma(fa[a], fa[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sff);
    if (llt.info() != Eigen::Success)
        throw NumericError("post_intervention: family block not s.p.d.");
    Eigen::VectorXd w = llt.solve(sf0);

    InterventionParams out;
    out.gamma_s = w[0];
    out.gamma = w.tail(p);
    out.delta1_sq = sigma(kResponse, kResponse) - sf0.dot(w);
    if (!(out.delta1_sq > 0.0))
        throw NumericError("post_intervention: conditional variance not positive");
    if (p == 0) {
        out.t_mat.resize(0, 0);
        out.tau1_sq = out.delta1_sq;
        return out;
    }
    Eigen::MatrixXd spp(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) spp(a, b) = sigma(pa_s[a], pa_s[b]);
    Eigen::LLT<Eigen::MatrixXd> llt_pp(spp);
    if (llt_pp.info() != Eigen::Success)
        throw NumericError("post_intervention: parent block not s.p.d.");
    out.t_mat = llt_pp.solve(Eigen::MatrixXd::Identity(p, p)) +
                out.gamma * out.gamma.transpose() / out.delta1_sq;
    const double shrink = out.gamma.dot(out.t_mat.llt().solve(out.gamma)) / out.delta1_sq;
    out.tau1_sq = out.delta1_sq / (1.0 - shrink);
    if (!(out.tau1_sq > 0.0) || !std::isfinite(out.tau1_sq))
        throw NumericError("post_intervention: degenerate tau1^2");
    return out;
}

double causal_effect(const InterventionParams& params, double theta0, double x) {
    const double tau1 = std::sqrt(params.tau1_sq);
    return norm_cdf_upper((theta0 - params.gamma_s * x) / tau1);
}

PosteriorSummary edge_probs(const ChainOutput& chain) {
    if (chain.num_samples() == 0)
        throw ValidationError("edge_probs: empty chain");
    const int q = chain.q;
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(q, q);
    chain.for_each_dag([&](long, const Dag& d) {
        for (const auto& [u, v] : d.edges()) counts(u, v) += 1.0;
    });
    return {counts / static_cast<double>(chain.num_samples())};
}

std::vector<Edge> dag_model_selection(const PosteriorSummary& summary, double k) {
    if (k < 0.0 || k > 1.0)
        throw ValidationError("dag_model_selection: threshold outside [0,1]");
    std::vector<Edge> edges;
    const int q = static_cast<int>(summary.edge_probs.rows());
    for (Vertex u = 0; u < q; ++u)
        for (Vertex v = 0; v < q; ++v)
            if (u != v && summary.edge_probs(u, v) >= k && summary.edge_probs(u, v) > 0.0)
                edges.emplace_back(u, v);
    return edges;
}

double CausalEffectTable::effect_at(long t, double x) const {
    return norm_cdf_upper((theta0_trace[t] - gamma_s_trace[t] * x) / tau1_trace[t]);
}

namespace {

// type-7 (linear interpolation) empirical quantile of an unsorted copy
double quantile(std::vector<double>& buf, double p) {
    const long n = static_cast<long>(buf.size());
    if (n == 1) return buf[0];
    const double h = p * (n - 1);
    const long lo = static_cast<long>(std::floor(h));
    const long hi = std::min(lo + 1, n - 1);
    std::nth_element(buf.begin(), buf.begin() + lo, buf.end());
    const double vlo = buf[lo];
    std::nth_element(buf.begin() + lo, buf.begin() + hi, buf.end());
    const double vhi = buf[hi];
    return vlo + (h - lo) * (vhi - vlo);
}

CausalEffectTable bma_effects_impl(const ChainOutput& chain, Vertex s,
                                   const Eigen::VectorXd& x_values, double level,
                                   bool parallel) {
    const long T = chain.num_samples();
    if (T == 0) throw ValidationError("bma_effects: empty chain");
    if (s == kResponse || s < 0 || s >= chain.q)
        throw ValidationError("bma_effects: node index out of range");
    if (!(level > 0.0 && level < 1.0))
        throw ValidationError("bma_effects: level outside (0,1)");

    CausalEffectTable table;
    table.s = s;
    table.x_values = x_values;
    table.level = level;
    table.gamma_s_trace.resize(T);
    table.tau1_trace.resize(T);
    table.theta0_trace.resize(T);

    // pass 1: per-sample intervention parameters; the DAG sequence is a delta
    // chain, so reconstruct serially in windows and fan out within each
    const long window = 8192;
    std::vector<Dag> dags;
    dags.reserve(std::min(window, T));
    long base = 0;
    auto flush = [&]() {
        const long m = static_cast<long>(dags.size());
#pragma omp parallel for schedule(static) if (parallel)
        for (long i = 0; i < m; ++i) {
            const long t = base + i;
            Eigen::MatrixXd sigma = sigma_from_cholesky(dags[i], chain.chol_samples[t]);
            auto params = post_intervention(sigma, s, dags[i].parents(s));
            table.gamma_s_trace[t] = params.gamma_s;
            table.tau1_trace[t] = std::sqrt(params.tau1_sq);
            table.theta0_trace[t] = chain.theta0_trace[t];
        }
        base += m;
        dags.clear();
    };
    chain.for_each_dag([&](long, const Dag& d) {
        dags.push_back(d);
        if (static_cast<long>(dags.size()) == window) flush();
    });
    flush();

    // pass 2: per x value, reduce over samples
    const long m = x_values.size();
    table.bma.resize(m);
    table.lo.resize(m);
    table.hi.resize(m);
    const double p_lo = (1.0 - level) / 2.0;
#pragma omp parallel for schedule(static) if (parallel)
    for (long ix = 0; ix < m; ++ix) {
        std::vector<double> beta(T);
        double sum = 0.0;
        for (long t = 0; t < T; ++t) {
            beta[t] = norm_cdf_upper((table.theta0_trace[t] -
                                      table.gamma_s_trace[t] * x_values[ix]) /
                                     table.tau1_trace[t]);
            sum += beta[t];
        }
        table.bma[ix] = sum / static_cast<double>(T);
        table.lo[ix] = quantile(beta, p_lo);
        table.hi[ix] = quantile(beta, 1.0 - p_lo);
    }
    return table;
}

}  // namespace

CausalEffectTable bma_effects(const ChainOutput& chain, Vertex s,
                              const Eigen::VectorXd& x_values, double level) {
    return bma_effects_impl(chain, s, x_values, level, true);
}

CausalEffectTable bma_effects_serial(const ChainOutput& chain, Vertex s,
                                     const Eigen::VectorXd& x_values, double level) {
    return bma_effects_impl(chain, s, x_values, level, false);
}

}  // namespace dagprobit
