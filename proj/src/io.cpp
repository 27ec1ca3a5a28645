#include "dagprobit/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "dagprobit/errors.hpp"

namespace dagprobit::io {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    // round-trip: try successively longer representations
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

namespace {

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const fs::path& path, long row, long col) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // allow surrounding whitespace only
    while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == begin || (end && *end != '\0'))
        throw ValidationError(path.string() + ": cannot parse number at row " +
                              std::to_string(row) + ", column " + std::to_string(col));
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_double(fields[c], path, row_no, c + 1));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ValidationError(path.string() + ": ragged row " + std::to_string(row_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError(path.string() + ": empty matrix");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
    auto out = open_out(path);
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << fmt(m(r, c));
        }
        out << '\n';
    }
}

Dataset read_dataset_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(path.string() + ": empty file");
    const auto header = split_csv_line(line);
    if (header.empty() || trim(header[0]) != "y")
        throw ValidationError(path.string() + ": first column must be named 'y'");
    if (header.size() < 2)
        throw ValidationError(path.string() + ": need at least one covariate column");
    const size_t ncol = header.size();
    std::vector<int> ys;
    std::vector<std::vector<double>> xs;
    long row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != ncol)
            throw ValidationError(path.string() + ": row " + std::to_string(row_no) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(ncol));
        const double yraw = parse_double(fields[0], path, row_no, 1);
        if (yraw != 0.0 && yraw != 1.0)
            throw ValidationError(path.string() + ": y must be 0/1 at row " +
                                  std::to_string(row_no));
        ys.push_back(static_cast<int>(yraw));
        std::vector<double> row(ncol - 1);
        for (size_t c = 1; c < ncol; ++c)
            row[c - 1] = parse_double(fields[c], path, row_no, c + 1);
        xs.push_back(std::move(row));
    }
    if (ys.empty()) throw ValidationError(path.string() + ": no data rows");
    Dataset data;
    data.y = Eigen::Map<Eigen::VectorXi>(ys.data(), ys.size());
    data.xobs.resize(xs.size(), ncol - 1);
    for (size_t r = 0; r < xs.size(); ++r)
        for (size_t c = 0; c + 1 < ncol; ++c) data.xobs(r, c) = xs[r][c];
    return data;
}

void write_dataset_csv(const fs::path& path, const Dataset& data) {
    auto out = open_out(path);
    out << "y";
    for (int c = 0; c < data.xobs.cols(); ++c) out << ",x" << c + 2;
    out << '\n';
    for (long r = 0; r < data.n(); ++r) {
        out << data.y[r];
        for (long c = 0; c < data.xobs.cols(); ++c) out << ',' << fmt(data.xobs(r, c));
        out << '\n';
    }
}

Dag read_dag_edgelist(const fs::path& path, int q) {
    auto in = open_in(path);
    Dag dag(q);
    std::string line;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ss(t);
        long u = 0, v = 0;
        if (!(ss >> u >> v))
            throw ValidationError(path.string() + ": bad edge at line " +
                                  std::to_string(row_no));
        if (u < 1 || u > q || v < 1 || v > q)
            throw ValidationError(path.string() + ": vertex out of range at line " +
                                  std::to_string(row_no));
        dag.add_edge(static_cast<Vertex>(u - 1), static_cast<Vertex>(v - 1));
    }
    return dag;
}

void write_dag_edgelist(const fs::path& path, const Dag& dag) {
    auto out = open_out(path);
    for (const auto& [u, v] : dag.edges()) out << u + 1 << ' ' << v + 1 << '\n';
}

Dag read_dag_adjacency_csv(const fs::path& path) {
    const Eigen::MatrixXd m = read_matrix_csv(path);
    if (m.rows() != m.cols())
        throw ValidationError(path.string() + ": adjacency matrix must be square");
    Dag dag(static_cast<int>(m.rows()));
    for (long u = 0; u < m.rows(); ++u)
        for (long v = 0; v < m.cols(); ++v) {
            if (m(u, v) == 0.0) continue;
            if (m(u, v) != 1.0)
                throw ValidationError(path.string() + ": adjacency entries must be 0/1");
            dag.add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v));
        }
    return dag;
}

void write_dag_adjacency_csv(const fs::path& path, const Dag& dag) {
    const int q = dag.num_vertices();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, q);
    for (const auto& [u, v] : dag.edges()) m(u, v) = 1.0;
    write_matrix_csv(path, m);
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ": expected key = value at line " +
                                  std::to_string(row_no));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ValidationError(path.string() + ": empty key at line " +
                                  std::to_string(row_no));
        kv[key] = value;
    }
    return kv;
}

namespace {

json edges_to_json(const std::vector<Edge>& edges) {
    json arr = json::array();
    for (const auto& [u, v] : edges) arr.push_back({u + 1, v + 1});
    return arr;
}

std::vector<Edge> edges_from_json(const json& arr) {
    std::vector<Edge> edges;
    for (const auto& e : arr)
        edges.emplace_back(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
    return edges;
}

}  // namespace

void save_run_dir(const fs::path& dir, const ChainOutput& chain, const Dataset& data,
                  const RunMeta& meta) {
    fs::create_directories(dir);

    {
        auto out = open_out(dir / "theta0_trace.csv");
        out << "theta0\n";
        for (double v : chain.theta0_trace) out << fmt(v) << '\n';
    }
    {
        auto out = open_out(dir / "dag_samples.jsonl");
        json first;
        first["edges"] = edges_to_json(chain.first_dag.edges());
        out << first.dump() << '\n';
        for (const auto& d : chain.deltas) {
            json rec;
            rec["add"] = edges_to_json(d.add);
            rec["del"] = edges_to_json(d.del);
            out << rec.dump() << '\n';
        }
    }
    {
        auto out = open_out(dir / "chol_samples.jsonl");
        long t = 0;
        chain.for_each_dag([&](long, const Dag& dag) {
            const CholeskyFactor& chol = chain.chol_samples[t];
            json rec;
            json sig = json::array();
            for (double v : chol.sigma2) sig.push_back(v);
            rec["sigma2"] = std::move(sig);
            json coeffs = json::array();
            for (Vertex j = 0; j < dag.num_vertices(); ++j) {
                const auto& pa = dag.parents(j);
                for (size_t a = 0; a < pa.size(); ++a)
                    coeffs.push_back({j + 1, pa[a] + 1, chol.coeffs[j][a]});
            }
            rec["coeffs"] = std::move(coeffs);
            out << rec.dump() << '\n';
            ++t;
        });
    }
    {
        json rates;
        rates["dag_proposed"] = chain.dag_proposed;
        rates["dag_accepted"] = chain.dag_accepted;
        rates["dag_accept_rate"] = chain.dag_accept_rate();
        rates["theta0_proposed"] = chain.theta0_proposed;
        rates["theta0_accepted"] = chain.theta0_accepted;
        rates["theta0_accept_rate"] = chain.theta0_accept_rate();
        open_out(dir / "accept_rates.json") << rates.dump(2) << '\n';
    }
    {
        json echo;
        echo["iterations"] = meta.iterations;
        echo["burn_in"] = meta.burn_in;
        echo["thin"] = meta.thin;
        echo["seed"] = meta.seed;
        echo["a"] = meta.a;
        echo["g"] = meta.g;
        echo["pi"] = meta.pi;
        echo["sigma0_sq"] = meta.sigma0_sq;
        echo["standardize"] = meta.standardize;
        echo["q"] = meta.q;
        echo["n"] = meta.n;
        echo["num_samples"] = chain.num_samples();
        open_out(dir / "config_echo.json") << echo.dump(2) << '\n';
    }
    write_dataset_csv(dir / "data_used.csv", data);
    write_matrix_csv(dir / "edge_probs.csv", edge_probs(chain).edge_probs);
}

ChainOutput load_run_chain(const fs::path& dir) {
    const RunMeta meta = load_run_meta(dir);
    ChainOutput chain;
    chain.q = meta.q;
    chain.seed = meta.seed;
    chain.iterations = meta.iterations;
    chain.burn_in = meta.burn_in;
    chain.thin = meta.thin;
    {
        auto in = open_in(dir / "theta0_trace.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            chain.theta0_trace.push_back(
                parse_double(line, dir / "theta0_trace.csv",
                             static_cast<long>(chain.theta0_trace.size()) + 2, 1));
        }
    }
    {
        auto in = open_in(dir / "dag_samples.jsonl");
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const json rec = json::parse(line);
            if (first) {
                chain.first_dag = Dag::from_edges(meta.q, edges_from_json(rec.at("edges")));
                first = false;
            } else {
                DagDelta d;
                d.add = edges_from_json(rec.at("add"));
                d.del = edges_from_json(rec.at("del"));
                chain.deltas.push_back(std::move(d));
            }
        }
        if (first) throw ValidationError(dir.string() + ": dag_samples.jsonl empty");
    }
    {
        auto in = open_in(dir / "chol_samples.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const json rec = json::parse(line);
            CholeskyFactor chol;
            for (const auto& v : rec.at("sigma2")) chol.sigma2.push_back(v.get<double>());
            chol.coeffs.resize(chol.sigma2.size());
            // triplets arrive in per-node parent order (parents ascending)
            for (const auto& trip : rec.at("coeffs")) {
                const int j = trip.at(0).get<int>() - 1;
                chol.coeffs.at(j).push_back(trip.at(2).get<double>());
            }
            chain.chol_samples.push_back(std::move(chol));
        }
    }
    const long t = chain.num_samples();
    if (static_cast<long>(chain.chol_samples.size()) != t ||
        static_cast<long>(chain.deltas.size()) != t - 1)
        throw ValidationError(dir.string() + ": run artifacts have mismatched lengths");
    {
        auto in = open_in(dir / "accept_rates.json");
        const json rates = json::parse(in);
        chain.dag_proposed = rates.value("dag_proposed", 0L);
        chain.dag_accepted = rates.value("dag_accepted", 0L);
        chain.theta0_proposed = rates.value("theta0_proposed", 0L);
        chain.theta0_accepted = rates.value("theta0_accepted", 0L);
    }
    return chain;
}

Dataset load_run_data(const fs::path& dir) { return read_dataset_csv(dir / "data_used.csv"); }

RunMeta load_run_meta(const fs::path& dir) {
    auto in = open_in(dir / "config_echo.json");
    const json echo = json::parse(in);
    RunMeta meta;
    meta.iterations = echo.at("iterations").get<long>();
    meta.burn_in = echo.at("burn_in").get<long>();
    meta.thin = echo.at("thin").get<long>();
    meta.seed = echo.at("seed").get<std::uint64_t>();
    meta.a = echo.at("a").get<double>();
    meta.g = echo.at("g").get<double>();
    meta.pi = echo.at("pi").get<double>();
    meta.sigma0_sq = echo.at("sigma0_sq").get<double>();
    meta.standardize = echo.at("standardize").get<bool>();
    meta.q = echo.at("q").get<int>();
    meta.n = echo.at("n").get<long>();
    return meta;
}

void write_effects_csv(const fs::path& path,
                       const std::vector<CausalEffectTable>& tables) {
    auto out = open_out(path);
    out << "s,x_tilde,bma,lo,hi\n";
    for (const auto& t : tables)
        for (long i = 0; i < t.x_values.size(); ++i)
            out << t.s + 1 << ',' << fmt(t.x_values[i]) << ',' << fmt(t.bma[i]) << ','
                << fmt(t.lo[i]) << ',' << fmt(t.hi[i]) << '\n';
}

void write_roc_csv(const fs::path& path, const std::vector<RocPoint>& roc) {
    auto out = open_out(path);
    out << "k,fpr,sen,spe,tp,fp,tn,fn\n";
    for (const auto& p : roc)
        out << fmt(p.k) << ',' << fmt(p.fpr) << ',' << fmt(p.sen) << ',' << fmt(p.spe)
            << ',' << p.tp << ',' << p.fp << ',' << p.tn << ',' << p.fn << '\n';
}

void write_roc_band_csv(const fs::path& path,
                        const std::vector<std::vector<RocPoint>>& roc_per_rep) {
    if (roc_per_rep.empty()) throw ValidationError("roc band: no replicates");
    const size_t nk = roc_per_rep.front().size();
    for (const auto& r : roc_per_rep)
        if (r.size() != nk) throw ValidationError("roc band: grids differ");
    auto out = open_out(path);
    out << "k,fpr_mean,sen_mean,fpr_p05,fpr_p95,sen_p05,sen_p95\n";
    auto pct = [](std::vector<double> v, double p) {
        std::sort(v.begin(), v.end());
        const double h = p * (v.size() - 1);
        const size_t lo = static_cast<size_t>(h);
        const size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - lo) * (v[hi] - v[lo]);
    };
    for (size_t i = 0; i < nk; ++i) {
        std::vector<double> fpr, sen;
        for (const auto& r : roc_per_rep) {
            fpr.push_back(r[i].fpr);
            sen.push_back(r[i].sen);
        }
        const double fm = std::accumulate(fpr.begin(), fpr.end(), 0.0) / fpr.size();
        const double sm = std::accumulate(sen.begin(), sen.end(), 0.0) / sen.size();
        out << fmt(roc_per_rep.front()[i].k) << ',' << fmt(fm) << ',' << fmt(sm) << ','
            << fmt(pct(fpr, 0.05)) << ',' << fmt(pct(fpr, 0.95)) << ','
            << fmt(pct(sen, 0.05)) << ',' << fmt(pct(sen, 0.95)) << '\n';
    }
}

void save_fixture_dir(const fs::path& dir, const Dataset& data,
                      const GroundTruth& truth) {
    fs::create_directories(dir);
    write_dag_adjacency_csv(dir / "truth_dag.csv", truth.dag);
    write_dataset_csv(dir / "data.csv", data);
    auto out = open_out(dir / "true_effects.csv");
    out << "s,x_tilde,beta_true\n";
    for (long s = 1; s < truth.beta_true.cols() + 1; ++s)
        for (long i = 0; i < truth.beta_true.rows(); ++i)
            out << s + 1 << ',' << fmt(data.xobs(i, s - 1)) << ','
                << fmt(truth.beta_true(i, s - 1)) << '\n';
}

Eigen::MatrixXd read_true_effects_csv(const fs::path& path, int q, long n) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(n, q - 1, -1.0);
    std::vector<long> fill(q - 1, 0);
    long row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw ValidationError(path.string() + ": expected 3 columns at row " +
                                  std::to_string(row_no));
        const int s = static_cast<int>(parse_double(fields[0], path, row_no, 1));
        if (s < 2 || s > q)
            throw ValidationError(path.string() + ": node out of range at row " +
                                  std::to_string(row_no));
        long& i = fill[s - 2];
        if (i >= n)
            throw ValidationError(path.string() + ": too many rows for node " +
                                  std::to_string(s));
        beta(i, s - 2) = parse_double(fields[2], path, row_no, 3);
        ++i;
    }
    for (int s = 0; s < q - 1; ++s)
        if (fill[s] != n)
            throw ValidationError(path.string() + ": incomplete effects for node " +
                                  std::to_string(s + 2));
    return beta;
}

}  // namespace dagprobit::io
