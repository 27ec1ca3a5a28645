#include "dagprobit/dag.hpp"

#include <algorithm>

#include "dagprobit/errors.hpp"

namespace dagprobit {

Dag::Dag(int q) : q_(q), adj_(static_cast<size_t>(q) * q, 0), parents_(q) {
    if (q < 1) throw ValidationError("Dag: need at least one vertex");
}

void Dag::check_vertex(Vertex v) const {
    if (v < 0 || v >= q_) {
        throw ValidationError("Dag: vertex " + std::to_string(v + 1) +
                              " out of range 1.." + std::to_string(q_));
    }
}

Dag Dag::from_edges(int q, const std::vector<Edge>& edges) {
    Dag d(q);
    for (const auto& [u, v] : edges) d.add_edge(u, v);
    return d;
}

void Dag::add_edge(Vertex u, Vertex v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw ValidationError("Dag: self loop");
    if (has_edge(u, v)) throw ValidationError("Dag: duplicate edge");
    adj_[idx(u, v)] = 1;
    ++n_edges_;
    auto& pa = parents_[v];
    pa.insert(std::lower_bound(pa.begin(), pa.end(), u), u);
}

void Dag::remove_edge(Vertex u, Vertex v) {
    check_vertex(u);
    check_vertex(v);
    if (!has_edge(u, v)) throw ValidationError("Dag: removing absent edge");
    adj_[idx(u, v)] = 0;
    --n_edges_;
    auto& pa = parents_[v];
    pa.erase(std::lower_bound(pa.begin(), pa.end(), u));
}

const std::vector<Vertex>& Dag::parents(Vertex v) const {
    check_vertex(v);
    return parents_[v];
}

std::vector<Vertex> Dag::family(Vertex v) const {
    check_vertex(v);
    std::vector<Vertex> fa;
    fa.reserve(parents_[v].size() + 1);
    fa.push_back(v);
    fa.insert(fa.end(), parents_[v].begin(), parents_[v].end());
    return fa;
}

std::vector<Vertex> Dag::children(Vertex u) const {
    check_vertex(u);
    std::vector<Vertex> ch;
    for (Vertex v = 0; v < q_; ++v)
        if (has_edge(u, v)) ch.push_back(v);
    return ch;
}

std::vector<Edge> Dag::edges() const {
    std::vector<Edge> es;
    es.reserve(n_edges_);
    for (Vertex u = 0; u < q_; ++u)
        for (Vertex v = 0; v < q_; ++v)
            if (has_edge(u, v)) es.emplace_back(u, v);
    return es;
}

bool Dag::response_childless() const {
    for (Vertex v = 0; v < q_; ++v)
        if (has_edge(kResponse, v)) return false;
    return true;
}

bool Dag::is_valid() const { return response_childless() && is_acyclic(*this); }

bool is_acyclic(const Dag& dag) {
    const int q = dag.num_vertices();
    std::vector<int> remaining(q, 0);
    for (Vertex v = 0; v < q; ++v) remaining[v] = static_cast<int>(dag.parents(v).size());
    std::vector<Vertex> stack;
    for (Vertex v = 0; v < q; ++v)
        if (remaining[v] == 0) stack.push_back(v);
    int seen = 0;
    while (!stack.empty()) {
        Vertex u = stack.back();
        stack.pop_back();
        ++seen;
        for (Vertex v = 0; v < q; ++v) {
            if (dag.has_edge(u, v) && --remaining[v] == 0) stack.push_back(v);
        }
    }
    return seen == q;
}

bool reachable(const Dag& dag, Vertex from, Vertex to) {
    if (from == to) return true;
    const int q = dag.num_vertices();
    std::vector<std::uint8_t> visited(q, 0);
    std::vector<Vertex> stack{from};
    visited[from] = 1;
    while (!stack.empty()) {
        Vertex u = stack.back();
        stack.pop_back();
        for (Vertex v = 0; v < q; ++v) {
            if (!dag.has_edge(u, v) || visited[v]) continue;
            if (v == to) return true;
            visited[v] = 1;
            stack.push_back(v);
        }
    }
    return false;
}

std::vector<Vertex> topological_order(const Dag& dag) {
    const int q = dag.num_vertices();
    std::vector<int> remaining(q);
    for (Vertex v = 0; v < q; ++v) remaining[v] = static_cast<int>(dag.parents(v).size());
    std::vector<Vertex> order, stack;
    for (Vertex v = q - 1; v >= 0; --v)
        if (remaining[v] == 0) stack.push_back(v);
    while (!stack.empty()) {
        Vertex u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (Vertex v = 0; v < q; ++v)
            if (dag.has_edge(u, v) && --remaining[v] == 0) stack.push_back(v);
    }
    if (static_cast<int>(order.size()) != q)
        throw ValidationError("topological_order: graph has a cycle");
    return order;
}

namespace {

// insert u->v keeps the graph acyclic iff v cannot already reach u
bool insert_ok(const Dag& dag, Vertex u, Vertex v) {
    if (u == kResponse) return false;  // response node may not gain children
    if (dag.has_edge(u, v) || dag.has_edge(v, u)) return false;
    return !reachable(dag, v, u);
}

// reversal of u->v: remove u->v, add v->u; valid iff v is not the response
// and no alternative path u ~> v remains
bool reverse_ok(Dag dag, Vertex u, Vertex v) {
    if (v == kResponse) return false;
    dag.remove_edge(u, v);
    return !reachable(dag, u, v);
}

}  // namespace

bool is_valid_operator(const Dag& dag, const DagOperator& op,
                       std::optional<int> max_edges) {
    const int q = dag.num_vertices();
    if (op.u < 0 || op.u >= q || op.v < 0 || op.v >= q || op.u == op.v) return false;
    switch (op.kind) {
        case OpKind::InsertD:
            if (max_edges && dag.num_edges() >= *max_edges) return false;
            return insert_ok(dag, op.u, op.v);
        case OpKind::DeleteD:
            return dag.has_edge(op.u, op.v);
        case OpKind::ReverseD:
            return dag.has_edge(op.u, op.v) && reverse_ok(dag, op.u, op.v);
    }
    return false;
}

std::vector<DagOperator> valid_operators(const Dag& dag, std::optional<int> max_edges) {
    const int q = dag.num_vertices();
    std::vector<DagOperator> ops;
    const bool can_insert = !max_edges || dag.num_edges() < *max_edges;
    for (Vertex u = 0; u < q; ++u) {
        for (Vertex v = 0; v < q; ++v) {
            if (u == v) continue;
            if (dag.has_edge(u, v)) {
                ops.push_back({OpKind::DeleteD, u, v});
                if (reverse_ok(dag, u, v)) ops.push_back({OpKind::ReverseD, u, v});
            } else if (can_insert && insert_ok(dag, u, v)) {
                ops.push_back({OpKind::InsertD, u, v});
            }
        }
    }
    return ops;
}

Dag apply_operator(const Dag& dag, const DagOperator& op) {
    if (!is_valid_operator(dag, op))
        throw ValidationError("apply_operator: invalid operator " + to_string(op));
    Dag out = dag;
    switch (op.kind) {
        case OpKind::InsertD:
            out.add_edge(op.u, op.v);
            break;
        case OpKind::DeleteD:
            out.remove_edge(op.u, op.v);
            break;
        case OpKind::ReverseD:
            out.remove_edge(op.u, op.v);
            out.add_edge(op.v, op.u);
            break;
    }
    return out;
}

std::string to_string(const DagOperator& op) {
    const char* name = op.kind == OpKind::InsertD   ? "InsertD"
                       : op.kind == OpKind::DeleteD ? "DeleteD"
                                                    : "ReverseD";
    return std::string(name) + " " + std::to_string(op.u + 1) + "->" +
           std::to_string(op.v + 1);
}

}  // namespace dagprobit
