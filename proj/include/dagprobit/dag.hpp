#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dagprobit {

using Vertex = int;
using Edge = std::pair<Vertex, Vertex>;  // (u, v) means u -> v

// Node 0 is the latent response; it may never have children. Vertices are
// 0-based internally, 1-based in all file formats.
inline constexpr Vertex kResponse = 0;

enum class OpKind { InsertD, DeleteD, ReverseD };

struct DagOperator {
    OpKind kind;
    Vertex u, v;  // the edge u -> v the operator refers to

    bool operator==(const DagOperator&) const = default;
};

// Directed graph on q vertices with at most one edge per ordered pair and no
// self loops. Construction does not force acyclicity (is_acyclic must be able
// to answer "no"); the sampler only ever builds valid DAGs via
// apply_operator. Value-semantic: snapshots move freely across threads,
// mutation happens by building a new value.
class Dag {
public:
    explicit Dag(int q);
    static Dag from_edges(int q, const std::vector<Edge>& edges);

    int num_vertices() const { return q_; }
    int num_edges() const { return n_edges_; }
    bool has_edge(Vertex u, Vertex v) const { return adj_[idx(u, v)] != 0; }

    const std::vector<Vertex>& parents(Vertex v) const;
    // family = (v, pa(v)) with v in first position
    std::vector<Vertex> family(Vertex v) const;
    std::vector<Vertex> children(Vertex u) const;
    std::vector<Edge> edges() const;

    // valid = acyclic and response-node childless
    bool response_childless() const;
    bool is_valid() const;

    bool operator==(const Dag& other) const {
        return q_ == other.q_ && adj_ == other.adj_;
    }

    // raw edge insertion/removal; callers are responsible for validity
    void add_edge(Vertex u, Vertex v);
    void remove_edge(Vertex u, Vertex v);

private:
    int idx(Vertex u, Vertex v) const { return u * q_ + v; }
    void check_vertex(Vertex v) const;

    int q_ = 0;
    int n_edges_ = 0;
    std::vector<std::uint8_t> adj_;            // dense q x q
    std::vector<std::vector<Vertex>> parents_; // sorted parent list per node
};

bool is_acyclic(const Dag& dag);

// true iff a directed path from -> to exists (DFS; used as the incremental
// cycle check in proposal enumeration)
bool reachable(const Dag& dag, Vertex from, Vertex to);

// vertices sorted so every parent precedes its children
std::vector<Vertex> topological_order(const Dag& dag);

// The proposal set O_D: every InsertD/DeleteD/ReverseD whose application
// yields an acyclic DAG with a childless response node. max_edges, when set,
// drops inserts that would exceed the cap.
std::vector<DagOperator> valid_operators(const Dag& dag,
                                         std::optional<int> max_edges = std::nullopt);

bool is_valid_operator(const Dag& dag, const DagOperator& op,
                       std::optional<int> max_edges = std::nullopt);

// Applies op; throws ValidationError if op is not valid for dag.
Dag apply_operator(const Dag& dag, const DagOperator& op);

std::string to_string(const DagOperator& op);

}  // namespace dagprobit
