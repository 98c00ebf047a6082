#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "covspec/errors.hpp"
#include "covspec/rational.hpp"

namespace covspec {

// Finite multigraph in directed-pair form.  Every undirected edge is stored
// as directed edges related by the involution iota; whole-loops are swapped
// pairs at one vertex, half-loops are fixed points of iota.  Immutable after
// construction.
class Graph {
public:
    Graph() = default;

    static Graph from_directed(int vertex_count, std::vector<int> tails, std::vector<int> heads,
                               std::vector<int> involution);

    int vertex_count() const { return vertex_count_; }
    int directed_edge_count() const { return static_cast<int>(tail_.size()); }

    int tail(int e) const { return tail_[e]; }
    int head(int e) const { return head_[e]; }
    int involution(int e) const { return involution_[e]; }
    bool is_half_loop(int e) const { return involution_[e] == e; }

    // Degree counts each directed edge once at its tail: a whole-loop adds 2,
    // a half-loop adds 1.
    int degree(int v) const { return static_cast<int>(out_[v].size()); }
    int max_degree() const;
    bool is_regular() const;

    // Directed edges with tail v, ascending edge id.
    const std::vector<int>& out_edges(int v) const { return out_[v]; }

    int half_loop_count() const { return half_loops_; }
    // Number of undirected non-half-loop edges (directed pairs).
    int pair_count() const { return (directed_edge_count() - half_loops_) / 2; }

    bool operator==(const Graph& o) const {
        return vertex_count_ == o.vertex_count_ && tail_ == o.tail_ && head_ == o.head_ &&
               involution_ == o.involution_;
    }

private:
    int vertex_count_ = 0;
    std::vector<int> tail_, head_, involution_;
    std::vector<std::vector<int>> out_;
    int half_loops_ = 0;

    void finalize();
};

// Build input: one record per undirected edge.  A half-loop record must have
// tail == head and contributes a single self-inverse directed edge; any other
// record contributes a directed pair (a whole-loop when tail == head).
struct EdgeSpec {
    int tail = 0;
    int head = 0;
    bool half_loop = false;
};

Graph build_graph(int vertex_count, const std::vector<EdgeSpec>& edges);

// Convenience constructions used throughout the tests.
Graph bouquet_of_whole_loops(int count);  // W_m: one vertex, m whole-loops
Graph bouquet_of_half_loops(int count);   // H_m: one vertex, m half-loops
Graph cycle_graph(int length);
Graph path_graph(int vertices);
Graph complete_graph(int vertices);

// chi = |V| - |E^dir|/2, exact (a half-loop counts as half an edge).
Rat euler_characteristic(const Graph& g);
// order = -chi = sum_v (deg(v) - 2)/2.
Rat order(const Graph& g);

bool is_pruned(const Graph& g);  // all degrees >= 2

// Component id per vertex, ids dense from 0 in order of first appearance.
std::vector<int> connected_components(const Graph& g);
int component_count(const Graph& g);
bool is_connected(const Graph& g);

// Dense square integer matrix with overflow-checked arithmetic.
class IntegerMatrix {
public:
    IntegerMatrix() = default;
    explicit IntegerMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0) {}

    static IntegerMatrix identity(int n);

    int dim() const { return n_; }
    std::int64_t& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    std::int64_t at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    IntegerMatrix multiply(const IntegerMatrix& o) const;  // throws resource_error on overflow
    IntegerMatrix power(int k) const;
    std::int64_t trace() const;

    bool operator==(const IntegerMatrix& o) const = default;

private:
    int n_ = 0;
    std::vector<std::int64_t> a_;
};

IntegerMatrix adjacency_matrix(const Graph& g);  // A[u][v] = #directed edges u -> v
IntegerMatrix degree_matrix(const Graph& g);
// H[e][f] = 1 iff head(e) = tail(f) and iota(e) != f.
IntegerMatrix hashimoto_matrix(const Graph& g);

// Subgraph with the mapping back to parent ids, so occurrence and tangle code
// can compose morphisms.
struct Subgraph {
    Graph graph;
    std::vector<int> vertex_parent;  // subgraph vertex -> parent vertex
    std::vector<int> edge_parent;    // subgraph directed edge -> parent directed edge
};

// edge_ids must be closed under the parent involution; vertices are the
// endpoints of the kept edges.
Subgraph subgraph_from_edges(const Graph& parent, const std::vector<int>& edge_ids);

// Largest pruned subgraph: iteratively deletes vertices of degree < 2.
Subgraph pruned_core(const Graph& g);

struct Walk {
    int start_vertex = 0;
    std::vector<int> edges;
};

bool is_closed_walk(const Graph& g, const Walk& w);

// Vertices and edges traversed by the walk (edges closed under involution).
Subgraph graph_of_walk(const Graph& g, const Walk& w);

struct SnbcOptions {
    int length_cap = 12;
};

// Counts strictly non-backtracking closed walks of length k: edge sequences
// (e_1..e_k) chained head-to-tail with iota(e_i) != e_{i+1} cyclically.  The
// count equals Tr(H^k).  The visitor, when given, receives each walk once in
// lexicographic edge order.
long long enumerate_snbc_walks(const Graph& g, int k, const SnbcOptions& opt = {});
long long enumerate_snbc_walks(const Graph& g, int k, const std::function<void(const Walk&)>& visitor,
                               const SnbcOptions& opt = {});

// Same count computed by meet-in-the-middle over half-length path tables;
// no per-walk visitor.  Suitable for Monte Carlo inner loops.
long long snbc_closed_walk_count(const Graph& g, int k);

// Gamma_G(A): heads of directed edges with tails in A; sorted, deduplicated.
std::vector<int> neighborhood(const Graph& g, const std::vector<int>& vertex_set);

// Graph whose adjacency matrix is A_G^k.  Diagonal entries decompose
// canonically into floor(m/2) whole-loops plus one half-loop when m is odd.
Graph walk_power_graph(const Graph& g, int k);

struct SpreaderOptions {
    int vertex_cap = 20;
};

// Exhaustive check that |Gamma(A)| >= (1+gamma)|A| for all |A| <= n/2.
// Requires g regular; |V| above the cap raises resource_error.
bool is_gamma_spreader(const Graph& g, double gamma, const SpreaderOptions& opt = {});

}  // namespace covspec
