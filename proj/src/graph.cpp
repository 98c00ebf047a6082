#include "covspec/graph.hpp"

#include <algorithm>
#include <numeric>

namespace covspec {

void Graph::finalize() {
    out_.assign(vertex_count_, {});
    half_loops_ = 0;
    for (int e = 0; e < directed_edge_count(); ++e) {
        out_[tail_[e]].push_back(e);
        if (involution_[e] == e) ++half_loops_;
    }
}

Graph Graph::from_directed(int vertex_count, std::vector<int> tails, std::vector<int> heads,
                           std::vector<int> involution) {
    if (vertex_count < 0) throw validation_error("vertex count must be nonnegative");
    const int m = static_cast<int>(tails.size());
    if (static_cast<int>(heads.size()) != m || static_cast<int>(involution.size()) != m)
        throw validation_error("directed edge arrays must have equal length");
    for (int e = 0; e < m; ++e) {
        if (tails[e] < 0 || tails[e] >= vertex_count || heads[e] < 0 || heads[e] >= vertex_count)
            throw validation_error("edge endpoint out of range");
        int p = involution[e];
        if (p < 0 || p >= m) throw validation_error("involution image out of range");
        if (involution[p] != e) throw validation_error("edge pairing is not involutive");
        if (tails[p] != heads[e]) throw validation_error("involution must swap tails and heads");
        if (p == e && tails[e] != heads[e]) throw validation_error("half-loop with tail != head");
    }
    Graph g;
    g.vertex_count_ = vertex_count;
    g.tail_ = std::move(tails);
    g.head_ = std::move(heads);
    g.involution_ = std::move(involution);
    g.finalize();
    return g;
}

int Graph::max_degree() const {
    int d = 0;
    for (int v = 0; v < vertex_count_; ++v) d = std::max(d, degree(v));
    return d;
}

bool Graph::is_regular() const {
    if (vertex_count_ == 0) return true;
    int d = degree(0);
    for (int v = 1; v < vertex_count_; ++v)
        if (degree(v) != d) return false;
    return true;
}

Graph build_graph(int vertex_count, const std::vector<EdgeSpec>& edges) {
    if (vertex_count < 0) throw validation_error("vertex count must be nonnegative");
    std::vector<int> tails, heads, inv;
    for (const auto& spec : edges) {
        if (spec.tail < 0 || spec.tail >= vertex_count || spec.head < 0 || spec.head >= vertex_count)
            throw validation_error("edge endpoint out of range");
        if (spec.half_loop) {
            if (spec.tail != spec.head) throw validation_error("half-loop with tail != head");
            int e = static_cast<int>(tails.size());
            tails.push_back(spec.tail);
            heads.push_back(spec.head);
            inv.push_back(e);
        } else {
            int e = static_cast<int>(tails.size());
            tails.push_back(spec.tail);
            heads.push_back(spec.head);
            tails.push_back(spec.head);
            heads.push_back(spec.tail);
            inv.push_back(e + 1);
            inv.push_back(e);
        }
    }
    return Graph::from_directed(vertex_count, std::move(tails), std::move(heads), std::move(inv));
}

Graph bouquet_of_whole_loops(int count) {
    std::vector<EdgeSpec> edges(count, EdgeSpec{0, 0, false});
    return build_graph(1, edges);
}

Graph bouquet_of_half_loops(int count) {
    std::vector<EdgeSpec> edges(count, EdgeSpec{0, 0, true});
    return build_graph(1, edges);
}

Graph cycle_graph(int length) {
    std::vector<EdgeSpec> edges;
    for (int i = 0; i < length; ++i) edges.push_back({i, (i + 1) % length, false});
    return build_graph(length, edges);
}

Graph path_graph(int vertices) {
    std::vector<EdgeSpec> edges;
    for (int i = 0; i + 1 < vertices; ++i) edges.push_back({i, i + 1, false});
    return build_graph(vertices, edges);
}

Graph complete_graph(int vertices) {
    std::vector<EdgeSpec> edges;
    for (int i = 0; i < vertices; ++i)
        for (int j = i + 1; j < vertices; ++j) edges.push_back({i, j, false});
    return build_graph(vertices, edges);
}

Rat euler_characteristic(const Graph& g) {
    return Rat(g.vertex_count()) - Rat(g.directed_edge_count(), 2);
}

Rat order(const Graph& g) { return -euler_characteristic(g); }

bool is_pruned(const Graph& g) {
    for (int v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) < 2) return false;
    return true;
}

std::vector<int> connected_components(const Graph& g) {
    std::vector<int> comp(g.vertex_count(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int s = 0; s < g.vertex_count(); ++s) {
        if (comp[s] != -1) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int e : g.out_edges(v)) {
                int w = g.head(e);
                if (comp[w] == -1) {
                    comp[w] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    return comp;
}

int component_count(const Graph& g) {
    auto comp = connected_components(g);
    return comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
}

bool is_connected(const Graph& g) { return component_count(g) == 1; }

IntegerMatrix IntegerMatrix::identity(int n) {
    IntegerMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

IntegerMatrix IntegerMatrix::multiply(const IntegerMatrix& o) const {
    IntegerMatrix r(n_);
    for (int i = 0; i < n_; ++i)
        for (int k = 0; k < n_; ++k) {
            std::int64_t aik = at(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < n_; ++j) {
                std::int64_t prod, sum;
                if (__builtin_mul_overflow(aik, o.at(k, j), &prod) ||
                    __builtin_add_overflow(r.at(i, j), prod, &sum))
                    throw resource_error("integer matrix product overflows 64 bits");
                r.at(i, j) = sum;
            }
        }
    return r;
}

IntegerMatrix IntegerMatrix::power(int k) const {
    IntegerMatrix result = identity(n_);
    IntegerMatrix base = *this;
    while (k > 0) {
        if (k & 1) result = result.multiply(base);
        k >>= 1;
        if (k > 0) base = base.multiply(base);
    }
    return result;
}

std::int64_t IntegerMatrix::trace() const {
    std::int64_t t = 0;
    for (int i = 0; i < n_; ++i) t += at(i, i);
    return t;
}

IntegerMatrix adjacency_matrix(const Graph& g) {
    IntegerMatrix a(g.vertex_count());
    for (int e = 0; e < g.directed_edge_count(); ++e) ++a.at(g.tail(e), g.head(e));
    return a;
}

IntegerMatrix degree_matrix(const Graph& g) {
    IntegerMatrix d(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) d.at(v, v) = g.degree(v);
    return d;
}

IntegerMatrix hashimoto_matrix(const Graph& g) {
    IntegerMatrix h(g.directed_edge_count());
    for (int e = 0; e < g.directed_edge_count(); ++e)
        for (int f : g.out_edges(g.head(e)))
            if (g.involution(e) != f) h.at(e, f) = 1;
    return h;
}

Subgraph subgraph_from_edges(const Graph& parent, const std::vector<int>& edge_ids) {
    std::vector<int> keep = edge_ids;
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

    std::vector<int> edge_index(parent.directed_edge_count(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        int e = keep[i];
        if (e < 0 || e >= parent.directed_edge_count()) throw validation_error("edge id out of range");
        edge_index[e] = static_cast<int>(i);
    }
    for (int e : keep)
        if (edge_index[parent.involution(e)] == -1)
            throw validation_error("edge set is not closed under the involution");

    std::vector<int> vertex_index(parent.vertex_count(), -1);
    std::vector<int> vertex_parent;
    auto touch = [&](int v) {
        if (vertex_index[v] == -1) {
            vertex_index[v] = static_cast<int>(vertex_parent.size());
            vertex_parent.push_back(v);
        }
    };
    for (int e : keep) {
        touch(parent.tail(e));
        touch(parent.head(e));
    }

    std::vector<int> tails, heads, inv;
    for (int e : keep) {
        tails.push_back(vertex_index[parent.tail(e)]);
        heads.push_back(vertex_index[parent.head(e)]);
        inv.push_back(edge_index[parent.involution(e)]);
    }
    Subgraph s;
    s.graph = Graph::from_directed(static_cast<int>(vertex_parent.size()), std::move(tails),
                                   std::move(heads), std::move(inv));
    s.vertex_parent = std::move(vertex_parent);
    s.edge_parent = std::move(keep);
    return s;
}

Subgraph pruned_core(const Graph& g) {
    std::vector<bool> vertex_dead(g.vertex_count(), false);
    std::vector<bool> edge_dead(g.directed_edge_count(), false);
    std::vector<int> deg(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) deg[v] = g.degree(v);

    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < g.vertex_count(); ++v) {
            if (vertex_dead[v] || deg[v] >= 2) continue;
            vertex_dead[v] = true;
            changed = true;
            for (int e : g.out_edges(v)) {
                if (edge_dead[e]) continue;
                edge_dead[e] = true;
                edge_dead[g.involution(e)] = true;
                --deg[g.tail(e)];
                --deg[g.head(e)];
                if (g.involution(e) == e) ++deg[v];  // half-loop: single degree unit
            }
        }
    }
    std::vector<int> keep;
    for (int e = 0; e < g.directed_edge_count(); ++e)
        if (!edge_dead[e] && !vertex_dead[g.tail(e)] && !vertex_dead[g.head(e)]) keep.push_back(e);
    return subgraph_from_edges(g, keep);
}

bool is_closed_walk(const Graph& g, const Walk& w) {
    int at = w.start_vertex;
    for (int e : w.edges) {
        if (g.tail(e) != at) return false;
        at = g.head(e);
    }
    return at == w.start_vertex;
}

Subgraph graph_of_walk(const Graph& g, const Walk& w) {
    std::vector<int> edges;
    for (int e : w.edges) {
        edges.push_back(e);
        edges.push_back(g.involution(e));
    }
    if (w.edges.empty()) {
        // isolated start vertex
        Subgraph s;
        s.graph = Graph::from_directed(1, {}, {}, {});
        s.vertex_parent = {w.start_vertex};
        return s;
    }
    return subgraph_from_edges(g, edges);
}

namespace {

// Shared DFS over SNBC edge sequences.  succ[e] lists Hashimoto successors.
template <typename OnWalk>
long long snbc_dfs(const Graph& g, int k, OnWalk&& on_walk) {
    const int m = g.directed_edge_count();
    std::vector<std::vector<int>> succ(m);
    for (int e = 0; e < m; ++e)
        for (int f : g.out_edges(g.head(e)))
            if (g.involution(e) != f) succ[e].push_back(f);

    long long count = 0;
    std::vector<int> walk(k);
    std::vector<std::size_t> cursor(k, 0);
    for (int start = 0; start < m; ++start) {
        walk[0] = start;
        int depth = 1;
        cursor[0] = 0;
        while (depth > 0) {
            if (depth == k) {
                int last = walk[k - 1];
                if (g.head(last) == g.tail(start) && g.involution(last) != start) {
                    ++count;
                    on_walk(walk);
                }
                --depth;
                continue;
            }
            std::size_t& c = cursor[depth - 1];
            const auto& options = succ[walk[depth - 1]];
            if (c == options.size()) {
                c = 0;
                --depth;
                continue;
            }
            walk[depth] = options[c++];
            cursor[depth] = 0;
            ++depth;
        }
    }
    return count;
}

}  // namespace

long long enumerate_snbc_walks(const Graph& g, int k, const SnbcOptions& opt) {
    if (k < 1) throw validation_error("walk length must be >= 1");
    if (k > opt.length_cap) throw resource_error("walk length exceeds configured cap");
    return snbc_dfs(g, k, [](const std::vector<int>&) {});
}

long long enumerate_snbc_walks(const Graph& g, int k, const std::function<void(const Walk&)>& visitor,
                               const SnbcOptions& opt) {
    if (k < 1) throw validation_error("walk length must be >= 1");
    if (k > opt.length_cap) throw resource_error("walk length exceeds configured cap");
    return snbc_dfs(g, k, [&](const std::vector<int>& edges) {
        Walk w;
        w.start_vertex = g.tail(edges[0]);
        w.edges = edges;
        visitor(w);
    });
}

long long snbc_closed_walk_count(const Graph& g, int k) {
    if (k < 1) throw validation_error("walk length must be >= 1");
    const int m = g.directed_edge_count();
    std::vector<std::vector<int>> succ(m);
    for (int e = 0; e < m; ++e)
        for (int f : g.out_edges(g.head(e)))
            if (g.involution(e) != f) succ[e].push_back(f);

    // rows[e] = sorted (target, count) pairs of (H^half)[e, *]
    auto half_rows = [&](int half) {
        std::vector<std::vector<std::pair<int, long long>>> rows(m);
        std::vector<std::pair<int, long long>> frontier, next;
        for (int e = 0; e < m; ++e) {
            frontier.assign(1, {e, 1});
            for (int step = 0; step < half; ++step) {
                next.clear();
                for (auto [f, c] : frontier)
                    for (int t : succ[f]) next.push_back({t, c});
                std::sort(next.begin(), next.end());
                frontier.clear();
                for (auto [t, c] : next) {
                    if (!frontier.empty() && frontier.back().first == t)
                        frontier.back().second += c;
                    else
                        frontier.push_back({t, c});
                }
            }
            rows[e] = frontier;
        }
        return rows;
    };

    if (k == 1) {
        long long total = 0;
        for (int e = 0; e < m; ++e)
            if (g.head(e) == g.tail(e) && g.involution(e) != e) ++total;
        return total;
    }

    int a = k / 2, b = k - a;
    auto ra = half_rows(a);
    auto rb = (a == b) ? ra : half_rows(b);
    // Tr(H^k) = sum_e sum_f (H^a)[e,f] (H^b)[f,e]
    long long total = 0;
    for (int e = 0; e < m; ++e) {
        for (auto [f, c] : ra[e]) {
            const auto& row = rb[f];
            auto it = std::lower_bound(row.begin(), row.end(), std::pair<int, long long>{e, 0});
            if (it != row.end() && it->first == e) total += c * it->second;
        }
    }
    return total;
}

std::vector<int> neighborhood(const Graph& g, const std::vector<int>& vertex_set) {
    std::vector<int> result;
    for (int v : vertex_set) {
        if (v < 0 || v >= g.vertex_count()) throw validation_error("vertex out of range");
        for (int e : g.out_edges(v)) result.push_back(g.head(e));
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

Graph walk_power_graph(const Graph& g, int k) {
    IntegerMatrix ak = adjacency_matrix(g).power(k);
    std::vector<EdgeSpec> edges;
    for (int u = 0; u < g.vertex_count(); ++u) {
        for (int v = u + 1; v < g.vertex_count(); ++v)
            for (std::int64_t c = 0; c < ak.at(u, v); ++c) edges.push_back({u, v, false});
        std::int64_t diag = ak.at(u, u);
        for (std::int64_t c = 0; c < diag / 2; ++c) edges.push_back({u, u, false});
        if (diag % 2 == 1) edges.push_back({u, u, true});
    }
    return build_graph(g.vertex_count(), edges);
}

bool is_gamma_spreader(const Graph& g, double gamma, const SpreaderOptions& opt) {
    if (!g.is_regular()) throw validation_error("spreader check requires a regular graph");
    const int n = g.vertex_count();
    if (n > opt.vertex_cap || n > 31) throw resource_error("spreader check exceeds vertex cap");
    std::vector<std::uint32_t> nbr(n, 0);
    for (int e = 0; e < g.directed_edge_count(); ++e)
        nbr[g.tail(e)] |= (std::uint32_t{1} << g.head(e));

    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
        int size = __builtin_popcount(mask);
        if (2 * size > n) continue;
        std::uint32_t reach = 0;
        std::uint32_t rest = mask;
        while (rest) {
            int v = __builtin_ctz(rest);
            rest &= rest - 1;
            reach |= nbr[v];
        }
        if (__builtin_popcount(reach) < (1.0 + gamma) * size) return false;
    }
    return true;
}

}  // namespace covspec
