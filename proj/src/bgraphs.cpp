#include "covspec/bgraphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "covspec/errors.hpp"
#include "covspec/rng.hpp"

namespace covspec {

BGraph make_bgraph(Graph graph, Graph base, GraphMorphism morphism) {
    validate_morphism(graph, base, morphism);
    BGraph b{std::move(graph), std::move(base), std::move(morphism), false};
    b.etale = is_etale(b.graph, b.base, b.morphism);
    return b;
}

BGraph cover_bgraph(const Cover& c) { return make_bgraph(c.total, c.base, c.projection); }

namespace {

struct InjectionSearch {
    const BGraph& a;
    const BGraph& b;
    long long cap;
    bool collect;

    std::vector<int> order;                   // a's vertices in assignment order
    std::vector<int> img;                     // vertex image in b, -1 if unset
    std::vector<char> used;                   // b vertices already taken
    std::vector<int> source_orbits;           // orbit representatives of a's edges
    std::vector<char> orbit_used;             // b edge-pair orbits taken, by rep id
    std::vector<int> orbit_image;             // directed image of each source rep
    long long nodes = 0;
    long long count = 0;
    std::vector<GraphMorphism> found;

    // per-vertex label multiset degree: label -> number of out-edges
    std::vector<std::map<int, int>> a_label_deg;
    std::vector<std::map<int, int>> b_label_deg;

    InjectionSearch(const BGraph& a_, const BGraph& b_, long long cap_, bool collect_)
        : a(a_), b(b_), cap(cap_), collect(collect_) {}

    void budget() {
        if (++nodes > cap) throw resource_error("injection search exceeded its node budget");
    }

    static std::vector<std::map<int, int>> label_degrees(const BGraph& g) {
        std::vector<std::map<int, int>> deg(g.graph.vertex_count());
        for (int e = 0; e < g.graph.directed_edge_count(); ++e)
            deg[g.graph.tail(e)][g.morphism.edge_map[e]]++;
        return deg;
    }

    bool degree_feasible(int av, int bv) const {
        const auto& need = a_label_deg[av];
        const auto& have = b_label_deg[bv];
        for (const auto& [label, cnt] : need) {
            auto it = have.find(label);
            if (it == have.end() || it->second < cnt) return false;
        }
        return true;
    }

    void prepare() {
        const Graph& g = a.graph;
        a_label_deg = label_degrees(a);
        b_label_deg = label_degrees(b);
        img.assign(g.vertex_count(), -1);
        used.assign(b.graph.vertex_count(), 0);
        orbit_used.assign(b.graph.directed_edge_count(), 0);

        // BFS from a max-degree vertex of each component
        std::vector<char> seen(g.vertex_count(), 0);
        std::vector<int> worklist;
        auto push_component = [&](int root) {
            std::size_t head = order.size();
            order.push_back(root);
            seen[root] = 1;
            while (head < order.size()) {
                int v = order[head++];
                for (int e : g.out_edges(v)) {
                    int w = g.head(e);
                    if (!seen[w]) {
                        seen[w] = 1;
                        order.push_back(w);
                    }
                }
            }
        };
        std::vector<int> roots(g.vertex_count());
        for (int v = 0; v < g.vertex_count(); ++v) roots[v] = v;
        std::sort(roots.begin(), roots.end(),
                  [&](int x, int y) { return g.degree(x) != g.degree(y) ? g.degree(x) > g.degree(y)
                                                                        : x < y; });
        for (int v : roots)
            if (!seen[v]) push_component(v);

        for (int e = 0; e < g.directed_edge_count(); ++e)
            if (e <= g.involution(e)) source_orbits.push_back(e);
        orbit_image.assign(source_orbits.size(), -1);
    }

    // exact matching over edge-pair orbits once all vertices are placed
    void match_orbits(std::size_t oi) {
        if (oi == source_orbits.size()) {
            ++count;
            if (collect) {
                GraphMorphism m;
                m.vertex_map = img;
                m.edge_map.assign(a.graph.directed_edge_count(), -1);
                for (std::size_t i = 0; i < source_orbits.size(); ++i) {
                    int d = source_orbits[i];
                    m.edge_map[d] = orbit_image[i];
                    m.edge_map[a.graph.involution(d)] = b.graph.involution(orbit_image[i]);
                }
                found.push_back(std::move(m));
            }
            return;
        }
        int d = source_orbits[oi];
        int from = img[a.graph.tail(d)];
        int to = img[a.graph.head(d)];
        int label = a.morphism.edge_map[d];
        bool half = a.graph.is_half_loop(d);
        for (int e : b.graph.out_edges(from)) {
            if (b.graph.head(e) != to) continue;
            if (b.morphism.edge_map[e] != label) continue;
            if (b.graph.is_half_loop(e) != half) continue;
            int rep = std::min(e, b.graph.involution(e));
            if (orbit_used[rep]) continue;
            budget();
            orbit_used[rep] = 1;
            orbit_image[oi] = e;
            match_orbits(oi + 1);
            orbit_used[rep] = 0;
        }
    }

    void assign(std::size_t vi) {
        if (vi == order.size()) {
            match_orbits(0);
            return;
        }
        int v = order[vi];
        int fiber = a.morphism.vertex_map[v];

        // candidates: either neighbors of an already placed vertex through a
        // matching label, or the whole fiber
        std::vector<int> candidates;
        int anchor_edge = -1;
        for (int e : a.graph.out_edges(v)) {
            if (img[a.graph.head(e)] != -1) {
                anchor_edge = e;
                break;
            }
        }
        if (anchor_edge != -1) {
            int target = img[a.graph.head(anchor_edge)];
            int label = a.morphism.edge_map[anchor_edge];
            for (int e : b.graph.out_edges(target)) {
                // reversed edge of the anchor departs from the image of v
                int back = b.graph.involution(e);
                if (b.morphism.edge_map[back] == label && b.graph.tail(back) != -1)
                    candidates.push_back(b.graph.tail(back));
            }
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        } else {
            for (int u = 0; u < b.graph.vertex_count(); ++u)
                if (b.morphism.vertex_map[u] == fiber) candidates.push_back(u);
        }

        for (int u : candidates) {
            if (used[u] || b.morphism.vertex_map[u] != fiber) continue;
            if (!degree_feasible(v, u)) continue;
            // every edge from v into the placed region must have a candidate image
            bool ok = true;
            for (int e : a.graph.out_edges(v)) {
                int w = img[a.graph.head(e)];
                if (w == -1 && a.graph.head(e) != v) continue;
                int need_head = a.graph.head(e) == v ? u : w;
                bool any = false;
                for (int f : b.graph.out_edges(u)) {
                    if (b.graph.head(f) == need_head &&
                        b.morphism.edge_map[f] == a.morphism.edge_map[e]) {
                        any = true;
                        break;
                    }
                }
                if (!any) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            budget();
            used[u] = 1;
            img[v] = u;
            assign(vi + 1);
            img[v] = -1;
            used[u] = 0;
        }
    }

    void run() {
        if (a.base != b.base) throw validation_error("injection counting requires a common base");
        prepare();
        assign(0);
    }
};

}  // namespace

long long count_injections(const BGraph& a, const BGraph& b, const InjectionOptions& opt) {
    InjectionSearch s(a, b, opt.node_cap, false);
    s.run();
    return s.count;
}

std::vector<GraphMorphism> list_injections(const BGraph& a, const BGraph& b,
                                           const InjectionOptions& opt) {
    InjectionSearch s(a, b, opt.node_cap, true);
    s.run();
    return s.found;
}

namespace {

// Wrapping a plain graph over the one-half-loop base erases all label
// constraints while keeping the involution structure.
BGraph wrap_plain(const Graph& g) {
    GraphMorphism f;
    f.vertex_map.assign(g.vertex_count(), 0);
    f.edge_map.assign(g.directed_edge_count(), 0);
    return make_bgraph(g, bouquet_of_half_loops(1), std::move(f));
}

}  // namespace

long long count_graph_injections(const Graph& a, const Graph& b, const InjectionOptions& opt) {
    return count_injections(wrap_plain(a), wrap_plain(b), opt);
}

long long automorphism_order(const BGraph& phi, const InjectionOptions& opt) {
    return count_injections(phi, phi, opt);
}

OccurrenceExpectation occurrence_expectation_exact(const BGraph& phi, int n) {
    if (!phi.etale) throw validation_error("occurrence expectation requires an etale structure map");
    if (n < 1) throw validation_error("covering degree must be >= 1");
    const Graph& base = phi.base;
    const Graph& g = phi.graph;

    std::vector<int> fiber(base.vertex_count(), 0);
    for (int v = 0; v < g.vertex_count(); ++v) fiber[phi.morphism.vertex_map[v]]++;
    // edge-pair orbits of g per base edge-pair orbit; half-loops separately
    std::vector<int> pairs(base.directed_edge_count(), 0);
    std::vector<int> fixed(base.directed_edge_count(), 0);
    for (int d = 0; d < g.directed_edge_count(); ++d) {
        if (d > g.involution(d)) continue;
        int e = phi.morphism.edge_map[d];
        int rep = std::min(e, base.involution(e));
        if (g.is_half_loop(d))
            fixed[rep]++;
        else
            pairs[rep]++;
    }

    OccurrenceExpectation out;
    out.leading_exponent = order(g);
    out.expectation = 1;
    for (int v = 0; v < base.vertex_count(); ++v) {
        if (fiber[v] > n)
            throw validation_error("covering degree is smaller than a vertex fiber load");
        out.expectation *= Rat(falling_factorial(n, fiber[v]));
    }
    for (int e = 0; e < base.directed_edge_count(); ++e) {
        if (e > base.involution(e)) continue;
        int a = pairs[e] + fixed[e];
        if (a == 0) continue;
        if (base.is_half_loop(e)) {
            if (n % 2 != 0)
                throw validation_error(
                    "occurrence expectation over a half-loop edge needs an even covering degree");
            if (fixed[e] > 0) {
                // even-degree involutions are fixed-point-free
                out.expectation = 0;
                return out;
            }
            if (2 * a > n)
                throw validation_error("covering degree is smaller than a half-loop edge load");
            out.expectation *= Rat(odd_factorial(n - 2 * a - 1), odd_factorial(n - 1));
        } else {
            if (a > n) throw validation_error("covering degree is smaller than an edge load");
            out.expectation *= Rat(factorial(n - a), factorial(n));
        }
    }
    return out;
}

OccurrenceStats monte_carlo_occurrence(const BGraph& phi, int n, long long trials,
                                       std::uint64_t seed, const InjectionOptions& opt) {
    if (trials < 1) throw validation_error("trial count must be positive");
    OccurrenceStats stats;
    stats.trials = trials;
    double sum = 0.0, sumsq = 0.0;
    for (long long t = 0; t < trials; ++t) {
        Cover c = random_cover(phi.base, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
        double x = static_cast<double>(count_injections(phi, cover_bgraph(c), opt));
        sum += x;
        sumsq += x * x;
    }
    stats.mean = sum / static_cast<double>(trials);
    stats.variance =
        trials > 1 ? std::max(0.0, (sumsq - sum * stats.mean) / static_cast<double>(trials - 1))
                   : 0.0;
    return stats;
}

namespace {

void append_int(std::string& s, long long v) {
    s += std::to_string(v);
    s += ',';
}

std::string graph_key_for_perm(const Graph& g, const std::vector<int>& p) {
    std::vector<std::array<long long, 3>> codes;
    for (int e = 0; e < g.directed_edge_count(); ++e) {
        if (e > g.involution(e)) continue;
        if (g.is_half_loop(e))
            codes.push_back({0, p[g.tail(e)], -1});
        else
            codes.push_back({1, std::min(p[g.tail(e)], p[g.head(e)]),
                             std::max(p[g.tail(e)], p[g.head(e)])});
    }
    std::sort(codes.begin(), codes.end());
    std::string s;
    for (const auto& c : codes) {
        append_int(s, c[0]);
        append_int(s, c[1]);
        append_int(s, c[2]);
        s += ';';
    }
    return s;
}

std::string bgraph_key_for_perm(const BGraph& g, const std::vector<int>& p) {
    std::vector<std::array<long long, 4>> codes;
    for (int e = 0; e < g.graph.directed_edge_count(); ++e) {
        if (e > g.graph.involution(e)) continue;
        long long u = p[g.graph.tail(e)], w = p[g.graph.head(e)];
        long long l = g.morphism.edge_map[e];
        long long lr = g.base.involution(static_cast<int>(l));
        if (g.graph.is_half_loop(e)) {
            codes.push_back({0, u, l, -1});
        } else {
            std::array<long long, 4> fwd = {1, u, w, l};
            std::array<long long, 4> rev = {1, w, u, lr};
            codes.push_back(std::min(fwd, rev));
        }
    }
    std::sort(codes.begin(), codes.end());
    std::vector<int> fiber_of(g.graph.vertex_count());
    for (int v = 0; v < g.graph.vertex_count(); ++v)
        fiber_of[p[v]] = g.morphism.vertex_map[v];
    std::string s;
    for (int f : fiber_of) append_int(s, f);
    s += '|';
    for (const auto& c : codes) {
        for (long long x : c) append_int(s, x);
        s += ';';
    }
    return s;
}

template <typename KeyFn>
std::string minimize_over_perms(int n, KeyFn fn) {
    if (n > 8) throw resource_error("canonical labeling is capped at 8 vertices");
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    std::string best;
    do {
        std::string k = fn(p);
        if (best.empty() || k < best) best = std::move(k);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

}  // namespace

std::string canonical_graph_key(const Graph& g) {
    std::string key = "v";
    key += std::to_string(g.vertex_count());
    key += '|';
    key += minimize_over_perms(g.vertex_count(),
                               [&](const std::vector<int>& p) { return graph_key_for_perm(g, p); });
    return key;
}

std::string canonical_bgraph_key(const BGraph& g) {
    std::string key = "v";
    key += std::to_string(g.graph.vertex_count());
    key += '|';
    key += minimize_over_perms(g.graph.vertex_count(), [&](const std::vector<int>& p) {
        return bgraph_key_for_perm(g, p);
    });
    return key;
}

bool graphs_isomorphic(const Graph& a, const Graph& b) {
    if (a.vertex_count() != b.vertex_count() ||
        a.directed_edge_count() != b.directed_edge_count() ||
        a.half_loop_count() != b.half_loop_count())
        return false;
    return canonical_graph_key(a) == canonical_graph_key(b);
}

bool bgraphs_isomorphic(const BGraph& a, const BGraph& b) {
    if (!(a.base == b.base)) return false;
    if (a.graph.vertex_count() != b.graph.vertex_count() ||
        a.graph.directed_edge_count() != b.graph.directed_edge_count())
        return false;
    return canonical_bgraph_key(a) == canonical_bgraph_key(b);
}

}  // namespace covspec
