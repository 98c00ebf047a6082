#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "covspec/graph.hpp"
#include "covspec/graph_io.hpp"
#include "covspec/rng.hpp"

using namespace covspec;

namespace {

// Random connected-ish multigraph for property tests.
Graph random_graph(Xoshiro256& rng, int max_vertices = 6, int max_edges = 8, bool allow_half = true) {
    int nv = 1 + static_cast<int>(rng.below(max_vertices));
    int ne = static_cast<int>(rng.below(max_edges + 1));
    std::vector<EdgeSpec> edges;
    for (int i = 0; i < ne; ++i) {
        int t = static_cast<int>(rng.below(nv));
        int h = static_cast<int>(rng.below(nv));
        bool half = allow_half && t == h && rng.below(2) == 0;
        edges.push_back({t, h, half});
    }
    return build_graph(nv, edges);
}

void check_involution_invariants(const Graph& g) {
    for (int e = 0; e < g.directed_edge_count(); ++e) {
        CHECK(g.involution(g.involution(e)) == e);
        CHECK(g.tail(g.involution(e)) == g.head(e));
        if (g.is_half_loop(e)) CHECK(g.tail(e) == g.head(e));
    }
}

}  // namespace

TEST_CASE("build_graph constructs W_2 and H_3") {
    Graph w2 = bouquet_of_whole_loops(2);
    CHECK(w2.vertex_count() == 1);
    CHECK(w2.directed_edge_count() == 4);
    for (int e = 0; e < 4; ++e) CHECK(w2.involution(e) != e);
    CHECK(w2.degree(0) == 4);
    check_involution_invariants(w2);

    Graph h3 = bouquet_of_half_loops(3);
    CHECK(h3.directed_edge_count() == 3);
    for (int e = 0; e < 3; ++e) CHECK(h3.involution(e) == e);
    CHECK(h3.degree(0) == 3);
    check_involution_invariants(h3);
}

TEST_CASE("build_graph rejects invalid input") {
    CHECK_THROWS_AS(build_graph(2, {{0, 2, false}}), validation_error);
    CHECK_THROWS_AS(build_graph(2, {{-1, 0, false}}), validation_error);
    CHECK_THROWS_AS(build_graph(2, {{0, 1, true}}), validation_error);
    // non-involutive pairing via the raw constructor
    CHECK_THROWS_AS(Graph::from_directed(1, {0, 0}, {0, 0}, {0, 0}), validation_error);
    CHECK_THROWS_AS(Graph::from_directed(2, {0, 1}, {1, 0}, {0, 1}), validation_error);
}

TEST_CASE("euler characteristic and order") {
    CHECK(euler_characteristic(bouquet_of_whole_loops(2)) == Rat(-1));
    CHECK(euler_characteristic(build_graph(1, {})) == Rat(1));
    CHECK(euler_characteristic(bouquet_of_half_loops(3)) == Rat(-1, 2));

    CHECK(order(bouquet_of_whole_loops(2)) == Rat(1));
    CHECK(order(bouquet_of_half_loops(3)) == Rat(1, 2));
    CHECK(order(cycle_graph(5)) == Rat(0));
    CHECK(order(path_graph(4)) == Rat(-1));
}

TEST_CASE("order equals half the sum of degree excesses for half-loop-free graphs") {
    Xoshiro256 rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
        Graph g = random_graph(rng, 6, 9, false);
        Rat s = 0;
        for (int v = 0; v < g.vertex_count(); ++v) s += Rat(g.degree(v) - 2, 2);
        CHECK(order(g) == s);
    }
}

TEST_CASE("pruned and degree conventions") {
    CHECK(is_pruned(cycle_graph(5)));
    CHECK_FALSE(is_pruned(path_graph(3)));
    CHECK_FALSE(is_pruned(bouquet_of_half_loops(1)));
    // half-loop adds 1, whole-loop adds 2
    Graph g = build_graph(1, {{0, 0, true}, {0, 0, false}});
    CHECK(g.degree(0) == 3);
}

TEST_CASE("connected components") {
    CHECK(component_count(cycle_graph(5)) == 1);
    Graph two_cycles = build_graph(6, {{0, 1, false},
                                       {1, 2, false},
                                       {2, 0, false},
                                       {3, 4, false},
                                       {4, 5, false},
                                       {5, 3, false}});
    CHECK(component_count(two_cycles) == 2);
    CHECK(component_count(build_graph(3, {})) == 3);
    CHECK(is_connected(complete_graph(4)));
}

TEST_CASE("matrix constructions") {
    Graph w2 = bouquet_of_whole_loops(2);
    IntegerMatrix h = hashimoto_matrix(w2);
    CHECK(h.dim() == 4);
    for (int i = 0; i < 4; ++i) {
        std::int64_t row = 0;
        for (int j = 0; j < 4; ++j) row += h.at(i, j);
        CHECK(row == 3);
    }

    IntegerMatrix hk4 = hashimoto_matrix(complete_graph(4));
    CHECK(hk4.dim() == 12);
    for (int i = 0; i < 12; ++i) {
        std::int64_t row = 0;
        for (int j = 0; j < 12; ++j) row += hk4.at(i, j);
        CHECK(row == 2);
    }

    Graph loop = bouquet_of_whole_loops(1);
    IntegerMatrix hl = hashimoto_matrix(loop);
    CHECK(hl.dim() == 2);
    CHECK(hl.trace() == 2);
    CHECK(hl.at(0, 1) == 0);
    CHECK(hl.at(1, 0) == 0);

    Graph mixed = build_graph(1, {{0, 0, true}, {0, 0, false}});
    IntegerMatrix a = adjacency_matrix(mixed);
    CHECK(a.at(0, 0) == 3);
    CHECK(degree_matrix(mixed).at(0, 0) == 3);
}

TEST_CASE("snbc walk counts match pinned examples") {
    CHECK(enumerate_snbc_walks(bouquet_of_whole_loops(2), 1) == 4);
    CHECK(enumerate_snbc_walks(cycle_graph(5), 5) == 10);
    CHECK(enumerate_snbc_walks(cycle_graph(5), 4) == 0);
}

TEST_CASE("snbc walk count equals hashimoto trace for k <= 8") {
    Xoshiro256 rng(777);
    std::vector<Graph> corpus = {bouquet_of_whole_loops(2), bouquet_of_half_loops(3),
                                 complete_graph(4), cycle_graph(5),
                                 build_graph(2, {{0, 0, true}, {0, 1, false}, {1, 1, false}})};
    for (int trial = 0; trial < 20; ++trial) corpus.push_back(random_graph(rng, 4, 6));
    for (const Graph& g : corpus) {
        IntegerMatrix h = hashimoto_matrix(g);
        for (int k = 1; k <= 8; ++k) {
            long long expected = h.power(k).trace();
            CHECK(enumerate_snbc_walks(g, k) == expected);
            CHECK(snbc_closed_walk_count(g, k) == expected);
        }
    }
}

TEST_CASE("snbc visitor yields each walk once and all walks are valid") {
    Graph k4 = complete_graph(4);
    std::set<std::vector<int>> seen;
    long long count = enumerate_snbc_walks(k4, 3, [&](const Walk& w) {
        CHECK(is_closed_walk(k4, w));
        for (std::size_t i = 0; i < w.edges.size(); ++i) {
            int e = w.edges[i];
            int f = w.edges[(i + 1) % w.edges.size()];
            CHECK(k4.head(e) == k4.tail(f));
            CHECK(k4.involution(e) != f);
        }
        CHECK(seen.insert(w.edges).second);
    });
    CHECK(count == static_cast<long long>(seen.size()));
    CHECK(count == hashimoto_matrix(k4).power(3).trace());
}

TEST_CASE("snbc walk enumeration validates length") {
    Graph w2 = bouquet_of_whole_loops(2);
    CHECK_THROWS_AS(enumerate_snbc_walks(w2, 0), validation_error);
    CHECK_THROWS_AS(enumerate_snbc_walks(w2, 13), resource_error);
    SnbcOptions opt;
    opt.length_cap = 14;
    CHECK(enumerate_snbc_walks(w2, 13, opt) > 0);
}

TEST_CASE("graph_of_walk") {
    Graph c5 = cycle_graph(5);
    Walk loop;
    loop.start_vertex = 0;
    int at = 0;
    for (int i = 0; i < 5; ++i) {
        for (int e : c5.out_edges(at))
            if (c5.head(e) == (at + 1) % 5) {
                loop.edges.push_back(e);
                break;
            }
        at = (at + 1) % 5;
    }
    Subgraph s = graph_of_walk(c5, loop);
    CHECK(s.graph.vertex_count() == 5);
    CHECK(s.graph.directed_edge_count() == 10);
    CHECK(is_pruned(s.graph));
    CHECK(order(s.graph) == Rat(0));
    check_involution_invariants(s.graph);

    Graph w2 = bouquet_of_whole_loops(2);
    Walk one_loop{0, {0}};
    Subgraph sl = graph_of_walk(w2, one_loop);
    CHECK(sl.graph.vertex_count() == 1);
    CHECK(sl.graph.directed_edge_count() == 2);

    Walk fig8{0, {0, 2}};  // both loops
    Subgraph s8 = graph_of_walk(w2, fig8);
    CHECK(order(s8.graph) == Rat(1));
    CHECK(s8.edge_parent.size() == 4);
}

TEST_CASE("subgraph and pruned core") {
    Graph g = build_graph(4, {{0, 1, false}, {1, 2, false}, {2, 0, false}, {2, 3, false}});
    Subgraph core = pruned_core(g);
    CHECK(core.graph.vertex_count() == 3);
    CHECK(core.graph.directed_edge_count() == 6);
    CHECK(is_pruned(core.graph));
    check_involution_invariants(core.graph);
    // parent ids point back into g
    for (int e = 0; e < core.graph.directed_edge_count(); ++e) {
        int pe = core.edge_parent[e];
        CHECK(core.vertex_parent[core.graph.tail(e)] == g.tail(pe));
        CHECK(core.vertex_parent[core.graph.head(e)] == g.head(pe));
    }

    CHECK(pruned_core(path_graph(4)).graph.vertex_count() == 0);
    CHECK(pruned_core(bouquet_of_half_loops(1)).graph.vertex_count() == 0);
    // half-loop of degree 2 vertex survives nothing: single half-loop vertex has degree 1
    Graph hl2 = bouquet_of_half_loops(2);
    CHECK(pruned_core(hl2).graph == hl2);

    CHECK_THROWS_AS(subgraph_from_edges(g, {0}), validation_error);
}

TEST_CASE("order monotonicity for subgraphs of pruned graphs") {
    Xoshiro256 rng(4242);
    int checked = 0;
    while (checked < 40) {
        Graph g = random_graph(rng, 5, 9);
        if (!is_pruned(g) || g.directed_edge_count() == 0) continue;
        // random involution-closed edge subset
        std::vector<int> keep;
        for (int e = 0; e < g.directed_edge_count(); ++e) {
            if (e > g.involution(e)) continue;
            if (rng.below(2) == 0) {
                keep.push_back(e);
                keep.push_back(g.involution(e));
            }
        }
        if (keep.empty()) continue;
        Subgraph s = subgraph_from_edges(g, keep);
        CHECK(order(s.graph) <= order(g));
        ++checked;
    }
}

TEST_CASE("strict order monotonicity when every component has order >= 1") {
    // components of order >= 1: two disjoint figure-eights
    Graph g = build_graph(2, {{0, 0, false}, {0, 0, false}, {1, 1, false}, {1, 1, false}});
    Subgraph s = subgraph_from_edges(g, {0, 1});
    CHECK(order(s.graph) < order(g));
}

TEST_CASE("neighborhood and iterate nesting") {
    Graph k4 = complete_graph(4);
    auto n0 = neighborhood(k4, {0});
    CHECK(n0 == std::vector<int>{1, 2, 3});

    auto nested = [&](const Graph& g) {
        std::vector<int> a = {0};
        auto g2 = neighborhood(g, neighborhood(g, a));
        auto g4 = neighborhood(g, neighborhood(g, g2));
        CHECK(std::includes(g2.begin(), g2.end(), a.begin(), a.end()));
        CHECK(std::includes(g4.begin(), g4.end(), g2.begin(), g2.end()));
    };
    nested(k4);
    nested(cycle_graph(7));
    nested(bouquet_of_whole_loops(2));
}

TEST_CASE("walk power graph realizes A^k") {
    Xoshiro256 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = random_graph(rng, 4, 5);
        for (int k = 1; k <= 3; ++k) {
            Graph p = walk_power_graph(g, k);
            CHECK(adjacency_matrix(p) == adjacency_matrix(g).power(k));
            check_involution_invariants(p);
        }
    }
}

TEST_CASE("gamma spreader checks") {
    CHECK(is_gamma_spreader(complete_graph(4), 1.0));
    Graph two_c4 = build_graph(8, {{0, 1, false},
                                   {1, 2, false},
                                   {2, 3, false},
                                   {3, 0, false},
                                   {4, 5, false},
                                   {5, 6, false},
                                   {6, 7, false},
                                   {7, 4, false}});
    CHECK_FALSE(is_gamma_spreader(two_c4, 0.01));
    CHECK_THROWS_AS(is_gamma_spreader(cycle_graph(22), 0.1), resource_error);
    CHECK_THROWS_AS(is_gamma_spreader(path_graph(3), 0.1), validation_error);
}

TEST_CASE("graph text format round trip") {
    std::string text = "v 1\ne 0 0\ne 0 0\n";
    Graph w2 = parse_graph(text);
    CHECK(w2 == bouquet_of_whole_loops(2));
    CHECK(write_graph(w2) == text);

    std::string h3 = "v 1\nh 0\nh 0\nh 0\n";
    CHECK(write_graph(parse_graph(h3)) == h3);

    Graph k4 = complete_graph(4);
    CHECK(parse_graph(write_graph(k4)) == k4);

    std::string commented = "# header\nv 2\n\n# a normal edge\ne 0 1\nh 1\n";
    Graph g = parse_graph(commented);
    CHECK(g.vertex_count() == 2);
    CHECK(g.directed_edge_count() == 3);
    CHECK(write_graph(parse_graph(write_graph(g))) == write_graph(g));

    CHECK_THROWS_AS(parse_graph("e 0 1\n"), validation_error);
    CHECK_THROWS_AS(parse_graph("v 1\nq 0\n"), validation_error);
    CHECK_THROWS_AS(parse_graph("v 1\ne 0 2\n"), validation_error);
}

TEST_CASE("integer matrix overflow raises resource error") {
    IntegerMatrix big(2);
    big.at(0, 0) = std::int64_t(1) << 62;
    big.at(1, 1) = 4;
    CHECK_THROWS_AS(big.multiply(big), resource_error);
}
