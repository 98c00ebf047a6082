#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "covspec/bgraphs.hpp"
#include "covspec/covers.hpp"
#include "covspec/graph.hpp"
#include "covspec/rng.hpp"

using namespace covspec;

namespace {

// 3-cycle over W_2 with every edge riding the first loop forward.
BGraph cycle_over_loop(int len, const Graph& base, int label) {
    Graph c = cycle_graph(len);
    GraphMorphism f;
    f.vertex_map.assign(len, 0);
    f.edge_map.assign(2 * len, -1);
    for (int e = 0; e < 2 * len; ++e) {
        bool forward = c.head(e) == (c.tail(e) + 1) % len;
        f.edge_map[e] = forward ? label : base.involution(label);
    }
    return make_bgraph(c, base, f);
}

BGraph identity_bgraph(const Graph& g) {
    GraphMorphism f;
    f.vertex_map.resize(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) f.vertex_map[v] = v;
    f.edge_map.resize(g.directed_edge_count());
    for (int e = 0; e < g.directed_edge_count(); ++e) f.edge_map[e] = e;
    return make_bgraph(g, g, f);
}

}  // namespace

TEST_CASE("count_injections on pinned examples") {
    Graph w2 = bouquet_of_whole_loops(2);

    // asymmetric: two-edge path riding different loops
    Graph p = path_graph(3);
    GraphMorphism f;
    f.vertex_map = {0, 0, 0};
    f.edge_map.assign(4, -1);
    for (int e = 0; e < 4; ++e) {
        bool forward = p.head(e) > p.tail(e);
        int label = p.tail(std::min(e, p.involution(e))) == 0 ? 0 : 2;
        f.edge_map[e] = forward ? label : w2.involution(label);
    }
    BGraph asym = make_bgraph(p, w2, f);
    CHECK(count_injections(asym, asym) == 1);
    CHECK(automorphism_order(asym) == 1);

    // parallel edges with labels l and inv(l): the swap makes the count even
    Graph par = build_graph(2, {{0, 1, false}, {0, 1, false}});
    GraphMorphism pf;
    pf.vertex_map = {0, 0};
    pf.edge_map = {0, 1, 1, 0};  // edge A rides label 0, edge B rides label 1
    BGraph parallel = make_bgraph(par, w2, pf);
    CHECK(automorphism_order(parallel) == 2);

    // 3-cycle into two disjoint copies: 2 x Aut
    BGraph c3 = cycle_over_loop(3, w2, 0);
    CHECK(automorphism_order(c3) == 3);
    std::vector<EdgeSpec> copies;
    for (int rep = 0; rep < 2; ++rep)
        for (int i = 0; i < 3; ++i) copies.push_back({3 * rep + i, 3 * rep + (i + 1) % 3, false});
    Graph two = build_graph(6, copies);
    GraphMorphism tf;
    tf.vertex_map.assign(6, 0);
    tf.edge_map.assign(12, -1);
    for (int e = 0; e < 12; ++e) {
        int t = two.tail(e);
        bool forward = two.head(e) == 3 * (t / 3) + (t % 3 + 1) % 3;
        tf.edge_map[e] = forward ? 0 : 1;
    }
    BGraph both = make_bgraph(two, w2, tf);
    CHECK(count_injections(c3, both) == 6);
}

TEST_CASE("automorphism_order of a cycle over one half-loop label is 2n") {
    Graph h1 = bouquet_of_half_loops(1);
    for (int n : {3, 5, 6}) {
        Graph c = cycle_graph(n);
        GraphMorphism f;
        f.vertex_map.assign(n, 0);
        f.edge_map.assign(2 * n, 0);
        BGraph b = make_bgraph(c, h1, f);
        CHECK(automorphism_order(b) == 2 * n);
    }
}

TEST_CASE("plain graph injections") {
    CHECK(count_graph_injections(cycle_graph(3), complete_graph(4)) == 24);
    CHECK(count_graph_injections(cycle_graph(3), cycle_graph(3)) == 6);
    CHECK(count_graph_injections(path_graph(2), path_graph(3)) == 4);
    CHECK(count_graph_injections(cycle_graph(4), complete_graph(4)) == 24);
    CHECK(count_graph_injections(complete_graph(4), cycle_graph(4)) == 0);
}

TEST_CASE("injection count factors through automorphisms and subgraph count") {
    // NumSubgraphs(c3, K4) = 4 triangles; Aut(c3) = 6; injections = 24
    Graph c3 = cycle_graph(3);
    Graph k4 = complete_graph(4);
    GraphMorphism cf;
    cf.vertex_map.assign(3, 0);
    cf.edge_map.assign(6, 0);
    GraphMorphism kf;
    kf.vertex_map.assign(4, 0);
    kf.edge_map.assign(12, 0);
    Graph h1 = bouquet_of_half_loops(1);
    BGraph a = make_bgraph(c3, h1, cf);
    BGraph b = make_bgraph(k4, h1, kf);
    auto all = list_injections(a, b);
    CHECK(static_cast<long long>(all.size()) == count_injections(a, b));
    std::set<std::pair<std::set<int>, std::set<int>>> images;
    for (const auto& m : all) {
        std::set<int> vs(m.vertex_map.begin(), m.vertex_map.end());
        std::set<int> orbits;
        for (int e : m.edge_map) orbits.insert(std::min(e, k4.involution(e)));
        images.insert({vs, orbits});
    }
    CHECK(images.size() == 4);
    CHECK(count_injections(a, b) == automorphism_order(a) * static_cast<long long>(images.size()));
}

TEST_CASE("occurs relation is reflexive and transitive on a small chain") {
    Graph p2 = path_graph(2), c3 = cycle_graph(3), k4 = complete_graph(4);
    CHECK(count_graph_injections(p2, p2) > 0);
    CHECK(count_graph_injections(p2, c3) > 0);
    CHECK(count_graph_injections(c3, k4) > 0);
    CHECK(count_graph_injections(p2, k4) > 0);
}

TEST_CASE("injection search respects the node budget") {
    InjectionOptions opt;
    opt.node_cap = 2;
    CHECK_THROWS_AS(count_graph_injections(cycle_graph(3), complete_graph(4), opt), resource_error);
}

TEST_CASE("occurrence expectation on pinned graphs") {
    Graph w2 = bouquet_of_whole_loops(2);
    BGraph idw2 = identity_bgraph(w2);
    for (int n : {4, 10, 25}) {
        OccurrenceExpectation e = occurrence_expectation_exact(idw2, n);
        CHECK(e.expectation == Rat(1, n));
        CHECK(e.leading_exponent == Rat(1));
    }

    // single whole edge over a single-edge base: always exactly n injections
    BGraph edge = identity_bgraph(path_graph(2));
    CHECK(occurrence_expectation_exact(edge, 7).expectation == Rat(7));
    CHECK(occurrence_expectation_exact(edge, 7).leading_exponent == Rat(-1));

    // empty graph: expectation 1
    GraphMorphism empty_f;
    BGraph empty = make_bgraph(build_graph(0, {}), w2, empty_f);
    CHECK(occurrence_expectation_exact(empty, 5).expectation == Rat(1));

    // 3-cycle riding one loop: the factors cancel to exactly 1
    BGraph c3 = cycle_over_loop(3, w2, 0);
    CHECK(occurrence_expectation_exact(c3, 9).expectation == Rat(1));

    CHECK_THROWS_AS(occurrence_expectation_exact(c3, 2), validation_error);
}

TEST_CASE("occurrence expectation with half-loop base edges") {
    Graph h3 = bouquet_of_half_loops(3);
    // whole edge over a half-loop: (n)_2 / (n-1) = n
    Graph edge = path_graph(2);
    GraphMorphism f;
    f.vertex_map = {0, 0};
    f.edge_map = {0, 0};
    BGraph over_half = make_bgraph(edge, h3, f);
    CHECK(over_half.etale);
    CHECK(occurrence_expectation_exact(over_half, 8).expectation == Rat(8));

    // half-loop over half-loop: impossible in an even cover
    GraphMorphism hf;
    hf.vertex_map = {0};
    hf.edge_map = {0};
    BGraph half_over_half = make_bgraph(bouquet_of_half_loops(1), h3, hf);
    CHECK(occurrence_expectation_exact(half_over_half, 6).expectation == Rat(0));

    CHECK_THROWS_AS(occurrence_expectation_exact(over_half, 7), validation_error);

    // two disjoint whole edges over the same half-loop: (n)_4 / ((n-1)(n-3))
    Graph pair2 = build_graph(4, {{0, 1, false}, {2, 3, false}});
    GraphMorphism pf;
    pf.vertex_map = {0, 0, 0, 0};
    pf.edge_map = {0, 0, 0, 0};
    BGraph two_edges = make_bgraph(pair2, h3, pf);
    int n = 10;
    CHECK(occurrence_expectation_exact(two_edges, n).expectation ==
          Rat(Int(10) * 9 * 8 * 7, Int(9) * 7));
}

TEST_CASE("non-etale structure maps are rejected for expectations") {
    Graph w2 = bouquet_of_whole_loops(2);
    Graph fork = build_graph(3, {{0, 1, false}, {0, 2, false}});
    GraphMorphism f;
    f.vertex_map = {0, 0, 0};
    f.edge_map = {0, 1, 0, 1};  // both edges ride label 0 out of vertex 0
    BGraph bad = make_bgraph(fork, w2, f);
    CHECK_FALSE(bad.etale);
    CHECK_THROWS_AS(occurrence_expectation_exact(bad, 5), validation_error);
    // but they never occur in covers either
    OccurrenceStats s = monte_carlo_occurrence(bad, 6, 50, 1);
    CHECK(s.mean == 0.0);
}

TEST_CASE("monte carlo occurrence matches the exact expectation within 3 sigma") {
    Graph w2 = bouquet_of_whole_loops(2);
    auto check_mc = [](const BGraph& phi, int n, long long trials, std::uint64_t seed) {
        OccurrenceExpectation e = occurrence_expectation_exact(phi, n);
        OccurrenceStats s = monte_carlo_occurrence(phi, n, trials, seed);
        double sigma = std::sqrt(s.variance / static_cast<double>(trials));
        double target = to_double(e.expectation);
        CHECK(std::abs(s.mean - target) <= 3.0 * sigma + 1e-12);
    };
    check_mc(cycle_over_loop(3, w2, 0), 10, 1500, 42);
    check_mc(identity_bgraph(w2), 10, 3000, 43);

    // deterministic case: exactly n injections in every cover
    OccurrenceStats s = monte_carlo_occurrence(identity_bgraph(path_graph(2)), 9, 40, 44);
    CHECK(s.mean == doctest::Approx(9.0));
    CHECK(s.variance == doctest::Approx(0.0));

    CHECK_THROWS_AS(monte_carlo_occurrence(identity_bgraph(w2), 5, 0, 1), validation_error);
}

TEST_CASE("injections into an explicit cover count fixed points") {
    Graph w2 = bouquet_of_whole_loops(2);
    PermutationAssignment a;
    a.degree = 3;
    a.sigma.assign(4, {0, 1, 2});
    Cover c = build_cover(w2, a);
    CHECK(count_injections(identity_bgraph(w2), cover_bgraph(c)) == 3);

    PermutationAssignment b;
    b.degree = 3;
    b.sigma = {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}, {0, 1, 2}};  // loop A has no fixed points
    Cover c2 = build_cover(w2, b);
    CHECK(count_injections(identity_bgraph(w2), cover_bgraph(c2)) == 0);
}

TEST_CASE("canonical keys agree with brute-force isomorphism") {
    Xoshiro256 rng(777);
    std::vector<Graph> corpus;
    corpus.push_back(cycle_graph(3));
    corpus.push_back(path_graph(4));
    corpus.push_back(bouquet_of_whole_loops(2));
    corpus.push_back(bouquet_of_half_loops(2));
    corpus.push_back(build_graph(2, {{0, 1, false}, {0, 1, false}}));
    corpus.push_back(build_graph(2, {{1, 0, false}, {1, 0, false}}));
    for (int t = 0; t < 25; ++t) {
        int nv = 1 + static_cast<int>(rng.below(4));
        std::vector<EdgeSpec> edges;
        int ne = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < ne; ++i) {
            int u = static_cast<int>(rng.below(nv));
            int w = static_cast<int>(rng.below(nv));
            edges.push_back({u, w, u == w && rng.below(2) == 0});
        }
        corpus.push_back(build_graph(nv, edges));
    }
    for (const Graph& a : corpus) {
        for (const Graph& b : corpus) {
            bool brute = a.vertex_count() == b.vertex_count() &&
                         a.directed_edge_count() == b.directed_edge_count() &&
                         a.half_loop_count() == b.half_loop_count() &&
                         count_graph_injections(a, b) > 0 && count_graph_injections(b, a) > 0;
            CHECK(graphs_isomorphic(a, b) == brute);
        }
    }
}

TEST_CASE("bgraph canonical keys separate label structure") {
    Graph w2 = bouquet_of_whole_loops(2);
    BGraph on_first = cycle_over_loop(3, w2, 0);
    BGraph on_second = cycle_over_loop(3, w2, 2);
    CHECK_FALSE(bgraphs_isomorphic(on_first, on_second));
    CHECK(bgraphs_isomorphic(on_first, on_first));

    // relabeling the cycle's vertices does not change the class
    Graph c = cycle_graph(3);
    std::vector<EdgeSpec> shuffled = {{1, 2, false}, {2, 0, false}, {0, 1, false}};
    Graph c2 = build_graph(3, shuffled);
    GraphMorphism f2;
    f2.vertex_map.assign(3, 0);
    f2.edge_map.assign(6, -1);
    for (int e = 0; e < 6; ++e) {
        bool forward = c2.head(e) == (c2.tail(e) + 1) % 3;
        f2.edge_map[e] = forward ? 0 : 1;
    }
    CHECK(bgraphs_isomorphic(on_first, make_bgraph(c2, w2, f2)));
}
