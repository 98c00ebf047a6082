#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covspec/covers.hpp"
#include "covspec/graph.hpp"
#include "covspec/rational.hpp"

namespace covspec {

// A graph together with a structure map to a fixed base graph.
struct BGraph {
    Graph graph;
    Graph base;
    GraphMorphism morphism;
    bool etale = false;
};

// Validates the morphism and records whether it is etale.
BGraph make_bgraph(Graph graph, Graph base, GraphMorphism morphism);

// View of a cover's total graph as a graph over the cover's base.
BGraph cover_bgraph(const Cover& c);

struct InjectionOptions {
    long long node_cap = 50'000'000;
};

// Number of injective morphisms a.graph -> b.graph commuting with the two
// structure maps (same base required).  Backtracking over vertex images in
// BFS order with fiber and per-label degree pruning, then an exact matching
// count over edge-pair orbits.
long long count_injections(const BGraph& a, const BGraph& b, const InjectionOptions& opt = {});

// All injections, for small inputs; used by brute-force checks.
std::vector<GraphMorphism> list_injections(const BGraph& a, const BGraph& b,
                                           const InjectionOptions& opt = {});

// Injections of plain graphs (no base constraint).
long long count_graph_injections(const Graph& a, const Graph& b, const InjectionOptions& opt = {});

long long automorphism_order(const BGraph& phi, const InjectionOptions& opt = {});

struct OccurrenceExpectation {
    Rat expectation;
    Rat leading_exponent;  // order of the domain graph
};

// Exact expected number of injections of phi into a random degree-n cover:
// prod_v n!/(n-b_v)! * prod_e (n-a_e)!/n!, with the descending odd-factorial
// replacement on half-loop base edges (even n only there).
OccurrenceExpectation occurrence_expectation_exact(const BGraph& phi, int n);

struct OccurrenceStats {
    double mean = 0.0;
    double variance = 0.0;
    long long trials = 0;
};

OccurrenceStats monte_carlo_occurrence(const BGraph& phi, int n, long long trials,
                                       std::uint64_t seed, const InjectionOptions& opt = {});

// Canonical string keys for isomorphism classes; brute force over vertex
// relabelings, capped at 8 vertices.
std::string canonical_graph_key(const Graph& g);
std::string canonical_bgraph_key(const BGraph& g);

bool graphs_isomorphic(const Graph& a, const Graph& b);
bool bgraphs_isomorphic(const BGraph& a, const BGraph& b);

}  // namespace covspec
