#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covspec/graph.hpp"
#include "covspec/rng.hpp"

namespace covspec {

// One permutation of {0..n-1} per directed edge of the base graph.
// Invariant: sigma[inv(e)] is the inverse permutation of sigma[e]; for a
// half-loop this forces sigma[e] to be an involution.
struct PermutationAssignment {
    int degree = 0;
    std::vector<std::vector<int>> sigma;
};

bool is_permutation(const std::vector<int>& p);
std::vector<int> inverse_permutation(const std::vector<int>& p);

// Throws validation_error unless the assignment fits the base graph and the
// inverse-pairing invariant holds.
void validate_assignment(const Graph& base, const PermutationAssignment& a);

// Uniform fixed-point-free involution of {0..n-1}; n must be even and >= 2.
std::vector<int> random_fpf_involution(int n, Xoshiro256& rng);

// Uniform random assignment: whole-edge orbits get uniform permutations,
// half-loops get uniform involutions that are fixed-point-free for even n and
// have exactly one fixed point for odd n.  Each edge orbit consumes an
// independent stream derived from (seed, representative edge id).
PermutationAssignment sample_assignment(const Graph& base, int n, std::uint64_t seed);

struct GraphMorphism {
    std::vector<int> vertex_map;
    std::vector<int> edge_map;
};

// Structure preservation: tails, heads and the edge involution commute with f.
void validate_morphism(const Graph& domain, const Graph& codomain, const GraphMorphism& f);
bool is_morphism(const Graph& domain, const Graph& codomain, const GraphMorphism& f);

// Etale: injective on each vertex star.  Covering: bijective on each star.
void validate_etale(const Graph& domain, const Graph& codomain, const GraphMorphism& f);
bool is_etale(const Graph& domain, const Graph& codomain, const GraphMorphism& f);
void validate_covering(const Graph& domain, const Graph& codomain, const GraphMorphism& f);
bool is_covering(const Graph& domain, const Graph& codomain, const GraphMorphism& f);

struct Cover {
    Graph base;
    PermutationAssignment assignment;
    Graph total;
    GraphMorphism projection;
};

// Total graph on vertex ids v*n+i and edge ids e*n+i; edge (e,i) runs from
// (tail(e),i) to (head(e),sigma_e(i)) and pairs with (inv(e),sigma_e(i)).
Cover build_cover(const Graph& base, const PermutationAssignment& a);

Cover random_cover(const Graph& base, int n, std::uint64_t seed);

struct EtaleEmbedding {
    Cover cover;
    GraphMorphism embedding;  // domain graph into cover.total
};

// Extends an etale f : psi -> base to a degree-n cover together with an
// embedding of psi into the total graph over f.  The free part of each
// permutation is completed at random from the seed.
EtaleEmbedding etale_factorization(const Graph& psi, const Graph& base, const GraphMorphism& f,
                                   int n, std::uint64_t seed);

// Text format: "n <degree>" then one "perm <edge_id> <n images>" line per
// canonical orbit representative.
std::string write_assignment(const Graph& base, const PermutationAssignment& a);
PermutationAssignment parse_assignment(const Graph& base, const std::string& text);

}  // namespace covspec
