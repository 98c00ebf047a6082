#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "covspec/graph.hpp"

namespace covspec {

// Point of Z^m with all coordinates >= 1, ordered componentwise.
struct LatticePoint {
    std::vector<int> coordinates;

    bool operator==(const LatticePoint& o) const { return coordinates == o.coordinates; }
    bool operator<(const LatticePoint& o) const { return coordinates < o.coordinates; }
};

bool lattice_leq(const LatticePoint& a, const LatticePoint& b);
LatticePoint lattice_join(const LatticePoint& a, const LatticePoint& b);

// Monotone membership oracle for an upper set of Z^m_{>=1}.  Directions with
// cap 0 must be covered by the limit oracle, which answers membership after
// the masked coordinates have been sent to infinity; slicing along such a
// direction stops, certified, once a slice reproduces the limit antichain.
// Finite caps are a caller promise that no minimal element exceeds them; the
// search still fails loudly when the top slice has visibly not stabilized.
struct UpperSetHandle {
    int dimension = 0;
    std::function<bool(const std::vector<int>&)> member;
    std::function<bool(const std::vector<int>&, const std::vector<char>&)> limit_member;
    std::vector<int> caps;  // per direction, 0 = uncapped
};

struct PosetOptions {
    long long call_budget = 20'000'000;
    int slice_limit = 100000;       // hard stop for limit-certified directions
    int monotonicity_checks = 32;   // random dominating points probed per run
};

// Complete antichain of minimal elements, found by slicing the last
// coordinate recursively.  Every returned point is in the set and leaves it
// under any single-coordinate decrement.
std::vector<LatticePoint> minimal_elements(const UpperSetHandle& u, const PosetOptions& opt = {});

// Inclusion-exclusion coefficients on joins of subsets of the minimal
// antichain: the indicator of the generated upper set equals
// sum_p mu(p) [q >= p].  Zero entries are pruned.
std::vector<std::pair<LatticePoint, long long>> mobius_coefficients(
    const std::vector<LatticePoint>& minimals);

struct ConeSumOptions {
    int max_coordinate = 64;  // truncation box; tails beyond it must be negligible
    long long term_budget = 20'000'000;
};

// Sum of f over the cone above p intersected with the truncation box.
double cone_sum(const std::function<double(const std::vector<int>&)>& f, const LatticePoint& p,
                const ConeSumOptions& opt = {});

// |sum_{q in U} f(q) - sum_p mu(p) cone_sum(f, p)| over the same truncation
// box, where U is generated by the given minimal antichain.
double inversion_check(const std::function<double(const std::vector<int>&)>& f,
                       const std::vector<LatticePoint>& minimals, const ConeSumOptions& opt = {});

// Minimal length vectors at which the beaded realization of the type graph
// stops being a tangle over base; coordinates follow the type's whole-orbit
// representatives in ascending order.  Limits come from orbit deletion.
std::vector<LatticePoint> tangle_certificates(const Graph& type, const Graph& base,
                                              const PosetOptions& opt = {});

std::string certificates_to_csv(const std::string& type_id,
                                const std::vector<LatticePoint>& certificates);

}  // namespace covspec
