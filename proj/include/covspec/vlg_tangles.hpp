#pragma once

#include <map>
#include <string>
#include <vector>

#include "covspec/bgraphs.hpp"
#include "covspec/covers.hpp"
#include "covspec/graph.hpp"
#include "covspec/rational.hpp"

namespace covspec {

// Skeleton graph whose whole edges carry positive integer lengths; realizing
// it replaces every whole orbit by a beaded path of that length.  Half-loops
// are never varied and keep length 1.
struct VariableLengthGraph {
    Graph skeleton;
    // keyed by orbit representative min(e, inv(e)); missing orbits default to 1
    std::map<int, int> lengths;
};

Graph vlg_realize(const VariableLengthGraph& t);
double vlg_rho(const VariableLengthGraph& t);

enum class TangleClass { none, tangle, strict_tangle, eps_tangle };
const char* tangle_class_name(TangleClass c);

struct TangleReport {
    BGraph graph;
    double rho = 0.0;
    Rat order;
    TangleClass classification = TangleClass::none;
    double epsilon = 0.0;
    // set when rho sits within 1e-6 of the threshold, where the floating
    // comparison should not be trusted as an algebraic statement
    bool near_threshold = false;
};

struct TangleOptions {
    double band = 1e-9;      // symmetric equality band around sqrt(rho(H_B))
    double flag_tol = 1e-6;  // near_threshold reporting width
    // admit and compare only strict tangles (used by the fundamental-order
    // search, where non-strict patterns inside a candidate do not disqualify it)
    bool strict_only = false;
    long long node_budget = 50'000'000;
};

// Classifies one labeled graph against its base: rho(H_psi) vs sqrt(rho(H_B))
// with the equality band, and against sqrt(rho(H_B)) + epsilon when epsilon > 0.
TangleReport classify_tangle(const BGraph& psi, double epsilon = 0.0,
                             const TangleOptions& opt = {});

// All isomorphism classes of connected graphs of order < r in which every
// vertex has degree >= 3 except at most one of degree >= 2.  These are the
// shapes whose beaded realizations cover every pruned connected graph of
// order < r that is not a tree.
std::vector<Graph> enumerate_type_graphs(int r);

// Every structure map of g into base that is injective on each vertex star.
// Vertices may collide; this is local injectivity only.
std::vector<GraphMorphism> list_etale_morphisms(const Graph& g, const Graph& base,
                                                long long node_budget = 50'000'000);

// Minimal tangles over base of order < r: beaded realizations of type graphs
// with per-edge lengths <= |V_base|, carrying every star-injective labeling,
// deduplicated by labeled canonical form.  Minimality means no single-orbit
// deletion leaves a pruned connected piece that still meets the threshold.
std::vector<TangleReport> minimal_tangles(const Graph& base, int r,
                                          const TangleOptions& opt = {});

// Smallest order of a strict tangle over base.  Rational because bases with
// half-loops admit tangles of half-integer order.
Rat fundamental_order(const Graph& base, const TangleOptions& opt = {});

// True when any of the given patterns injects into the total graph.
bool has_tangle(const Graph& total, const std::vector<TangleReport>& patterns,
                const InjectionOptions& opt = {});
bool has_tangle(const Cover& c, int r, const TangleOptions& opt = {});

struct FundBoundReport {
    Rat eta;
    double bound = 0.0;  // sqrt(degree - 1)
    bool satisfied = false;
};

// Computes fundamental_order for a regular base and compares it against
// sqrt(d-1).  Reports both sides; the comparison is informational and the
// claimed inequality is known to fail for whole-loop bouquets.
FundBoundReport fund_lower_bound_probe(const Graph& base, const TangleOptions& opt = {});

std::string tangle_reports_to_csv(const std::vector<TangleReport>& reports);
std::string tangle_reports_to_json(const std::vector<TangleReport>& reports);

}  // namespace covspec
