#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "covspec/covers.hpp"
#include "covspec/graph.hpp"
#include "covspec/rational.hpp"

namespace covspec {

// Exact polyexponential algebra: finite sums of polynomial(k) * base^k with
// nonzero rational bases.  All closed forms here are identities over the
// rationals, never floating fits.

struct PolyexpTerm {
    Rat base;
    std::vector<Rat> coefficients;  // ascending powers of k
};

struct Polyexponential {
    std::vector<PolyexpTerm> terms;  // distinct bases, zero polynomials pruned
};

// Merges duplicate bases, prunes zero polynomials, rejects base 0.
Polyexponential make_polyexponential(std::vector<PolyexpTerm> terms);

Rat polyexp_eval(const Polyexponential& g, long long k);
Polyexponential polyexp_add(const Polyexponential& a, const Polyexponential& b);
Polyexponential polyexp_scale(const Polyexponential& a, const Rat& c);

// Closed form of sum_{i+j=k, i,j >= 0} g1(i) g2(j); exact for every k >= 0.
Polyexponential convolve(const Polyexponential& g1, const Polyexponential& g2);

// Per-residue closed form: g(k) = residues[k mod S] evaluated at (k - k mod S)/S
// once k >= threshold.  Below the threshold the formula is not claimed.
struct ModSPolyexponential {
    int modulus = 1;
    std::vector<Polyexponential> residues;
    long long threshold = 0;
};

Rat mod_s_eval(const ModSPolyexponential& g, long long k);

struct WeightedConvolution {
    ModSPolyexponential closed_form;
    std::vector<Rat> table;  // direct summation for k = 0..table_max
};

// sum over m.kvec = k, kvec >= k0 of prod_i g_i(k_i).  The closed form is a
// mod-lcm(m) polyexponential; its threshold is tightened against the table so
// it is as small as the values allow.
WeightedConvolution weighted_convolve(const std::vector<Polyexponential>& gs,
                                      const std::vector<int>& weights, const std::vector<int>& k0,
                                      int table_max = 60);

// (Q(S) f)(k) = sum_i q_i f(k+i) where S shifts the argument by one.
std::function<Rat(long long)> shift_apply(const std::vector<Rat>& q,
                                          const std::function<Rat(long long)>& f);
// Evaluates (S - mu)^D on mu^k p(k) for k = 0..k_max; true iff exactly zero.
bool annihilation_check(const Rat& mu, int D, const std::vector<Rat>& p, int k_max = 100);

// Traces.

// Tr(H_g^k) by integer matrix powers; equals the SNBC closed walk count.
long long hashimoto_trace(const Graph& g, int k);

struct CertifiedTraceOptions {
    int length_cap = 12;
    double band = 1e-9;
};

// Number of SNBC closed k-walks whose traced graph has order < r and
// Hashimoto spectral radius strictly below sqrt(rho(H_base)); walks within
// the band of the threshold are dropped too, so the count never exceeds the
// plain trace and equals it exactly when no walk meets a tangle.
long long certified_trace(const Graph& g, int k, int r, const Graph& base,
                          const GraphMorphism& projection, const CertifiedTraceOptions& opt = {});
long long certified_trace(const Cover& c, int k, int r, const CertifiedTraceOptions& opt = {});

// Walk classes.

// Occupancy counts of a traced subgraph over the base: edges per base edge
// orbit (ascending representative order) and vertices per base vertex.
struct WalkClassStats {
    std::vector<int> edge_counts;
    std::vector<int> vertex_counts;
    std::vector<char> edge_is_half;  // parallel to edge_counts
    Rat order;                       // edges minus vertices
};

// A base walk together with the coincidence pattern of a trajectory in the
// fibers: pattern[i] == pattern[j] iff the i-th and j-th walk vertices lift
// to the same cover vertex.  Pattern values may not straddle base vertices.
struct PotentialWalk {
    Walk base_walk;
    std::vector<int> pattern;
};

// Checks walk chaining, pattern shape, and feasibility: equal steps over one
// base edge must agree on both endpoints or neither, and a half-loop step
// cannot fix a fiber point.
void validate_potential_walk(const Graph& base, const PotentialWalk& w);

WalkClassStats potential_walk_stats(const Graph& base, const PotentialWalk& w);

// prod_v (n)_{b_v} * prod_{whole e} 1/(n)_{a_e} * prod_{half e} 1/((n-1)(n-3)...),
// the expected number of realized trajectories in the walk's symmetry class.
Rat walk_class_probability_exact(const WalkClassStats& stats, int n, const Graph& base);

struct WalkClassSample {
    double mean = 0.0;
    double variance = 0.0;
    long long trials = 0;
};

// Samples permutation assignments and counts trajectories matching the
// pattern, one forced lift per fiber start.
WalkClassSample monte_carlo_walk_class(const Graph& base, const PotentialWalk& w, int n,
                                       long long trials, std::uint64_t seed);

// Truncated series c_0 + c_1/n + ... + c_{r-1}/n^{r-1}.
struct InverseNSeries {
    std::vector<Rat> coefficients;
};

Rat series_eval(const InverseNSeries& s, const Rat& n);

// Expansion of n^{order} * Esymm in powers of 1/n, exact to r terms.  The
// leading coefficient is 1 and the 1/n coefficient is
// sum_e C(a_e,2) - sum_v C(b_v,2) for half-loop-free stats.
InverseNSeries expansion_series(const WalkClassStats& stats, int r);

// Diagnostics.

struct NumericPolyexpTerm {
    double base = 0.0;
    std::vector<double> coefficients;
};

struct RamanujanReport {
    std::vector<NumericPolyexpTerm> principal;
    double residual_growth = 0.0;  // fitted per-step factor of what is left
};

// Ridge-stabilized least squares of samples against k^j * base^k using only
// bases above the threshold; diagnostic only, nothing here is exact.
RamanujanReport ramanujan_decompose(const std::vector<double>& samples,
                                    const std::vector<double>& bases, double threshold,
                                    int degree = 2, double ridge = 1e-12);

std::string function_table_to_csv(const std::vector<Rat>& values);
std::string polyexp_to_json(const Polyexponential& g);

}  // namespace covspec
