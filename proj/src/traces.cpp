#include "covspec/traces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"

#include "covspec/errors.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"

namespace covspec {

namespace {

// ----------------------------------------------------------------------
// Exact polynomial helpers, ascending coefficients, zero = empty vector.

using Poly = std::vector<Rat>;

Poly poly_trim(Poly p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return poly_trim(std::move(r));
}

Poly poly_scale(const Poly& a, const Rat& c) {
    if (c == 0) return {};
    Poly r = a;
    for (auto& x : r) x *= c;
    return poly_trim(std::move(r));
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return poly_trim(std::move(r));
}

Rat poly_eval(const Poly& p, const Rat& x) {
    Rat r = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
    return r;
}

// p(alpha * x + beta) by Horner over the linear factor.
Poly poly_affine(const Poly& p, const Rat& alpha, const Rat& beta) {
    Poly r;
    const Poly lin = {beta, alpha};
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        r = poly_mul(r, lin);
        if (r.empty())
            r.push_back(*it);
        else
            r[0] += *it;
    }
    return poly_trim(std::move(r));
}

// Gaussian elimination over the rationals.  The systems solved below are
// interpolation systems that are provably nonsingular; the throw is a guard.
std::vector<Rat> solve_linear(std::vector<std::vector<Rat>> a, std::vector<Rat> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n)
            throw numeric_error("singular interpolation system", static_cast<long>(col));
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        const Rat inv = Rat(1) / a[col][col];
        for (auto& x : a[col]) x *= inv;
        b[col] *= inv;
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col] == 0) continue;
            const Rat f = a[row][col];
            for (std::size_t j = col; j < n; ++j) a[row][j] -= f * a[col][j];
            b[row] -= f * b[col];
        }
    }
    return b;
}

void append_term(std::map<Rat, Poly>& acc, const Rat& base, const Poly& poly) {
    if (poly.empty()) return;
    auto it = acc.find(base);
    if (it == acc.end())
        acc.emplace(base, poly);
    else
        it->second = poly_add(it->second, poly);
}

Polyexponential from_map(const std::map<Rat, Poly>& acc) {
    Polyexponential g;
    for (const auto& [base, poly] : acc) {
        Poly p = poly_trim(poly);
        if (!p.empty()) g.terms.push_back({base, std::move(p)});
    }
    return g;
}

// Closed form of sum_{i+j=k} p1(i) l1^i p2(j) l2^j.  The generating function
// is a proper rational function with poles only at 1/l1 and 1/l2, so the
// coefficient sequence is A(k) l1^k + B(k) l2^k with deg A <= deg p1 and
// deg B <= deg p2 (one merged polynomial of degree deg p1 + deg p2 + 1 when
// the bases coincide).  Interpolating through the first d1+d2+2 values pins
// it down exactly for every k >= 0.
void convolve_pair(const PolyexpTerm& t1, const PolyexpTerm& t2, std::map<Rat, Poly>& acc) {
    const int d1 = static_cast<int>(t1.coefficients.size()) - 1;
    const int d2 = static_cast<int>(t2.coefficients.size()) - 1;
    const int n = d1 + d2 + 2;
    std::vector<Rat> v1(n), v2(n), h(n, Rat(0));
    Rat p1 = 1, p2 = 1;
    for (int k = 0; k < n; ++k) {
        v1[k] = p1 * poly_eval(t1.coefficients, k);
        v2[k] = p2 * poly_eval(t2.coefficients, k);
        p1 *= t1.base;
        p2 *= t2.base;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i <= k; ++i) h[k] += v1[i] * v2[k - i];

    std::vector<std::vector<Rat>> a(n, std::vector<Rat>(n));
    std::vector<Rat> rhs(n);
    if (t1.base == t2.base) {
        Rat bp = 1;
        for (int k = 0; k < n; ++k) {
            Rat kp = 1;
            for (int j = 0; j < n; ++j) {
                a[k][j] = kp;
                kp *= k;
            }
            rhs[k] = h[k] / bp;
            bp *= t1.base;
        }
        append_term(acc, t1.base, poly_trim(solve_linear(std::move(a), std::move(rhs))));
        return;
    }
    Rat b1 = 1, b2 = 1;
    for (int k = 0; k < n; ++k) {
        Rat kp = 1;
        for (int i = 0; i <= d1; ++i) {
            a[k][i] = kp * b1;
            kp *= k;
        }
        kp = 1;
        for (int j = 0; j <= d2; ++j) {
            a[k][d1 + 1 + j] = kp * b2;
            kp *= k;
        }
        rhs[k] = h[k];
        b1 *= t1.base;
        b2 *= t2.base;
    }
    std::vector<Rat> sol = solve_linear(std::move(a), std::move(rhs));
    append_term(acc, t1.base, poly_trim(Poly(sol.begin(), sol.begin() + d1 + 1)));
    append_term(acc, t2.base, poly_trim(Poly(sol.begin() + d1 + 1, sol.end())));
}

// ----------------------------------------------------------------------
// Mod-S closed forms with a head table of true values.  Invariant carried
// through every constructor and fold: the formula is exact for k >= head
// size and the head stores exact values below it.

struct ModSWork {
    long long s = 1;
    std::vector<Polyexponential> residues;
    std::vector<Rat> head;
};

Rat work_formula(const ModSWork& w, long long k) {
    const long long c = k % w.s;
    return polyexp_eval(w.residues[static_cast<std::size_t>(c)], (k - c) / w.s);
}

Rat work_true(const ModSWork& w, long long k) {
    return k < static_cast<long long>(w.head.size()) ? w.head[static_cast<std::size_t>(k)]
                                                     : work_formula(w, k);
}

// k -> g(k / m) when m divides k, else 0, as a mod-s function; exact for all
// k >= 0 because each residue class is a plain reindexing of g.
ModSWork lift_to_modulus(const Polyexponential& g, long long m, long long s) {
    ModSWork w;
    w.s = s;
    w.residues.assign(static_cast<std::size_t>(s), {});
    for (long long r = 0; r < s; ++r) {
        if (r % m != 0) continue;
        std::map<Rat, Poly> acc;
        for (const auto& term : g.terms) {
            const Rat scale = rat_pow(term.base, static_cast<long>(r / m));
            append_term(acc, rat_pow(term.base, static_cast<long>(s / m)),
                        poly_scale(poly_affine(term.coefficients, Rat(s / m), Rat(r / m)), scale));
        }
        w.residues[static_cast<std::size_t>(r)] = from_map(acc);
    }
    return w;
}

// q(j) -> q(j - 1); exact wherever j - 1 is in the exactness range of q.
Polyexponential shift_back_one(const Polyexponential& q) {
    std::map<Rat, Poly> acc;
    for (const auto& term : q.terms)
        append_term(acc, term.base,
                    poly_scale(poly_affine(term.coefficients, Rat(1), Rat(-1)), Rat(1) / term.base));
    return from_map(acc);
}

// Formula residues of k -> f(k - x); any head on f is ignored, so the result
// matches f's formula shifted and the caller must mask the low range.
ModSWork shift_formula(const ModSWork& f, long long x) {
    ModSWork r;
    r.s = f.s;
    r.residues.assign(static_cast<std::size_t>(f.s), {});
    for (long long c = 0; c < f.s; ++c) {
        const long long rr = ((c - x) % f.s + f.s) % f.s;
        const long long o = (c - x - rr) / f.s;  // source index is j + o
        std::map<Rat, Poly> acc;
        for (const auto& term : f.residues[static_cast<std::size_t>(rr)].terms)
            append_term(acc, term.base,
                        poly_scale(poly_affine(term.coefficients, Rat(1), Rat(o)),
                                   rat_pow(term.base, static_cast<long>(o))));
        r.residues[static_cast<std::size_t>(c)] = from_map(acc);
    }
    return r;
}

// Ordinary convolution of h with a head-free work f.  Splitting k = s*j + c
// over residue pairs gives, per residue c, direct parts at index j and carry
// parts at index j - 1; both are exact closed forms for j >= 1, so the fold
// formula is exact from 2s on.  Deviations of h's formula inside its head
// are corrected explicitly: each one contributes delta * f(k - x), whose
// closed form is exact for k >= x.  The new head is summed directly from
// true values, so the exactness invariant is preserved.
ModSWork fold(const ModSWork& h, const ModSWork& f) {
    const long long s = h.s;
    ModSWork out;
    out.s = s;
    out.residues.assign(static_cast<std::size_t>(s), {});
    for (long long c = 0; c < s; ++c) {
        Polyexponential sum;
        for (long long a = 0; a < s; ++a) {
            const long long b = c - a;
            const long long bs = b < 0 ? b + s : b;
            std::map<Rat, Poly> acc;
            for (const auto& t1 : h.residues[static_cast<std::size_t>(a)].terms)
                for (const auto& t2 : f.residues[static_cast<std::size_t>(bs)].terms)
                    convolve_pair(t1, t2, acc);
            Polyexponential part = from_map(acc);
            if (b < 0) part = shift_back_one(part);
            sum = polyexp_add(sum, part);
        }
        out.residues[static_cast<std::size_t>(c)] = sum;
    }
    long long head_len = std::max<long long>(2 * s, static_cast<long long>(h.head.size()));
    for (long long x = 0; x < static_cast<long long>(h.head.size()); ++x) {
        const Rat delta = h.head[static_cast<std::size_t>(x)] - work_formula(h, x);
        if (delta == 0) continue;
        const ModSWork corr = shift_formula(f, x);
        for (long long c = 0; c < s; ++c)
            out.residues[static_cast<std::size_t>(c)] =
                polyexp_add(out.residues[static_cast<std::size_t>(c)],
                            polyexp_scale(corr.residues[static_cast<std::size_t>(c)], delta));
    }
    out.head.assign(static_cast<std::size_t>(head_len), Rat(0));
    for (long long k = 0; k < head_len; ++k) {
        Rat v = 0;
        for (long long x = 0; x <= k; ++x) v += work_true(h, x) * work_formula(f, k - x);
        out.head[static_cast<std::size_t>(k)] = v;
    }
    return out;
}

// kappa -> g(kappa + off).
Polyexponential compose_offset(const Polyexponential& g, long long off) {
    std::map<Rat, Poly> acc;
    for (const auto& term : g.terms)
        append_term(acc, term.base,
                    poly_scale(poly_affine(term.coefficients, Rat(1), Rat(off)),
                               rat_pow(term.base, static_cast<long>(off))));
    return from_map(acc);
}

// All edge-orbit representatives ascending: min(e, iota(e)), half-loops are
// their own orbit.
std::vector<int> all_orbit_reps(const Graph& g) {
    std::vector<int> reps;
    for (int e = 0; e < g.directed_edge_count(); ++e)
        if (e <= g.involution(e)) reps.push_back(e);
    return reps;
}

std::vector<int> walk_vertex_chain(const Graph& base, const Walk& w) {
    std::vector<int> verts = {w.start_vertex};
    int at = w.start_vertex;
    for (int e : w.edges) {
        at = base.head(e);
        verts.push_back(at);
    }
    return verts;
}

}  // namespace

// ----------------------------------------------------------------------
// Polyexponential algebra.

Polyexponential make_polyexponential(std::vector<PolyexpTerm> terms) {
    std::map<Rat, Poly> acc;
    for (auto& t : terms) {
        if (t.base == 0) throw validation_error("polyexponential base must be nonzero");
        append_term(acc, t.base, poly_trim(std::move(t.coefficients)));
    }
    return from_map(acc);
}

Rat polyexp_eval(const Polyexponential& g, long long k) {
    Rat r = 0;
    for (const auto& t : g.terms)
        r += rat_pow(t.base, static_cast<long>(k)) * poly_eval(t.coefficients, Rat(k));
    return r;
}

Polyexponential polyexp_add(const Polyexponential& a, const Polyexponential& b) {
    std::map<Rat, Poly> acc;
    for (const auto& t : a.terms) append_term(acc, t.base, t.coefficients);
    for (const auto& t : b.terms) append_term(acc, t.base, t.coefficients);
    return from_map(acc);
}

Polyexponential polyexp_scale(const Polyexponential& a, const Rat& c) {
    std::map<Rat, Poly> acc;
    for (const auto& t : a.terms) append_term(acc, t.base, poly_scale(t.coefficients, c));
    return from_map(acc);
}

Polyexponential convolve(const Polyexponential& g1, const Polyexponential& g2) {
    std::map<Rat, Poly> acc;
    for (const auto& t1 : g1.terms)
        for (const auto& t2 : g2.terms) convolve_pair(t1, t2, acc);
    return from_map(acc);
}

Rat mod_s_eval(const ModSPolyexponential& g, long long k) {
    if (g.modulus < 1) throw validation_error("modulus must be positive");
    if (g.residues.size() != static_cast<std::size_t>(g.modulus))
        throw validation_error("residue count must equal the modulus");
    if (k < 0) throw validation_error("mod-s functions are defined for k >= 0");
    const long long c = k % g.modulus;
    return polyexp_eval(g.residues[static_cast<std::size_t>(c)], (k - c) / g.modulus);
}

WeightedConvolution weighted_convolve(const std::vector<Polyexponential>& gs,
                                      const std::vector<int>& weights, const std::vector<int>& k0,
                                      int table_max) {
    const std::size_t t = gs.size();
    if (t == 0) throw validation_error("weighted convolution needs at least one function");
    if (weights.size() != t || k0.size() != t)
        throw validation_error("weights and truncation vectors must match the function count");
    for (int m : weights)
        if (m < 1) throw validation_error("convolution weights must be positive");
    for (int x : k0)
        if (x < 0) throw validation_error("truncation offsets must be nonnegative");
    if (table_max < 0) throw validation_error("table bound must be nonnegative");

    std::vector<Polyexponential> norm;
    norm.reserve(t);
    for (const auto& g : gs) norm.push_back(make_polyexponential(g.terms));

    long long s = 1;
    for (int m : weights) {
        s = std::lcm(s, static_cast<long long>(m));
        if (s > 4096) throw resource_error("weight lcm exceeds the supported modulus");
    }

    // Direct summation table; shares nothing with the closed-form path below
    // beyond plain evaluation of the inputs.
    std::vector<Rat> table(static_cast<std::size_t>(table_max) + 1, Rat(0));
    {
        std::vector<Rat> cur(table.size(), Rat(0));
        cur[0] = 1;
        for (std::size_t i = 0; i < t; ++i) {
            std::vector<Rat> next(table.size(), Rat(0));
            const long long m = weights[i];
            for (long long ki = k0[i]; m * ki <= table_max; ++ki) {
                const Rat gv = polyexp_eval(norm[i], ki);
                if (gv == 0) continue;
                for (long long k = m * ki; k <= table_max; ++k)
                    next[static_cast<std::size_t>(k)] +=
                        gv * cur[static_cast<std::size_t>(k - m * ki)];
            }
            cur = std::move(next);
        }
        table = std::move(cur);
    }

    // Substituting kappa_i = k_i - k0_i reduces the truncated convolution to
    // an untruncated one shifted by X = sum m_i k0_i.
    long long shift = 0;
    for (std::size_t i = 0; i < t; ++i) shift += static_cast<long long>(weights[i]) * k0[i];

    ModSWork h = lift_to_modulus(compose_offset(norm[0], k0[0]), weights[0], s);
    for (std::size_t i = 1; i < t; ++i)
        h = fold(h, lift_to_modulus(compose_offset(norm[i], k0[i]), weights[i], s));

    ModSWork shifted = shift == 0 ? std::move(h) : shift_formula(h, shift);
    if (shift != 0) {
        shifted.head.assign(static_cast<std::size_t>(shift) + h.head.size(), Rat(0));
        for (std::size_t j = 0; j < h.head.size(); ++j)
            shifted.head[static_cast<std::size_t>(shift) + j] = h.head[j];
    }

    long long threshold = static_cast<long long>(shifted.head.size());
    while (threshold > 0 &&
           work_formula(shifted, threshold - 1) ==
               shifted.head[static_cast<std::size_t>(threshold - 1)])
        --threshold;

    WeightedConvolution out;
    out.closed_form.modulus = static_cast<int>(s);
    out.closed_form.residues = std::move(shifted.residues);
    out.closed_form.threshold = threshold;
    out.table = std::move(table);
    return out;
}

// ----------------------------------------------------------------------
// Shift operator.

std::function<Rat(long long)> shift_apply(const std::vector<Rat>& q,
                                          const std::function<Rat(long long)>& f) {
    if (!f) throw validation_error("shift_apply needs a function");
    const Poly qq = poly_trim(q);
    return [qq, f](long long k) {
        Rat r = 0;
        for (std::size_t i = 0; i < qq.size(); ++i)
            if (qq[i] != 0) r += qq[i] * f(k + static_cast<long long>(i));
        return r;
    };
}

bool annihilation_check(const Rat& mu, int D, const std::vector<Rat>& p, int k_max) {
    if (D < 1) throw validation_error("annihilation order must be positive");
    if (k_max < 0) throw validation_error("annihilation range must be nonnegative");
    const Poly pp = poly_trim(p);
    std::vector<Rat> q(static_cast<std::size_t>(D) + 1);
    for (int i = 0; i <= D; ++i) q[static_cast<std::size_t>(i)] = Rat(binomial(D, i)) * rat_pow(-mu, D - i);
    const auto f = [&mu, &pp](long long k) {
        return rat_pow(mu, static_cast<long>(k)) * poly_eval(pp, Rat(k));
    };
    const auto g = shift_apply(q, f);
    for (long long k = 0; k <= k_max; ++k)
        if (g(k) != 0) return false;
    return true;
}

// ----------------------------------------------------------------------
// Traces.

long long hashimoto_trace(const Graph& g, int k) {
    if (k < 0) throw validation_error("trace power must be nonnegative");
    return hashimoto_matrix(g).power(k).trace();
}

long long certified_trace(const Graph& g, int k, int r, const Graph& base,
                          const GraphMorphism& projection, const CertifiedTraceOptions& opt) {
    if (k < 1) throw validation_error("certified trace needs walk length >= 1");
    if (r < 1) throw validation_error("certified trace needs order bound >= 1");
    if (k > opt.length_cap) throw resource_error("certified trace length exceeds the cap");
    validate_etale(g, base, projection);
    const double threshold = std::sqrt(hashimoto_radius(base));

    // Walks sharing an edge set trace the same subgraph, so the verdict is
    // memoized on the sorted orbit representatives.
    std::map<std::vector<int>, bool> verdicts;
    long long certified = 0;
    enumerate_snbc_walks(
        g, k,
        [&](const Walk& w) {
            std::vector<int> key;
            key.reserve(w.edges.size());
            for (int e : w.edges) key.push_back(std::min(e, g.involution(e)));
            std::sort(key.begin(), key.end());
            key.erase(std::unique(key.begin(), key.end()), key.end());
            auto it = verdicts.find(key);
            if (it == verdicts.end()) {
                const Subgraph sub = graph_of_walk(g, w);
                bool ok = order(sub.graph) < r;
                if (ok) ok = hashimoto_radius(sub.graph) < threshold - opt.band;
                it = verdicts.emplace(std::move(key), ok).first;
            }
            if (it->second) ++certified;
        },
        SnbcOptions{opt.length_cap});
    return certified;
}

long long certified_trace(const Cover& c, int k, int r, const CertifiedTraceOptions& opt) {
    validate_covering(c.total, c.base, c.projection);
    return certified_trace(c.total, k, r, c.base, c.projection, opt);
}

// ----------------------------------------------------------------------
// Walk classes.

void validate_potential_walk(const Graph& base, const PotentialWalk& w) {
    const Walk& bw = w.base_walk;
    if (base.vertex_count() == 0) throw validation_error("potential walk needs a nonempty base");
    if (bw.start_vertex < 0 || bw.start_vertex >= base.vertex_count())
        throw validation_error("potential walk start vertex out of range");
    int at = bw.start_vertex;
    for (int e : bw.edges) {
        if (e < 0 || e >= base.directed_edge_count())
            throw validation_error("potential walk edge out of range");
        if (base.tail(e) != at) throw validation_error("potential walk edges do not chain");
        at = base.head(e);
    }
    if (w.pattern.size() != bw.edges.size() + 1)
        throw validation_error("pattern length must be walk length plus one");

    const std::vector<int> verts = walk_vertex_chain(base, bw);
    std::map<int, int> owner;
    for (std::size_t i = 0; i < w.pattern.size(); ++i) {
        const auto [it, fresh] = owner.emplace(w.pattern[i], verts[i]);
        if (!fresh && it->second != verts[i])
            throw validation_error("pattern value reused across distinct base vertices");
    }

    // Feasibility: some cover realizes the pattern iff repeated steps over an
    // edge agree on both endpoints or neither (likewise against the inverted
    // edge) and no half-loop step fixes a fiber point.
    const std::size_t k = bw.edges.size();
    for (std::size_t i = 0; i < k; ++i) {
        const int e = bw.edges[i];
        if (base.is_half_loop(e) && w.pattern[i] == w.pattern[i + 1])
            throw validation_error("half-loop step cannot fix a fiber point");
        for (std::size_t j = i + 1; j < k; ++j) {
            const int f = bw.edges[j];
            if (e == f &&
                (w.pattern[i] == w.pattern[j]) != (w.pattern[i + 1] == w.pattern[j + 1]))
                throw validation_error("pattern is inconsistent over a repeated edge");
            if (base.involution(e) == f &&
                (w.pattern[i] == w.pattern[j + 1]) != (w.pattern[i + 1] == w.pattern[j]))
                throw validation_error("pattern is inconsistent over an inverted edge");
        }
    }
}

WalkClassStats potential_walk_stats(const Graph& base, const PotentialWalk& w) {
    validate_potential_walk(base, w);
    const std::vector<int> verts = walk_vertex_chain(base, w.base_walk);

    std::vector<std::set<int>> fiber(static_cast<std::size_t>(base.vertex_count()));
    for (std::size_t i = 0; i < w.pattern.size(); ++i)
        fiber[static_cast<std::size_t>(verts[i])].insert(w.pattern[i]);

    const std::vector<int> reps = all_orbit_reps(base);
    std::map<int, std::size_t> rep_index;
    for (std::size_t i = 0; i < reps.size(); ++i) rep_index.emplace(reps[i], i);

    // Lifted edges over an orbit, normalized to the representative direction;
    // a half-loop lifts to whole edges matching fiber points, so its pairs
    // are unordered.
    std::vector<std::set<std::pair<int, int>>> lifted(reps.size());
    for (std::size_t i = 0; i < w.base_walk.edges.size(); ++i) {
        const int e = w.base_walk.edges[i];
        const int rep = std::min(e, base.involution(e));
        const int a = w.pattern[i], b = w.pattern[i + 1];
        std::pair<int, int> key;
        if (base.is_half_loop(e))
            key = {std::min(a, b), std::max(a, b)};
        else if (e == rep)
            key = {a, b};
        else
            key = {b, a};
        lifted[rep_index.at(rep)].insert(key);
    }

    WalkClassStats stats;
    stats.vertex_counts.resize(static_cast<std::size_t>(base.vertex_count()));
    for (int v = 0; v < base.vertex_count(); ++v)
        stats.vertex_counts[static_cast<std::size_t>(v)] =
            static_cast<int>(fiber[static_cast<std::size_t>(v)].size());
    stats.edge_counts.resize(reps.size());
    stats.edge_is_half.resize(reps.size());
    long long edges = 0, vertices = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        stats.edge_counts[i] = static_cast<int>(lifted[i].size());
        stats.edge_is_half[i] = base.is_half_loop(reps[i]) ? 1 : 0;
        edges += stats.edge_counts[i];
    }
    for (int b : stats.vertex_counts) vertices += b;
    stats.order = Rat(edges - vertices);
    return stats;
}

static void check_stats_shape(const WalkClassStats& stats, const Graph& base) {
    const std::vector<int> reps = all_orbit_reps(base);
    if (stats.edge_counts.size() != reps.size() || stats.edge_is_half.size() != reps.size() ||
        stats.vertex_counts.size() != static_cast<std::size_t>(base.vertex_count()))
        throw validation_error("walk class stats do not match the base graph");
    for (std::size_t i = 0; i < reps.size(); ++i)
        if ((stats.edge_is_half[i] != 0) != base.is_half_loop(reps[i]))
            throw validation_error("walk class stats disagree with base half-loop flags");
    for (int a : stats.edge_counts)
        if (a < 0) throw validation_error("edge counts must be nonnegative");
    for (int b : stats.vertex_counts)
        if (b < 0) throw validation_error("vertex counts must be nonnegative");
}

Rat walk_class_probability_exact(const WalkClassStats& stats, int n, const Graph& base) {
    check_stats_shape(stats, base);
    if (n < 1) throw validation_error("cover degree must be positive");
    for (int b : stats.vertex_counts)
        if (b > n) throw validation_error("walk class needs more fiber points than the degree");
    for (std::size_t i = 0; i < stats.edge_counts.size(); ++i) {
        if (stats.edge_is_half[i]) {
            if (n % 2 != 0)
                throw validation_error("half-loop walk classes need an even degree");
            if (2 * stats.edge_counts[i] > n)
                throw validation_error("walk class needs more matched pairs than the degree");
        } else if (stats.edge_counts[i] > n) {
            throw validation_error("walk class needs more lifted edges than the degree");
        }
    }

    Rat value = 1;
    for (int b : stats.vertex_counts) value *= Rat(falling_factorial(n, b));
    for (std::size_t i = 0; i < stats.edge_counts.size(); ++i) {
        const int a = stats.edge_counts[i];
        if (stats.edge_is_half[i]) {
            Rat denom = 1;
            for (int j = 1; j <= a; ++j) denom *= n - 2 * j + 1;
            value /= denom;
        } else {
            value /= Rat(falling_factorial(n, a));
        }
    }
    return value;
}

WalkClassSample monte_carlo_walk_class(const Graph& base, const PotentialWalk& w, int n,
                                       long long trials, std::uint64_t seed) {
    validate_potential_walk(base, w);
    if (n < 1) throw validation_error("cover degree must be positive");
    if (trials < 1) throw validation_error("trial count must be positive");

    const std::vector<int> verts = walk_vertex_chain(base, w.base_walk);
    const std::size_t len = w.pattern.size();
    // Only positions over the same base vertex are comparable.
    struct Probe {
        std::size_t i, j;
        bool equal;
    };
    std::vector<Probe> probes;
    for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = i + 1; j < len; ++j)
            if (verts[i] == verts[j])
                probes.push_back({i, j, w.pattern[i] == w.pattern[j]});

    std::vector<int> s(len);
    double sum = 0, sumsq = 0;
    for (long long t = 0; t < trials; ++t) {
        const PermutationAssignment a =
            sample_assignment(base, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
        long long count = 0;
        for (int s0 = 0; s0 < n; ++s0) {
            s[0] = s0;
            for (std::size_t i = 0; i + 1 < len; ++i)
                s[i + 1] = a.sigma[static_cast<std::size_t>(w.base_walk.edges[i])]
                                  [static_cast<std::size_t>(s[i])];
            bool ok = true;
            for (const Probe& p : probes)
                if ((s[p.i] == s[p.j]) != p.equal) {
                    ok = false;
                    break;
                }
            count += ok ? 1 : 0;
        }
        sum += static_cast<double>(count);
        sumsq += static_cast<double>(count) * static_cast<double>(count);
    }
    WalkClassSample out;
    out.trials = trials;
    out.mean = sum / static_cast<double>(trials);
    out.variance = trials > 1
                       ? std::max(0.0, (sumsq - sum * sum / static_cast<double>(trials)) /
                                           static_cast<double>(trials - 1))
                       : 0.0;
    return out;
}

// ----------------------------------------------------------------------
// 1/n expansion.

Rat series_eval(const InverseNSeries& s, const Rat& n) {
    if (n == 0) throw validation_error("series evaluation needs n != 0");
    Rat r = 0;
    const Rat x = Rat(1) / n;
    for (auto it = s.coefficients.rbegin(); it != s.coefficients.rend(); ++it) r = r * x + *it;
    return r;
}

namespace {

using Series = std::vector<Rat>;  // truncated power series, fixed length r

Series series_mul(const Series& a, const Series& b) {
    Series r(a.size(), Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; i + j < r.size() && j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

// Inverse of a unit series (constant term 1).
Series series_inv(const Series& a) {
    Series r(a.size(), Rat(0));
    r[0] = 1;
    for (std::size_t k = 1; k < a.size(); ++k) {
        Rat c = 0;
        for (std::size_t i = 1; i <= k; ++i) c += a[i] * r[k - i];
        r[k] = -c;
    }
    return r;
}

}  // namespace

InverseNSeries expansion_series(const WalkClassStats& stats, int r) {
    if (r < 1) throw validation_error("series order must be positive");
    if (stats.edge_is_half.size() != stats.edge_counts.size())
        throw validation_error("walk class stats edge vectors disagree");
    // n^{order} * Esymm equals exactly the product
    //   prod_v prod_{i<b_v} (1 - i x) / prod_e prod (1 - i x or 1 - (2i-1) x)
    // at x = 1/n, so its 1/n expansion is this rational series.
    const std::size_t size = static_cast<std::size_t>(r);
    Series num(size, Rat(0)), den(size, Rat(0));
    num[0] = 1;
    den[0] = 1;
    const auto linear = [size](long c) {
        Series l(size, Rat(0));
        l[0] = 1;
        if (size > 1) l[1] = -Rat(c);
        return l;
    };
    for (int b : stats.vertex_counts) {
        if (b < 0) throw validation_error("vertex counts must be nonnegative");
        for (int i = 1; i < b; ++i) num = series_mul(num, linear(i));
    }
    for (std::size_t e = 0; e < stats.edge_counts.size(); ++e) {
        const int a = stats.edge_counts[e];
        if (a < 0) throw validation_error("edge counts must be nonnegative");
        if (stats.edge_is_half[e])
            for (int i = 1; i <= a; ++i) den = series_mul(den, linear(2 * i - 1));
        else
            for (int i = 1; i < a; ++i) den = series_mul(den, linear(i));
    }
    InverseNSeries out;
    out.coefficients = series_mul(num, series_inv(den));
    return out;
}

// ----------------------------------------------------------------------
// Diagnostics.

RamanujanReport ramanujan_decompose(const std::vector<double>& samples,
                                    const std::vector<double>& bases, double threshold,
                                    int degree, double ridge) {
    if (samples.empty()) throw validation_error("decomposition needs samples");
    if (degree < 0) throw validation_error("decomposition degree must be nonnegative");
    if (ridge < 0) throw validation_error("ridge must be nonnegative");
    const int count = static_cast<int>(samples.size());

    std::vector<double> sel;
    for (double b : bases)
        if (std::abs(b) > threshold) sel.push_back(b);
    std::sort(sel.begin(), sel.end());
    sel.erase(std::unique(sel.begin(), sel.end()), sel.end());

    RamanujanReport rep;
    Eigen::VectorXd resid = Eigen::Map<const Eigen::VectorXd>(samples.data(), count);
    if (!sel.empty()) {
        const int cols = static_cast<int>(sel.size()) * (degree + 1);
        if (cols > count)
            throw validation_error("not enough samples for the requested decomposition");
        Eigen::MatrixXd design(count, cols);
        for (int k = 0; k < count; ++k) {
            for (std::size_t bi = 0; bi < sel.size(); ++bi) {
                double kp = 1.0;
                const double bk = std::pow(sel[bi], k);
                for (int j = 0; j <= degree; ++j) {
                    design(k, static_cast<int>(bi) * (degree + 1) + j) = kp * bk;
                    kp *= static_cast<double>(k);
                }
            }
        }
        // Unit-norm columns keep the ridge meaningful across wildly different
        // base magnitudes.
        Eigen::VectorXd norms(cols);
        for (int c = 0; c < cols; ++c) {
            norms(c) = design.col(c).norm();
            if (norms(c) == 0) norms(c) = 1;
            design.col(c) /= norms(c);
        }
        const Eigen::MatrixXd gram =
            design.transpose() * design + ridge * Eigen::MatrixXd::Identity(cols, cols);
        const Eigen::VectorXd sol = gram.ldlt().solve(design.transpose() * resid);
        resid -= design * sol;
        for (std::size_t bi = 0; bi < sel.size(); ++bi) {
            NumericPolyexpTerm term;
            term.base = sel[bi];
            for (int j = 0; j <= degree; ++j) {
                const int c = static_cast<int>(bi) * (degree + 1) + j;
                term.coefficients.push_back(sol(c) / norms(c));
            }
            rep.principal.push_back(std::move(term));
        }
    }

    // Per-step growth of what is left, fitted on the upper half of the range;
    // the projection bias of the fit concentrates in the last samples, so a
    // couple of them are trimmed when enough points remain.
    int lo = count / 2, hi = count;
    if (!sel.empty() && hi - lo >= 6) hi -= 2;
    std::vector<std::pair<double, double>> pts;
    for (int k = lo; k < hi; ++k)
        if (std::abs(resid(k)) > 1e-300) pts.push_back({static_cast<double>(k), std::log(std::abs(resid(k)))});
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = static_cast<double>(pts.size());
        const double denom = m * sxx - sx * sx;
        if (denom > 0) rep.residual_growth = std::exp((m * sxy - sx * sy) / denom);
    }
    return rep;
}

// ----------------------------------------------------------------------
// Serialization.

std::string function_table_to_csv(const std::vector<Rat>& values) {
    std::string out = "k,value\n";
    for (std::size_t k = 0; k < values.size(); ++k)
        out += std::to_string(k) + "," + values[k].str() + "\n";
    return out;
}

std::string polyexp_to_json(const Polyexponential& g) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : g.terms) {
        nlohmann::json coeffs = nlohmann::json::array();
        for (const auto& c : t.coefficients) coeffs.push_back(c.str());
        arr.push_back({{"base", t.base.str()}, {"coefficients", coeffs}});
    }
    return arr.dump();
}

}  // namespace covspec
