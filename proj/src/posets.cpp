#include "covspec/posets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

#include "covspec/errors.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"
#include "covspec/vlg_tangles.hpp"

namespace covspec {

bool lattice_leq(const LatticePoint& a, const LatticePoint& b) {
    if (a.coordinates.size() != b.coordinates.size())
        throw validation_error("lattice points have different dimensions");
    for (std::size_t i = 0; i < a.coordinates.size(); ++i)
        if (a.coordinates[i] > b.coordinates[i]) return false;
    return true;
}

LatticePoint lattice_join(const LatticePoint& a, const LatticePoint& b) {
    if (a.coordinates.size() != b.coordinates.size())
        throw validation_error("lattice points have different dimensions");
    LatticePoint j = a;
    for (std::size_t i = 0; i < b.coordinates.size(); ++i)
        j.coordinates[i] = std::max(j.coordinates[i], b.coordinates[i]);
    return j;
}

namespace {

using Point = std::vector<int>;

struct OracleContext {
    const UpperSetHandle& u;
    const PosetOptions& opt;
    long long calls = 0;

    void charge() {
        if (++calls > opt.call_budget) throw resource_error("upper-set oracle call budget exceeded");
    }

    // Membership of the point whose first `prefix.size()` coordinates are
    // `prefix` and whose trailing coordinates carry `tail` values with
    // `tail_mask` marking directions taken to infinity.
    bool member_at(const Point& prefix, const Point& tail, const std::vector<char>& tail_mask) {
        Point p = prefix;
        p.insert(p.end(), tail.begin(), tail.end());
        bool any_limit = false;
        for (char c : tail_mask) any_limit |= (c != 0);
        charge();
        if (!any_limit) return u.member(p);
        std::vector<char> mask(prefix.size(), 0);
        mask.insert(mask.end(), tail_mask.begin(), tail_mask.end());
        return u.limit_member(p, mask);
    }
};

// Minimal elements of the slice of U with trailing coordinates fixed (or sent
// to infinity) as described by tail/tail_mask.  `dims` coordinates remain
// free.  Returns a lexicographically sorted antichain.
std::vector<Point> minimals_rec(OracleContext& ctx, int dims, const Point& tail,
                                const std::vector<char>& tail_mask) {
    const int cap = ctx.u.caps[dims - 1];

    if (dims == 1) {
        if (cap > 0) {
            for (int k = 1; k <= cap; ++k)
                if (ctx.member_at({k}, tail, tail_mask)) return {{k}};
            if (ctx.member_at({cap + 1}, tail, tail_mask))
                throw validation_error("declared caps exclude a minimal element");
            return {};
        }
        Point inf_tail = tail;
        inf_tail.insert(inf_tail.begin(), 1);
        std::vector<char> inf_mask = tail_mask;
        inf_mask.insert(inf_mask.begin(), 1);
        if (!ctx.member_at({}, inf_tail, inf_mask)) return {};
        for (int k = 1; k <= ctx.opt.slice_limit; ++k)
            if (ctx.member_at({k}, tail, tail_mask)) return {{k}};
        throw numeric_error("slice member not found below the certified limit", ctx.opt.slice_limit);
    }

    auto slice = [&](int k) {
        Point t = tail;
        t.insert(t.begin(), k);
        std::vector<char> m = tail_mask;
        m.insert(m.begin(), 0);
        return minimals_rec(ctx, dims - 1, t, m);
    };
    // (rest, k) is minimal iff rest is minimal in slice k and dropping the
    // last coordinate to k-1 leaves the set.
    std::vector<Point> found;
    auto collect = [&](const std::vector<Point>& antichain, int k) {
        for (const Point& rest : antichain) {
            Point below = rest;
            below.push_back(k - 1);
            if (k == 1 || !ctx.member_at(below, tail, tail_mask)) {
                Point p = rest;
                p.push_back(k);
                found.push_back(std::move(p));
            }
        }
    };

    if (cap > 0) {
        for (int k = 1; k <= cap; ++k) collect(slice(k), k);
        for (const Point& rest : slice(cap + 1)) {
            Point below = rest;
            below.push_back(cap);
            if (!ctx.member_at(below, tail, tail_mask))
                throw validation_error("declared caps exclude a minimal element");
        }
    } else {
        // Limit antichain with this coordinate at infinity; slices grow
        // toward it, and matching it certifies that no later slice can
        // contribute a minimal element.
        Point inf_tail = tail;
        inf_tail.insert(inf_tail.begin(), 1);
        std::vector<char> inf_mask = tail_mask;
        inf_mask.insert(inf_mask.begin(), 1);
        std::vector<Point> limit = minimals_rec(ctx, dims - 1, inf_tail, inf_mask);
        bool stabilized = false;
        for (int k = 1; k <= ctx.opt.slice_limit; ++k) {
            std::vector<Point> antichain = slice(k);
            collect(antichain, k);
            if (antichain == limit) {
                stabilized = true;
                break;
            }
        }
        if (!stabilized)
            throw numeric_error("slices did not stabilize to the limit antichain",
                                ctx.opt.slice_limit);
    }
    std::sort(found.begin(), found.end());
    return found;
}

std::vector<LatticePoint> reduce_to_antichain(std::vector<LatticePoint> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<LatticePoint> kept;
    for (const LatticePoint& p : points) {
        bool dominated = false;
        for (const LatticePoint& q : points)
            if (!(q == p) && lattice_leq(q, p)) {
                dominated = true;
                break;
            }
        if (!dominated) kept.push_back(p);
    }
    return kept;
}

void validate_points(const std::vector<LatticePoint>& points) {
    if (points.empty()) return;
    const std::size_t m = points[0].coordinates.size();
    for (const LatticePoint& p : points) {
        if (p.coordinates.size() != m)
            throw validation_error("lattice points have different dimensions");
        for (int c : p.coordinates)
            if (c < 1) throw validation_error("lattice coordinates must be >= 1");
    }
}

}  // namespace

std::vector<LatticePoint> minimal_elements(const UpperSetHandle& u, const PosetOptions& opt) {
    if (u.dimension < 1) throw validation_error("upper set dimension must be >= 1");
    if (!u.member) throw validation_error("upper set needs a membership oracle");
    if (static_cast<int>(u.caps.size()) != u.dimension)
        throw validation_error("caps must list one entry per coordinate direction");
    for (int c : u.caps) {
        if (c < 0) throw validation_error("caps must be nonnegative");
        if (c == 0 && !u.limit_member)
            throw validation_error("uncapped direction requires a limit oracle");
    }
    if (opt.slice_limit < 2) throw validation_error("slice limit must be >= 2");

    OracleContext ctx{u, opt};
    std::vector<Point> raw = minimals_rec(ctx, u.dimension, {}, {});

    std::vector<LatticePoint> result;
    result.reserve(raw.size());
    for (Point& p : raw) result.push_back(LatticePoint{std::move(p)});

    // Probabilistic monotonicity check: points above a minimal element must
    // be members.  A violation means the oracle broke the upper-set contract,
    // so the antichain cannot be trusted.
    if (!result.empty() && opt.monotonicity_checks > 0) {
        Xoshiro256 rng(0x706f736574ULL ^ static_cast<std::uint64_t>(u.dimension));
        for (int t = 0; t < opt.monotonicity_checks; ++t) {
            const LatticePoint& base = result[rng.below(result.size())];
            Point p = base.coordinates;
            for (int& c : p) c += static_cast<int>(rng.below(9));
            ctx.charge();
            if (!u.member(p))
                throw validation_error(
                    "membership oracle is not monotone: a point above a minimal element was "
                    "rejected");
        }
    }
    return result;
}

std::vector<std::pair<LatticePoint, long long>> mobius_coefficients(
    const std::vector<LatticePoint>& minimals) {
    validate_points(minimals);
    std::vector<LatticePoint> antichain = reduce_to_antichain(minimals);
    const std::size_t s = antichain.size();
    if (s == 0) return {};
    if (s > 22) throw resource_error("too many minimal elements for inclusion-exclusion");

    std::map<LatticePoint, long long> coeff;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << s); ++mask) {
        LatticePoint join;
        bool first = true;
        for (std::size_t i = 0; i < s; ++i) {
            if (!(mask >> i & 1)) continue;
            join = first ? antichain[i] : lattice_join(join, antichain[i]);
            first = false;
        }
        coeff[join] += (__builtin_popcountll(mask) % 2 == 1) ? 1 : -1;
    }
    std::vector<std::pair<LatticePoint, long long>> out;
    for (auto& [p, c] : coeff)
        if (c != 0) out.emplace_back(p, c);
    return out;
}

double cone_sum(const std::function<double(const std::vector<int>&)>& f, const LatticePoint& p,
                const ConeSumOptions& opt) {
    if (!f) throw validation_error("cone sum needs a summand");
    if (p.coordinates.empty()) throw validation_error("cone apex must have dimension >= 1");
    validate_points({p});
    if (opt.max_coordinate < 1) throw validation_error("truncation box must be nonempty");

    const std::size_t m = p.coordinates.size();
    double terms = 1.0;
    for (int c : p.coordinates) {
        if (c > opt.max_coordinate) return 0.0;
        terms *= opt.max_coordinate - c + 1;
    }
    if (terms > static_cast<double>(opt.term_budget))
        throw resource_error("cone sum truncation box has too many points");

    Point q = p.coordinates;
    double sum = 0.0;
    while (true) {
        sum += f(q);
        std::size_t i = 0;
        while (i < m) {
            if (q[i] < opt.max_coordinate) {
                ++q[i];
                for (std::size_t j = 0; j < i; ++j) q[j] = p.coordinates[j];
                break;
            }
            ++i;
        }
        if (i == m) break;
    }
    return sum;
}

double inversion_check(const std::function<double(const std::vector<int>&)>& f,
                       const std::vector<LatticePoint>& minimals, const ConeSumOptions& opt) {
    if (!f) throw validation_error("inversion check needs a summand");
    if (minimals.empty()) return 0.0;
    validate_points(minimals);

    std::vector<LatticePoint> antichain = reduce_to_antichain(minimals);
    double rhs = 0.0;
    for (const auto& [p, c] : mobius_coefficients(antichain))
        rhs += static_cast<double>(c) * cone_sum(f, p, opt);

    const std::size_t m = antichain[0].coordinates.size();
    double terms = 1.0;
    for (std::size_t i = 0; i < m; ++i) terms *= opt.max_coordinate;
    if (terms > static_cast<double>(opt.term_budget))
        throw resource_error("inversion check truncation box has too many points");

    double lhs = 0.0;
    Point q(m, 1);
    while (true) {
        LatticePoint qp{q};
        for (const LatticePoint& p : antichain)
            if (lattice_leq(p, qp)) {
                lhs += f(q);
                break;
            }
        std::size_t i = 0;
        while (i < m) {
            if (q[i] < opt.max_coordinate) {
                ++q[i];
                for (std::size_t j = 0; j < i; ++j) q[j] = 1;
                break;
            }
            ++i;
        }
        if (i == m) break;
    }
    return std::abs(lhs - rhs);
}

namespace {

// Whole-edge orbit representatives min(e, inv(e)), ascending.
std::vector<int> whole_orbit_reps(const Graph& g) {
    std::vector<int> reps;
    for (int e = 0; e < g.directed_edge_count(); ++e)
        if (!g.is_half_loop(e) && e < g.involution(e)) reps.push_back(e);
    return reps;
}

// Skeleton with the masked whole orbits removed; lengths rekeyed to the
// surviving orbits' new representatives.  Masks and lengths are indexed by
// the position of the orbit among whole orbits in ascending id order.
VariableLengthGraph drop_orbits(const Graph& g, const std::vector<int>& lengths,
                                const std::vector<char>& mask) {
    std::vector<EdgeSpec> specs;
    std::map<int, int> kept_length;  // new rep -> length
    int next_id = 0;
    std::size_t r = 0;
    for (int e = 0; e < g.directed_edge_count(); ++e) {
        if (g.is_half_loop(e)) {
            specs.push_back({g.tail(e), g.head(e), true});
            ++next_id;
            continue;
        }
        if (e > g.involution(e)) continue;
        const bool masked = mask[r] != 0;
        const int length = lengths[r];
        ++r;
        if (masked) continue;
        kept_length[next_id] = length;
        specs.push_back({g.tail(e), g.head(e), false});
        next_id += 2;
    }
    return VariableLengthGraph{build_graph(g.vertex_count(), specs), std::move(kept_length)};
}

}  // namespace

std::vector<LatticePoint> tangle_certificates(const Graph& type, const Graph& base,
                                              const PosetOptions& opt) {
    if (type.directed_edge_count() == 0) throw validation_error("type graph has no edges");
    if (!is_connected(type)) throw validation_error("type graph must be connected");
    if (!is_connected(base)) throw validation_error("base graph must be connected");
    if (order(base) <= 0) throw validation_error("base must have positive order");

    const double threshold = std::sqrt(hashimoto_radius(base));
    const double band = 1e-9;
    // With base order > 0 the threshold exceeds 1, so a beaded cycle left
    // over after orbit deletions (radius exactly 1) never muddies the limit
    // comparison against the deleted skeleton's radius.
    if (threshold <= 1.0 + 1e-6)
        throw validation_error("base spectral radius too small for certification");

    const std::vector<int> reps = whole_orbit_reps(type);
    if (reps.empty()) throw validation_error("type graph has no whole edges to vary");

    UpperSetHandle u;
    u.dimension = static_cast<int>(reps.size());
    u.caps.assign(reps.size(), 0);
    u.member = [type, reps, threshold, band](const std::vector<int>& k) {
        VariableLengthGraph t{type, {}};
        for (std::size_t i = 0; i < reps.size(); ++i) t.lengths[reps[i]] = k[i];
        return vlg_rho(t) < threshold - band;
    };
    u.limit_member = [type, threshold, band](const std::vector<int>& k,
                                             const std::vector<char>& inf_mask) {
        VariableLengthGraph t = drop_orbits(type, k, inf_mask);
        if (t.skeleton.directed_edge_count() == 0) return true;
        return vlg_rho(t) < threshold - band;
    };
    return minimal_elements(u, opt);
}

std::string certificates_to_csv(const std::string& type_id,
                                const std::vector<LatticePoint>& certificates) {
    std::ostringstream out;
    out << "type,lengths\n";
    for (const LatticePoint& p : certificates) {
        out << type_id << ",";
        for (std::size_t i = 0; i < p.coordinates.size(); ++i) {
            if (i) out << ' ';
            out << p.coordinates[i];
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace covspec
