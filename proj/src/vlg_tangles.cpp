#include "covspec/vlg_tangles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "json.hpp"

#include "covspec/errors.hpp"
#include "covspec/spectra.hpp"

namespace covspec {

namespace {

std::vector<int> orbit_reps(const Graph& g) {
    std::vector<int> reps;
    for (int e = 0; e < g.directed_edge_count(); ++e)
        if (e <= g.involution(e)) reps.push_back(e);
    return reps;
}

Graph delete_orbit(const Graph& g, int rep) {
    std::vector<EdgeSpec> specs;
    for (int e : orbit_reps(g)) {
        if (e == std::min(rep, g.involution(rep))) continue;
        specs.push_back({g.tail(e), g.head(e), g.is_half_loop(e)});
    }
    return build_graph(g.vertex_count(), specs);
}

std::vector<Graph> pruned_component_graphs(const Graph& g) {
    Subgraph core = pruned_core(g);
    std::vector<Graph> out;
    if (core.graph.vertex_count() == 0) return out;
    std::vector<int> comp = connected_components(core.graph);
    int nc = component_count(core.graph);
    for (int c = 0; c < nc; ++c) {
        std::vector<int> ids;
        for (int e = 0; e < core.graph.directed_edge_count(); ++e)
            if (comp[core.graph.tail(e)] == c) ids.push_back(e);
        if (ids.empty()) continue;
        out.push_back(subgraph_from_edges(core.graph, ids).graph);
    }
    return out;
}

int max_degree(const Graph& g) {
    int m = 0;
    for (int v = 0; v < g.vertex_count(); ++v) m = std::max(m, g.degree(v));
    return m;
}

// ---- type graph enumeration ----

struct TypeBuilder {
    int nv = 0;
    std::vector<int> rem;
    std::vector<EdgeSpec> units;
    long long nodes = 0;
    std::set<std::string> seen;
    std::vector<Graph> out;

    void bump() {
        if (++nodes > 20'000'000) throw resource_error("type graph enumeration budget exceeded");
    }

    void finish() {
        Graph g = build_graph(nv, units);
        if (!is_connected(g)) return;
        std::string key = canonical_graph_key(g);
        if (seen.insert(key).second) out.push_back(std::move(g));
    }

    // distribute t remaining degree units at v over whole edges to w..nv-1
    void distribute(int v, int w, int t) {
        bump();
        if (t == 0) {
            at_vertex(v + 1);
            return;
        }
        if (w >= nv) return;
        int mmax = std::min(t, rem[w]);
        for (int m = 0; m <= mmax; ++m) {
            if (m > 0) {
                rem[w] -= m;
                for (int i = 0; i < m; ++i) units.push_back({v, w, false});
            }
            distribute(v, w + 1, t - m);
            if (m > 0) {
                rem[w] += m;
                units.resize(units.size() - static_cast<std::size_t>(m));
            }
        }
    }

    void at_vertex(int v) {
        bump();
        if (v == nv) {
            finish();
            return;
        }
        int capacity = 0;
        for (int w = v + 1; w < nv; ++w) capacity += rem[w];
        for (int h = 0; h <= rem[v]; ++h) {
            for (int l = 0; h + 2 * l <= rem[v]; ++l) {
                int t = rem[v] - h - 2 * l;
                if (t > capacity) continue;
                for (int i = 0; i < h; ++i) units.push_back({v, v, true});
                for (int i = 0; i < l; ++i) units.push_back({v, v, false});
                distribute(v, v + 1, t);
                units.resize(units.size() - static_cast<std::size_t>(h + l));
            }
        }
    }

    void run_sequence(const std::vector<int>& deg) {
        nv = static_cast<int>(deg.size());
        rem = deg;
        units.clear();
        at_vertex(0);
    }
};

void degree_sequences(int nv, int total, int maxpart, std::vector<int>& cur,
                      const std::function<void(const std::vector<int>&)>& emit) {
    int i = static_cast<int>(cur.size());
    if (i == nv - 1) {
        if (total >= 2 && total <= maxpart) {
            cur.push_back(total);
            emit(cur);
            cur.pop_back();
        }
        return;
    }
    int rest_min = 3 * (nv - 2 - i) + 2;
    for (int part = std::min(maxpart, total - rest_min); part >= 3; --part) {
        cur.push_back(part);
        degree_sequences(nv, total - part, part, cur, emit);
        cur.pop_back();
    }
}

// ---- labeled class keys robust to long beaded paths ----

void append_int(std::string& s, int v) {
    s.push_back(static_cast<char>('a' + (v & 15)));
    s.push_back(static_cast<char>('a' + ((v >> 4) & 15)));
}

// Canonical key of a connected labeled graph: branch vertices (degree != 2)
// are permuted by brute force while degree-2 chains between them are encoded
// as directed label sequences, so bead count does not enter the permutation
// cost.  Falls back to the exact small-graph key when no branch vertex exists.
std::string chain_class_key(const BGraph& bg) {
    const Graph& g = bg.graph;
    std::vector<int> branch;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) != 2) branch.push_back(v);
    if (branch.empty()) return canonical_bgraph_key(bg);
    if (branch.size() > 8) throw resource_error("too many branch vertices for canonical key");

    std::vector<int> branch_index(g.vertex_count(), -1);
    for (std::size_t i = 0; i < branch.size(); ++i) branch_index[branch[i]] = static_cast<int>(i);

    // one traversal per (branch vertex, outgoing slot); each chain appears twice
    struct Chain {
        int from, to;
        std::vector<int> labels;
    };
    std::vector<Chain> chains;
    for (int s : branch) {
        for (int d : g.out_edges(s)) {
            Chain c;
            c.from = branch_index[s];
            int e = d;
            c.labels.push_back(bg.morphism.edge_map[e]);
            while (branch_index[g.head(e)] < 0) {
                int w = g.head(e);
                int next = -1;
                for (int f : g.out_edges(w))
                    if (f != g.involution(e)) next = f;
                e = next;
                c.labels.push_back(bg.morphism.edge_map[e]);
            }
            c.to = branch_index[g.head(e)];
            chains.push_back(std::move(c));
        }
    }

    std::vector<int> perm(branch.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        std::vector<std::string> codes;
        codes.reserve(chains.size());
        for (const Chain& c : chains) {
            std::string code;
            append_int(code, perm[static_cast<std::size_t>(c.from)]);
            append_int(code, perm[static_cast<std::size_t>(c.to)]);
            for (int l : c.labels) append_int(code, l);
            codes.push_back(std::move(code));
        }
        std::sort(codes.begin(), codes.end());
        std::string key;
        std::vector<int> fiber(branch.size(), -1);
        for (std::size_t i = 0; i < branch.size(); ++i)
            fiber[static_cast<std::size_t>(perm[i])] = bg.morphism.vertex_map[branch[i]];
        for (int f : fiber) append_int(key, f);
        key.push_back('|');
        for (const std::string& c : codes) {
            key += c;
            key.push_back(';');
        }
        if (best.empty() || key < best) best = key;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::string plain_chain_key(const Graph& g) {
    Graph h1 = bouquet_of_half_loops(1);
    GraphMorphism f;
    f.vertex_map.assign(static_cast<std::size_t>(g.vertex_count()), 0);
    f.edge_map.assign(static_cast<std::size_t>(g.directed_edge_count()), 0);
    return chain_class_key(make_bgraph(g, h1, f));
}

// ---- etale morphism search ----

struct EtaleSearch {
    const Graph& g;
    const Graph& base;
    long long budget;
    long long nodes = 0;

    struct Step {
        bool root;
        int item;  // vertex for roots, directed edge for orbit steps
    };
    std::vector<Step> steps;
    std::vector<int> fmap;
    std::vector<std::uint64_t> used;
    std::vector<int> orbimg;
    std::vector<GraphMorphism> out;

    EtaleSearch(const Graph& g_, const Graph& b_, long long budget_)
        : g(g_), base(b_), budget(budget_) {
        if (base.directed_edge_count() > 64)
            throw resource_error("base too large for etale enumeration");
        plan();
        fmap.assign(static_cast<std::size_t>(g.vertex_count()), -1);
        used.assign(static_cast<std::size_t>(g.vertex_count()), 0);
        orbimg.assign(static_cast<std::size_t>(g.directed_edge_count()), -1);
    }

    void plan() {
        std::vector<char> seen_v(static_cast<std::size_t>(g.vertex_count()), 0);
        std::vector<char> seen_e(static_cast<std::size_t>(g.directed_edge_count()), 0);
        for (int v0 = 0; v0 < g.vertex_count(); ++v0) {
            if (seen_v[static_cast<std::size_t>(v0)]) continue;
            steps.push_back({true, v0});
            seen_v[static_cast<std::size_t>(v0)] = 1;
            std::vector<int> queue = {v0};
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                int u = queue[qi];
                for (int d : g.out_edges(u)) {
                    if (seen_e[static_cast<std::size_t>(d)]) continue;
                    seen_e[static_cast<std::size_t>(d)] = 1;
                    seen_e[static_cast<std::size_t>(g.involution(d))] = 1;
                    steps.push_back({false, d});
                    int w = g.head(d);
                    if (!seen_v[static_cast<std::size_t>(w)]) {
                        seen_v[static_cast<std::size_t>(w)] = 1;
                        queue.push_back(w);
                    }
                }
            }
        }
    }

    void record() {
        GraphMorphism m;
        m.vertex_map = fmap;
        m.edge_map.assign(static_cast<std::size_t>(g.directed_edge_count()), -1);
        for (int e = 0; e < g.directed_edge_count(); ++e) {
            int rep = std::min(e, g.involution(e));
            int s = orbimg[static_cast<std::size_t>(rep)];
            m.edge_map[static_cast<std::size_t>(e)] = e == rep ? s : base.involution(s);
        }
        out.push_back(std::move(m));
    }

    void walk(std::size_t idx) {
        if (idx == steps.size()) {
            record();
            return;
        }
        const Step& st = steps[idx];
        if (st.root) {
            for (int fv = 0; fv < base.vertex_count(); ++fv) {
                fmap[static_cast<std::size_t>(st.item)] = fv;
                walk(idx + 1);
            }
            fmap[static_cast<std::size_t>(st.item)] = -1;
            return;
        }
        int d = st.item;
        int u = g.tail(d), w = g.head(d);
        int fu = fmap[static_cast<std::size_t>(u)];
        bool half = g.is_half_loop(d);
        for (int s : base.out_edges(fu)) {
            if (++nodes > budget) throw resource_error("etale enumeration budget exceeded");
            if (half && base.involution(s) != s) continue;
            std::uint64_t sbit = 1ull << s;
            if (used[static_cast<std::size_t>(u)] & sbit) continue;
            if (half) {
                used[static_cast<std::size_t>(u)] |= sbit;
                orbimg[static_cast<std::size_t>(d)] = s;
                walk(idx + 1);
                used[static_cast<std::size_t>(u)] &= ~sbit;
                continue;
            }
            int t = base.involution(s);
            std::uint64_t tbit = 1ull << t;
            int fw = fmap[static_cast<std::size_t>(w)];
            if (fw >= 0 && fw != base.head(s)) continue;
            used[static_cast<std::size_t>(u)] |= sbit;
            if (used[static_cast<std::size_t>(w)] & tbit) {
                used[static_cast<std::size_t>(u)] &= ~sbit;
                continue;
            }
            used[static_cast<std::size_t>(w)] |= tbit;
            fmap[static_cast<std::size_t>(w)] = base.head(s);
            int rep = std::min(d, g.involution(d));
            orbimg[static_cast<std::size_t>(rep)] = rep == d ? s : t;
            walk(idx + 1);
            used[static_cast<std::size_t>(w)] &= ~tbit;
            used[static_cast<std::size_t>(u)] &= ~sbit;
            if (fw < 0) fmap[static_cast<std::size_t>(w)] = -1;
            else fmap[static_cast<std::size_t>(w)] = fw;
        }
    }
};

TangleReport build_report(BGraph bg, double rho, double s, double eps, const TangleOptions& opt) {
    TangleReport r;
    r.rho = rho;
    r.order = order(bg.graph);
    r.epsilon = eps;
    r.near_threshold = std::abs(rho - s) < opt.flag_tol;
    if (eps > 0.0 && rho >= s + eps) r.classification = TangleClass::eps_tangle;
    else if (rho > s + opt.band) r.classification = TangleClass::strict_tangle;
    else if (rho >= s - opt.band) r.classification = TangleClass::tangle;
    else r.classification = TangleClass::none;
    r.graph = std::move(bg);
    return r;
}

bool deletion_minimal(const Graph& realized, const std::function<bool(double)>& admit) {
    for (int rep : orbit_reps(realized)) {
        Graph del = delete_orbit(realized, rep);
        for (const Graph& comp : pruned_component_graphs(del)) {
            if (admit(hashimoto_radius(comp))) return false;
        }
    }
    return true;
}

}  // namespace

Graph vlg_realize(const VariableLengthGraph& t) {
    const Graph& g = t.skeleton;
    for (const auto& [rep, len] : t.lengths) {
        if (rep < 0 || rep >= g.directed_edge_count() || rep != std::min(rep, g.involution(rep)))
            throw validation_error("length key is not an orbit representative");
        if (g.is_half_loop(rep)) throw validation_error("half-loops cannot carry a length");
        if (len < 1) throw validation_error("edge lengths must be positive");
    }
    std::vector<EdgeSpec> specs;
    int next = g.vertex_count();
    for (int rep : orbit_reps(g)) {
        if (g.is_half_loop(rep)) {
            specs.push_back({g.tail(rep), g.tail(rep), true});
            continue;
        }
        auto it = t.lengths.find(rep);
        int len = it == t.lengths.end() ? 1 : it->second;
        int prev = g.tail(rep);
        for (int i = 1; i < len; ++i) {
            specs.push_back({prev, next, false});
            prev = next++;
        }
        specs.push_back({prev, g.head(rep), false});
    }
    return build_graph(next, specs);
}

double vlg_rho(const VariableLengthGraph& t) { return hashimoto_radius(vlg_realize(t)); }

const char* tangle_class_name(TangleClass c) {
    switch (c) {
        case TangleClass::none: return "none";
        case TangleClass::tangle: return "tangle";
        case TangleClass::strict_tangle: return "strict-tangle";
        case TangleClass::eps_tangle: return "eps-tangle";
    }
    return "none";
}

TangleReport classify_tangle(const BGraph& psi, double eps, const TangleOptions& opt) {
    if (psi.graph.vertex_count() == 0) throw validation_error("tangle candidate is empty");
    if (!is_connected(psi.graph)) throw validation_error("tangle candidate must be connected");
    if (!psi.etale) throw validation_error("tangle candidate must be etale over its base");
    if (eps < 0.0) throw validation_error("epsilon must be nonnegative");
    double s = std::sqrt(hashimoto_radius(psi.base));
    double rho = hashimoto_radius(psi.graph);
    return build_report(psi, rho, s, eps, opt);
}

std::vector<Graph> enumerate_type_graphs(int r) {
    if (r < 1) throw validation_error("type graph order bound must be positive");
    if (r > 4) throw resource_error("type graph enumeration supported up to order bound 4");
    TypeBuilder builder;
    for (int nv = 1; nv <= 2 * r; ++nv) {
        int dmin = 3 * nv - 1;
        if (nv == 1) dmin = 2;
        for (int total = dmin; total <= 2 * nv + 2 * r - 1; ++total) {
            std::vector<int> cur;
            degree_sequences(nv, total, total, cur,
                             [&](const std::vector<int>& deg) { builder.run_sequence(deg); });
        }
    }
    std::sort(builder.out.begin(), builder.out.end(), [](const Graph& a, const Graph& b) {
        return canonical_graph_key(a) < canonical_graph_key(b);
    });
    return builder.out;
}

std::vector<GraphMorphism> list_etale_morphisms(const Graph& g, const Graph& base,
                                                long long node_budget) {
    if (base.vertex_count() == 0) throw validation_error("base graph is empty");
    EtaleSearch search(g, base, node_budget);
    search.walk(0);
    return search.out;
}

std::vector<TangleReport> minimal_tangles(const Graph& base, int r, const TangleOptions& opt) {
    if (!is_connected(base)) throw validation_error("base graph must be connected");
    if (order(base) <= 0) throw validation_error("base graph must have positive order");
    if (r < 1) throw validation_error("order bound must be positive");

    double rho_b = hashimoto_radius(base);
    double s = std::sqrt(rho_b);
    auto admit = [&](double rho) {
        return opt.strict_only ? rho > s + opt.band : rho >= s - opt.band;
    };
    int max_len = std::max(1, base.vertex_count());
    int base_deg = max_degree(base);
    bool base_has_half = base.half_loop_count() > 0;

    std::map<std::string, TangleReport> classes;
    long long realizations = 0;
    for (const Graph& type : enumerate_type_graphs(r)) {
        if (max_degree(type) > base_deg) continue;
        if (type.half_loop_count() > 0 && !base_has_half) continue;
        std::vector<int> whole;
        for (int rep : orbit_reps(type))
            if (!type.is_half_loop(rep)) whole.push_back(rep);
        std::vector<int> lens(whole.size(), 1);
        while (true) {
            if (++realizations > 200'000) throw resource_error("tangle realization budget exceeded");
            VariableLengthGraph vt;
            vt.skeleton = type;
            for (std::size_t i = 0; i < whole.size(); ++i) vt.lengths[whole[i]] = lens[i];
            Graph realized = vlg_realize(vt);
            double rho = hashimoto_radius(realized);
            if (admit(rho) && deletion_minimal(realized, admit)) {
                for (const GraphMorphism& f : list_etale_morphisms(realized, base, opt.node_budget)) {
                    BGraph bg = make_bgraph(realized, base, f);
                    std::string key = chain_class_key(bg);
                    if (!classes.count(key))
                        classes.emplace(std::move(key), build_report(std::move(bg), rho, s, 0.0, opt));
                }
            }
            std::size_t i = 0;
            while (i < lens.size() && lens[i] == max_len) lens[i++] = 1;
            if (i == lens.size()) break;
            ++lens[i];
        }
    }

    std::vector<TangleReport> out;
    out.reserve(classes.size());
    for (auto& [key, rep] : classes) out.push_back(std::move(rep));
    std::stable_sort(out.begin(), out.end(), [](const TangleReport& a, const TangleReport& b) {
        if (a.order != b.order) return a.order < b.order;
        return a.rho > b.rho;
    });
    return out;
}

Rat fundamental_order(const Graph& base, const TangleOptions& opt) {
    TangleOptions strict = opt;
    strict.strict_only = true;
    Rat ord = order(base);
    long long rmax = (numerator(ord) / denominator(ord)).convert_to<long long>() + 1;
    for (int r = 1; r <= rmax; ++r) {
        std::vector<TangleReport> found = minimal_tangles(base, r, strict);
        if (found.empty()) continue;
        Rat best = found.front().order;
        for (const TangleReport& t : found) best = std::min(best, t.order);
        return best;
    }
    throw numeric_error("no strict tangle found below the base order bound", rmax);
}

bool has_tangle(const Graph& total, const std::vector<TangleReport>& patterns,
                const InjectionOptions& opt) {
    std::set<std::string> seen;
    for (const TangleReport& t : patterns) {
        if (!seen.insert(plain_chain_key(t.graph.graph)).second) continue;
        if (count_graph_injections(t.graph.graph, total, opt) > 0) return true;
    }
    return false;
}

bool has_tangle(const Cover& c, int r, const TangleOptions& opt) {
    return has_tangle(c.total, minimal_tangles(c.base, r, opt));
}

FundBoundReport fund_lower_bound_probe(const Graph& base, const TangleOptions& opt) {
    if (!base.is_regular()) throw validation_error("probe requires a regular base graph");
    if (base.vertex_count() == 0) throw validation_error("base graph is empty");
    FundBoundReport rep;
    rep.eta = fundamental_order(base, opt);
    rep.bound = std::sqrt(static_cast<double>(base.degree(0) - 1));
    rep.satisfied = to_double(rep.eta) > rep.bound;
    return rep;
}

std::string tangle_reports_to_csv(const std::vector<TangleReport>& reports) {
    std::string out = "order,rho,classification\n";
    char buf[64];
    for (const TangleReport& t : reports) {
        out += t.order.str();
        std::snprintf(buf, sizeof(buf), ",%.12g,", t.rho);
        out += buf;
        out += tangle_class_name(t.classification);
        out += '\n';
    }
    return out;
}

std::string tangle_reports_to_json(const std::vector<TangleReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TangleReport& t : reports) {
        nlohmann::json edges = nlohmann::json::array();
        const Graph& g = t.graph.graph;
        for (int e = 0; e < g.directed_edge_count(); ++e) {
            if (e > g.involution(e)) continue;
            edges.push_back({g.tail(e), g.head(e), g.is_half_loop(e)});
        }
        arr.push_back({{"order", t.order.str()},
                       {"rho", t.rho},
                       {"classification", tangle_class_name(t.classification)},
                       {"near_threshold", t.near_threshold},
                       {"epsilon", t.epsilon},
                       {"graph",
                        {{"vertices", g.vertex_count()},
                         {"edges", edges},
                         {"vertex_fibers", t.graph.morphism.vertex_map},
                         {"edge_labels", t.graph.morphism.edge_map}}}});
    }
    return arr.dump(2);
}

}  // namespace covspec
