#include "covspec/covers.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "covspec/errors.hpp"

namespace covspec {

bool is_permutation(const std::vector<int>& p) {
    std::vector<char> seen(p.size(), 0);
    for (int x : p) {
        if (x < 0 || x >= static_cast<int>(p.size()) || seen[x]) return false;
        seen[x] = 1;
    }
    return true;
}

std::vector<int> inverse_permutation(const std::vector<int>& p) {
    std::vector<int> inv(p.size());
    for (int i = 0; i < static_cast<int>(p.size()); ++i) inv[p[i]] = i;
    return inv;
}

void validate_assignment(const Graph& base, const PermutationAssignment& a) {
    if (a.degree < 1) throw validation_error("assignment degree must be >= 1");
    if (static_cast<int>(a.sigma.size()) != base.directed_edge_count())
        throw validation_error("assignment has wrong number of permutations");
    for (int e = 0; e < base.directed_edge_count(); ++e) {
        if (static_cast<int>(a.sigma[e].size()) != a.degree || !is_permutation(a.sigma[e]))
            throw validation_error("sigma[" + std::to_string(e) + "] is not a permutation of the fiber");
    }
    for (int e = 0; e < base.directed_edge_count(); ++e) {
        if (a.sigma[base.involution(e)] != inverse_permutation(a.sigma[e]))
            throw validation_error("sigma[" + std::to_string(base.involution(e)) +
                                   "] is not inverse to sigma[" + std::to_string(e) + "]");
    }
}

std::vector<int> random_fpf_involution(int n, Xoshiro256& rng) {
    if (n < 2 || n % 2 != 0)
        throw validation_error("fixed-point-free involution requires even degree >= 2");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, rng);
    std::vector<int> sigma(n);
    for (int i = 0; i < n; i += 2) {
        sigma[order[i]] = order[i + 1];
        sigma[order[i + 1]] = order[i];
    }
    return sigma;
}

namespace {

// Involution with exactly one fixed point; n odd.
std::vector<int> random_near_fpf_involution(int n, Xoshiro256& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, rng);
    std::vector<int> sigma(n);
    sigma[order[0]] = order[0];
    for (int i = 1; i < n; i += 2) {
        sigma[order[i]] = order[i + 1];
        sigma[order[i + 1]] = order[i];
    }
    return sigma;
}

std::vector<int> random_permutation(int n, Xoshiro256& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    fisher_yates(p, rng);
    return p;
}

}  // namespace

PermutationAssignment sample_assignment(const Graph& base, int n, std::uint64_t seed) {
    if (n < 1) throw validation_error("covering degree must be >= 1");
    PermutationAssignment a;
    a.degree = n;
    a.sigma.resize(base.directed_edge_count());
    for (int e = 0; e < base.directed_edge_count(); ++e) {
        if (e > base.involution(e)) continue;
        Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(e)));
        if (base.is_half_loop(e)) {
            if (n == 1)
                a.sigma[e] = {0};
            else if (n % 2 == 0)
                a.sigma[e] = random_fpf_involution(n, rng);
            else
                a.sigma[e] = random_near_fpf_involution(n, rng);
        } else {
            a.sigma[e] = random_permutation(n, rng);
            a.sigma[base.involution(e)] = inverse_permutation(a.sigma[e]);
        }
    }
    return a;
}

void validate_morphism(const Graph& domain, const Graph& codomain, const GraphMorphism& f) {
    if (static_cast<int>(f.vertex_map.size()) != domain.vertex_count() ||
        static_cast<int>(f.edge_map.size()) != domain.directed_edge_count())
        throw validation_error("morphism maps have wrong sizes");
    for (int v : f.vertex_map)
        if (v < 0 || v >= codomain.vertex_count()) throw validation_error("vertex image out of range");
    for (int e : f.edge_map)
        if (e < 0 || e >= codomain.directed_edge_count())
            throw validation_error("edge image out of range");
    for (int e = 0; e < domain.directed_edge_count(); ++e) {
        if (f.vertex_map[domain.tail(e)] != codomain.tail(f.edge_map[e]))
            throw validation_error("morphism does not preserve tails");
        if (f.vertex_map[domain.head(e)] != codomain.head(f.edge_map[e]))
            throw validation_error("morphism does not preserve heads");
        if (f.edge_map[domain.involution(e)] != codomain.involution(f.edge_map[e]))
            throw validation_error("morphism does not preserve the edge involution");
    }
}

bool is_morphism(const Graph& domain, const Graph& codomain, const GraphMorphism& f) {
    try {
        validate_morphism(domain, codomain, f);
        return true;
    } catch (const validation_error&) {
        return false;
    }
}

void validate_etale(const Graph& domain, const Graph& codomain, const GraphMorphism& f) {
    validate_morphism(domain, codomain, f);
    for (int v = 0; v < domain.vertex_count(); ++v) {
        const auto& star = domain.out_edges(v);
        std::vector<int> images;
        for (int e : star) images.push_back(f.edge_map[e]);
        std::sort(images.begin(), images.end());
        if (std::adjacent_find(images.begin(), images.end()) != images.end())
            throw validation_error("morphism is not injective on the star of vertex " +
                                   std::to_string(v));
    }
}

bool is_etale(const Graph& domain, const Graph& codomain, const GraphMorphism& f) {
    try {
        validate_etale(domain, codomain, f);
        return true;
    } catch (const validation_error&) {
        return false;
    }
}

void validate_covering(const Graph& domain, const Graph& codomain, const GraphMorphism& f) {
    validate_etale(domain, codomain, f);
    for (int v = 0; v < domain.vertex_count(); ++v) {
        if (domain.degree(v) != codomain.degree(f.vertex_map[v]))
            throw validation_error("star of vertex " + std::to_string(v) +
                                   " does not surject onto its image star");
    }
}

bool is_covering(const Graph& domain, const Graph& codomain, const GraphMorphism& f) {
    try {
        validate_covering(domain, codomain, f);
        return true;
    } catch (const validation_error&) {
        return false;
    }
}

Cover build_cover(const Graph& base, const PermutationAssignment& a) {
    validate_assignment(base, a);
    const int n = a.degree;
    const int bv = base.vertex_count();
    const int be = base.directed_edge_count();
    std::vector<int> tails(static_cast<std::size_t>(be) * n);
    std::vector<int> heads(static_cast<std::size_t>(be) * n);
    std::vector<int> invs(static_cast<std::size_t>(be) * n);
    for (int e = 0; e < be; ++e) {
        for (int i = 0; i < n; ++i) {
            int id = e * n + i;
            tails[id] = base.tail(e) * n + i;
            heads[id] = base.head(e) * n + a.sigma[e][i];
            invs[id] = base.involution(e) * n + a.sigma[e][i];
        }
    }
    Cover c{base, a, Graph::from_directed(bv * n, tails, heads, invs), GraphMorphism{}};
    c.projection.vertex_map.resize(static_cast<std::size_t>(bv) * n);
    for (int v = 0; v < bv * n; ++v) c.projection.vertex_map[v] = v / n;
    c.projection.edge_map.resize(static_cast<std::size_t>(be) * n);
    for (int e = 0; e < be * n; ++e) c.projection.edge_map[e] = e / n;
    return c;
}

Cover random_cover(const Graph& base, int n, std::uint64_t seed) {
    return build_cover(base, sample_assignment(base, n, seed));
}

EtaleEmbedding etale_factorization(const Graph& psi, const Graph& base, const GraphMorphism& f,
                                   int n, std::uint64_t seed) {
    validate_etale(psi, base, f);
    const int be = base.directed_edge_count();

    // Injective fiber indices for the psi vertices over each base vertex.
    std::vector<int> fiber_load(base.vertex_count(), 0);
    std::vector<int> idx(psi.vertex_count());
    for (int u = 0; u < psi.vertex_count(); ++u) {
        idx[u] = fiber_load[f.vertex_map[u]]++;
        if (idx[u] >= n)
            throw validation_error("covering degree " + std::to_string(n) +
                                   " is too small for the fiber over vertex " +
                                   std::to_string(f.vertex_map[u]));
    }

    // Partial permutation constraints sigma_e(idx[tail]) = idx[head].
    std::vector<std::vector<int>> partial(be, std::vector<int>(n, -1));
    for (int d = 0; d < psi.directed_edge_count(); ++d) {
        int e = f.edge_map[d];
        int from = idx[psi.tail(d)];
        int to = idx[psi.head(d)];
        if (partial[e][from] != -1 && partial[e][from] != to)
            throw validation_error("etale data forces conflicting permutation values");
        partial[e][from] = to;
    }

    PermutationAssignment a;
    a.degree = n;
    a.sigma.resize(be);
    for (int e = 0; e < be; ++e) {
        if (e > base.involution(e)) continue;
        Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(e)));
        if (base.involution(e) == e) {
            // Half-loop: constraints arrive in symmetric pairs, so the free
            // remainder is involution-closed; pair it up at random.
            std::vector<int> sigma = partial[e];
            std::vector<int> free;
            for (int i = 0; i < n; ++i)
                if (sigma[i] == -1) free.push_back(i);
            fisher_yates(free, rng);
            std::size_t i = 0;
            for (; i + 1 < free.size(); i += 2) {
                sigma[free[i]] = free[i + 1];
                sigma[free[i + 1]] = free[i];
            }
            if (i < free.size()) sigma[free[i]] = free[i];
            a.sigma[e] = sigma;
        } else {
            std::vector<int> sigma = partial[e];
            const auto& back = partial[base.involution(e)];
            for (int j = 0; j < n; ++j)
                if (back[j] != -1) {
                    if (sigma[back[j]] != -1 && sigma[back[j]] != j)
                        throw validation_error("etale data forces conflicting permutation values");
                    sigma[back[j]] = j;
                }
            std::vector<char> used(n, 0);
            for (int v : sigma)
                if (v != -1) used[v] = 1;
            std::vector<int> free_targets;
            for (int v = 0; v < n; ++v)
                if (!used[v]) free_targets.push_back(v);
            fisher_yates(free_targets, rng);
            std::size_t next = 0;
            for (int i = 0; i < n; ++i)
                if (sigma[i] == -1) sigma[i] = free_targets[next++];
            a.sigma[e] = sigma;
            a.sigma[base.involution(e)] = inverse_permutation(sigma);
        }
    }

    EtaleEmbedding result{build_cover(base, a), GraphMorphism{}};
    result.embedding.vertex_map.resize(psi.vertex_count());
    for (int u = 0; u < psi.vertex_count(); ++u)
        result.embedding.vertex_map[u] = f.vertex_map[u] * n + idx[u];
    result.embedding.edge_map.resize(psi.directed_edge_count());
    for (int d = 0; d < psi.directed_edge_count(); ++d)
        result.embedding.edge_map[d] = f.edge_map[d] * n + idx[psi.tail(d)];
    validate_etale(psi, result.cover.total, result.embedding);
    return result;
}

std::string write_assignment(const Graph& base, const PermutationAssignment& a) {
    validate_assignment(base, a);
    std::ostringstream out;
    out << "n " << a.degree << "\n";
    for (int e = 0; e < base.directed_edge_count(); ++e) {
        if (e > base.involution(e)) continue;
        out << "perm " << e;
        for (int v : a.sigma[e]) out << ' ' << v;
        out << "\n";
    }
    return out.str();
}

PermutationAssignment parse_assignment(const Graph& base, const std::string& text) {
    PermutationAssignment a;
    a.sigma.assign(base.directed_edge_count(), {});
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_n = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        auto fail = [&](const std::string& msg) {
            throw validation_error("assignment line " + std::to_string(line_no) + ": " + msg);
        };
        if (tag == "n") {
            if (have_n) fail("duplicate degree line");
            if (!(ls >> a.degree) || a.degree < 1) fail("bad degree");
            have_n = true;
        } else if (tag == "perm") {
            if (!have_n) fail("degree line must come first");
            int e;
            if (!(ls >> e) || e < 0 || e >= base.directed_edge_count()) fail("bad edge id");
            std::vector<int> sigma(a.degree);
            for (int i = 0; i < a.degree; ++i)
                if (!(ls >> sigma[i])) fail("expected " + std::to_string(a.degree) + " images");
            std::string extra;
            if (ls >> extra) fail("trailing tokens");
            if (!is_permutation(sigma)) fail("images are not a permutation");
            if (!a.sigma[e].empty() && a.sigma[e] != sigma) fail("conflicting permutation for edge");
            a.sigma[e] = sigma;
            auto inv = inverse_permutation(sigma);
            int ie = base.involution(e);
            if (!a.sigma[ie].empty() && a.sigma[ie] != inv)
                fail("permutation conflicts with its paired edge");
            a.sigma[ie] = inv;
        } else {
            fail("unknown directive '" + tag + "'");
        }
    }
    if (!have_n) throw validation_error("assignment text has no degree line");
    for (int e = 0; e < base.directed_edge_count(); ++e)
        if (a.sigma[e].empty())
            throw validation_error("assignment text misses edge " + std::to_string(e));
    validate_assignment(base, a);
    return a;
}

}  // namespace covspec
