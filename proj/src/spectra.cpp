#include "covspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "covspec/charpoly.hpp"
#include "covspec/errors.hpp"
#include "covspec/kernels.hpp"
#include "covspec/rng.hpp"

namespace covspec {

namespace {

Eigen::MatrixXd to_dense(const IntegerMatrix& m) {
    Eigen::MatrixXd out(m.dim(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) out(i, j) = static_cast<double>(m.at(i, j));
    return out;
}

std::vector<std::complex<double>> general_eigenvalues(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success)
        throw numeric_error("dense eigensolver did not converge", m.rows());
    std::vector<std::complex<double>> values(m.rows());
    for (int i = 0; i < m.rows(); ++i) values[i] = solver.eigenvalues()(i);
    return values;
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numeric_error("symmetric eigensolver did not converge", m.rows());
    std::vector<double> values(m.rows());
    for (int i = 0; i < m.rows(); ++i) values[i] = solver.eigenvalues()(i);
    return values;
}

double max_modulus(const std::vector<std::complex<double>>& values) {
    double r = 0;
    for (const auto& v : values) r = std::max(r, std::abs(v));
    return r;
}

void check_dense_cap(int dim, const SpectraOptions& opt) {
    if (dim > opt.dense_cap)
        throw resource_error("matrix dimension " + std::to_string(dim) +
                             " exceeds the dense eigensolve cap " + std::to_string(opt.dense_cap));
}

}  // namespace

std::string spectrum_source_name(SpectrumSource s) {
    switch (s) {
        case SpectrumSource::adjacency: return "adjacency";
        case SpectrumSource::hashimoto: return "hashimoto";
        case SpectrumSource::new_adjacency: return "new-adjacency";
        case SpectrumSource::new_hashimoto: return "new-hashimoto";
    }
    return "unknown";
}

void sort_values(std::vector<std::complex<double>>& values) {
    std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

Spectrum adjacency_spectrum(const Graph& g, const SpectraOptions& opt) {
    check_dense_cap(g.vertex_count(), opt);
    Spectrum s;
    s.source = SpectrumSource::adjacency;
    for (double v : symmetric_eigenvalues(to_dense(adjacency_matrix(g)))) s.values.emplace_back(v, 0.0);
    sort_values(s.values);
    return s;
}

Spectrum hashimoto_spectrum(const Graph& g, const SpectraOptions& opt) {
    check_dense_cap(g.directed_edge_count(), opt);
    Spectrum s;
    s.source = SpectrumSource::hashimoto;
    s.values = general_eigenvalues(to_dense(hashimoto_matrix(g)));
    sort_values(s.values);
    return s;
}

bool values_match(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
                  double tol) {
    if (a.size() != b.size()) return false;
    std::vector<char> used(a.size(), 0);
    for (const auto& x : b) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (used[i]) continue;
            double d = std::abs(a[i] - x);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        if (best < 0 || best_d > tol) return false;
        used[best] = 1;
    }
    return true;
}

std::vector<std::complex<double>> multiset_difference(std::vector<std::complex<double>> full,
                                                      const std::vector<std::complex<double>>& base,
                                                      double tol) {
    for (const auto& x : base) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < full.size(); ++i) {
            double d = std::abs(full[i] - x);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        if (best < 0 || best_d > tol)
            throw validation_error("multiset difference: base value has no match within tolerance");
        full.erase(full.begin() + best);
    }
    return full;
}

double perron_frobenius_radius(const Eigen::MatrixXd& m, const PerronOptions& opt) {
    if (m.rows() != m.cols()) throw validation_error("matrix must be square");
    const int n = static_cast<int>(m.rows());
    if (n == 0) return 0.0;
    if ((m.array() < 0.0).any()) throw validation_error("matrix entries must be nonnegative");
    if (n < opt.dense_cap) return max_modulus(general_eigenvalues(m));

    // Collatz bounds for M + I on a positive iterate.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (long it = 1; it <= opt.max_iterations; ++it) {
        Eigen::VectorXd y = m * x + x;
        double lower = std::numeric_limits<double>::infinity();
        double upper = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = y(i) / x(i);
            lower = std::min(lower, r);
            upper = std::max(upper, r);
        }
        if (upper - lower <= opt.tol * std::max(1.0, upper)) return 0.5 * (upper + lower) - 1.0;
        x = y / y.maxCoeff();
    }
    throw numeric_error("power iteration did not reach tolerance", opt.max_iterations);
}

namespace {

// Collatz iteration on H + I over the pruned core of one connected graph.
double sparse_hashimoto_radius(const Graph& g, const PerronOptions& opt) {
    Subgraph core = pruned_core(g);
    const Graph& c = core.graph;
    const int m = c.directed_edge_count();
    if (m == 0) return 0.0;
    std::vector<std::vector<int>> succ(m);
    for (int e = 0; e < m; ++e)
        for (int f : c.out_edges(c.head(e)))
            if (f != c.involution(e)) succ[e].push_back(f);
    std::vector<double> x(m, 1.0), y(m);
    for (long it = 1; it <= opt.max_iterations; ++it) {
        double norm = 0.0;
        for (int e = 0; e < m; ++e) {
            double s = x[e];
            for (int f : succ[e]) s += x[f];
            y[e] = s;
            norm = std::max(norm, s);
        }
        double lower = std::numeric_limits<double>::infinity();
        double upper = 0.0;
        for (int e = 0; e < m; ++e) {
            double r = y[e] / x[e];
            lower = std::min(lower, r);
            upper = std::max(upper, r);
        }
        if (upper - lower <= opt.tol * std::max(1.0, upper)) return 0.5 * (upper + lower) - 1.0;
        for (int e = 0; e < m; ++e) x[e] = y[e] / norm;
    }
    throw numeric_error("power iteration did not reach tolerance", opt.max_iterations);
}

}  // namespace

double hashimoto_radius(const Graph& g, const PerronOptions& opt) {
    if (g.directed_edge_count() == 0) return 0.0;
    if (g.directed_edge_count() < opt.dense_cap)
        return max_modulus(general_eigenvalues(to_dense(hashimoto_matrix(g))));
    auto comps = connected_components(g);
    int count = *std::max_element(comps.begin(), comps.end()) + 1;
    double radius = 0.0;
    for (int ci = 0; ci < count; ++ci) {
        std::vector<int> edges;
        for (int e = 0; e < g.directed_edge_count(); ++e)
            if (comps[g.tail(e)] == ci) edges.push_back(e);
        if (edges.empty()) continue;
        radius = std::max(radius, sparse_hashimoto_radius(subgraph_from_edges(g, edges).graph, opt));
    }
    return radius;
}

namespace {

IntegerMatrix vertex_companion(const Graph& g) {
    const int v = g.vertex_count();
    IntegerMatrix a = adjacency_matrix(g);
    IntegerMatrix c(2 * v);
    for (int i = 0; i < v; ++i) {
        for (int j = 0; j < v; ++j) c.at(i, j) = a.at(i, j);
        c.at(i, v + i) = -(g.degree(i) - 1);
        c.at(v + i, i) = 1;
    }
    return c;
}

// Both characteristic polynomials are integral, so the identity defect can be
// measured exactly at any size; only the charpoly algorithm changes with the
// dimension.  Expanding coefficients from floating eigenvalues is useless
// here: the +-1 eigenvalues of H have multiplicity |E|-|V| and dense solvers
// resolve such clusters with error ~eps^(1/mult).
double ihara_defect(const Graph& g, bool fraction_free) {
    auto cp = [&](const IntegerMatrix& m) {
        return fraction_free ? charpoly_exact(m) : charpoly_modular(m);
    };
    IPoly lhs = cp(hashimoto_matrix(g));
    IPoly rhs = cp(vertex_companion(g));
    rhs = poly_mul(rhs, poly_pow({Int(1), Int(1)}, g.half_loop_count()));
    int s = g.pair_count() - g.vertex_count();
    if (s >= 0)
        rhs = poly_mul(rhs, poly_pow({Int(-1), Int(0), Int(1)}, s));
    else
        lhs = poly_mul(lhs, poly_pow({Int(-1), Int(0), Int(1)}, -s));
    IPoly diff = poly_sub(lhs, rhs);
    Int worst = 0;
    for (const Int& c : diff) worst = std::max(worst, Int(abs(c)));
    if (worst == 0) return 0.0;
    Int scale = 1;
    for (const Int& c : rhs) scale = std::max(scale, Int(abs(c)));
    return static_cast<double>(Rat(worst) / Rat(scale));
}

}  // namespace

double ihara_residual(const Graph& g) {
    if (!is_connected(g)) throw validation_error("graph must be connected");
    return ihara_defect(g, g.directed_edge_count() <= 64);
}

namespace {

// Orthonormal basis of the fiber-sum-zero subspace, one Helmert block per
// fiber; fibers are read off the covering projection.
Eigen::MatrixXd fiber_helmert_basis(const std::vector<int>& to_base, int base_count, int degree) {
    std::vector<std::vector<int>> fibers(base_count);
    for (int i = 0; i < static_cast<int>(to_base.size()); ++i) fibers[to_base[i]].push_back(i);
    for (const auto& f : fibers)
        if (static_cast<int>(f.size()) != degree)
            throw validation_error("fiber size does not match the covering degree");
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(to_base.size(), std::size_t(base_count) * (degree - 1));
    int col = 0;
    for (const auto& f : fibers) {
        for (int k = 1; k < degree; ++k) {
            double scale = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
            for (int j = 0; j < k; ++j) u(f[j], col) = scale;
            u(f[k], col) = -k * scale;
            ++col;
        }
    }
    return u;
}

long long adjacency_trace(const Graph& g, int k) {
    IntegerMatrix p = adjacency_matrix(g).power(k);
    return p.trace();
}

double trace_identity_residual(const std::vector<std::complex<double>>& new_values,
                               const std::function<long long(int)>& total_trace,
                               const std::function<long long(int)>& base_trace) {
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k) {
        std::complex<double> s = 0.0;
        for (const auto& v : new_values) s += std::pow(v, k);
        double target = static_cast<double>(total_trace(k) - base_trace(k));
        worst = std::max(worst, std::abs(s - target));
    }
    return worst;
}

}  // namespace

NewSpectrumReport new_adjacency_spectrum(const Cover& c, const SpectraOptions& opt) {
    validate_covering(c.total, c.base, c.projection);
    check_dense_cap(c.total.vertex_count(), opt);
    Eigen::MatrixXd u =
        fiber_helmert_basis(c.projection.vertex_map, c.base.vertex_count(), c.assignment.degree);
    Eigen::MatrixXd r = u.transpose() * to_dense(adjacency_matrix(c.total)) * u;
    NewSpectrumReport rep;
    rep.new_spectrum.source = SpectrumSource::new_adjacency;
    for (double v : symmetric_eigenvalues(r)) rep.new_spectrum.values.emplace_back(v, 0.0);
    sort_values(rep.new_spectrum.values);
    rep.rho_new = max_modulus(rep.new_spectrum.values);
    rep.residual = trace_identity_residual(
        rep.new_spectrum.values, [&](int k) { return adjacency_trace(c.total, k); },
        [&](int k) { return adjacency_trace(c.base, k); });
    return rep;
}

NewSpectrumReport new_hashimoto_spectrum(const Cover& c, const SpectraOptions& opt) {
    validate_covering(c.total, c.base, c.projection);
    check_dense_cap(c.total.directed_edge_count(), opt);
    Eigen::MatrixXd u = fiber_helmert_basis(c.projection.edge_map, c.base.directed_edge_count(),
                                            c.assignment.degree);
    Eigen::MatrixXd r = u.transpose() * to_dense(hashimoto_matrix(c.total)) * u;
    NewSpectrumReport rep;
    rep.new_spectrum.source = SpectrumSource::new_hashimoto;
    rep.new_spectrum.values = general_eigenvalues(r);
    sort_values(rep.new_spectrum.values);
    rep.rho_new = max_modulus(rep.new_spectrum.values);
    rep.residual = trace_identity_residual(
        rep.new_spectrum.values, [&](int k) { return snbc_closed_walk_count(c.total, k); },
        [&](int k) { return snbc_closed_walk_count(c.base, k); });
    return rep;
}

double new_adjacency_radius(const Cover& c, double tol, long max_iterations, std::uint64_t seed) {
    validate_covering(c.total, c.base, c.projection);
    const Graph& g = c.total;
    const int nv = g.vertex_count();
    const int n = c.assignment.degree;
    if (n <= 1) return 0.0;
    std::vector<std::vector<int>> fibers(c.base.vertex_count());
    for (int v = 0; v < nv; ++v) fibers[c.projection.vertex_map[v]].push_back(v);

    auto project = [&](std::vector<double>& x) {
        for (const auto& f : fibers) {
            double mean = 0.0;
            for (int v : f) mean += x[v];
            mean /= f.size();
            for (int v : f) x[v] -= mean;
        }
    };
    auto apply_a = [&](const std::vector<double>& x, std::vector<double>& y) {
        std::fill(y.begin(), y.end(), 0.0);
        for (int e = 0; e < g.directed_edge_count(); ++e) y[g.tail(e)] += x[g.head(e)];
    };

    Xoshiro256 rng(seed);
    std::vector<double> v(nv), t(nv), bv(nv);
    for (double& x : v) x = rng.unit() - 0.5;
    project(v);
    double nrm = kernels::nrm2(v.data(), nv);
    if (nrm == 0.0) {
        v[fibers[0][0]] = 1.0;
        project(v);
        nrm = kernels::nrm2(v.data(), nv);
    }
    kernels::scale(v.data(), 1.0 / nrm, nv);

    double prev_theta = -1.0;
    int plateau = 0;
    for (long it = 1; it <= max_iterations; ++it) {
        // bv = (PAP)^2 v
        t = v;
        project(t);
        apply_a(t, bv);
        project(bv);
        t = bv;
        apply_a(t, bv);
        project(bv);

        double theta = kernels::dot(v.data(), bv.data(), nv);
        double err = 0.0;
        for (int i = 0; i < nv; ++i) {
            double d = bv[i] - theta * v[i];
            err += d * d;
        }
        err = std::sqrt(err);
        if (err <= tol * std::max(theta, 1.0)) return std::sqrt(std::max(theta, 0.0));
        // A cluster of near-equal top eigenvalues keeps the residual from
        // vanishing while the Rayleigh value sits inside the cluster, whose
        // width the stalled increments bound.  Accept a long flat stretch.
        if (std::abs(theta - prev_theta) <= 0.01 * tol * std::max(theta, 1.0)) {
            if (++plateau >= 48) return std::sqrt(std::max(theta, 0.0));
        } else {
            plateau = 0;
        }
        prev_theta = theta;
        double bn = kernels::nrm2(bv.data(), nv);
        if (bn == 0.0) return 0.0;
        for (int i = 0; i < nv; ++i) v[i] = bv[i] / bn;
    }
    throw numeric_error("projected power iteration did not reach tolerance", max_iterations);
}

bool kotani_sunada_check(const Graph& g, const SpectraOptions& opt) {
    double bound = std::sqrt(std::max(0, g.max_degree() - 1)) + 1e-8;
    for (const auto& v : hashimoto_spectrum(g, opt).values) {
        if (std::abs(v.imag()) <= opt.compare_tol) continue;
        if (std::abs(v) > bound) return false;
    }
    return true;
}

bool spreader_separation_check(const Graph& g, double gamma, const SpectraOptions& opt) {
    if (!g.is_regular()) throw validation_error("graph must be regular");
    if (!is_gamma_spreader(g, gamma)) throw validation_error("graph is not a gamma-spreader");
    double d = g.degree(0);
    double bound = d * d - gamma * gamma / (4.0 + 2.0 * gamma * gamma);
    auto values = adjacency_spectrum(g, opt).values;  // ascending, top copy last
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        double lambda = values[i].real();
        if (lambda * lambda > bound + 1e-8) return false;
    }
    return true;
}

std::string spectrum_to_csv(const Spectrum& s) {
    std::ostringstream out;
    out << "source,re,im\n";
    char buf[128];
    for (const auto& v : s.values) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", spectrum_source_name(s.source).c_str(),
                      v.real(), v.imag());
        out << buf;
    }
    return out.str();
}

}  // namespace covspec
