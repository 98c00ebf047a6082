#include "covspec/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "covspec/covers.hpp"
#include "covspec/errors.hpp"
#include "covspec/graph_io.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"
#include "covspec/traces.hpp"
#include "covspec/vlg_tangles.hpp"

namespace covspec {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_ll(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw validation_error("config key " + key + " expects an integer, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size() || value.front() == '-') throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw validation_error("config key " + key + " expects an unsigned integer, got '" + value +
                               "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw validation_error("config key " + key + " expects a finite number, got '" + value +
                               "'");
    }
}

std::vector<int> parse_grid(const std::string& key, const std::string& value) {
    std::vector<int> grid;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw validation_error("config key " + key + " has an empty entry");
        long long v = parse_ll(key, item);
        if (v < 1 || v > 1'000'000)
            throw validation_error("config key " + key + " entries must be in [1, 1000000]");
        grid.push_back(static_cast<int>(v));
    }
    if (grid.empty()) throw validation_error("config key " + key + " must list at least one value");
    return grid;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Runs fn once per trial with the trial-derived seed.  Trials are claimed
// from a shared counter and written into preallocated slots, so the set of
// (trial, seed, result) triples is independent of the worker count and the
// sequential reduction downstream sees identical input either way.
std::vector<std::vector<double>> run_trials(long long trials, int workers, std::uint64_t cell_seed,
                                            const std::function<std::vector<double>(std::uint64_t)>& fn) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(trials));
    int w = std::max(1, workers);
    if (w == 1) {
        for (long long t = 0; t < trials; ++t)
            out[static_cast<std::size_t>(t)] = fn(derive_seed(cell_seed, static_cast<std::uint64_t>(t)));
        return out;
    }
    std::atomic<long long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            long long t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                out[static_cast<std::size_t>(t)] =
                    fn(derive_seed(cell_seed, static_cast<std::uint64_t>(t)));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_value = 0.0;
};

MeanStderr reduce_component(const std::vector<std::vector<double>>& samples, std::size_t idx) {
    double sum = 0.0;
    for (const auto& s : samples) sum += s[idx];
    double mean = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (const auto& s : samples) {
        double d = s[idx] - mean;
        ss += d * d;
    }
    double n = static_cast<double>(samples.size());
    double variance = n > 1.0 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(variance / n)};
}

void require_trials(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw validation_error("experiment requires trials >= 1");
    if (cfg.n_grid.empty()) throw validation_error("experiment requires a nonempty n_grid");
    if (cfg.base.vertex_count() == 0) throw validation_error("experiment requires a base graph");
    if (cfg.workers < 1) throw validation_error("experiment requires workers >= 1");
}

int regular_degree(const Graph& base) {
    if (!base.is_regular() || base.vertex_count() == 0)
        throw validation_error("this experiment requires a regular base graph");
    return base.degree(0);
}

std::uint64_t cell_seed(std::uint64_t master, int n, int k) {
    return derive_seed(derive_seed(master, static_cast<std::uint64_t>(n)),
                       static_cast<std::uint64_t>(k));
}

ExperimentRow make_row(const ExperimentConfig& cfg, int n, int k, const std::string& statistic,
                       double value, double stderr_value, long long trials) {
    ExperimentRow row;
    row.experiment = cfg.experiment;
    row.n = n;
    row.k = k;
    row.statistic = statistic;
    row.value = value;
    row.stderr_value = stderr_value;
    row.trials = trials;
    row.seed = cfg.seed;
    return row;
}

ExperimentResult make_result(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.seed = cfg.seed;
    result.config_hash = experiment_config_hash(cfg);
    return result;
}

// Appends a log-log slope row when at least three grid cells carry a
// positive fraction; fewer points leave the fit underdetermined.
void append_slope_row(const ExperimentConfig& cfg, ExperimentResult& result,
                      const std::vector<std::pair<int, double>>& fractions) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [n, f] : fractions) {
        if (f > 0.0) {
            xs.push_back(std::log(static_cast<double>(n)));
            ys.push_back(std::log(f));
        }
    }
    if (xs.size() < 3) return;
    result.rows.push_back(make_row(cfg, 0, 0, "log_log_slope", ols_slope(xs, ys), 0.0, cfg.trials));
}

// Counts strictly non-backtracking closed k-walks whose traversed subgraph
// is a cycle (order 0), memoizing the verdict per edge-orbit set.
long long cycle_walk_count(const Graph& g, int k) {
    std::map<std::vector<int>, bool> memo;
    long long count = 0;
    SnbcOptions opt;
    opt.length_cap = k;
    enumerate_snbc_walks(
        g, k,
        [&](const Walk& w) {
            std::vector<int> key;
            key.reserve(w.edges.size());
            for (int e : w.edges) key.push_back(std::min(e, g.involution(e)));
            std::sort(key.begin(), key.end());
            key.erase(std::unique(key.begin(), key.end()), key.end());
            auto it = memo.find(key);
            if (it == memo.end()) {
                std::vector<int> closed;
                closed.reserve(2 * key.size());
                for (int e : key) {
                    closed.push_back(e);
                    if (g.involution(e) != e) closed.push_back(g.involution(e));
                }
                std::sort(closed.begin(), closed.end());
                Subgraph sub = subgraph_from_edges(g, closed);
                it = memo.emplace(std::move(key), order(sub.graph) == Rat(0)).first;
            }
            if (it->second) ++count;
        },
        opt);
    return count;
}

bool two_colorable(const Graph& g) {
    std::vector<int> color(static_cast<std::size_t>(g.vertex_count()), -1);
    for (int root = 0; root < g.vertex_count(); ++root) {
        if (color[static_cast<std::size_t>(root)] != -1) continue;
        color[static_cast<std::size_t>(root)] = 0;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int e : g.out_edges(v)) {
                int u = g.head(e);
                if (u == v) return false;
                if (color[static_cast<std::size_t>(u)] == -1) {
                    color[static_cast<std::size_t>(u)] = 1 - color[static_cast<std::size_t>(v)];
                    stack.push_back(u);
                } else if (color[static_cast<std::size_t>(u)] == color[static_cast<std::size_t>(v)]) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error("config line is not key=value: '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw validation_error("config line has an empty key");
        if (kv.count(key)) throw validation_error("duplicate config key " + key);
        kv[key] = value;
    }

    static const std::set<std::string> known = {"experiment", "base",  "n_grid",  "k_grid",
                                                "r",          "eps",   "gamma",   "trials",
                                                "seed",       "workers", "out",   "format"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (!known.count(key)) throw validation_error("unknown config key " + key);
    }

    ExperimentConfig cfg;
    auto it = kv.find("experiment");
    if (it == kv.end() || it->second.empty())
        throw validation_error("config requires an experiment key");
    cfg.experiment = it->second;

    it = kv.find("base");
    if (it == kv.end() || it->second.empty()) throw validation_error("config requires a base key");
    cfg.base_path = it->second;
    cfg.base = load_graph_file(cfg.base_path);

    if ((it = kv.find("n_grid")) != kv.end()) cfg.n_grid = parse_grid("n_grid", it->second);
    if ((it = kv.find("k_grid")) != kv.end()) cfg.k_grid = parse_grid("k_grid", it->second);
    if ((it = kv.find("r")) != kv.end()) {
        long long r = parse_ll("r", it->second);
        if (r < 1 || r > 64) throw validation_error("config key r must be in [1, 64]");
        cfg.r = static_cast<int>(r);
    }
    if ((it = kv.find("eps")) != kv.end()) {
        cfg.eps = parse_double("eps", it->second);
        if (cfg.eps < 0.0) throw validation_error("config key eps must be nonnegative");
    }
    if ((it = kv.find("gamma")) != kv.end()) {
        cfg.gamma = parse_double("gamma", it->second);
        if (cfg.gamma <= 0.0) throw validation_error("config key gamma must be positive");
    }
    if ((it = kv.find("trials")) != kv.end()) {
        cfg.trials = parse_ll("trials", it->second);
        if (cfg.trials < 1) throw validation_error("config key trials must be >= 1");
    }
    if ((it = kv.find("seed")) != kv.end()) cfg.seed = parse_u64("seed", it->second);
    if ((it = kv.find("workers")) != kv.end()) {
        long long w = parse_ll("workers", it->second);
        if (w < 1 || w > 256) throw validation_error("config key workers must be in [1, 256]");
        cfg.workers = static_cast<int>(w);
    }
    if ((it = kv.find("out")) != kv.end()) cfg.out = it->second;
    if ((it = kv.find("format")) != kv.end()) {
        cfg.format = it->second;
        if (cfg.format != "csv" && cfg.format != "json")
            throw validation_error("config key format must be csv or json");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot read config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::string experiment_config_hash(const ExperimentConfig& cfg) {
    std::string canon = "experiment=" + cfg.experiment + "\n";
    canon += "base:\n" + write_graph(cfg.base);
    canon += "n_grid=";
    for (int n : cfg.n_grid) canon += std::to_string(n) + ",";
    canon += "\nk_grid=";
    for (int k : cfg.k_grid) canon += std::to_string(k) + ",";
    canon += "\nr=" + std::to_string(cfg.r);
    canon += "\neps=" + fmt_double(cfg.eps);
    canon += "\ngamma=" + fmt_double(cfg.gamma);
    canon += "\ntrials=" + std::to_string(cfg.trials);
    canon += "\nseed=" + std::to_string(cfg.seed) + "\n";

    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentResult run_trace_expansion(const ExperimentConfig& cfg) {
    require_trials(cfg);
    if (cfg.k_grid.empty()) throw validation_error("trace expansion requires a nonempty k_grid");
    for (int n : cfg.n_grid)
        for (int k : cfg.k_grid)
            if (n < 2 * k)
                throw validation_error("trace expansion requires n >= 2k for every grid cell");

    ExperimentResult result = make_result(cfg);
    std::map<int, double> base_trace;
    for (int k : cfg.k_grid) {
        long long t = hashimoto_trace(cfg.base, k);
        if (t <= 0)
            throw validation_error("trace expansion requires a positive base trace at every k");
        base_trace[k] = static_cast<double>(t);
        result.rows.push_back(make_row(cfg, 0, k, "base_trace", base_trace[k], 0.0, 0));
    }
    for (int n : cfg.n_grid) {
        for (int k : cfg.k_grid) {
            auto samples = run_trials(cfg.trials, cfg.workers, cell_seed(cfg.seed, n, k),
                                      [&](std::uint64_t s) {
                                          Cover c = random_cover(cfg.base, n, s);
                                          return std::vector<double>{static_cast<double>(
                             snbc_closed_walk_count(c.total, k))};
                                      });
            MeanStderr m = reduce_component(samples, 0);
            result.rows.push_back(make_row(cfg, n, k, "trace_mean", m.mean, m.stderr_value,
                                           cfg.trials));
            double tb = base_trace[k];
            result.rows.push_back(make_row(cfg, n, k, "normalized_gap",
                                           std::abs(m.mean - tb) / tb, m.stderr_value / tb,
                                           cfg.trials));
        }
    }
    return result;
}

ExperimentResult run_loop_count(const ExperimentConfig& cfg) {
    require_trials(cfg);
    if (cfg.k_grid.empty()) throw validation_error("loop counting requires a nonempty k_grid");
    if (order(cfg.base) < Rat(1))
        throw validation_error("loop counting requires a base of order at least 1");
    for (int n : cfg.n_grid)
        for (int k : cfg.k_grid)
            if (n < 2 * k)
                throw validation_error("loop counting requires n >= 2k for every grid cell");

    ExperimentResult result = make_result(cfg);
    for (int k : cfg.k_grid) {
        result.rows.push_back(make_row(cfg, 0, k, "base_cycle_count",
                                       static_cast<double>(cycle_walk_count(cfg.base, k)), 0.0, 0));
    }
    for (int n : cfg.n_grid) {
        for (int k : cfg.k_grid) {
            auto samples = run_trials(cfg.trials, cfg.workers, cell_seed(cfg.seed, n, k),
                                      [&](std::uint64_t s) {
                                          Cover c = random_cover(cfg.base, n, s);
                                          return std::vector<double>{
                                              static_cast<double>(cycle_walk_count(c.total, k))};
                                      });
            MeanStderr m = reduce_component(samples, 0);
            result.rows.push_back(make_row(cfg, n, k, "loop_mean", m.mean, m.stderr_value,
                                           cfg.trials));
        }
    }
    return result;
}

ExperimentResult run_alon_fraction(const ExperimentConfig& cfg) {
    require_trials(cfg);
    int d = regular_degree(cfg.base);
    if (d < 3) throw validation_error("the exceedance experiment requires degree >= 3");
    double threshold = 2.0 * std::sqrt(static_cast<double>(d - 1)) + cfg.eps;

    ExperimentResult result = make_result(cfg);
    std::vector<std::pair<int, double>> fractions;
    for (int n : cfg.n_grid) {
        auto samples = run_trials(cfg.trials, cfg.workers, cell_seed(cfg.seed, n, 0),
                                  [&](std::uint64_t s) {
                                      Cover c = random_cover(cfg.base, n, s);
                                      double rho = new_adjacency_radius(c, 1e-6, 200000, s);
                                      return std::vector<double>{rho > threshold ? 1.0 : 0.0};
                                  });
        MeanStderr m = reduce_component(samples, 0);
        result.rows.push_back(make_row(cfg, n, 0, "exceedance_fraction", m.mean, m.stderr_value,
                                       cfg.trials));
        fractions.emplace_back(n, m.mean);
    }
    append_slope_row(cfg, result, fractions);
    return result;
}

ExperimentResult run_tangle_scaling(const ExperimentConfig& cfg) {
    require_trials(cfg);
    TangleOptions topt;
    topt.strict_only = true;
    std::vector<TangleReport> patterns = minimal_tangles(cfg.base, cfg.r, topt);

    ExperimentResult result = make_result(cfg);
    std::vector<std::pair<int, double>> fractions;
    for (int n : cfg.n_grid) {
        auto samples = run_trials(cfg.trials, cfg.workers, cell_seed(cfg.seed, n, 0),
                                  [&](std::uint64_t s) {
                                      Cover c = random_cover(cfg.base, n, s);
                                      bool hit = has_tangle(c.total, patterns);
                                      return std::vector<double>{hit ? 1.0 : 0.0};
                                  });
        MeanStderr m = reduce_component(samples, 0);
        result.rows.push_back(make_row(cfg, n, 0, "tangle_fraction", m.mean, m.stderr_value,
                                       cfg.trials));
        fractions.emplace_back(n, m.mean);
    }
    append_slope_row(cfg, result, fractions);
    return result;
}

ExperimentResult run_spreading(const ExperimentConfig& cfg) {
    require_trials(cfg);
    int d = regular_degree(cfg.base);
    if (cfg.eps < 0.0 || cfg.eps >= static_cast<double>(d))
        throw validation_error("the spreading experiment requires eps in [0, d)");
    for (int n : cfg.n_grid)
        if (static_cast<long long>(n) * cfg.base.vertex_count() > 20)
            throw validation_error("the spreading experiment caps total graphs at 20 vertices");

    ExperimentResult result = make_result(cfg);
    for (int n : cfg.n_grid) {
        // Components: joint event, Kotani-Sunada pass, spreader seen, spreader
        // separation pass.
        auto samples = run_trials(
            cfg.trials, cfg.workers, cell_seed(cfg.seed, n, 0), [&](std::uint64_t s) {
                Cover c = random_cover(cfg.base, n, s);
                const Graph& g = c.total;

                std::vector<int> comp = connected_components(g);
                std::map<int, int> comp_size;
                for (int label : comp) ++comp_size[label];
                bool no_small = true;
                for (const auto& [label, size] : comp_size) {
                    (void)label;
                    if (size < cfg.r) no_small = false;
                }

                Spectrum spec = adjacency_spectrum(g);
                std::size_t count = spec.values.size();
                bool bipartite = two_colorable(g);
                bool big_eigenvalue = false;
                for (std::size_t i = 0; i < count; ++i) {
                    if (i + 1 == count) continue;           // Perron copy
                    if (bipartite && i == 0) continue;      // forced -d copy
                    if (std::abs(spec.values[i].real()) >= static_cast<double>(d) - cfg.eps)
                        big_eigenvalue = true;
                }

                double joint = (no_small && big_eigenvalue) ? 1.0 : 0.0;
                double ks = kotani_sunada_check(g) ? 1.0 : 0.0;
                double seen = is_gamma_spreader(g, cfg.gamma) ? 1.0 : 0.0;
                double ok = seen > 0.0 && spreader_separation_check(g, cfg.gamma) ? 1.0 : 0.0;
                return std::vector<double>{joint, ks, seen, ok};
            });
        MeanStderr joint = reduce_component(samples, 0);
        MeanStderr ks = reduce_component(samples, 1);
        result.rows.push_back(make_row(cfg, n, 0, "joint_frequency", joint.mean,
                                       joint.stderr_value, cfg.trials));
        result.rows.push_back(make_row(cfg, n, 0, "kotani_sunada_rate", ks.mean, ks.stderr_value,
                                       cfg.trials));
        long long seen_count = 0;
        long long ok_count = 0;
        for (const auto& s : samples) {
            if (s[2] > 0.0) ++seen_count;
            if (s[3] > 0.0) ++ok_count;
        }
        double rate = seen_count > 0
                          ? static_cast<double>(ok_count) / static_cast<double>(seen_count)
                          : 1.0;
        result.rows.push_back(make_row(cfg, n, 0, "spreader_fraction",
                                       static_cast<double>(seen_count) /
                                           static_cast<double>(cfg.trials),
                                       0.0, cfg.trials));
        result.rows.push_back(make_row(cfg, n, 0, "spreader_separation_rate", rate, 0.0,
                                       seen_count));
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "trace_expansion") return run_trace_expansion(cfg);
    if (cfg.experiment == "loop_count") return run_loop_count(cfg);
    if (cfg.experiment == "alon_fraction") return run_alon_fraction(cfg);
    if (cfg.experiment == "tangle_scaling") return run_tangle_scaling(cfg);
    if (cfg.experiment == "spreading") return run_spreading(cfg);
    throw validation_error("unknown experiment " + cfg.experiment);
}

std::string experiment_to_csv(const ExperimentResult& result) {
    std::string out = "experiment,n,k,statistic,value,stderr,trials,seed\n";
    for (const ExperimentRow& row : result.rows) {
        out += row.experiment + "," + std::to_string(row.n) + "," + std::to_string(row.k) + "," +
               row.statistic + "," + fmt_double(row.value) + "," + fmt_double(row.stderr_value) +
               "," + std::to_string(row.trials) + "," + std::to_string(row.seed) + "\n";
    }
    return out;
}

std::string experiment_to_json(const ExperimentResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ExperimentRow& row : result.rows) {
        rows.push_back({{"experiment", row.experiment},
                        {"n", row.n},
                        {"k", row.k},
                        {"statistic", row.statistic},
                        {"value", row.value},
                        {"stderr", row.stderr_value},
                        {"trials", row.trials},
                        {"seed", row.seed}});
    }
    nlohmann::json doc = {{"seed", result.seed},
                          {"config_hash", result.config_hash},
                          {"rows", rows}};
    return doc.dump(2) + "\n";
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw validation_error("slope fit requires at least two matched points");
    double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw validation_error("slope fit requires distinct x values");
    return sxy / sxx;
}

}  // namespace covspec
