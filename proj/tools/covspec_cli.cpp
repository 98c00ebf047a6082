#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "covspec/covers.hpp"
#include "covspec/errors.hpp"
#include "covspec/experiments.hpp"
#include "covspec/graph.hpp"
#include "covspec/graph_io.hpp"
#include "covspec/spectra.hpp"
#include "covspec/traces.hpp"
#include "covspec/vlg_tangles.hpp"

namespace {

struct GlobalOptions {
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out;
    std::string format = "csv";
};

void emit(const GlobalOptions& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw covspec::validation_error("cannot write output file " + g.out);
    f << text;
}

std::string spectrum_json(const covspec::Spectrum& s) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : s.values) values.push_back({{"re", v.real()}, {"im", v.imag()}});
    nlohmann::json doc = {{"source", covspec::spectrum_source_name(s.source)}, {"values", values}};
    return doc.dump(2) + "\n";
}

covspec::GraphMorphism identity_morphism(const covspec::Graph& g) {
    covspec::GraphMorphism m;
    m.vertex_map.resize(static_cast<std::size_t>(g.vertex_count()));
    m.edge_map.resize(static_cast<std::size_t>(g.directed_edge_count()));
    std::iota(m.vertex_map.begin(), m.vertex_map.end(), 0);
    std::iota(m.edge_map.begin(), m.edge_map.end(), 0);
    return m;
}

int run_spectrum(const GlobalOptions& g, const std::string& path) {
    covspec::Graph graph = covspec::load_graph_file(path);
    covspec::Spectrum s = covspec::hashimoto_spectrum(graph);
    emit(g, g.format == "json" ? spectrum_json(s) : covspec::spectrum_to_csv(s));
    return 0;
}

int run_cover(const GlobalOptions& g, const std::string& path, int n) {
    covspec::Graph base = covspec::load_graph_file(path);
    covspec::Cover c = covspec::random_cover(base, n, g.seed);
    emit(g, covspec::write_assignment(base, c.assignment));
    return 0;
}

int run_fund_order(const GlobalOptions& g, const std::string& path) {
    covspec::Graph base = covspec::load_graph_file(path);
    emit(g, covspec::fundamental_order(base).str() + "\n");
    return 0;
}

int run_tangles(const GlobalOptions& g, const std::string& path, int r) {
    covspec::Graph base = covspec::load_graph_file(path);
    std::vector<covspec::TangleReport> reports = covspec::minimal_tangles(base, r);
    emit(g, g.format == "json" ? covspec::tangle_reports_to_json(reports)
                               : covspec::tangle_reports_to_csv(reports));
    return 0;
}

int run_certify(const GlobalOptions& g, const std::string& path, int k, int r) {
    covspec::Graph graph = covspec::load_graph_file(path);
    long long plain = covspec::hashimoto_trace(graph, k);
    long long certified =
        covspec::certified_trace(graph, k, r, graph, identity_morphism(graph));
    if (g.format == "json") {
        nlohmann::json doc = {{"k", k},
                              {"r", r},
                              {"hashimoto_trace", plain},
                              {"certified_trace", certified}};
        emit(g, doc.dump(2) + "\n");
    } else {
        emit(g, "statistic,value\nhashimoto_trace," + std::to_string(plain) +
                    "\ncertified_trace," + std::to_string(certified) + "\n");
    }
    return 0;
}

int run_experiment_cmd(const GlobalOptions& g, const std::string& path, bool seed_set,
                       bool workers_set, bool out_set, bool format_set) {
    covspec::ExperimentConfig cfg = covspec::load_experiment_config(path);
    if (seed_set) cfg.seed = g.seed;
    if (workers_set) cfg.workers = g.workers;
    if (out_set) cfg.out = g.out;
    if (format_set) cfg.format = g.format;
    covspec::ExperimentResult result = covspec::run_experiment(cfg);
    GlobalOptions route = g;
    route.out = cfg.out;
    emit(route, cfg.format == "json" ? covspec::experiment_to_json(result)
                                     : covspec::experiment_to_csv(result));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-backtracking spectra of random graph covers"};
    app.require_subcommand(1);

    GlobalOptions global;
    auto* seed_opt = app.add_option("--seed", global.seed, "master random seed");
    auto* workers_opt = app.add_option("--workers", global.workers, "worker thread count")
                            ->check(CLI::Range(1, 256));
    auto* out_opt = app.add_option("--out", global.out, "output file (default stdout)");
    auto* format_opt = app.add_option("--format", global.format, "output format")
                           ->check(CLI::IsMember({"csv", "json"}));

    std::string graph_path;
    std::string config_path;
    int cover_n = 2;
    int tangle_r = 2;
    int certify_k = 1;
    int certify_r = 2;

    CLI::App* spectrum = app.add_subcommand("spectrum", "non-backtracking spectrum of a graph");
    spectrum->add_option("graph", graph_path, "graph file")->required();

    CLI::App* cover = app.add_subcommand("cover", "sample a random degree-n cover");
    cover->add_option("graph", graph_path, "base graph file")->required();
    cover->add_option("--n", cover_n, "covering degree")->required()->check(CLI::Range(1, 1000000));

    CLI::App* fund = app.add_subcommand("fund-order", "fundamental order of a base graph");
    fund->add_option("graph", graph_path, "base graph file")->required();

    CLI::App* tangles = app.add_subcommand("tangles", "minimal tangles below a given order");
    tangles->add_option("graph", graph_path, "base graph file")->required();
    tangles->add_option("--r", tangle_r, "order bound")->required()->check(CLI::Range(1, 64));

    CLI::App* certify = app.add_subcommand("certify", "certified closed walk count of a graph");
    certify->add_option("graph", graph_path, "graph file")->required();
    certify->add_option("--k", certify_k, "walk length")->required()->check(CLI::Range(1, 64));
    certify->add_option("--r", certify_r, "order bound")->required()->check(CLI::Range(1, 64));

    CLI::App* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
    experiment->add_option("config", config_path, "key=value config file")->required();

    // Lets --seed/--workers/--out/--format appear after the subcommand name.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(spectrum)) return run_spectrum(global, graph_path);
        if (app.got_subcommand(cover)) return run_cover(global, graph_path, cover_n);
        if (app.got_subcommand(fund)) return run_fund_order(global, graph_path);
        if (app.got_subcommand(tangles)) return run_tangles(global, graph_path, tangle_r);
        if (app.got_subcommand(certify))
            return run_certify(global, graph_path, certify_k, certify_r);
        if (app.got_subcommand(experiment))
            return run_experiment_cmd(global, config_path, seed_opt->count() > 0,
                                      workers_opt->count() > 0, out_opt->count() > 0,
                                      format_opt->count() > 0);
    } catch (const covspec::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const covspec::resource_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 4;
    } catch (const covspec::numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
