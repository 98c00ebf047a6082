#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "covspec/errors.hpp"
#include "covspec/experiments.hpp"
#include "covspec/graph.hpp"
#include "covspec/graph_io.hpp"

using namespace covspec;

namespace {

std::string graph_file(const std::string& name, const Graph& g) {
    save_graph_file(g, name);
    return name;
}

ExperimentConfig base_config(const std::string& experiment, const std::string& path) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.base_path = path;
    cfg.base = load_graph_file(path);
    return cfg;
}

const ExperimentRow& find_row(const ExperimentResult& r, const std::string& statistic, int n,
                              int k) {
    for (const ExperimentRow& row : r.rows)
        if (row.statistic == statistic && row.n == n && row.k == k) return row;
    throw std::runtime_error("missing row " + statistic);
}

}  // namespace

TEST_CASE("experiment config parsing") {
    std::string path = graph_file("exp_cfg_w2.graph", bouquet_of_whole_loops(2));
    std::string text =
        "# comment line\n"
        "experiment = trace_expansion\n"
        "base = " + path + "\n"
        "\n"
        "n_grid = 16, 32\n"
        "k_grid = 2,3\n"
        "r = 3\n"
        "eps = 0.25\n"
        "gamma = 0.125\n"
        "trials = 40\n"
        "seed = 12345\n"
        "workers = 4\n"
        "out = result.csv\n"
        "format = json\n";
    ExperimentConfig cfg = parse_experiment_config(text);
    CHECK(cfg.experiment == "trace_expansion");
    CHECK(cfg.base_path == path);
    CHECK(cfg.base.vertex_count() == 1);
    CHECK(cfg.base.directed_edge_count() == 4);
    CHECK(cfg.n_grid == std::vector<int>{16, 32});
    CHECK(cfg.k_grid == std::vector<int>{2, 3});
    CHECK(cfg.r == 3);
    CHECK(cfg.eps == doctest::Approx(0.25));
    CHECK(cfg.gamma == doctest::Approx(0.125));
    CHECK(cfg.trials == 40);
    CHECK(cfg.seed == 12345);
    CHECK(cfg.workers == 4);
    CHECK(cfg.out == "result.csv");
    CHECK(cfg.format == "json");

    ExperimentConfig minimal =
        parse_experiment_config("experiment = spreading\nbase = " + path + "\n");
    CHECK(minimal.r == 2);
    CHECK(minimal.eps == doctest::Approx(0.1));
    CHECK(minimal.gamma == doctest::Approx(0.5));
    CHECK(minimal.trials == 1);
    CHECK(minimal.seed == 1);
    CHECK(minimal.workers == 1);
    CHECK(minimal.format == "csv");
    CHECK(minimal.n_grid.empty());

    std::string good = "experiment = spreading\nbase = " + path + "\n";
    CHECK_THROWS_AS(parse_experiment_config(good + "mystery = 1\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "seed = 1\nseed = 2\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config("base = " + path + "\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config("experiment = spreading\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "n_grid = 4,x\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "n_grid = 0\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "trials = 0\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "format = xml\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "gamma = -1\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config(good + "just a line\n"), validation_error);
    CHECK_THROWS_AS(parse_experiment_config("experiment = x\nbase = missing_file.graph\n"),
                    validation_error);
    CHECK_THROWS_AS(load_experiment_config("no_such_config.cfg"), validation_error);
}

TEST_CASE("config hash covers the semantic payload only") {
    std::string path = graph_file("exp_hash_w2.graph", bouquet_of_whole_loops(2));
    std::string body = "experiment = tangle_scaling\nbase = " + path +
                       "\nn_grid = 8\ntrials = 5\nseed = 7\n";
    ExperimentConfig a = parse_experiment_config(body + "workers = 1\n");
    ExperimentConfig b = parse_experiment_config(body + "workers = 8\nout = elsewhere.csv\n");
    CHECK(experiment_config_hash(a) == experiment_config_hash(b));
    CHECK(experiment_config_hash(a).size() == 16);

    ExperimentConfig c = parse_experiment_config(
        "experiment = tangle_scaling\nbase = " + path + "\nn_grid = 8\ntrials = 5\nseed = 8\n");
    CHECK(experiment_config_hash(a) != experiment_config_hash(c));

    std::string other = graph_file("exp_hash_k4.graph", complete_graph(4));
    ExperimentConfig d = parse_experiment_config(
        "experiment = tangle_scaling\nbase = " + other + "\nn_grid = 8\ntrials = 5\nseed = 7\n");
    CHECK(experiment_config_hash(a) != experiment_config_hash(d));
}

TEST_CASE("least squares slope") {
    CHECK(ols_slope({0.0, 1.0, 2.0}, {3.0, 1.0, -1.0}) == doctest::Approx(-2.0));
    CHECK(ols_slope({1.0, 2.0}, {5.0, 5.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(ols_slope({1.0}, {2.0}), validation_error);
    CHECK_THROWS_AS(ols_slope({1.0, 1.0}, {2.0, 3.0}), validation_error);
    CHECK_THROWS_AS(ols_slope({1.0, 2.0}, {2.0}), validation_error);
}

TEST_CASE("trace expansion experiment") {
    std::string path = graph_file("exp_trace_w2.graph", bouquet_of_whole_loops(2));
    ExperimentConfig cfg = base_config("trace_expansion", path);
    cfg.n_grid = {16, 32};
    cfg.k_grid = {2, 3};
    cfg.trials = 64;
    cfg.seed = 9;

    ExperimentResult r = run_trace_expansion(cfg);
    CHECK(find_row(r, "base_trace", 0, 2).value == doctest::Approx(12.0));
    CHECK(find_row(r, "base_trace", 0, 3).value == doctest::Approx(28.0));
    for (int n : cfg.n_grid) {
        for (int k : cfg.k_grid) {
            const ExperimentRow& mean = find_row(r, "trace_mean", n, k);
            const ExperimentRow& gap = find_row(r, "normalized_gap", n, k);
            CHECK(mean.trials == 64);
            CHECK(mean.value > 0.0);
            CHECK(mean.stderr_value >= 0.0);
            double tb = find_row(r, "base_trace", 0, k).value;
            CHECK(gap.value == doctest::Approx(std::abs(mean.value - tb) / tb));
            CHECK(gap.value < 1.0);
        }
    }
    CHECK(r.config_hash == experiment_config_hash(cfg));

    // Same semantic config, different worker counts: byte-identical output.
    ExperimentConfig wide = cfg;
    wide.workers = 3;
    CHECK(experiment_to_csv(run_experiment(wide)) == experiment_to_csv(r));

    ExperimentConfig bad = cfg;
    bad.k_grid = {2, 9};
    CHECK_THROWS_AS(run_trace_expansion(bad), validation_error);
    bad = cfg;
    bad.k_grid.clear();
    CHECK_THROWS_AS(run_trace_expansion(bad), validation_error);
    bad = cfg;
    bad.trials = 0;
    CHECK_THROWS_AS(run_trace_expansion(bad), validation_error);

    std::string cyc = graph_file("exp_trace_c5.graph", cycle_graph(5));
    ExperimentConfig zero = base_config("trace_expansion", cyc);
    zero.n_grid = {16};
    zero.k_grid = {3};  // the base has no closed non-backtracking 3-walks
    zero.trials = 4;
    CHECK_THROWS_AS(run_trace_expansion(zero), validation_error);
}

TEST_CASE("loop counting experiment") {
    std::string path = graph_file("exp_loop_w2.graph", bouquet_of_whole_loops(2));
    ExperimentConfig cfg = base_config("loop_count", path);
    cfg.n_grid = {12};
    cfg.k_grid = {3};
    cfg.trials = 32;
    cfg.seed = 11;

    ExperimentResult r = run_loop_count(cfg);
    CHECK(find_row(r, "base_cycle_count", 0, 3).value == doctest::Approx(4.0));
    const ExperimentRow& loops = find_row(r, "loop_mean", 12, 3);
    CHECK(loops.value >= 0.0);

    // Both experiments derive identical trial seeds from (seed, n, k), so
    // they sample the same covers and cycles are a subset of all walks.
    ExperimentConfig tcfg = cfg;
    tcfg.experiment = "trace_expansion";
    ExperimentResult tr = run_trace_expansion(tcfg);
    CHECK(loops.value <= find_row(tr, "trace_mean", 12, 3).value);

    std::string cyc = graph_file("exp_loop_c4.graph", cycle_graph(4));
    ExperimentConfig flat = base_config("loop_count", cyc);
    flat.n_grid = {12};
    flat.k_grid = {4};
    flat.trials = 2;
    CHECK_THROWS_AS(run_loop_count(flat), validation_error);
}

TEST_CASE("alon exceedance experiment") {
    std::string path = graph_file("exp_alon_k4.graph", complete_graph(4));
    ExperimentConfig cfg = base_config("alon_fraction", path);
    cfg.n_grid = {6, 8};
    cfg.eps = 0.2;
    cfg.trials = 48;
    cfg.seed = 21;
    cfg.workers = 2;

    ExperimentResult r = run_alon_fraction(cfg);
    for (int n : cfg.n_grid) {
        const ExperimentRow& row = find_row(r, "exceedance_fraction", n, 0);
        CHECK(row.value >= 0.0);
        CHECK(row.value <= 1.0);
        CHECK(row.trials == 48);
    }

    ExperimentConfig serial = cfg;
    serial.workers = 1;
    CHECK(experiment_to_csv(run_alon_fraction(serial)) == experiment_to_csv(r));

    // An absurd margin is never exceeded, and no slope row is emitted when
    // fewer than three cells have positive fractions.
    ExperimentConfig huge = cfg;
    huge.eps = 100.0;
    huge.trials = 8;
    ExperimentResult none = run_alon_fraction(huge);
    for (const ExperimentRow& row : none.rows) {
        CHECK(row.statistic != "log_log_slope");
        if (row.statistic == "exceedance_fraction") CHECK(row.value == doctest::Approx(0.0));
    }

    // Positive control: 2*sqrt(2)+0.2 exceeds the degree bound 3, so the
    // fraction above is structurally zero; a smaller margin can be exceeded
    // (disconnected covers alone push the new radius to 3).
    ExperimentConfig tiny = cfg;
    tiny.n_grid = {2};
    tiny.eps = 0.05;
    tiny.trials = 200;
    CHECK(find_row(run_alon_fraction(tiny), "exceedance_fraction", 2, 0).value > 0.0);

    std::string cyc = graph_file("exp_alon_c5.graph", cycle_graph(5));
    ExperimentConfig degree2 = base_config("alon_fraction", cyc);
    degree2.n_grid = {6};
    degree2.trials = 2;
    CHECK_THROWS_AS(run_alon_fraction(degree2), validation_error);

    std::string irregular = graph_file("exp_alon_p3.graph", path_graph(3));
    ExperimentConfig notreg = base_config("alon_fraction", irregular);
    notreg.n_grid = {6};
    notreg.trials = 2;
    CHECK_THROWS_AS(run_alon_fraction(notreg), validation_error);
}

TEST_CASE("tangle scaling experiment") {
    std::string path = graph_file("exp_tangle_w2.graph", bouquet_of_whole_loops(2));

    // r = 1 has no strict tangles of negative order, so every fraction is 0.
    ExperimentConfig trivial = base_config("tangle_scaling", path);
    trivial.n_grid = {8, 12};
    trivial.r = 1;
    trivial.trials = 10;
    ExperimentResult none = run_tangle_scaling(trivial);
    for (const ExperimentRow& row : none.rows) {
        CHECK(row.statistic != "log_log_slope");
        if (row.statistic == "tangle_fraction") CHECK(row.value == doctest::Approx(0.0));
    }

    ExperimentConfig cfg = base_config("tangle_scaling", path);
    cfg.n_grid = {8, 12};
    cfg.r = 2;
    cfg.trials = 40;
    cfg.seed = 31;
    ExperimentResult r = run_tangle_scaling(cfg);
    for (int n : cfg.n_grid) {
        const ExperimentRow& row = find_row(r, "tangle_fraction", n, 0);
        CHECK(row.value >= 0.0);
        CHECK(row.value <= 1.0);
    }

    ExperimentConfig wide = cfg;
    wide.workers = 4;
    CHECK(experiment_to_csv(run_tangle_scaling(wide)) == experiment_to_csv(r));
}

TEST_CASE("spreading experiment") {
    std::string path = graph_file("exp_spread_k4.graph", complete_graph(4));
    ExperimentConfig cfg = base_config("spreading", path);
    cfg.n_grid = {2, 3};
    cfg.r = 2;
    cfg.gamma = 0.3;
    cfg.eps = 0.2;
    cfg.trials = 24;
    cfg.seed = 41;

    ExperimentResult r = run_spreading(cfg);
    for (int n : cfg.n_grid) {
        CHECK(find_row(r, "joint_frequency", n, 0).value >= 0.0);
        CHECK(find_row(r, "joint_frequency", n, 0).value <= 1.0);
        // Non-real non-backtracking eigenvalues of a regular graph always sit
        // on the critical circle.
        CHECK(find_row(r, "kotani_sunada_rate", n, 0).value == doctest::Approx(1.0));
        const ExperimentRow& frac = find_row(r, "spreader_fraction", n, 0);
        CHECK(frac.value >= 0.0);
        CHECK(frac.value <= 1.0);
        const ExperimentRow& sep = find_row(r, "spreader_separation_rate", n, 0);
        CHECK(sep.value >= 0.0);
        CHECK(sep.value <= 1.0);
    }

    ExperimentConfig big = cfg;
    big.n_grid = {6};  // 24 total vertices exceeds the exhaustive cap
    CHECK_THROWS_AS(run_spreading(big), validation_error);

    // Bipartite regular base: the forced -d eigenvalue must not count as a
    // spreading witness by itself.
    Graph doubled = build_graph(4, {{0, 1, false},
                                    {0, 1, false},
                                    {1, 2, false},
                                    {1, 2, false},
                                    {2, 3, false},
                                    {2, 3, false},
                                    {3, 0, false},
                                    {3, 0, false}});
    std::string bpath = graph_file("exp_spread_bip.graph", doubled);
    ExperimentConfig bip = base_config("spreading", bpath);
    bip.n_grid = {2};
    bip.trials = 16;
    bip.eps = 0.2;
    ExperimentResult br = run_spreading(bip);
    CHECK(find_row(br, "kotani_sunada_rate", 2, 0).value == doctest::Approx(1.0));
    CHECK(find_row(br, "joint_frequency", 2, 0).value >= 0.0);
}

TEST_CASE("experiment dispatch and serialization") {
    std::string path = graph_file("exp_ser_w2.graph", bouquet_of_whole_loops(2));
    ExperimentConfig cfg = base_config("tangle_scaling", path);
    cfg.n_grid = {8};
    cfg.r = 2;
    cfg.trials = 6;
    cfg.seed = 5;

    ExperimentResult r = run_experiment(cfg);
    std::string csv = experiment_to_csv(r);
    CHECK(csv.rfind("experiment,n,k,statistic,value,stderr,trials,seed\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == r.rows.size() + 1);

    nlohmann::json doc = nlohmann::json::parse(experiment_to_json(r));
    CHECK(doc["seed"] == 5);
    CHECK(doc["config_hash"] == r.config_hash);
    CHECK(doc["rows"].size() == r.rows.size());
    CHECK(doc["rows"][0]["statistic"] == r.rows[0].statistic);

    ExperimentConfig unknown = cfg;
    unknown.experiment = "mystery";
    CHECK_THROWS_AS(run_experiment(unknown), validation_error);
}
