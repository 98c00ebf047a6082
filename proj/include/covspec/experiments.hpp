#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covspec/graph.hpp"

namespace covspec {

// Monte Carlo experiment configuration, read from a flat key=value file.
// Recognized keys: experiment, base, n_grid, k_grid, r, eps, gamma, trials,
// seed, workers, out, format.  Grids are comma-separated integers; `base`
// names a graph file that is loaded eagerly.  Unknown and duplicate keys are
// rejected.
struct ExperimentConfig {
    std::string experiment;
    std::string base_path;
    Graph base;
    std::vector<int> n_grid;
    std::vector<int> k_grid;
    int r = 2;
    double eps = 0.1;
    double gamma = 0.5;
    long long trials = 1;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out;
    std::string format = "csv";
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Hash of the semantic payload only (experiment, base graph content, grids,
// r, eps, gamma, trials, seed).  Worker count and output routing are
// excluded: they must not affect results.
std::string experiment_config_hash(const ExperimentConfig& cfg);

// One statistic for one grid cell.  Rows that do not depend on n or k leave
// the corresponding field 0; `seed` is the master seed of the run.
struct ExperimentRow {
    std::string experiment;
    int n = 0;
    int k = 0;
    std::string statistic;
    double value = 0.0;
    double stderr_value = 0.0;
    long long trials = 0;
    std::uint64_t seed = 0;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    std::uint64_t seed = 0;
    std::string config_hash;
};

// Mean non-backtracking trace of random degree-n covers per (n, k) cell,
// plus the base trace per k and the normalized gap |mean - base| / base.
ExperimentResult run_trace_expansion(const ExperimentConfig& cfg);

// Same sampling, but counts only closed walks whose traversed subgraph is a
// cycle.  Requires a base of order >= 1.
ExperimentResult run_loop_count(const ExperimentConfig& cfg);

// Fraction of covers of a d-regular base whose new adjacency spectral
// radius exceeds 2*sqrt(d-1) + eps, with a log-log slope over the n grid
// when at least three cells have a positive fraction.
ExperimentResult run_alon_fraction(const ExperimentConfig& cfg);

// Fraction of covers containing a strict tangle of order < r, with the same
// slope convention.
ExperimentResult run_tangle_scaling(const ExperimentConfig& cfg);

// Exhaustive small-cover statistics: joint frequency of {no component
// smaller than r} and {a non-Perron adjacency eigenvalue of modulus
// >= d - eps}, plus pass rates for the non-real Hashimoto modulus check and
// the spreader separation bound at gamma.  Total graphs are capped at 20
// vertices.
ExperimentResult run_spreading(const ExperimentConfig& cfg);

// Dispatches on cfg.experiment.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Header experiment,n,k,statistic,value,stderr,trials,seed.  Doubles are
// printed with %.17g so equal runs are equal bytes.
std::string experiment_to_csv(const ExperimentResult& result);
std::string experiment_to_json(const ExperimentResult& result);

// Least-squares slope of y against x; requires at least two points.
double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace covspec
