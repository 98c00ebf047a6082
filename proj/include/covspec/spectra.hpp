#pragma once

#include <complex>
#include <string>
#include <vector>

#include "covspec/covers.hpp"
#include "covspec/graph.hpp"

#include <Eigen/Dense>

namespace covspec {

// Single tolerance used wherever eigenvalue multisets are compared.
inline constexpr double kEigenvalueMatchTol = 1e-6;

enum class SpectrumSource { adjacency, hashimoto, new_adjacency, new_hashimoto };

std::string spectrum_source_name(SpectrumSource s);

// Multiset of eigenvalues, sorted ascending by (real, imag).
struct Spectrum {
    SpectrumSource source = SpectrumSource::adjacency;
    std::vector<std::complex<double>> values;
};

struct SpectraOptions {
    int dense_cap = 4000;
    double compare_tol = kEigenvalueMatchTol;
};

void sort_values(std::vector<std::complex<double>>& values);

Spectrum adjacency_spectrum(const Graph& g, const SpectraOptions& opt = {});
Spectrum hashimoto_spectrum(const Graph& g, const SpectraOptions& opt = {});

// Greedy nearest matching of equal-size multisets within tol.
bool values_match(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
                  double tol = kEigenvalueMatchTol);
// Removes one nearest copy of each element of `base` from `full` (must match
// within tol); returns what is left.
std::vector<std::complex<double>> multiset_difference(std::vector<std::complex<double>> full,
                                                      const std::vector<std::complex<double>>& base,
                                                      double tol = kEigenvalueMatchTol);

struct PerronOptions {
    double tol = 1e-10;
    long max_iterations = 500000;
    int dense_cap = 512;
};

// Spectral radius of an entrywise-nonnegative matrix: dense solve below the
// cap, else power iteration with componentwise Collatz bounds on M + I.
double perron_frobenius_radius(const Eigen::MatrixXd& m, const PerronOptions& opt = {});

// Same quantity for the Hashimoto matrix, using the successor structure
// directly and handling components separately above the dense cap.
double hashimoto_radius(const Graph& g, const PerronOptions& opt = {});

// Max |coefficient| difference between char(H) and the vertex-size companion
// form det(x^2 I - x A + (D - I)) * (x+1)^{#half} * (x^2-1)^{#pair - #V}.
// Exact integer arithmetic when |E^dir| <= 64 (result is exactly 0 when the
// identity holds); otherwise a relative floating-point residual.
double ihara_residual(const Graph& g);

struct NewSpectrumReport {
    Spectrum new_spectrum;
    double rho_new = 0.0;
    double residual = 0.0;  // max over k<=6 of the trace-identity defect
};

NewSpectrumReport new_adjacency_spectrum(const Cover& c, const SpectraOptions& opt = {});
NewSpectrumReport new_hashimoto_spectrum(const Cover& c, const SpectraOptions& opt = {});

// Fast path for large covers: spectral radius of the adjacency operator on
// fiber-sum-zero functions, via projected power iteration on its square.
double new_adjacency_radius(const Cover& c, double tol = 1e-6, long max_iterations = 200000,
                            std::uint64_t seed = 1);

// True iff every non-real Hashimoto eigenvalue has modulus at most
// sqrt(max_degree - 1) + 1e-8.
bool kotani_sunada_check(const Graph& g, const SpectraOptions& opt = {});

// For a regular gamma-spreader, checks lambda_i^2 <= d^2 - gamma^2/(4+2gamma^2)
// for every adjacency eigenvalue except one top copy, within 1e-8.
bool spreader_separation_check(const Graph& g, double gamma, const SpectraOptions& opt = {});

// CSV with header "source,re,im".
std::string spectrum_to_csv(const Spectrum& s);

}  // namespace covspec
