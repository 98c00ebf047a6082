#pragma once

#include <complex>
#include <vector>

#include "covspec/graph.hpp"
#include "covspec/rational.hpp"

namespace covspec {

// Integer polynomial, coefficient of x^k at index k.  Always normalized so
// the leading coefficient is nonzero (the zero polynomial is {0}).
using IPoly = std::vector<Int>;

IPoly poly_mul(const IPoly& a, const IPoly& b);
IPoly poly_pow(const IPoly& a, int k);
IPoly poly_sub(const IPoly& a, const IPoly& b);
Int poly_eval(const IPoly& a, const Int& x);
IPoly poly_normalize(IPoly a);

// Exact determinant by fraction-free (Bareiss) elimination.
Int integer_determinant(std::vector<std::vector<Int>> m);

// Monic char poly det(xI - M), exact, by evaluation at integer points and
// Newton interpolation.
IPoly charpoly_exact(const IntegerMatrix& m);

// Same result via Hessenberg reduction modulo word-size primes and CRT; much
// faster for dimensions beyond the fraction-free range.
IPoly charpoly_modular(const IntegerMatrix& m);

// Coefficients of prod (x - r_i) from floating roots, degree k at index k.
std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots);
std::vector<std::complex<double>> complex_poly_mul(const std::vector<std::complex<double>>& a,
                                                   const std::vector<std::complex<double>>& b);

}  // namespace covspec
