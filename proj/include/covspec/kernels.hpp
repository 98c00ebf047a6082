#pragma once

#include <cstddef>
#include <string>

namespace covspec::kernels {

// Dense double-precision primitives behind the eigensolver and power-iteration
// paths.  A scalar reference implementation always exists; on x86 an AVX2+FMA
// variant and on arm64 a NEON variant are selected at runtime when the CPU
// supports them.  Variants agree with the reference to rounding error and are
// equivalence-tested.

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double nrm2(const double* x, std::size_t n);

// y = m * v for row-major m with shape rows x cols.
void matvec(const double* m, const double* v, double* y, std::size_t rows, std::size_t cols);

// Name of the active variant: "avx2", "neon", or "scalar".
std::string active_variant();

// Force a variant by name for testing; returns false when unavailable.
bool force_variant(const std::string& name);

}  // namespace covspec::kernels
