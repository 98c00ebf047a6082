#include "covspec/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#define COVSPEC_X86 1
#include <immintrin.h>
#elif defined(__aarch64__)
#define COVSPEC_NEON 1
#include <arm_neon.h>
#endif

namespace covspec::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void matvec_scalar(const double* m, const double* v, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, v, cols);
}

#ifdef COVSPEC_X86

__attribute__((target("avx2,fma"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d sum2 = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

__attribute__((target("avx2,fma"))) void axpy_avx2(double alpha, const double* x, double* y,
                                                   std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

__attribute__((target("avx2,fma"))) void scale_avx2(double* x, double alpha, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

__attribute__((target("avx2,fma"))) void matvec_avx2(const double* m, const double* v, double* y,
                                                     std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(m + r * cols, v, cols);
}

#endif  // COVSPEC_X86

#ifdef COVSPEC_NEON

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double* x, double alpha, std::size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void matvec_neon(const double* m, const double* v, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(m + r * cols, v, cols);
}

#endif  // COVSPEC_NEON

struct Dispatch {
    double (*dot)(const double*, const double*, std::size_t) = dot_scalar;
    void (*axpy)(double, const double*, double*, std::size_t) = axpy_scalar;
    void (*scale)(double*, double, std::size_t) = scale_scalar;
    void (*matvec)(const double*, const double*, double*, std::size_t, std::size_t) = matvec_scalar;
    std::string name = "scalar";
};

bool set_dispatch(Dispatch& d, const std::string& name) {
    if (name == "scalar") {
        d = Dispatch{};
        return true;
    }
#ifdef COVSPEC_X86
    if (name == "avx2" && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        d = Dispatch{dot_avx2, axpy_avx2, scale_avx2, matvec_avx2, "avx2"};
        return true;
    }
#endif
#ifdef COVSPEC_NEON
    if (name == "neon") {
        d = Dispatch{dot_neon, axpy_neon, scale_neon, matvec_neon, "neon"};
        return true;
    }
#endif
    return false;
}

Dispatch make_default() {
    Dispatch d;
    if (set_dispatch(d, "avx2")) return d;
    if (set_dispatch(d, "neon")) return d;
    return Dispatch{};
}

Dispatch& dispatch() {
    static Dispatch d = make_default();
    return d;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) { return dispatch().dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { dispatch().axpy(alpha, x, y, n); }
void scale(double* x, double alpha, std::size_t n) { dispatch().scale(x, alpha, n); }
double nrm2(const double* x, std::size_t n) { return std::sqrt(dispatch().dot(x, x, n)); }

void matvec(const double* m, const double* v, double* y, std::size_t rows, std::size_t cols) {
    dispatch().matvec(m, v, y, rows, cols);
}

std::string active_variant() { return dispatch().name; }

bool force_variant(const std::string& name) { return set_dispatch(dispatch(), name); }

}  // namespace covspec::kernels
