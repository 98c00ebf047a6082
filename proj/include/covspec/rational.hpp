#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace covspec {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline double to_double(const Int& i) { return i.convert_to<double>(); }

inline Int int_pow(Int base, unsigned long e) {
    Int r = 1;
    while (e) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

inline Rat rat_pow(const Rat& base, long e) {
    if (e < 0) {
        Rat p = rat_pow(base, -e);
        return Rat(1) / p;
    }
    Rat r = 1, b = base;
    unsigned long k = static_cast<unsigned long>(e);
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

inline Int factorial(long n) {
    Int r = 1;
    for (long i = 2; i <= n; ++i) r *= i;
    return r;
}

// falling factorial n (n-1) ... (n-k+1)
inline Int falling_factorial(long n, long k) {
    Int r = 1;
    for (long i = 0; i < k; ++i) r *= Int(n - i);
    return r;
}

inline Int binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    Int r = 1;
    for (long i = 1; i <= k; ++i) {
        r *= Int(n - k + i);
        r /= i;
    }
    return r;
}

// product of the odd numbers m (m-2) ... down to 1; m must be odd and >= -1
inline Int odd_factorial(long m) {
    Int r = 1;
    for (long i = m; i >= 3; i -= 2) r *= i;
    return r;
}

}  // namespace covspec
