#include "covspec/charpoly.hpp"

#include <cmath>
#include <cstdint>
#include <utility>

#include "covspec/errors.hpp"

namespace covspec {

IPoly poly_normalize(IPoly a) {
    while (a.size() > 1 && a.back() == 0) a.pop_back();
    if (a.empty()) a.push_back(0);
    return a;
}

IPoly poly_mul(const IPoly& a, const IPoly& b) {
    IPoly out(a.size() + b.size() - 1, Int(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return poly_normalize(std::move(out));
}

IPoly poly_pow(const IPoly& a, int k) {
    if (k < 0) throw validation_error("polynomial power must be nonnegative");
    IPoly out = {Int(1)};
    IPoly base = a;
    while (k > 0) {
        if (k & 1) out = poly_mul(out, base);
        k >>= 1;
        if (k) base = poly_mul(base, base);
    }
    return out;
}

IPoly poly_sub(const IPoly& a, const IPoly& b) {
    IPoly out(std::max(a.size(), b.size()), Int(0));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return poly_normalize(std::move(out));
}

Int poly_eval(const IPoly& a, const Int& x) {
    Int acc = 0;
    for (std::size_t i = a.size(); i-- > 0;) acc = acc * x + a[i];
    return acc;
}

Int integer_determinant(std::vector<std::vector<Int>> m) {
    const int n = static_cast<int>(m.size());
    if (n == 0) return 1;
    Int prev = 1;
    int sign = 1;
    for (int k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            int pivot = -1;
            for (int r = k + 1; r < n; ++r)
                if (m[r][k] != 0) {
                    pivot = r;
                    break;
                }
            if (pivot < 0) return 0;
            std::swap(m[k], m[pivot]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                // exact division: Bareiss one-step fraction-free update
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : Int(-m[n - 1][n - 1]);
}

IPoly charpoly_exact(const IntegerMatrix& m) {
    const int n = m.dim();
    if (n == 0) return {Int(1)};

    // det(xI - M) sampled at x = 0..n, then Newton interpolation.
    std::vector<Rat> diff(n + 1);
    for (int x = 0; x <= n; ++x) {
        std::vector<std::vector<Int>> a(n, std::vector<Int>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[i][j] = (i == j ? Int(x) : Int(0)) - Int(m.at(i, j));
        diff[x] = Rat(integer_determinant(std::move(a)));
    }
    for (int level = 1; level <= n; ++level)
        for (int j = n; j >= level; --j) diff[j] = (diff[j] - diff[j - 1]) / level;
    // diff[j] is now the divided difference over points 0..j
    std::vector<Rat> coeffs(n + 1, Rat(0));
    std::vector<Rat> basis = {Rat(1)};  // prod_{t<j} (x - t)
    for (int j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i < basis.size(); ++i) coeffs[i] += diff[j] * basis[i];
        if (j < n) {
            basis.push_back(Rat(0));
            for (std::size_t i = basis.size() - 1; i > 0; --i)
                basis[i] = basis[i - 1] - Rat(j) * basis[i];
            basis[0] = -Rat(j) * basis[0];
        }
    }
    IPoly out(n + 1);
    for (int i = 0; i <= n; ++i) {
        if (denominator(coeffs[i]) != 1)
            throw numeric_error("characteristic polynomial interpolation is not integral", 0);
        out[i] = numerator(coeffs[i]);
    }
    if (out.back() != 1)
        throw numeric_error("characteristic polynomial is not monic", 0);
    return out;
}

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<u128>(a) * b % p); }

u64 powmod(u64 a, u64 e, u64 p) {
    u64 r = 1;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod(r, a, p);
        a = mulmod(a, a, p);
        e >>= 1;
    }
    return r;
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

// Char poly of m reduced mod p, coefficients in [0, p).
std::vector<u64> charpoly_mod(const IntegerMatrix& m, u64 p) {
    const int n = m.dim();
    std::vector<std::vector<u64>> h(n, std::vector<u64>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            long long v = m.at(i, j) % static_cast<long long>(p);
            if (v < 0) v += static_cast<long long>(p);
            h[i][j] = static_cast<u64>(v);
        }

    // similarity reduction to upper Hessenberg form
    for (int col = 0; col + 2 < n; ++col) {
        int pivot = -1;
        for (int r = col + 1; r < n; ++r)
            if (h[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        if (pivot != col + 1) {
            std::swap(h[pivot], h[col + 1]);
            for (int i = 0; i < n; ++i) std::swap(h[i][pivot], h[i][col + 1]);
        }
        u64 inv = powmod(h[col + 1][col], p - 2, p);
        for (int r = col + 2; r < n; ++r) {
            if (h[r][col] == 0) continue;
            u64 f = mulmod(h[r][col], inv, p);
            for (int j = col; j < n; ++j) {
                u64 sub = mulmod(f, h[col + 1][j], p);
                h[r][j] = h[r][j] >= sub ? h[r][j] - sub : h[r][j] + p - sub;
            }
            for (int i = 0; i < n; ++i) {
                h[i][col + 1] = (h[i][col + 1] + mulmod(f, h[i][r], p)) % p;
            }
        }
    }

    // char polys of leading blocks by last-column expansion
    std::vector<std::vector<u64>> cp(n + 1);
    cp[0] = {1};
    for (int k = 1; k <= n; ++k) {
        std::vector<u64>& out = cp[k];
        out.assign(k + 1, 0);
        const std::vector<u64>& prev = cp[k - 1];
        u64 diag = h[k - 1][k - 1];
        for (int i = 0; i < k; ++i) {
            out[i + 1] = (out[i + 1] + prev[i]) % p;
            u64 sub = mulmod(diag, prev[i], p);
            out[i] = out[i] >= sub ? out[i] - sub : out[i] + p - sub;
        }
        u64 prod = 1;
        for (int i = k - 1; i >= 1; --i) {
            prod = mulmod(prod, h[i][i - 1], p);
            if (prod == 0) break;
            u64 c = mulmod(h[i - 1][k - 1], prod, p);
            if (c == 0) continue;
            const std::vector<u64>& pi = cp[i - 1];
            for (int j = 0; j < i; ++j) {
                u64 sub = mulmod(c, pi[j], p);
                out[j] = out[j] >= sub ? out[j] - sub : out[j] + p - sub;
            }
        }
    }
    return cp[n];
}

}  // namespace

IPoly charpoly_modular(const IntegerMatrix& m) {
    const int n = m.dim();
    if (n == 0) return {Int(1)};

    // coefficient bound: |e_j(eigenvalues)| <= C(n,j) rho^j with rho <= row-sum norm
    double rho = 1.0;
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += std::abs(static_cast<double>(m.at(i, j)));
        rho = std::max(rho, s);
    }
    double bound_bits = n * (1.0 + std::log2(rho)) + 4;

    std::vector<u64> primes;
    double have_bits = 0;
    u64 candidate = (1ull << 62) - 1;
    while (have_bits < bound_bits) {
        while (!is_prime_u64(candidate)) candidate -= 2;
        primes.push_back(candidate);
        have_bits += 61.9;
        candidate -= 2;
    }

    std::vector<std::vector<u64>> residues;
    residues.reserve(primes.size());
    for (u64 p : primes) residues.push_back(charpoly_mod(m, p));

    IPoly out(n + 1);
    for (int j = 0; j <= n; ++j) {
        Int value = residues[0][j];
        Int modulus = primes[0];
        for (std::size_t i = 1; i < primes.size(); ++i) {
            u64 p = primes[i];
            u64 cur = static_cast<u64>(value % p);
            u64 target = residues[i][j];
            u64 diff = target >= cur ? target - cur : target + p - cur;
            u64 minv = powmod(static_cast<u64>(modulus % p), p - 2, p);
            u64 t = mulmod(diff, minv, p);
            value += modulus * t;
            modulus *= p;
        }
        if (value * 2 > modulus) value -= modulus;
        out[j] = value;
    }
    if (out.back() != 1) throw numeric_error("modular characteristic polynomial is not monic", 0);
    return out;
}

std::vector<std::complex<double>> complex_poly_mul(const std::vector<std::complex<double>>& a,
                                                   const std::vector<std::complex<double>>& b) {
    std::vector<std::complex<double>> out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> out = {1.0};
    for (const auto& r : roots) out = complex_poly_mul(out, {-r, 1.0});
    return out;
}

}  // namespace covspec
