#ifndef SYMK_SMALLOPS_HPP
#define SYMK_SMALLOPS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace symk {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// Arithmetic modulo m, m < 2^63.  All inputs reduced mod m on entry.
inline u64 addmod(u64 a, u64 b, u64 m) { return (a + b) % m; }
inline u64 submod(u64 a, u64 b, u64 m) { return (a + m - b % m) % m; }
inline u64 mulmod(u64 a, u64 b, u64 m) { return (u64)((u128)a * b % m); }

inline u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

inline u64 gcd_u64(u64 a, u64 b) {
    while (b) { u64 t = a % b; a = b; b = t; }
    return a;
}

// Inverse of a modulo m for gcd(a, m) = 1 (m need not be prime).
inline u64 invmod(u64 a, u64 m) {
    i64 t = 0, nt = 1;
    i64 r = (i64)m, nr = (i64)(a % m);
    while (nr != 0) {
        i64 q = r / nr;
        i64 tmp = t - q * nt; t = nt; nt = tmp;
        tmp = r - q * nr; r = nr; nr = tmp;
    }
    if (r != 1) throw std::domain_error("invmod: not invertible");
    if (t < 0) t += (i64)m;
    return (u64)t;
}

inline u64 ipow_u64(u64 b, unsigned e) {
    u64 r = 1;
    while (e--) r *= b;
    return r;
}

// Largest k with p^k | x; returns cap for x == 0.
inline int padic_val_u64(u64 x, u64 p, int cap) {
    if (x == 0) return cap;
    int v = 0;
    while (v < cap && x % p == 0) { x /= p; ++v; }
    return v;
}

inline bool is_small_prime(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> fs;
    for (u64 d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            fs.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fs.push_back(n);
    return fs;
}

// Deterministic 64-bit generator (splitmix64), used everywhere a seeded
// stream is needed so reports are byte-identical across platforms.
struct Rng {
    u64 state;
    explicit Rng(u64 seed) : state(seed) {}
    u64 next() {
        u64 z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0, n)
    u64 below(u64 n) { return n ? next() % n : 0; }
    i64 range(i64 lo, i64 hi) { return lo + (i64)below((u64)(hi - lo + 1)); }
};

// FNV-1a over a string; stable content hash for descriptor identity.
inline std::string fnv1a_hex(const std::string& s) {
    u64 h = 1469598103934665603ULL;
    for (unsigned char c : s) { h ^= c; h *= 1099511628211ULL; }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) { buf[i] = hex[h & 15]; h >>= 4; }
    buf[16] = 0;
    return std::string(buf);
}

// Exact rational with small terms; enough for epsilon bookkeeping.
struct Rat {
    i64 num = 0, den = 1;
    Rat() = default;
    Rat(i64 n, i64 d) : num(n), den(d) {
        if (den == 0) throw std::domain_error("Rat: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        i64 g = (i64)gcd_u64((u64)(num < 0 ? -num : num), (u64)den);
        if (g > 1) { num /= g; den /= g; }
    }
    bool is_integer() const { return den == 1; }
    i64 floor() const { return num >= 0 ? num / den : -((-num + den - 1) / den); }
    i64 ceil() const { return -Rat(-num, den).floor(); }
    bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
    bool operator<(const Rat& o) const { return (i64)num * o.den < (i64)o.num * den; }
};

} // namespace symk

#endif
