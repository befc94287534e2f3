#include "symk/coeffs.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>

namespace symk {

// ---------------------------------------------------------------------------
// polynomials over F_p as vector<u64>, ascending coefficients
// ---------------------------------------------------------------------------
namespace {

using UPoly = std::vector<u64>;

UPoly utrim(UPoly v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
    return v;
}

int udeg(const UPoly& a) { return (int)a.size() - 1; }

UPoly uadd(const UPoly& a, const UPoly& b, u64 p) {
    UPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < r.size(); ++i) {
        u64 x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
        r[i] = addmod(x, y, p);
    }
    return utrim(r);
}

UPoly usub(const UPoly& a, const UPoly& b, u64 p) {
    UPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < r.size(); ++i) {
        u64 x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
        r[i] = submod(x, y, p);
    }
    return utrim(r);
}

UPoly umul(const UPoly& a, const UPoly& b, u64 p) {
    if (a.empty() || b.empty()) return {};
    UPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = addmod(r[i + j], mulmod(a[i], b[j], p), p);
    return utrim(r);
}

// remainder of a modulo monic m
UPoly umod(UPoly a, const UPoly& m, u64 p) {
    int dm = udeg(m);
    while (udeg(a) >= dm) {
        u64 c = a.back();
        int shift = udeg(a) - dm;
        if (c != 0)
            for (int i = 0; i <= dm; ++i)
                a[i + shift] = submod(a[i + shift], mulmod(c, m[i], p), p);
        a = utrim(a);
        if (a.empty()) break;
    }
    return a;
}

UPoly umulmod(const UPoly& a, const UPoly& b, const UPoly& m, u64 p) {
    return umod(umul(a, b, p), m, p);
}

UPoly upowmod(UPoly a, u64 e, const UPoly& m, u64 p) {
    UPoly r{1};
    a = umod(std::move(a), m, p);
    while (e) {
        if (e & 1) r = umulmod(r, a, m, p);
        a = umulmod(a, a, m, p);
        e >>= 1;
    }
    return r;
}

UPoly ugcd(UPoly a, UPoly b, u64 p) {
    while (!b.empty()) {
        // make b monic for umod
        u64 lc = b.back();
        UPoly bm = b;
        if (lc != 1) {
            u64 ilc = invmod(lc, p);
            for (auto& c : bm) c = mulmod(c, ilc, p);
        }
        UPoly r = umod(a, bm, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty() && a.back() != 1) {
        u64 il = invmod(a.back(), p);
        for (auto& c : a) c = mulmod(c, il, p);
    }
    return a;
}

bool uirreducible(const UPoly& f, u64 p) {
    int n = udeg(f);
    if (n <= 0) return false;
    if (n == 1) return true;
    // x^(p^n) == x mod f and gcd(x^(p^(n/q)) - x, f) = 1 for prime q | n
    UPoly x{0, 1};
    UPoly xq = x;
    // repeated Frobenius: xq_i = x^(p^i) mod f
    std::vector<UPoly> frob(n + 1);
    frob[0] = x;
    for (int i = 1; i <= n; ++i) frob[i] = upowmod(frob[i - 1], p, f, p);
    if (utrim(usub(frob[n], x, p)) != UPoly{}) return false;
    for (u64 q : prime_factors((u64)n)) {
        UPoly d = usub(frob[n / q], x, p);
        UPoly g = ugcd(f, d, p);
        if (udeg(g) != 0) return false;
    }
    return true;
}

// minimal polynomial of beta in F_p[x]/(mod): product of (X - beta^(p^k))
UPoly uminpoly(const UPoly& beta, const UPoly& mod, u64 p) {
    std::vector<UPoly> conj;
    UPoly b = umod(beta, mod, p);
    while (true) {
        conj.push_back(b);
        b = upowmod(b, p, mod, p);
        if (b == conj.front()) break;
        if ((int)conj.size() > udeg(mod)) throw std::logic_error("uminpoly runaway");
    }
    // multiply out (X - c) over F_p[x]/(mod); coefficients must land in F_p
    std::vector<UPoly> coeffs{ {UPoly{1}} }; // poly in X with F_{p^n} coeffs
    for (const auto& c : conj) {
        std::vector<UPoly> next(coeffs.size() + 1);
        for (size_t i = 0; i < coeffs.size(); ++i) {
            next[i + 1] = uadd(i + 1 < next.size() ? next[i + 1] : UPoly{}, coeffs[i], p);
            next[i + 1] = utrim(next[i + 1]);
        }
        // subtract c * coeffs[i] at position i
        for (size_t i = 0; i < coeffs.size(); ++i)
            next[i] = usub(i < next.size() ? next[i] : UPoly{}, umulmod(c, coeffs[i], mod, p), p);
        next.back() = UPoly{1};
        coeffs = std::move(next);
    }
    UPoly out(coeffs.size(), 0);
    for (size_t i = 0; i < coeffs.size(); ++i) {
        const UPoly& ci = coeffs[i];
        if (udeg(ci) > 0) throw std::logic_error("uminpoly: coefficient not in F_p");
        out[i] = ci.empty() ? 0 : ci[0];
    }
    return utrim(out);
}

// Gaussian solve A x = b over F_p; A given column-major (cols of length n).
// Returns any solution, or nullopt.
std::optional<std::vector<u64>> fp_solve(std::vector<std::vector<u64>> cols,
                                         std::vector<u64> b, u64 p) {
    size_t n = b.size(), m = cols.size();
    // build row-major augmented matrix
    std::vector<std::vector<u64>> a(n, std::vector<u64>(m + 1, 0));
    for (size_t j = 0; j < m; ++j)
        for (size_t i = 0; i < n; ++i) a[i][j] = cols[j][i] % p;
    for (size_t i = 0; i < n; ++i) a[i][m] = b[i] % p;

    std::vector<int> pivot_col(n, -1);
    size_t row = 0;
    for (size_t col = 0; col < m && row < n; ++col) {
        size_t sel = row;
        while (sel < n && a[sel][col] == 0) ++sel;
        if (sel == n) continue;
        std::swap(a[sel], a[row]);
        u64 inv = invmod(a[row][col], p);
        for (size_t j = col; j <= m; ++j) a[row][j] = mulmod(a[row][j], inv, p);
        for (size_t i = 0; i < n; ++i) {
            if (i != row && a[i][col] != 0) {
                u64 f = a[i][col];
                for (size_t j = col; j <= m; ++j)
                    a[i][j] = submod(a[i][j], mulmod(f, a[row][j], p), p);
            }
        }
        pivot_col[row] = (int)col;
        ++row;
    }
    for (size_t i = row; i < n; ++i)
        if (a[i][m] != 0) return std::nullopt;
    std::vector<u64> x(m, 0);
    for (size_t i = 0; i < row; ++i) x[pivot_col[i]] = a[i][m];
    return x;
}

} // namespace

// ---------------------------------------------------------------------------
// deterministic compatible tower (norm-compatible generators)
// ---------------------------------------------------------------------------

u64 ResidueField::least_primitive_root(u64 p) {
    if (p == 2) return 1;
    auto qs = prime_factors(p - 1);
    for (u64 g = 2; g < p; ++g) {
        bool ok = true;
        for (u64 q : qs)
            if (powmod(g, (p - 1) / q, p) == 1) { ok = false; break; }
        if (ok) return g;
    }
    throw std::logic_error("no primitive root");
}

struct ResidueField::ClosureCache {
    std::mutex mu;
    std::map<int, std::vector<u64>> moduli;                 // degree -> defining poly
    std::map<std::pair<int, int>, std::vector<u64>> gen_img; // (m,n) -> image of gen_m in F_{p^n}
};

ResidueField::ClosureCache& ResidueField::closure_cache(u64 p) {
    static std::mutex top_mu;
    static std::map<u64, std::unique_ptr<ClosureCache>> caches;
    std::lock_guard<std::mutex> lk(top_mu);
    auto& c = caches[p];
    if (!c) c = std::make_unique<ClosureCache>();
    return *c;
}

// First (in base-p counter order on the lower coefficients) monic polynomial of
// degree n that is irreducible, has a primitive root of F_{p^n} as its root,
// and whose root is norm-compatible with the chosen generators of all proper
// subfields.  Same compatibility discipline as Conway polynomials; the
// enumeration order is ours and is fixed once and for all.
std::vector<u64> ResidueField::tower_modulus(u64 p, int n) {
    if (n > 16) throw Unsupported("finite tower degree cap exceeded");
    auto& cache = closure_cache(p);
    {
        std::lock_guard<std::mutex> lk(cache.mu);
        auto it = cache.moduli.find(n);
        if (it != cache.moduli.end()) return it->second;
    }
    if (n == 1) {
        u64 g = least_primitive_root(p);
        UPoly f{submod(0, g, p), 1}; // x - g
        std::lock_guard<std::mutex> lk(cache.mu);
        cache.moduli.emplace(1, f);
        return f;
    }
    // build subfields first
    std::vector<int> divs;
    for (int d = 1; d < n; ++d)
        if (n % d == 0) divs.push_back(d);
    std::map<int, UPoly> sub_mod;
    for (int d : divs) sub_mod[d] = tower_modulus(p, d);

    u64 order = ipow_u64(p, (unsigned)n) - 1;
    auto qs = prime_factors(order);

    u64 total = ipow_u64(p, (unsigned)n);
    for (u64 counter = 0; counter < total; ++counter) {
        UPoly f(n + 1, 0);
        f[n] = 1;
        u64 c = counter;
        for (int i = 0; i < n; ++i) { f[i] = c % p; c /= p; }
        if (f[0] == 0) continue; // x | f
        if (!uirreducible(f, p)) continue;
        UPoly x{0, 1};
        bool primitive = true;
        for (u64 q : qs) {
            UPoly e = upowmod(x, order / q, f, p);
            if (e == UPoly{1}) { primitive = false; break; }
        }
        if (!primitive) continue;
        bool compatible = true;
        for (int d : divs) {
            u64 sub_order = ipow_u64(p, (unsigned)d) - 1;
            UPoly img = upowmod(x, order / sub_order, f, p);
            if (uminpoly(img, f, p) != sub_mod[d]) { compatible = false; break; }
        }
        if (!compatible) continue;
        std::lock_guard<std::mutex> lk(cache.mu);
        cache.moduli.emplace(n, f);
        return f;
    }
    throw std::logic_error("tower_modulus: no compatible polynomial found");
}

// ---------------------------------------------------------------------------
// field factories
// ---------------------------------------------------------------------------
namespace {
std::mutex g_field_mu;
std::map<u64, FieldPtr> g_primes;
std::map<u64, FieldPtr> g_closures;
std::map<std::pair<u64, int>, FieldPtr> g_towers;
} // namespace

FieldPtr ResidueField::prime(u64 p) {
    std::lock_guard<std::mutex> lk(g_field_mu);
    auto& f = g_primes[p];
    if (!f) {
        auto r = std::make_shared<ResidueField>();
        r->p = p;
        r->kind = Kind::Prime;
        r->degree = 1;
        f = r;
    }
    return f;
}

FieldPtr ResidueField::finite(u64 p, int n) {
    if (n == 1) return prime(p);
    {
        std::lock_guard<std::mutex> lk(g_field_mu);
        auto it = g_towers.find({p, n});
        if (it != g_towers.end()) return it->second;
    }
    auto mod = tower_modulus(p, n);
    auto r = std::make_shared<ResidueField>();
    r->p = p;
    r->kind = Kind::Finite;
    r->degree = n;
    r->modulus = mod;
    r->gen_name = "w" + std::to_string(n);
    r->tower_compatible = true;
    std::lock_guard<std::mutex> lk(g_field_mu);
    auto& slot = g_towers[{p, n}];
    if (!slot) slot = r;
    return slot;
}

FieldPtr ResidueField::finite_custom(u64 p, std::vector<u64> mod, std::string gen) {
    mod = utrim(std::move(mod));
    if (udeg(mod) < 1 || mod.back() != 1)
        throw ConfigError("finite_custom: modulus must be monic of degree >= 1");
    for (auto& c : mod) c %= p;
    if (!uirreducible(mod, p))
        throw ConfigError("finite_custom: modulus is reducible");
    auto r = std::make_shared<ResidueField>();
    r->p = p;
    r->kind = Kind::Finite;
    r->degree = udeg(mod);
    r->modulus = std::move(mod);
    r->gen_name = std::move(gen);
    r->tower_compatible = false;
    return r;
}

FieldPtr ResidueField::closure(u64 p) {
    std::lock_guard<std::mutex> lk(g_field_mu);
    auto& f = g_closures[p];
    if (!f) {
        auto r = std::make_shared<ResidueField>();
        r->p = p;
        r->kind = Kind::Closure;
        r->degree = 0;
        f = r;
    }
    return f;
}

FieldPtr ResidueField::rational_function(FieldPtr constants, std::string v) {
    if (!constants) throw ConfigError("rational_function: missing constants field");
    // nested rational carriers are allowed (used by the characteristic-2
    // module); the Frobenius helpers only support perfect constants
    auto r = std::make_shared<ResidueField>();
    r->p = constants->p;
    r->kind = Kind::RationalFunction;
    r->constants = std::move(constants);
    r->var = std::move(v);
    return r;
}

bool same_field(const FieldPtr& a, const FieldPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->p != b->p || a->kind != b->kind) return false;
    switch (a->kind) {
        case ResidueField::Kind::Prime: return true;
        case ResidueField::Kind::Closure: return true;
        case ResidueField::Kind::Finite:
            return a->modulus == b->modulus;
        case ResidueField::Kind::RationalFunction:
            return a->var == b->var && same_field(a->constants, b->constants);
    }
    return false;
}

std::string ResidueField::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Prime: os << "F" << p; break;
        case Kind::Finite: os << "F" << ipow_u64(p, (unsigned)degree) << "<" << gen_name << ">"; break;
        case Kind::Closure: os << "F" << p << "bar"; break;
        case Kind::RationalFunction: os << constants->describe() << "(" << var << ")"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// element construction
// ---------------------------------------------------------------------------
namespace {

ResidueElem make_prime_elem(FieldPtr f, u64 v) {
    ResidueElem e;
    e.field = std::move(f);
    e.coords = {v % e.field->p};
    return e;
}

ResidueElem make_finite_elem(FieldPtr f, std::vector<u64> coords) {
    ResidueElem e;
    e.field = std::move(f);
    coords.resize((size_t)e.field->degree, 0);
    for (auto& c : coords) c %= e.field->p;
    e.coords = std::move(coords);
    return e;
}

ResidueElem make_rat_elem(FieldPtr f, poly::CPoly n, poly::CPoly d);

// closure element in minimal subfield form
ResidueElem make_closure_elem(FieldPtr f, int m, std::vector<u64> coords) {
    u64 p = f->p;
    coords.resize((size_t)m, 0);
    for (auto& c : coords) c %= p;
    // minimize: find least divisor d of m with elem in F_{p^d}
    const UPoly& mod_m = ResidueField::tower_modulus(p, m);
    UPoly val = utrim(coords);
    for (int d = 1; d <= m; ++d) {
        if (m % d != 0) continue;
        UPoly fr = val;
        for (int i = 0; i < d; ++i) fr = upowmod(fr, p, mod_m, p);
        if (fr == val) {
            if (d < m) {
                // project: solve for coords in F_{p^d} via the embedding
                auto& cache = ResidueField::closure_cache(p);
                UPoly img;
                {
                    std::lock_guard<std::mutex> lk(cache.mu);
                    auto it = cache.gen_img.find({d, m});
                    if (it != cache.gen_img.end()) img = it->second;
                }
                if (img.empty()) {
                    ResidueField::tower_modulus(p, d); // ensure built
                    u64 big = ipow_u64(p, (unsigned)m) - 1;
                    u64 small = ipow_u64(p, (unsigned)d) - 1;
                    img = upowmod(UPoly{0, 1}, big / small, mod_m, p);
                    std::lock_guard<std::mutex> lk(cache.mu);
                    cache.gen_img.emplace(std::make_pair(d, m), img);
                }
                // columns: img^j for j < d, expressed in F_{p^m} coords
                std::vector<std::vector<u64>> cols;
                UPoly acc{1};
                for (int j = 0; j < d; ++j) {
                    std::vector<u64> col(acc.begin(), acc.end());
                    col.resize((size_t)m, 0);
                    cols.push_back(col);
                    acc = umulmod(acc, img, mod_m, p);
                }
                std::vector<u64> b(val.begin(), val.end());
                b.resize((size_t)m, 0);
                auto sol = fp_solve(cols, b, p);
                if (!sol) throw std::logic_error("closure minimize: projection failed");
                return make_closure_elem(std::move(f), d, *sol);
            }
            break;
        }
    }
    ResidueElem e;
    e.field = std::move(f);
    e.sub_degree = m;
    e.coords = std::move(coords);
    return e;
}

poly::CPoly one_poly(const FieldPtr& constants) {
    return {constants->one()};
}

ResidueElem make_rat_elem(FieldPtr f, poly::CPoly n, poly::CPoly d) {
    using namespace poly;
    n = trim(std::move(n));
    d = trim(std::move(d));
    if (is_zero(d)) throw DivisionByZero("rational function with zero denominator");
    if (is_zero(n)) {
        ResidueElem e;
        e.field = std::move(f);
        e.den = one_poly(e.field->constants);
        return e;
    }
    CPoly g = gcd(n, d);
    if (deg(g) > 0) {
        n = divrem(n, g).first;
        d = divrem(d, g).first;
    }
    // make denominator monic
    ResidueElem lc = d.back();
    if (!lc.is_one()) {
        ResidueElem il = lc.inv();
        n = scale(n, il);
        d = scale(d, il);
    }
    ResidueElem e;
    e.field = std::move(f);
    e.num = std::move(n);
    e.den = std::move(d);
    return e;
}

} // namespace

ResidueElem ResidueField::zero() const { return from_int(0); }
ResidueElem ResidueField::one() const { return from_int(1); }

ResidueElem ResidueField::from_int(i64 n) const {
    auto self = shared_from_this();
    i64 r = n % (i64)p;
    if (r < 0) r += (i64)p;
    switch (kind) {
        case Kind::Prime: return make_prime_elem(self, (u64)r);
        case Kind::Finite: return make_finite_elem(self, {(u64)r});
        case Kind::Closure: return make_closure_elem(self, 1, {(u64)r});
        case Kind::RationalFunction: {
            ResidueElem c = constants->from_int(n);
            poly::CPoly num = c.is_zero() ? poly::CPoly{} : poly::CPoly{c};
            return make_rat_elem(self, num, one_poly(constants));
        }
    }
    throw std::logic_error("from_int");
}

ResidueElem ResidueField::generator() const {
    auto self = shared_from_this();
    switch (kind) {
        case Kind::Prime: throw Unsupported("prime field has no generator");
        case Kind::Finite: return make_finite_elem(self, {0, 1});
        case Kind::Closure: throw Unsupported("closure: request a specific subfield generator");
        case Kind::RationalFunction:
            return make_rat_elem(self, {constants->zero(), constants->one()}, one_poly(constants));
    }
    throw std::logic_error("generator");
}

// ---------------------------------------------------------------------------
// element predicates / printing / order
// ---------------------------------------------------------------------------

bool ResidueElem::is_zero() const {
    if (!field) throw std::logic_error("uninitialized ResidueElem");
    switch (field->kind) {
        case ResidueField::Kind::Prime:
        case ResidueField::Kind::Finite:
        case ResidueField::Kind::Closure: {
            for (u64 c : coords)
                if (c) return false;
            return true;
        }
        case ResidueField::Kind::RationalFunction:
            return num.empty();
    }
    return false;
}

bool ResidueElem::is_one() const {
    switch (field->kind) {
        case ResidueField::Kind::Prime:
        case ResidueField::Kind::Finite:
        case ResidueField::Kind::Closure: {
            if (coords.empty() || coords[0] != 1) return false;
            for (size_t i = 1; i < coords.size(); ++i)
                if (coords[i]) return false;
            return field->kind != ResidueField::Kind::Closure || sub_degree == 1;
        }
        case ResidueField::Kind::RationalFunction:
            return num.size() == 1 && num[0].is_one() && den.size() == 1 && den[0].is_one();
    }
    return false;
}

namespace {
std::string upoly_str(const std::vector<u64>& c, const std::string& gen) {
    if (c.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = (int)c.size() - 1; i >= 0; --i) {
        if (c[i] == 0) continue;
        if (!first) os << "+";
        first = false;
        if (i == 0 || c[i] != 1) os << c[i];
        if (i > 0) {
            if (c[i] != 1) os << "*";
            os << gen;
            if (i > 1) os << "^" << i;
        }
    }
    if (first) return "0";
    return os.str();
}

std::string cpoly_str(const poly::CPoly& c, const std::string& var) {
    if (c.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = (int)c.size() - 1; i >= 0; --i) {
        if (c[i].is_zero()) continue;
        if (!first) os << "+";
        first = false;
        bool unit = c[i].is_one();
        std::string cs = c[i].to_string();
        bool atomic = cs.find_first_of("+-*/^") == std::string::npos;
        if (i == 0 || !unit) {
            if (atomic) os << cs;
            else os << "(" << cs << ")";
        }
        if (i > 0) {
            if (!unit) os << "*";
            os << var;
            if (i > 1) os << "^" << i;
        }
    }
    if (first) return "0";
    return os.str();
}
} // namespace

std::string ResidueElem::to_string() const {
    switch (field->kind) {
        case ResidueField::Kind::Prime:
            return std::to_string(coords.empty() ? 0 : coords[0]);
        case ResidueField::Kind::Finite:
            return upoly_str(utrim(coords), field->gen_name);
        case ResidueField::Kind::Closure:
            return upoly_str(utrim(coords), "w" + std::to_string(sub_degree));
        case ResidueField::Kind::RationalFunction: {
            std::string ns = cpoly_str(num, field->var);
            if (den.size() == 1 && den[0].is_one()) return ns;
            std::string ds = cpoly_str(den, field->var);
            return "(" + ns + ")/(" + ds + ")";
        }
    }
    return "?";
}

int ResidueElem::cmp(const ResidueElem& o) const {
    if (!same_field(field, o.field)) throw FieldMismatch("cmp across fields");
    switch (field->kind) {
        case ResidueField::Kind::Prime:
        case ResidueField::Kind::Finite: {
            for (size_t i = 0; i < coords.size(); ++i) {
                if (coords[i] != o.coords[i]) return coords[i] < o.coords[i] ? -1 : 1;
            }
            return 0;
        }
        case ResidueField::Kind::Closure: {
            if (sub_degree != o.sub_degree) return sub_degree < o.sub_degree ? -1 : 1;
            for (size_t i = 0; i < coords.size(); ++i)
                if (coords[i] != o.coords[i]) return coords[i] < o.coords[i] ? -1 : 1;
            return 0;
        }
        case ResidueField::Kind::RationalFunction: {
            auto cmp_poly = [](const poly::CPoly& a, const poly::CPoly& b) -> int {
                if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
                for (size_t i = 0; i < a.size(); ++i) {
                    int c = a[i].cmp(b[i]);
                    if (c) return c;
                }
                return 0;
            };
            int c = cmp_poly(num, o.num);
            if (c) return c;
            return cmp_poly(den, o.den);
        }
    }
    return 0;
}

bool ResidueElem::operator==(const ResidueElem& o) const {
    if (!same_field(field, o.field)) return false;
    return cmp(o) == 0;
}

// ---------------------------------------------------------------------------
// element arithmetic
// ---------------------------------------------------------------------------
namespace {

void check_same(const ResidueElem& a, const ResidueElem& b) {
    if (!same_field(a.field, b.field)) throw FieldMismatch("operands from different fields");
}

// arithmetic for closure: lift to common subfield degree
std::pair<std::vector<u64>, std::vector<u64>> closure_align(const ResidueElem& a,
                                                            const ResidueElem& b,
                                                            int& m_out) {
    u64 p = a.field->p;
    int m = (int)std::lcm((long)a.sub_degree, (long)b.sub_degree);
    m_out = m;
    const UPoly& mod_m = ResidueField::tower_modulus(p, m);
    auto lift_one = [&](const ResidueElem& x) -> std::vector<u64> {
        if (x.sub_degree == m) {
            auto v = x.coords;
            v.resize((size_t)m, 0);
            return v;
        }
        auto& cache = ResidueField::closure_cache(p);
        UPoly img;
        {
            std::lock_guard<std::mutex> lk(cache.mu);
            auto it = cache.gen_img.find({x.sub_degree, m});
            if (it != cache.gen_img.end()) img = it->second;
        }
        if (img.empty()) {
            u64 big = ipow_u64(p, (unsigned)m) - 1;
            u64 small = ipow_u64(p, (unsigned)x.sub_degree) - 1;
            img = upowmod(UPoly{0, 1}, big / small, mod_m, p);
            std::lock_guard<std::mutex> lk(cache.mu);
            cache.gen_img.emplace(std::make_pair(x.sub_degree, m), img);
        }
        // Horner evaluate coords at img
        UPoly acc;
        for (int i = (int)x.coords.size() - 1; i >= 0; --i) {
            acc = umulmod(acc, img, mod_m, p);
            acc = uadd(acc, UPoly{x.coords[(size_t)i]}, p);
        }
        std::vector<u64> v(acc.begin(), acc.end());
        v.resize((size_t)m, 0);
        return v;
    };
    return {lift_one(a), lift_one(b)};
}

} // namespace

ResidueElem ResidueElem::operator+(const ResidueElem& o) const {
    check_same(*this, o);
    u64 p = field->p;
    switch (field->kind) {
        case ResidueField::Kind::Prime:
            return make_prime_elem(field, addmod(coords[0], o.coords[0], p));
        case ResidueField::Kind::Finite: {
            std::vector<u64> c(coords.size());
            for (size_t i = 0; i < c.size(); ++i) c[i] = addmod(coords[i], o.coords[i], p);
            return make_finite_elem(field, std::move(c));
        }
        case ResidueField::Kind::Closure: {
            int m;
            auto [x, y] = closure_align(*this, o, m);
            for (size_t i = 0; i < x.size(); ++i) x[i] = addmod(x[i], y[i], p);
            return make_closure_elem(field, m, std::move(x));
        }
        case ResidueField::Kind::RationalFunction: {
            using namespace poly;
            CPoly n = add(mul(num, o.den), mul(o.num, den));
            CPoly d = mul(den, o.den);
            return make_rat_elem(field, std::move(n), std::move(d));
        }
    }
    throw std::logic_error("add");
}

ResidueElem ResidueElem::operator-() const {
    u64 p = field->p;
    switch (field->kind) {
        case ResidueField::Kind::Prime:
            return make_prime_elem(field, submod(0, coords[0], p));
        case ResidueField::Kind::Finite: {
            std::vector<u64> c(coords.size());
            for (size_t i = 0; i < c.size(); ++i) c[i] = submod(0, coords[i], p);
            return make_finite_elem(field, std::move(c));
        }
        case ResidueField::Kind::Closure: {
            std::vector<u64> c(coords.size());
            for (size_t i = 0; i < c.size(); ++i) c[i] = submod(0, coords[i], p);
            return make_closure_elem(field, sub_degree, std::move(c));
        }
        case ResidueField::Kind::RationalFunction: {
            poly::CPoly n = num;
            for (auto& c : n) c = -c;
            ResidueElem e;
            e.field = field;
            e.num = std::move(n);
            e.den = den;
            return e;
        }
    }
    throw std::logic_error("neg");
}

ResidueElem ResidueElem::operator-(const ResidueElem& o) const { return *this + (-o); }

ResidueElem ResidueElem::operator*(const ResidueElem& o) const {
    check_same(*this, o);
    u64 p = field->p;
    switch (field->kind) {
        case ResidueField::Kind::Prime:
            return make_prime_elem(field, mulmod(coords[0], o.coords[0], p));
        case ResidueField::Kind::Finite: {
            UPoly r = umod(umul(utrim(coords), utrim(o.coords), p), field->modulus, p);
            return make_finite_elem(field, std::vector<u64>(r.begin(), r.end()));
        }
        case ResidueField::Kind::Closure: {
            int m;
            auto [x, y] = closure_align(*this, o, m);
            const UPoly& mod_m = ResidueField::tower_modulus(p, m);
            UPoly r = umulmod(utrim(x), utrim(y), mod_m, p);
            return make_closure_elem(field, m, std::vector<u64>(r.begin(), r.end()));
        }
        case ResidueField::Kind::RationalFunction: {
            using namespace poly;
            return make_rat_elem(field, mul(num, o.num), mul(den, o.den));
        }
    }
    throw std::logic_error("mul");
}

ResidueElem ResidueElem::inv() const {
    if (is_zero()) throw DivisionByZero("inverse of zero");
    u64 p = field->p;
    switch (field->kind) {
        case ResidueField::Kind::Prime:
            return make_prime_elem(field, invmod(coords[0], p));
        case ResidueField::Kind::Finite: {
            u64 q = ipow_u64(p, (unsigned)field->degree);
            return pow((i64)q - 2);
        }
        case ResidueField::Kind::Closure: {
            u64 q = ipow_u64(p, (unsigned)sub_degree);
            return pow((i64)q - 2);
        }
        case ResidueField::Kind::RationalFunction:
            return make_rat_elem(field, den, num);
    }
    throw std::logic_error("inv");
}

ResidueElem ResidueElem::operator/(const ResidueElem& o) const {
    check_same(*this, o);
    if (o.is_zero()) throw DivisionByZero("division by zero");
    return *this * o.inv();
}

ResidueElem ResidueElem::pow(i64 e) const {
    if (e < 0) return inv().pow(-e);
    ResidueElem r = field->one();
    ResidueElem b = *this;
    u64 ue = (u64)e;
    while (ue) {
        if (ue & 1) r = r * b;
        b = b * b;
        ue >>= 1;
    }
    return r;
}

ResidueElem field_arithmetic(const ResidueElem& a, const ResidueElem& b, FieldOp op, i64 pe) {
    switch (op) {
        case FieldOp::Add: return a + b;
        case FieldOp::Sub: return a - b;
        case FieldOp::Mul: return a * b;
        case FieldOp::Div: return a / b;
        case FieldOp::Pow: return a.pow(pe);
    }
    throw std::logic_error("field_arithmetic");
}

// ---------------------------------------------------------------------------
// generic polynomial layer over a coefficient field
// ---------------------------------------------------------------------------
namespace poly {

CPoly trim(CPoly v) {
    while (!v.empty() && v.back().is_zero()) v.pop_back();
    return v;
}
bool is_zero(const CPoly& a) { return a.empty(); }
int deg(const CPoly& a) { return (int)a.size() - 1; }

CPoly add(const CPoly& a, const CPoly& b) {
    CPoly r = a.size() >= b.size() ? a : b;
    const CPoly& s = a.size() >= b.size() ? b : a;
    for (size_t i = 0; i < s.size(); ++i) r[i] = r[i] + s[i];
    return trim(std::move(r));
}

CPoly sub(const CPoly& a, const CPoly& b) {
    CPoly nb = b;
    for (auto& c : nb) c = -c;
    return add(a, nb);
}

CPoly mul(const CPoly& a, const CPoly& b) {
    if (a.empty() || b.empty()) return {};
    CPoly r(a.size() + b.size() - 1, a[0].field->zero());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = r[i + j] + a[i] * b[j];
    return trim(std::move(r));
}

CPoly scale(const CPoly& a, const ResidueElem& c) {
    CPoly r = a;
    for (auto& x : r) x = x * c;
    return trim(std::move(r));
}

std::pair<CPoly, CPoly> divrem(const CPoly& a, const CPoly& b) {
    if (is_zero(b)) throw DivisionByZero("polynomial division by zero");
    CPoly r = a, q;
    ResidueElem ilc = b.back().inv();
    int db = deg(b);
    if (deg(r) >= db) q.assign((size_t)(deg(r) - db + 1), b.back().field->zero());
    while (deg(r) >= db) {
        ResidueElem c = r.back() * ilc;
        int shift = deg(r) - db;
        q[(size_t)shift] = c;
        for (int i = 0; i <= db; ++i)
            r[(size_t)(i + shift)] = r[(size_t)(i + shift)] - c * b[(size_t)i];
        r = trim(std::move(r));
        if (r.empty()) break;
    }
    return {trim(std::move(q)), std::move(r)};
}

CPoly monic(CPoly a) {
    if (a.empty()) return a;
    if (!a.back().is_one()) a = scale(a, a.back().inv());
    return a;
}

CPoly gcd(CPoly a, CPoly b) {
    while (!is_zero(b)) {
        CPoly r = divrem(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return monic(std::move(a));
}

CPoly derivative(const CPoly& a) {
    if (a.size() <= 1) return {};
    CPoly r;
    r.reserve(a.size() - 1);
    for (size_t i = 1; i < a.size(); ++i)
        r.push_back(a[i] * a[i].field->from_int((i64)i));
    return trim(std::move(r));
}

ResidueElem eval(const CPoly& a, const ResidueElem& x) {
    ResidueElem r = x.field->zero();
    for (int i = (int)a.size() - 1; i >= 0; --i) r = r * x + a[(size_t)i];
    return r;
}

CPoly pow(const CPoly& a, u64 e) {
    if (a.empty()) {
        if (e == 0) throw std::logic_error("0^0 poly");
        return {};
    }
    CPoly r{a[0].field->one()};
    CPoly b = a;
    while (e) {
        if (e & 1) r = mul(r, b);
        b = mul(b, b);
        e >>= 1;
    }
    return r;
}

CPoly mulmod(const CPoly& a, const CPoly& b, const CPoly& m) {
    return divrem(mul(a, b), m).second;
}

CPoly powmod(CPoly a, u64 e, const CPoly& m) {
    CPoly r{m.back().field->one()};
    a = divrem(a, m).second;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

// order of the (finite) coefficient field
static u64 field_order(const FieldPtr& k) {
    switch (k->kind) {
        case ResidueField::Kind::Prime: return k->p;
        case ResidueField::Kind::Finite: return ipow_u64(k->p, (unsigned)k->degree);
        default: throw Unsupported("field_order: not a finite field");
    }
}

bool irreducible(const CPoly& f, const FieldPtr& k) {
    int n = deg(f);
    if (n <= 0) return false;
    if (n == 1) return true;
    u64 q = field_order(k);
    CPoly x{k->zero(), k->one()};
    std::vector<CPoly> frob((size_t)n + 1);
    frob[0] = x;
    for (int i = 1; i <= n; ++i) frob[(size_t)i] = powmod(frob[(size_t)i - 1], q, f);
    if (!is_zero(trim(sub(frob[(size_t)n], x)))) return false;
    for (u64 d : prime_factors((u64)n)) {
        CPoly g = gcd(f, sub(frob[(size_t)(n / (int)d)], x));
        if (deg(g) != 0) return false;
    }
    return true;
}

// all monic irreducible polynomials of degree d over finite field k (cached)
static const std::vector<CPoly>& irreducibles_of_degree(const FieldPtr& k, int d) {
    static std::mutex mu;
    static std::map<std::pair<std::string, int>, std::vector<CPoly>> cache;
    std::string key = k->describe();
    for (u64 c : k->modulus) key += "," + std::to_string(c);
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find({key, d});
        if (it != cache.end()) return it->second;
    }
    u64 q = field_order(k);
    // enumerate all elements of k in a fixed order
    std::vector<ResidueElem> elems;
    if (k->kind == ResidueField::Kind::Prime) {
        for (u64 v = 0; v < q; ++v) elems.push_back(k->from_int((i64)v));
    } else {
        int n = k->degree;
        for (u64 c = 0; c < q; ++c) {
            std::vector<u64> co((size_t)n);
            u64 t = c;
            for (int i = 0; i < n; ++i) { co[(size_t)i] = t % k->p; t /= k->p; }
            ResidueElem e;
            e.field = k;
            e.coords = std::move(co);
            elems.push_back(std::move(e));
        }
    }
    std::vector<CPoly> out;
    u64 total = 1;
    for (int i = 0; i < d; ++i) total *= q;
    for (u64 c = 0; c < total; ++c) {
        CPoly f((size_t)d + 1, k->zero());
        f[(size_t)d] = k->one();
        u64 t = c;
        for (int i = 0; i < d; ++i) { f[(size_t)i] = elems[t % q]; t /= q; }
        if (irreducible(f, k)) out.push_back(std::move(f));
    }
    std::lock_guard<std::mutex> lk(mu);
    return cache.emplace(std::make_pair(key, d), std::move(out)).first->second;
}

std::vector<std::pair<CPoly, int>> factor(const CPoly& f0, const FieldPtr& k) {
    if (is_zero(f0)) throw std::logic_error("factor(0)");
    CPoly f = monic(f0);
    std::vector<std::pair<CPoly, int>> out;
    for (int d = 1; deg(f) > 0 && d <= deg(f); ++d) {
        if (2 * d > deg(f)) {
            out.push_back({f, 1}); // remaining factor is irreducible
            f = CPoly{k->one()};
            break;
        }
        for (const CPoly& q : irreducibles_of_degree(k, d)) {
            int mult = 0;
            while (true) {
                auto [quo, rem] = divrem(f, q);
                if (!is_zero(rem)) break;
                f = quo;
                ++mult;
            }
            if (mult) out.push_back({q, mult});
            if (deg(f) < d) break;
        }
    }
    return out;
}

} // namespace poly

// ---------------------------------------------------------------------------
// Frobenius structure
// ---------------------------------------------------------------------------
namespace {

// p-th root in a perfect coefficient field element (always exists)
ResidueElem perfect_pth_root(const ResidueElem& a) {
    const FieldPtr& k = a.field;
    switch (k->kind) {
        case ResidueField::Kind::Prime:
            return a; // a^p = a
        case ResidueField::Kind::Finite: {
            u64 q = ipow_u64(k->p, (unsigned)k->degree);
            return a.pow((i64)(q / k->p)); // a^(p^(n-1))
        }
        case ResidueField::Kind::Closure: {
            u64 q = ipow_u64(k->p, (unsigned)a.sub_degree);
            return a.pow((i64)(q / k->p));
        }
        default:
            throw std::logic_error("perfect_pth_root on imperfect field");
    }
}

} // namespace

std::vector<ResidueElem> frobenius_decompose(const ResidueElem& f) {
    const FieldPtr& k = f.field;
    if (k->kind != ResidueField::Kind::RationalFunction)
        throw NoPBasis("frobenius_decompose requires a p-basis [y]");
    u64 p = k->p;
    using namespace poly;
    // f = u/v = (u v^(p-1)) / v^p ; decompose w := u v^(p-1) coefficientwise
    CPoly w = mul(f.num, pow(f.den, p - 1));
    std::vector<CPoly> parts((size_t)p);
    for (size_t i = 0; i < w.size(); ++i) {
        size_t l = i % p, j = i / p;
        auto& pl = parts[l];
        if (pl.size() <= j) pl.resize(j + 1, k->constants->zero());
        pl[j] = perfect_pth_root(w[i]);
    }
    std::vector<ResidueElem> out;
    out.reserve((size_t)p);
    for (size_t l = 0; l < (size_t)p; ++l) {
        ResidueElem base = make_rat_elem(k, trim(parts[l]), one_poly(k->constants));
        ResidueElem vden = make_rat_elem(k, f.den, one_poly(k->constants));
        out.push_back(base / vden);
    }
    return out;
}

std::optional<ResidueElem> pth_root(const ResidueElem& f) {
    const FieldPtr& k = f.field;
    if (k->kind != ResidueField::Kind::RationalFunction)
        return perfect_pth_root(f);
    if (f.is_zero()) return f;
    auto parts = frobenius_decompose(f);
    for (size_t l = 1; l < parts.size(); ++l)
        if (!parts[l].is_zero()) return std::nullopt;
    return parts[0];
}

// ---------------------------------------------------------------------------
// Artin-Schreier solvers
// ---------------------------------------------------------------------------
namespace {

// minimal solution of an affine F_p-linear problem: pick the cmp-least among
// t, t+1, ..., t+(p-1)  (solutions differ by the prime field)
ResidueElem minimize_as_solution(ResidueElem t) {
    ResidueElem best = t;
    const FieldPtr& k = t.field;
    for (u64 c = 1; c < k->p; ++c) {
        ResidueElem cand = t + k->from_int((i64)c);
        if (cand.cmp(best) < 0) best = cand;
    }
    return best;
}

// solve u*(t^p - t) = f by F_p-linear algebra in a finite field F_p[g]/(m)
std::optional<ResidueElem> as_solve_finite(const ResidueElem& f, const ResidueElem& u) {
    const FieldPtr& k = f.field;
    u64 p = k->p;
    int n = k->kind == ResidueField::Kind::Prime ? 1 : k->degree;
    auto basis_elem = [&](int i) {
        if (k->kind == ResidueField::Kind::Prime) return k->one();
        std::vector<u64> c((size_t)n, 0);
        c[(size_t)i] = 1;
        ResidueElem e;
        e.field = k;
        e.coords = std::move(c);
        return e;
    };
    std::vector<std::vector<u64>> cols;
    for (int i = 0; i < n; ++i) {
        ResidueElem b = basis_elem(i);
        ResidueElem img = u * (b.pow((i64)p) - b);
        std::vector<u64> col = img.coords;
        col.resize((size_t)n, 0);
        cols.push_back(std::move(col));
    }
    std::vector<u64> rhs = f.coords;
    rhs.resize((size_t)n, 0);
    auto sol = fp_solve(cols, rhs, p);
    if (!sol) return std::nullopt;
    ResidueElem t;
    t.field = k;
    if (k->kind == ResidueField::Kind::Prime) {
        t = k->from_int((i64)(*sol)[0]);
    } else {
        t.coords = *sol;
        t.coords.resize((size_t)n, 0);
    }
    return minimize_as_solution(t);
}

// finite field F = k[y]/(q): element ops for the local residue rings used by
// the rational Artin-Schreier solver
struct QuotRing {
    FieldPtr k;
    poly::CPoly q;
    u64 p;
    unsigned log_order; // |F| = p^log_order

    QuotRing(FieldPtr k_, poly::CPoly q_) : k(std::move(k_)), q(std::move(q_)) {
        p = k->p;
        unsigned f = k->kind == ResidueField::Kind::Prime ? 1u : (unsigned)k->degree;
        log_order = f * (unsigned)poly::deg(q);
    }
    poly::CPoly root_p(const poly::CPoly& a) const {
        // p-th root via a^(p^(log_order - 1))
        if (poly::is_zero(a)) return a;
        u64 e = ipow_u64(p, log_order - 1);
        return poly::powmod(a, e, q);
    }
};

// Solve t^p - t = g over k(y), k finite; nullopt when unsolvable.
std::optional<ResidueElem> as_solve_rational(const ResidueElem& g0) {
    const FieldPtr& K = g0.field;
    const FieldPtr& k = K->constants;
    u64 p = K->p;
    using namespace poly;

    ResidueElem g = g0;
    ResidueElem t = K->zero();

    // strip finite poles
    auto facs = factor(g.den, k);
    for (auto& [q, mult0] : facs) {
        QuotRing R(k, q);
        while (true) {
            // current pole order of g at q
            CPoly d = g.den;
            int m = 0;
            while (true) {
                auto [quo, rem] = divrem(d, q);
                if (!is_zero(rem)) break;
                d = quo;
                ++m;
            }
            if (m == 0) break;
            if (m % (int)p != 0) return std::nullopt;
            int kk = m / (int)p;
            // leading coefficient L = (g * q^m) mod q
            ResidueElem qm = make_rat_elem(K, pow(q, (u64)m), one_poly(k));
            ResidueElem shifted = g * qm; // regular at q now
            // shifted = num/den with den coprime to q; L = num * den^{-1} mod q
            CPoly nmod = divrem(shifted.num, q).second;
            CPoly dmod = divrem(shifted.den, q).second;
            // invert dmod modulo q (extended Euclid via powmod: dmod^(|F|-2))
            u64 order = ipow_u64(p, R.log_order);
            CPoly dinv = powmod(dmod, order - 2, q);
            CPoly L = mulmod(nmod, dinv, q);
            CPoly A = R.root_p(L);
            // t += A / q^kk
            ResidueElem cand = make_rat_elem(K, A, pow(q, (u64)kk));
            t = t + cand;
            g = g - (cand.pow((i64)p) - cand);
        }
        (void)mult0;
    }
    // polynomial part
    while (true) {
        if (g.is_zero()) break;
        if (deg(g.den) != 0)
            return std::nullopt; // leftover pole: stripping failed to converge
        CPoly P = g.num;
        int M = deg(P);
        if (M <= 0) break;
        if (M % (int)p != 0) return std::nullopt;
        ResidueElem lead = perfect_pth_root(P.back());
        CPoly mono((size_t)(M / (int)p) + 1, k->zero());
        mono.back() = lead;
        ResidueElem cand = make_rat_elem(K, mono, one_poly(k));
        t = t + cand;
        g = g - (cand.pow((i64)p) - cand);
    }
    if (g.is_zero()) return minimize_as_solution(t);
    // constant remainder: solve in the constants field
    ResidueElem c = g.num[0];
    auto tc = as_solve_finite(c, k->one());
    if (!tc) return std::nullopt;
    ResidueElem tK = make_rat_elem(K, CPoly{*tc}, one_poly(k));
    return minimize_as_solution(t + tK);
}

} // namespace

std::optional<ResidueElem> artin_schreier_solve(const ResidueElem& f) {
    const FieldPtr& k = f.field;
    switch (k->kind) {
        case ResidueField::Kind::Prime:
        case ResidueField::Kind::Finite:
            return as_solve_finite(f, k->one());
        case ResidueField::Kind::Closure: {
            // solve within F_{p^m}; if obstructed, the solution lives in F_{p^{pm}}
            int m = f.sub_degree;
            FieldPtr sub = ResidueField::finite(k->p, m);
            ResidueElem fs;
            fs.field = sub;
            fs.coords = f.coords;
            fs.coords.resize((size_t)std::max(m, 1), 0);
            auto t = as_solve_finite(fs, sub->one());
            if (!t) {
                int big = m * (int)k->p;
                FieldPtr subb = ResidueField::finite(k->p, big);
                ResidueElem fb;
                fb.field = k;
                fb.sub_degree = m;
                fb.coords = fs.coords;
                ResidueElem dummy;
                dummy.field = k;
                dummy.sub_degree = big;
                dummy.coords.assign((size_t)big, 0);
                int mm;
                auto [x, y] = closure_align(fb, dummy, mm);
                (void)y;
                ResidueElem fbig;
                fbig.field = subb;
                fbig.coords = std::move(x);
                fbig.coords.resize((size_t)big, 0);
                m = mm;
                t = as_solve_finite(fbig, subb->one());
                if (!t) return std::nullopt;
            }
            return make_closure_elem(k, m, t->coords);
        }
        case ResidueField::Kind::RationalFunction:
            return as_solve_rational(f);
    }
    throw std::logic_error("artin_schreier_solve");
}

bool embeddable(const FieldPtr& from, const FieldPtr& to) {
    if (same_field(from, to)) return true;
    if (from->p != to->p) return false;
    if (from->kind == ResidueField::Kind::RationalFunction) {
        if (to->kind != ResidueField::Kind::RationalFunction) return false;
        if (from->var == to->var && embeddable(from->constants, to->constants)) return true;
        // injection as constants of a nested rational carrier
        return embeddable(from, to->constants);
    }
    if (from->kind == ResidueField::Kind::Prime) return true;
    if (to->kind == ResidueField::Kind::Closure &&
        (from->kind == ResidueField::Kind::Finite && from->tower_compatible))
        return true;
    if (to->kind == ResidueField::Kind::RationalFunction)
        return embeddable(from, to->constants);
    if (from->kind == ResidueField::Kind::Finite && to->kind == ResidueField::Kind::Finite &&
        from->tower_compatible && to->tower_compatible && to->degree % from->degree == 0)
        return true;
    return false;
}

ResidueElem embed_into(const ResidueElem& x, const FieldPtr& target) {
    if (same_field(x.field, target)) {
        ResidueElem y = x;
        y.field = target;
        return y;
    }
    if (!embeddable(x.field, target)) throw FieldMismatch("no canonical embedding");
    if (x.field->kind == ResidueField::Kind::RationalFunction) {
        if (x.field->var == target->var && embeddable(x.field->constants, target->constants)) {
            poly::CPoly n, d;
            for (const auto& c : x.num) n.push_back(embed_into(c, target->constants));
            for (const auto& c : x.den) d.push_back(embed_into(c, target->constants));
            return make_rat_elem(target, std::move(n), std::move(d));
        }
        // constants injection into the nested carrier
        ResidueElem c = embed_into(x, target->constants);
        return make_rat_elem(target, {c}, {target->constants->one()});
    }
    if (x.field->kind == ResidueField::Kind::Prime) {
        return target->from_int((i64)x.coords[0]);
    }
    if (target->kind == ResidueField::Kind::RationalFunction) {
        ResidueElem c = embed_into(x, target->constants);
        ResidueElem e;
        e.field = target;
        e.num = c.is_zero() ? poly::CPoly{} : poly::CPoly{c};
        e.den = {target->constants->one()};
        return e;
    }
    if (target->kind == ResidueField::Kind::Closure) {
        return make_closure_elem(target, x.field->degree, x.coords);
    }
    // tower finite -> tower finite of multiple degree
    ResidueElem via = make_closure_elem(ResidueField::closure(x.field->p), x.field->degree, x.coords);
    ResidueElem dummy;
    dummy.field = via.field;
    dummy.sub_degree = target->degree;
    dummy.coords.assign((size_t)target->degree, 0);
    int m;
    auto [cx, cy] = closure_align(via, dummy, m);
    (void)cy;
    if (m != target->degree) throw std::logic_error("embed_into: degree mismatch");
    ResidueElem out;
    out.field = target;
    out.coords = cx;
    out.coords.resize((size_t)target->degree, 0);
    return out;
}

ResidueElem make_rational(const FieldPtr& K, std::vector<ResidueElem> num,
                          std::vector<ResidueElem> den) {
    if (K->kind != ResidueField::Kind::RationalFunction)
        throw FieldMismatch("make_rational: not a rational function field");
    return make_rat_elem(K, std::move(num), std::move(den));
}

std::optional<ResidueElem> twisted_artin_schreier_test(const ResidueElem& f,
                                                       const ResidueElem& u,
                                                       const FieldPtr& M) {
    if (u.is_zero()) throw DivisionByZero("twisted test: u must be a unit");
    ResidueElem fM = embed_into(f, M);
    ResidueElem uM = embed_into(u, M);
    switch (M->kind) {
        case ResidueField::Kind::Prime:
        case ResidueField::Kind::Finite:
            return as_solve_finite(fM, uM);
        case ResidueField::Kind::Closure: {
            ResidueElem g = fM / uM;
            return artin_schreier_solve(g);
        }
        case ResidueField::Kind::RationalFunction: {
            ResidueElem g = fM / uM;
            return artin_schreier_solve(g);
        }
    }
    throw Unsupported("twisted test: unsupported field kind");
}

} // namespace symk
