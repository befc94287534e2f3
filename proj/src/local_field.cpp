#include "symk/local_field.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace symk {

// ===========================================================================
// base-level arithmetic: fractions num/den in (Z/M)[y], den a unit mod p
// ===========================================================================
namespace {

using UP = std::vector<u64>;

UP btrim(UP v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
    return v;
}

UP badd(const UP& a, const UP& b, u64 M) {
    UP r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < r.size(); ++i)
        r[i] = addmod(i < a.size() ? a[i] : 0, i < b.size() ? b[i] : 0, M);
    return btrim(r);
}

UP bneg(const UP& a, u64 M) {
    UP r = a;
    for (auto& c : r) c = submod(0, c, M);
    return r;
}

UP bmul(const UP& a, const UP& b, u64 M) {
    if (a.empty() || b.empty()) return {};
    UP r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = addmod(r[i + j], mulmod(a[i], b[j], M), M);
    return btrim(r);
}

bool leaf_zero(const TVal& x) { return btrim(x.num).empty(); }

} // namespace

// ===========================================================================
// tower arithmetic context
// ===========================================================================
struct LocalField::Ops {
    const LocalField* F;
    explicit Ops(const LocalField* f) : F(f) {}

    u64 M() const { return F->M; }
    u64 p() const { return F->p; }
    int top() const { return F->active_steps; } // working level of the (partial) field

    // ---- structural constructors -------------------------------------
    TVal zero(int level) const {
        if (level == 0) {
            TVal t;
            t.den = {1};
            return t;
        }
        TVal t;
        t.sub.assign((size_t)F->steps[(size_t)level - 1].deg, zero(level - 1));
        return t;
    }
    TVal from_u64(int level, u64 n) const {
        if (level == 0) {
            TVal t;
            if (n % M()) t.num = {n % M()};
            t.den = {1};
            return t;
        }
        TVal t = zero(level);
        t.sub[0] = from_u64(level - 1, n);
        return t;
    }
    TVal promote(const TVal& x, int from_level, int to_level) const {
        TVal t = x;
        for (int l = from_level; l < to_level; ++l) {
            TVal w = zero(l + 1);
            w.sub[0] = t;
            t = std::move(w);
        }
        return t;
    }

    bool tzero(const TVal& x, int level) const {
        if (level == 0) return leaf_zero(x);
        for (const auto& s : x.sub)
            if (!tzero(s, level - 1)) return false;
        return true;
    }

    // ---- ring operations ----------------------------------------------
    TVal tadd(const TVal& a, const TVal& b, int level) const {
        if (level == 0) {
            TVal r;
            // a.num/a.den + b.num/b.den
            r.num = badd(bmul(a.num, b.den, M()), bmul(b.num, a.den, M()), M());
            r.den = bmul(a.den, b.den, M());
            return r;
        }
        TVal r = a;
        for (size_t i = 0; i < r.sub.size(); ++i) r.sub[i] = tadd(a.sub[i], b.sub[i], level - 1);
        return r;
    }
    TVal tneg(const TVal& a, int level) const {
        if (level == 0) {
            TVal r = a;
            r.num = bneg(r.num, M());
            return r;
        }
        TVal r = a;
        for (auto& s : r.sub) s = tneg(s, level - 1);
        return r;
    }
    TVal tsub(const TVal& a, const TVal& b, int level) const { return tadd(a, tneg(b, level), level); }

    TVal tscale(const TVal& a, const TVal& c, int level) const { // c at same level
        return tmul(a, c, level);
    }

    TVal tmul(const TVal& a, const TVal& b, int level) const {
        if (level == 0) {
            TVal r;
            r.num = bmul(a.num, b.num, M());
            r.den = bmul(a.den, b.den, M());
            return r;
        }
        const Step& st = F->steps[(size_t)level - 1];
        int d = st.deg;
        std::vector<TVal> conv((size_t)(2 * d - 1), zero(level - 1));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                conv[(size_t)(i + j)] =
                    tadd(conv[(size_t)(i + j)], tmul(a.sub[(size_t)i], b.sub[(size_t)j], level - 1), level - 1);
        // reduce gen^k for k >= d via gen^d = -sum poly[i] gen^i
        for (int k = 2 * d - 2; k >= d; --k) {
            TVal c = conv[(size_t)k];
            if (tzero(c, level - 1)) continue;
            conv[(size_t)k] = zero(level - 1);
            for (int i = 0; i < d; ++i) {
                TVal term = tmul(c, st.poly[(size_t)i], level - 1);
                conv[(size_t)(k - d + i)] = tsub(conv[(size_t)(k - d + i)], term, level - 1);
            }
        }
        TVal r;
        r.sub.assign(conv.begin(), conv.begin() + d);
        return r;
    }

    TVal tpow(TVal a, u64 e, int level) const {
        TVal r = from_u64(level, 1);
        while (e) {
            if (e & 1) r = tmul(r, a, level);
            a = tmul(a, a, level);
            e >>= 1;
        }
        return r;
    }

    // ---- residues -------------------------------------------------------
    // residue of x at `level`, landing in the residue field of that level
    ResidueElem residue_at(const TVal& x, int level) const {
        const FieldPtr& R = residue_field_at(level);
        if (level == 0) {
            // num/den reduced mod p
            u64 pp = p();
            if (!F->has_y) {
                u64 n = x.num.empty() ? 0 : x.num[0] % pp;
                u64 d = x.den.empty() ? 0 : x.den[0] % pp;
                return R->from_int((i64)n) / R->from_int((i64)d);
            }
            poly::CPoly n, d;
            const FieldPtr& C = R->constants;
            for (u64 c : x.num) n.push_back(C->from_int((i64)(c % pp)));
            for (u64 c : x.den) d.push_back(C->from_int((i64)(c % pp)));
            return make_rational(R, std::move(n), std::move(d));
        }
        const Step& st = F->steps[(size_t)level - 1];
        if (st.eisenstein) {
            // unit residue comes from the constant coordinate
            ResidueElem r = residue_at(x.sub[0], level - 1);
            return embed_into(r, R);
        }
        // unramified: sum res(c_i) * sbar^i
        ResidueElem sbar = unram_gen_residue(level);
        ResidueElem acc = R->zero();
        ResidueElem spow = R->one();
        for (int i = 0; i < st.deg; ++i) {
            ResidueElem ci = embed_into(residue_at(x.sub[(size_t)i], level - 1), R);
            acc = acc + ci * spow;
            spow = spow * sbar;
        }
        return acc;
    }

    FieldPtr residue_field_at(int level) const { return F->residue_fields[(size_t)level]; }

    ResidueElem unram_gen_residue(int level) const {
        const FieldPtr& R = residue_field_at(level);
        if (F->has_y) {
            // generator of the constants, as a rational function element
            return embed_constant(R->constants->generator(), R);
        }
        return R->generator();
    }

    static ResidueElem embed_constant(const ResidueElem& c, const FieldPtr& rat_field) {
        return embed_into(c, rat_field);
    }

    // ---- canonical lift ---------------------------------------------------
    // Digitwise lift of a residue element.  Fractions are lifted with a
    // prime-constants denominator (clearing extension constants through the
    // product of Galois conjugates) so no tower inversion is ever needed;
    // tinv_unit seeds its Newton iteration from this lift.
    TVal lift(const ResidueElem& r) const { return lift_at(r, top()); }

    TVal lift_at(const ResidueElem& r, int level) const {
        if (r.field->kind != ResidueField::Kind::RationalFunction) return lift_constant(r, level);
        poly::CPoly num = r.num, den = r.den;
        const FieldPtr& C = r.field->constants;
        if (C->kind == ResidueField::Kind::Finite) {
            // clear extension constants from the denominator:
            // den * prod(conj^i(den)) lies over the prime field
            poly::CPoly dstar{C->one()};
            poly::CPoly conj = den;
            for (int i = 1; i < C->degree; ++i) {
                for (auto& c : conj) c = c.pow((i64)F->p);
                dstar = poly::mul(dstar, conj);
            }
            num = poly::mul(num, dstar);
            den = poly::mul(den, dstar);
        }
        TVal n = lift_poly(num, level);
        TVal d_inv = leaf_reciprocal(den, level);
        return tmul(n, d_inv, level);
    }

    // lift a polynomial in y with constants-field coefficients (no division)
    TVal lift_poly(const poly::CPoly& cp, int level) const {
        TVal acc = zero(level);
        TVal yv = yval(level);
        TVal ypow = from_u64(level, 1);
        for (size_t i = 0; i < cp.size(); ++i) {
            TVal c = lift_constant(cp[i], level);
            acc = tadd(acc, tmul(c, ypow, level), level);
            ypow = tmul(ypow, yv, level);
        }
        return acc;
    }

    // reciprocal of a prime-valued polynomial, realized in the base leaf
    TVal leaf_reciprocal(const poly::CPoly& cp, int level) const {
        TVal t;
        t.num = {1};
        t.den.assign(cp.size(), 0);
        for (size_t i = 0; i < cp.size(); ++i) {
            const ResidueElem& c = cp[i];
            for (size_t k = 1; k < c.coords.size(); ++k)
                if (c.coords[k] != 0)
                    throw std::logic_error("leaf_reciprocal: coefficient not prime-valued");
            t.den[i] = c.coords.empty() ? 0 : c.coords[0];
        }
        t.den = btrim(t.den);
        if (t.den.empty()) throw DivisionByZero("leaf_reciprocal of zero");
        return promote(t, 0, level);
    }

    TVal yval(int level) const {
        if (level == 0) {
            TVal t;
            t.num = {0, 1};
            t.den = {1};
            return t;
        }
        return promote(yval(0), 0, level);
    }

    // lift of a constants element (prime or the unramified-step finite field)
    TVal lift_constant(const ResidueElem& c, int level) const {
        if (c.field->kind == ResidueField::Kind::Prime)
            return from_u64(level, c.coords.empty() ? 0 : c.coords[0]);
        // finite custom constants: digits over the unramified generator
        int ul = F->unram_level;
        if (ul < 0 || ul > level) throw std::logic_error("lift_constant: no unramified level");
        TVal at_ul = zero(ul);
        for (size_t i = 0; i < c.coords.size(); ++i)
            at_ul.sub[i] = from_u64(ul - 1, c.coords[i]);
        return promote(at_ul, ul, level);
    }

    // ---- uniformizer, stripping, inversion ---------------------------------
    int uniformizer_level() const { return F->uniformizer_lvl; }

    TVal pival(int level) const {
        int ul = uniformizer_level();
        if (ul == 0) {
            return from_u64(level, p());
        }
        TVal t = zero(ul);
        t.sub[1] = from_u64(ul - 1, 1);
        return promote(t, ul, level);
    }

    // exact division by the uniformizer; caller certifies residue == 0
    TVal strip_pi(const TVal& x, int level) const {
        int ul = uniformizer_level();
        if (level > ul) {
            // levels above the last Eisenstein step are unramified: strip coords
            TVal r = x;
            for (auto& s : r.sub) s = strip_pi(s, level - 1);
            return r;
        }
        return strip_here(x, level);
    }

    // divide by the uniformizer of `level` (p at base, eis generator above)
    TVal strip_here(const TVal& x, int level) const {
        if (level == 0) {
            TVal r = x;
            // num coefficients divisible by p (den is a unit mod p)
            for (auto& c : r.num) {
                if (c % p() != 0) throw PrecisionExhausted("strip: residue not certified zero");
                c /= p();
            }
            return r;
        }
        const Step& st = F->steps[(size_t)level - 1];
        if (!st.eisenstein) {
            TVal r = x;
            for (auto& s : r.sub) s = strip_here(s, level - 1);
            return r;
        }
        int d = st.deg;
        // x = sum c_i pi^i ; x/pi = sum_{i>=1} c_i pi^{i-1} + (c_0/E0) * (-(pi^{d-1} + E_{d-1} pi^{d-2} + ... + E_1))
        TVal r = zero(level);
        for (int i = 1; i < d; ++i) r.sub[(size_t)(i - 1)] = x.sub[(size_t)i];
        if (!tzero(x.sub[0], level - 1)) {
            // c0/E0 = strip_lower(c0) * (E0/pi_lower)^{-1}
            TVal c0 = strip_here(x.sub[0], level - 1);
            c0 = tmul(c0, st.e0_unit_inv, level - 1);
            // add -c0 * (pi^{d-1} + sum_{i>=1} E_i pi^{i-1})
            TVal negc0 = tneg(c0, level - 1);
            r.sub[(size_t)(d - 1)] = tadd(r.sub[(size_t)(d - 1)], negc0, level - 1);
            for (int i = 1; i < d; ++i) {
                TVal term = tmul(negc0, st.poly[(size_t)i], level - 1);
                r.sub[(size_t)(i - 1)] = tadd(r.sub[(size_t)(i - 1)], term, level - 1);
            }
        }
        return r;
    }

    // Newton inversion of a unit (residue nonzero) at the top level
    TVal tinv_unit(const TVal& u, int level) const {
        ResidueElem r = residue_at(u, level);
        if (r.is_zero()) throw DivisionByUncertifiedZero("inverse of non-unit");
        TVal z = lift_at(r.inv(), level);
        // z <- z(2 - uz), doubling p-adic accuracy each round
        TVal two = from_u64(level, 2);
        int rounds = 1;
        for (u64 acc = 1; acc < (u64)F->N0 * (u64)std::max<long>(F->e_abs, 1) + 2; acc <<= 1) ++rounds;
        for (int i = 0; i < rounds + 1; ++i)
            z = tmul(z, tsub(two, tmul(u, z, level), level), level);
        return z;
    }

    TVal tdiv_unit(const TVal& a, const TVal& u, int level) const {
        return tmul(a, tinv_unit(u, level), level);
    }
};

// ===========================================================================
// LocalElem arithmetic (mixed + laurent)
// ===========================================================================
namespace {

LocalElem make_zero_at(const LocalFieldPtr& f, long abs) {
    LocalElem z;
    z.field = f;
    z.zero = true;
    z.v = abs;
    z.rel = 0;
    return z;
}

long max_leaf_degree(const TVal& t) {
    if (t.sub.empty()) return std::max<long>((long)t.num.size(), (long)t.den.size());
    long m = 0;
    for (const auto& s : t.sub) m = std::max(m, max_leaf_degree(s));
    return m;
}

// normalize a raw mixed-characteristic value: value = pi^base_v * coords,
// certified to absolute precision `abs`
LocalElem normalize_mixed(const LocalFieldPtr& f, TVal coords, long base_v, long abs) {
    LocalField::Ops ops(f.get());
    int top = ops.top();
    long limit = abs - base_v; // how many digits we may strip with certainty
    if (limit <= 0) return make_zero_at(f, abs);
    long strips = 0;
    while (strips < limit) {
        if (ops.tzero(coords, top)) return make_zero_at(f, abs);
        ResidueElem r = ops.residue_at(coords, top);
        if (!r.is_zero()) break;
        coords = ops.strip_pi(coords, top);
        ++strips;
    }
    if (strips >= limit) return make_zero_at(f, abs);
    LocalElem x;
    x.field = f;
    x.zero = false;
    x.v = base_v + strips;
    x.rel = std::min<long>(abs - x.v, f->prec);
    x.unit = std::move(coords);
    // lazy fractions in the base ring can grow without bound; rebuild from
    // the digit expansion (canonical reduced digits) when they get large
    if (f->has_y && max_leaf_degree(x.unit) > 512) {
        LocalField::Ops ops(f.get());
        int top = ops.top();
        TVal acc = ops.zero(top);
        TVal cur = x.unit;
        TVal pw = ops.from_u64(top, 1);
        for (long k = 0; k < x.rel; ++k) {
            if (ops.tzero(cur, top)) break;
            ResidueElem d = ops.residue_at(cur, top);
            if (!d.is_zero()) {
                TVal lift = ops.lift(d);
                acc = ops.tadd(acc, ops.tmul(pw, lift, top), top);
                cur = ops.tsub(cur, lift, top);
            }
            if (ops.tzero(cur, top)) break;
            cur = ops.strip_pi(cur, top);
            pw = ops.tmul(pw, ops.pival(top), top);
        }
        x.unit = std::move(acc);
    }
    return x;
}

LocalElem normalize_laurent(const LocalFieldPtr& f, std::vector<ResidueElem> digits, long base_v,
                            long abs) {
    long limit = abs - base_v;
    if (limit <= 0) return make_zero_at(f, abs);
    size_t lead = 0;
    while (lead < digits.size() && (long)lead < limit && digits[lead].is_zero()) ++lead;
    if ((long)lead >= limit || lead >= digits.size()) return make_zero_at(f, abs);
    digits.erase(digits.begin(), digits.begin() + (long)lead);
    LocalElem x;
    x.field = f;
    x.zero = false;
    x.v = base_v + (long)lead;
    x.rel = std::min<long>(abs - x.v, f->prec);
    if ((long)digits.size() > x.rel) digits.resize((size_t)x.rel);
    while ((long)digits.size() < x.rel) digits.push_back(f->laurent_residue->zero());
    x.digits = std::move(digits);
    return x;
}

void check_field(const LocalElem& a, const LocalElem& b) {
    if (a.field.get() != b.field.get())
        throw FieldMismatch("local elements from different descriptors");
}

} // namespace

// absolute certification bound for exactly-representable values
static long exact_abs_of(const LocalField* f) {
    if (!f->mixed) return f->prec + 2;
    return (long)f->e_abs * (long)(f->N0 - 1);
}

LocalElem LocalField::zero() const {
    return make_zero_at(shared_from_this(), exact_abs_of(this));
}

LocalElem LocalField::one() const { return from_int(1); }

LocalElem LocalField::from_int(i64 n) const {
    auto self = shared_from_this();
    if (!mixed) {
        std::vector<ResidueElem> d{laurent_residue->from_int(n)};
        // integer constants are exact; in equal characteristic they are units or 0
        return normalize_laurent(self, std::move(d), 0, exact_abs_of(this));
    }
    Ops ops(this);
    i64 m = n % (i64)M;
    if (m < 0) m += (i64)M;
    return normalize_mixed(self, ops.from_u64(ops.top(), (u64)m), 0, exact_abs_of(this));
}

LocalElem LocalField::uniformizer() const {
    auto self = shared_from_this();
    if (!mixed) {
        std::vector<ResidueElem> d{laurent_residue->one()};
        return normalize_laurent(self, std::move(d), 1, exact_abs_of(this) + 1);
    }
    Ops ops(this);
    return normalize_mixed(self, ops.pival(ops.top()), 0, exact_abs_of(this) + 1);
}

LocalElem LocalField::lift(const ResidueElem& r) const {
    auto self = shared_from_this();
    if (!embeddable(r.field, residue_f))
        throw FieldMismatch("lift: residue element not in the residue field");
    ResidueElem rr = embed_into(r, residue_f);
    if (rr.is_zero()) return zero();
    if (!mixed) {
        std::vector<ResidueElem> d{rr};
        return normalize_laurent(self, std::move(d), 0, exact_abs_of(this));
    }
    Ops ops(this);
    return normalize_mixed(self, ops.lift(rr), 0, exact_abs_of(this));
}

LocalElem LocalElem::operator-() const {
    if (zero) return *this;
    LocalElem r = *this;
    if (field->mixed) {
        LocalField::Ops ops(field.get());
        r.unit = ops.tneg(unit, ops.top());
    } else {
        for (auto& d : r.digits) d = -d;
    }
    return r;
}

LocalElem LocalElem::operator+(const LocalElem& o) const {
    check_field(*this, o);
    long abs = std::min(abs_prec(), o.abs_prec());
    if (zero && o.zero) return make_zero_at(field, abs);
    if (zero) {
        if (o.zero) return make_zero_at(field, abs);
        LocalElem r = o;
        if (r.abs_prec() > abs) {
            if (abs <= r.v) return make_zero_at(field, abs);
            r.rel = abs - r.v;
            if (!field->mixed && (long)r.digits.size() > r.rel) r.digits.resize((size_t)r.rel);
        }
        return r;
    }
    if (o.zero) return o + *this;
    long base = std::min(v, o.v);
    if (field->mixed) {
        LocalField::Ops ops(field.get());
        int top = ops.top();
        TVal pa = ops.tmul(unit, ops.tpow(ops.pival(top), (u64)(v - base), top), top);
        TVal pb = ops.tmul(o.unit, ops.tpow(ops.pival(top), (u64)(o.v - base), top), top);
        return normalize_mixed(field, ops.tadd(pa, pb, top), base, abs);
    }
    long n = abs - base;
    std::vector<ResidueElem> d((size_t)n, field->laurent_residue->zero());
    for (long i = 0; i < (long)digits.size() && v - base + i < n; ++i)
        d[(size_t)(v - base + i)] = d[(size_t)(v - base + i)] + digits[(size_t)i];
    for (long i = 0; i < (long)o.digits.size() && o.v - base + i < n; ++i)
        d[(size_t)(o.v - base + i)] = d[(size_t)(o.v - base + i)] + o.digits[(size_t)i];
    return normalize_laurent(field, std::move(d), base, abs);
}

LocalElem LocalElem::operator-(const LocalElem& o) const { return *this + (-o); }

LocalElem LocalElem::operator*(const LocalElem& o) const {
    check_field(*this, o);
    // error terms: v_a + abs_b and v_b + abs_a (zero operands use v = abs)
    long va = zero ? abs_prec() : v, vb = o.zero ? o.abs_prec() : o.v;
    long abs = std::min(va + o.abs_prec(), vb + abs_prec());
    if (zero || o.zero) return make_zero_at(field, abs);
    if (field->mixed) {
        LocalField::Ops ops(field.get());
        return normalize_mixed(field, ops.tmul(unit, o.unit, ops.top()), v + o.v, abs);
    }
    long n = abs - (v + o.v);
    std::vector<ResidueElem> d((size_t)n, field->laurent_residue->zero());
    for (size_t i = 0; i < digits.size(); ++i)
        for (size_t j = 0; j < o.digits.size(); ++j)
            if ((long)(i + j) < n) d[i + j] = d[i + j] + digits[i] * o.digits[j];
    return normalize_laurent(field, std::move(d), v + o.v, abs);
}

LocalElem LocalElem::inv() const {
    if (zero) throw DivisionByUncertifiedZero("inverse of an uncertified zero");
    if (field->mixed) {
        LocalField::Ops ops(field.get());
        int top = ops.top();
        TVal iz = ops.tinv_unit(unit, top);
        LocalElem r;
        r.field = field;
        r.zero = false;
        r.v = -v;
        r.rel = rel;
        r.unit = std::move(iz);
        return r;
    }
    // series inversion of the unit part
    const auto& k = field->laurent_residue;
    std::vector<ResidueElem> inv((size_t)rel, k->zero());
    ResidueElem lead = digits[0].inv();
    inv[0] = lead;
    for (long n = 1; n < rel; ++n) {
        ResidueElem s = k->zero();
        for (long i = 1; i <= n && i < (long)digits.size(); ++i)
            s = s + digits[(size_t)i] * inv[(size_t)(n - i)];
        inv[(size_t)n] = -lead * s;
    }
    LocalElem r;
    r.field = field;
    r.zero = false;
    r.v = -v;
    r.rel = rel;
    r.digits = std::move(inv);
    return r;
}

LocalElem LocalElem::operator/(const LocalElem& o) const {
    check_field(*this, o);
    if (o.zero) throw DivisionByUncertifiedZero("division by an uncertified zero");
    return *this * o.inv();
}

LocalElem LocalElem::pow(i64 e) const {
    if (e < 0) return inv().pow(-e);
    LocalElem r = field->one();
    LocalElem b = *this;
    u64 ue = (u64)e;
    while (ue) {
        if (ue & 1) r = r * b;
        b = b * b;
        ue >>= 1;
    }
    return r;
}

ResidueElem LocalElem::residue() const {
    if (zero) {
        if (v >= 1) return field->residue_f->zero();
        throw PrecisionExhausted("residue of zero with no certified digit");
    }
    if (v != 0) {
        if (v > 0) return field->residue_f->zero();
        throw SymkError("residue of an element of negative valuation");
    }
    if (rel < 1) throw PrecisionExhausted("residue: no certified digit");
    if (field->mixed) {
        LocalField::Ops ops(field.get());
        return ops.residue_at(unit, ops.top());
    }
    return digits[0];
}

std::vector<std::pair<long, ResidueElem>> LocalElem::digit_expansion(long n) const {
    std::vector<std::pair<long, ResidueElem>> out;
    if (zero) return out;
    if (!field->mixed) {
        for (long i = 0; i < (long)digits.size() && i < n; ++i)
            if (!digits[(size_t)i].is_zero()) out.push_back({v + i, digits[(size_t)i]});
        return out;
    }
    LocalField::Ops ops(field.get());
    int top = ops.top();
    TVal cur = unit;
    long pos = v;
    long remaining = std::min(rel, n);
    while (remaining > 0) {
        if (ops.tzero(cur, top)) break;
        ResidueElem d = ops.residue_at(cur, top);
        if (!d.is_zero()) {
            out.push_back({pos, d});
            cur = ops.tsub(cur, ops.lift(d), top);
        }
        if (ops.tzero(cur, top)) break;
        cur = ops.strip_pi(cur, top);
        ++pos;
        --remaining;
    }
    return out;
}

std::string LocalElem::serialize(long max_digits) const {
    long n = max_digits < 0 ? rel : std::min(rel, max_digits);
    if (zero) return "0";
    auto digitsv = digit_expansion(n);
    if (digitsv.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [k, d] : digitsv) {
        if (!first) os << " + ";
        first = false;
        os << "pi^" << k << "*(" << d.to_string() << ")";
    }
    return os.str();
}

bool LocalElem::eq_at_precision(const LocalElem& o) const {
    if (keyc && o.keyc && *keyc == **(&o.keyc)) return true;
    LocalElem d = *this - o;
    return d.zero;
}

const std::string& LocalElem::key() const {
    if (!keyc) {
        std::string k = zero ? std::string("0") : std::to_string(v) + "|" + serialize();
        keyc = std::make_shared<const std::string>(std::move(k));
    }
    return *keyc;
}

// ===========================================================================
// descriptor construction
// ===========================================================================
namespace {

FieldPtr residue_field_from_json(const nlohmann::ordered_json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "prime") return ResidueField::prime(j.at("p").get<u64>());
    if (kind == "finite") {
        u64 p = j.at("p").get<u64>();
        if (j.contains("poly")) {
            std::vector<u64> mod = j.at("poly").get<std::vector<u64>>();
            std::string gen = j.value("gen", std::string("s"));
            return ResidueField::finite_custom(p, std::move(mod), gen);
        }
        return ResidueField::finite(p, j.at("degree").get<int>());
    }
    if (kind == "closure") return ResidueField::closure(j.at("p").get<u64>());
    if (kind == "rational_function") {
        FieldPtr base = residue_field_from_json(j.at("base"));
        return ResidueField::rational_function(base, j.value("variable", std::string("y")));
    }
    throw ConfigError("unknown residue field kind: " + kind);
}

nlohmann::ordered_json residue_field_to_json(const FieldPtr& f) {
    nlohmann::ordered_json j;
    switch (f->kind) {
        case ResidueField::Kind::Prime:
            j["kind"] = "prime";
            j["p"] = f->p;
            break;
        case ResidueField::Kind::Finite:
            j["kind"] = "finite";
            j["p"] = f->p;
            if (f->tower_compatible) {
                j["degree"] = f->degree;
            } else {
                j["poly"] = f->modulus;
                j["gen"] = f->gen_name;
            }
            break;
        case ResidueField::Kind::Closure:
            j["kind"] = "closure";
            j["p"] = f->p;
            break;
        case ResidueField::Kind::RationalFunction:
            j["kind"] = "rational_function";
            j["base"] = residue_field_to_json(f->constants);
            j["variable"] = f->var;
            break;
    }
    return j;
}

} // namespace

LocalFieldPtr LocalField::laurent(FieldPtr residue, u64 p_interest, long prec, std::string var) {
    auto f = std::make_shared<LocalField>();
    f->mixed = false;
    f->p = p_interest;
    f->prec = prec > 0 ? prec : 24;
    f->laurent_residue = residue;
    f->laurent_var = var;
    f->residue_f = residue;
    f->uniformizer_name = var;
    nlohmann::ordered_json j;
    j["p"] = p_interest;
    j["precision"] = f->prec;
    j["construction"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json step;
    step["kind"] = "laurent";
    step["variable"] = var;
    step["residue"] = residue_field_to_json(residue);
    j["construction"].push_back(step);
    f->config = j;
    f->hash = fnv1a_hex(j.dump());
    return f;
}

LocalFieldPtr LocalField::from_json_text(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("descriptor: invalid JSON: ") + e.what());
    }
    return from_json(j);
}

LocalFieldPtr LocalField::from_json(const nlohmann::ordered_json& j) {
    if (!j.contains("construction") || !j.at("construction").is_array() ||
        j.at("construction").empty())
        throw ConfigError("descriptor: missing construction");
    const auto& c0 = j.at("construction").at(0);
    std::string kind0 = c0.at("kind").get<std::string>();

    if (kind0 == "laurent") {
        u64 p = j.at("p").get<u64>();
        FieldPtr res = residue_field_from_json(c0.at("residue"));
        long prec = j.value("precision", (long)24);
        if (j.at("construction").size() != 1)
            throw ConfigError("descriptor: laurent construction takes no further steps");
        return laurent(res, p, prec, c0.value("variable", std::string("t")));
    }
    if (kind0 != "padic" && kind0 != "gauss_padic")
        throw ConfigError("descriptor: first construction step must be padic/gauss_padic/laurent");

    auto f = std::make_shared<LocalField>();
    f->mixed = true;
    f->p = j.at("p").get<u64>();
    if (f->p < 2 || f->p > 61 || !is_small_prime(f->p))
        throw ConfigError("descriptor: p must be a small prime");
    f->has_y = kind0 == "gauss_padic";
    if (f->has_y) f->yvar = c0.value("variable", std::string("y"));

    // first pass: structural data and ramification index
    f->e_abs = 1;
    for (size_t si = 1; si < j.at("construction").size(); ++si) {
        const auto& js = j.at("construction").at(si);
        std::string k = js.at("kind").get<std::string>();
        Step st;
        st.eisenstein = k == "eisenstein";
        if (!st.eisenstein && k != "unramified")
            throw ConfigError("descriptor: unknown construction step kind " + k);
        st.name = js.at("name").get<std::string>();
        st.poly_exprs = js.at("poly").get<std::vector<std::string>>();
        if (st.poly_exprs.size() < 3)
            throw ConfigError("descriptor: step polynomial must have degree >= 2");
        st.deg = (int)st.poly_exprs.size() - 1;
        if (st.eisenstein) f->e_abs *= st.deg;
        f->steps.push_back(std::move(st));
    }

    // precision and coefficient modulus
    Rat eps(0, 1);
    {
        i64 e = f->e_abs;
        eps = Rat((i64)f->p * e, (i64)f->p - 1);
    }
    long default_prec = 4 * eps.ceil() + 8;
    f->prec = j.value("precision", default_prec);
    if (f->prec < 4) throw ConfigError("descriptor: precision too small");
    f->N0 = (int)((f->prec + f->e_abs - 1) / f->e_abs) + 3;
    u64 Mv = 1;
    for (int i = 0; i < f->N0; ++i) {
        if (Mv > ((u64)1 << 62) / f->p) throw ConfigError("descriptor: precision too large");
        Mv *= f->p;
    }
    f->M = Mv;

    // second pass: evaluate step polynomials bottom-up
    f->uniformizer_lvl = 0;
    f->uniformizer_name = "p";
    f->unram_level = -1;
    f->residue_fields.clear();
    {
        FieldPtr base_res = f->has_y
                                ? ResidueField::rational_function(ResidueField::prime(f->p), f->yvar)
                                : ResidueField::prime(f->p);
        f->residue_fields.push_back(base_res);
    }
    for (size_t si = 0; si < f->steps.size(); ++si) {
        Step& st = f->steps[si];
        // evaluate coefficients over the partial field (steps 0..si-1 active)
        f->active_steps = (int)si;
        Ops ops(f.get());
        std::vector<LocalElem> coeffs;
        for (const auto& ex : st.poly_exprs) coeffs.push_back(f->eval_text(ex));
        if (coeffs.back().zero || coeffs.back().v != 0 ||
            !(coeffs.back() - f->partial_one((int)si)).zero)
            throw ConfigError("descriptor: step polynomial must be monic");
        st.poly.clear();
        for (int i = 0; i < st.deg; ++i) {
            const LocalElem& ce = coeffs[(size_t)i];
            if (ce.zero) {
                st.poly.push_back(ops.zero((int)si));
            } else {
                if (ce.v < 0) throw ConfigError("descriptor: step coefficient not integral");
                TVal t = ops.tmul(ce.unit, ops.tpow(ops.pival((int)si), (u64)ce.v, (int)si), (int)si);
                st.poly.push_back(std::move(t));
            }
        }
        if (st.eisenstein) {
            // lower coefficients of positive valuation, constant term of valuation 1
            for (int i = 0; i < st.deg; ++i) {
                const LocalElem& ce = coeffs[(size_t)i];
                if (ce.v < 1)
                    throw ConfigError("descriptor: Eisenstein coefficients need positive valuation");
                if (i == 0 && (ce.zero || ce.v != 1))
                    throw ConfigError("descriptor: Eisenstein constant term must have valuation 1");
            }
            // cache (E0/pi_lower)^{-1}
            TVal e0 = st.poly[0];
            TVal u0 = ops.strip_here(e0, (int)si);
            st.e0_unit_inv = ops.tinv_unit(u0, (int)si);
            f->uniformizer_lvl = (int)si + 1;
            f->uniformizer_name = st.name;
            f->residue_fields.push_back(f->residue_fields.back());
        } else {
            // unramified: residue polynomial must be irreducible with constant coefficients
            if (f->unram_level >= 0)
                throw ConfigError("descriptor: at most one unramified step is supported");
            std::vector<u64> rpoly;
            for (const auto& ce : coeffs) {
                if (ce.zero) {
                    rpoly.push_back(0);
                    continue;
                }
                if (ce.v < 0) throw ConfigError("descriptor: unramified coefficient not integral");
                if (ce.v > 0) {
                    rpoly.push_back(0);
                    continue;
                }
                ResidueElem r = ops.residue_at(ce.unit, (int)si);
                // constants only
                ResidueElem cst = r;
                if (r.field->kind == ResidueField::Kind::RationalFunction) {
                    if (r.num.size() > 1 || r.den.size() > 1)
                        throw ConfigError("descriptor: unramified polynomial must have constant residues");
                    cst = r.num.empty() ? r.field->constants->zero() : r.num[0];
                }
                if (cst.field->kind != ResidueField::Kind::Prime)
                    throw ConfigError("descriptor: unramified tower over extended constants unsupported");
                rpoly.push_back(cst.coords.empty() ? 0 : cst.coords[0]);
            }
            FieldPtr newconst = ResidueField::finite_custom(f->p, rpoly, st.name);
            FieldPtr newres = f->has_y
                                  ? ResidueField::rational_function(newconst, f->yvar)
                                  : newconst;
            f->unram_level = (int)si + 1;
            f->residue_fields.push_back(newres);
        }
    }
    f->active_steps = (int)f->steps.size();
    f->residue_f = f->residue_fields.back();

    // canonical config + hash
    nlohmann::ordered_json cj;
    cj["p"] = f->p;
    cj["precision"] = f->prec;
    cj["construction"] = j.at("construction");
    if (j.contains("zeta")) cj["zeta"] = j.at("zeta");
    if (j.contains("M")) cj["M"] = j.at("M");
    f->config = cj;
    f->hash = fnv1a_hex(cj.dump());

    // zeta configuration
    if (j.contains("zeta")) {
        const auto& z = j.at("zeta");
        f->zeta_present = z.value("present", false);
        f->zeta_seed = z.value("seed", std::string());
    }
    if (f->p == 2) {
        f->zeta_present = true; // zeta_2 = -1 always
        if (f->zeta_seed.empty()) f->zeta_seed = "-1";
    }
    if (j.contains("M")) {
        f->cyclo_M = from_json(j.at("M"));
        // sanity: same p, tower prefix
        if (f->cyclo_M->p != f->p) throw ConfigError("descriptor: M has different residue characteristic");
    }
    if (f->zeta_present && !f->zeta_seed.empty()) {
        // verified on first use by zeta_data()
    }
    return f;
}

LocalFieldPtr LocalField::with_precision(long new_prec) const {
    nlohmann::ordered_json j = config;
    j["precision"] = new_prec;
    if (j.contains("M")) j["M"]["precision"] = new_prec;
    return from_json(j);
}

Rat LocalField::epsilon() const {
    if (!mixed) throw EqualCharacteristic("epsilon undefined in equal characteristic");
    return Rat((i64)p * e_abs, (i64)p - 1);
}

Rat epsilon_of(const LocalFieldPtr& K) { return K->epsilon(); }

// one element of the partial field with `lvl` active steps
LocalElem LocalField::partial_one(int lvl) const {
    Ops ops(this);
    LocalElem x;
    x.field = shared_from_this();
    x.zero = false;
    x.v = 0;
    x.rel = prec;
    x.unit = ops.from_u64(lvl, 1);
    return x;
}

// ===========================================================================
// expression evaluation
// ===========================================================================
LocalElem LocalField::generator_value(const std::string& name) const {
    auto self = shared_from_this();
    if (!mixed) {
        if (name == laurent_var) return uniformizer();
        // residue-field generator names: lift them
        if (laurent_residue->kind == ResidueField::Kind::Finite && name == laurent_residue->gen_name)
            return lift(laurent_residue->generator());
        if (laurent_residue->kind == ResidueField::Kind::RationalFunction) {
            if (name == laurent_residue->var) return lift(laurent_residue->generator());
            if (laurent_residue->constants->kind == ResidueField::Kind::Finite &&
                name == laurent_residue->constants->gen_name)
                return lift(embed_into(laurent_residue->constants->generator(), laurent_residue));
        }
        if (name == "pi") return uniformizer();
        throw UnknownGenerator("unknown generator '" + name + "'", 0);
    }
    if (has_y && name == yvar) {
        Ops ops(this);
        return normalize_mixed(self, ops.yval(active_steps), 0, exact_abs_of(this));
    }
    if (name == "zeta") return zeta_data().zeta;
    for (int si = 0; si < active_steps; ++si) {
        if (steps[(size_t)si].name == name) {
            Ops ops(this);
            TVal g = ops.zero(si + 1);
            g.sub[1] = ops.from_u64(si, 1);
            TVal t = ops.promote(g, si + 1, active_steps);
            return normalize_mixed(self, std::move(t), 0, exact_abs_of(this));
        }
    }
    if (name == "pi") return uniformizer();
    throw UnknownGenerator("unknown generator '" + name + "'", 0);
}

LocalElem LocalField::eval(const Expr& e) const {
    switch (e.kind) {
        case Expr::Kind::Int: return from_int(e.ival);
        case Expr::Kind::Name: return generator_value(e.name);
        case Expr::Kind::Add: return eval(*e.lhs) + eval(*e.rhs);
        case Expr::Kind::Sub: return eval(*e.lhs) - eval(*e.rhs);
        case Expr::Kind::Mul: return eval(*e.lhs) * eval(*e.rhs);
        case Expr::Kind::Div: return eval(*e.lhs) / eval(*e.rhs);
        case Expr::Kind::Neg: return -eval(*e.lhs);
        case Expr::Kind::Pow: return eval(*e.lhs).pow(e.ival);
    }
    throw std::logic_error("eval");
}

LocalElem LocalField::eval_text(const std::string& text) const {
    return eval(parse_element_expr(text));
}

// ===========================================================================
// zeta data, unit u, Kummer norms, p-th roots
// ===========================================================================
ZetaData LocalField::zeta_data() const {
    LocalFieldPtr home =
        cyclo_M ? std::static_pointer_cast<const LocalField>(cyclo_M) : shared_from_this();
    if (!home->zeta_present && !(home->p == 2))
        throw ZetaAbsent("no p-th root of unity declared for this field");
    std::string seed = home->zeta_seed.empty() ? (home->p == 2 ? "-1" : "") : home->zeta_seed;
    if (seed.empty()) throw ZetaAbsent("zeta declared present but no seed given");
    LocalElem z = home->eval_text(seed);
    // Hensel-polish a root of Phi_p(z) = z^(p-1) + ... + 1, then verify
    auto phi = [&](const LocalElem& x) {
        LocalElem acc = home->one();
        LocalElem t = home->one();
        for (u64 i = 1; i < home->p; ++i) {
            t = t * x;
            acc = acc + t;
        }
        return acc;
    };
    auto dphi = [&](const LocalElem& x) {
        // sum i*x^(i-1)
        LocalElem acc = home->zero();
        LocalElem t = home->one();
        for (u64 i = 1; i < home->p; ++i) {
            acc = acc + home->from_int((i64)i) * t;
            t = t * x;
        }
        return acc;
    };
    for (int it = 0; it < 40; ++it) {
        LocalElem fz = phi(z);
        if (fz.zero) break;
        z = z - fz / dphi(z);
    }
    if (!phi(z).zero)
        throw ConfigError("zeta seed does not Hensel-lift to a root of the p-th cyclotomic polynomial");
    ZetaData out;
    out.home = home;
    out.zeta = z;
    out.pi_power = (z - home->one()).pow((i64)home->p);
    return out;
}

LocalElem LocalField::unit_u_for(const LocalElem& omega) const {
    ZetaData zd = zeta_data();
    LocalElem om = omega;
    if (zd.home.get() != this) om = embed_into_extension(omega, zd.home);
    LocalElem u = zd.pi_power / om;
    if (u.zero || u.v != 0) throw SymkError("unit_u_for: omega does not match the zeta level");
    return u;
}

LocalElem LocalField::embed_into_extension(const LocalElem& x, const LocalFieldPtr& ext) const {
    if (ext.get() == this) return x;
    if (!ext->mixed || !mixed) throw FieldMismatch("embedding requires mixed-characteristic towers");
    // tower prefix check
    if (ext->p != p || ext->has_y != has_y || ext->steps.size() < steps.size())
        throw FieldMismatch("extension does not extend this tower");
    for (size_t i = 0; i < steps.size(); ++i) {
        if (ext->steps[i].name != steps[i].name || ext->steps[i].poly_exprs != steps[i].poly_exprs ||
            ext->steps[i].eisenstein != steps[i].eisenstein)
            throw FieldMismatch("extension does not extend this tower");
    }
    if (x.zero) return make_zero_at(ext, std::min(x.v, ext->prec));
    // digitwise transfer through compatible canonical lifts
    auto digitsv = x.digit_expansion(x.rel);
    LocalElem acc = ext->zero();
    LocalElem piE = ext->uniformizer();
    for (auto& [k, d] : digitsv) {
        ResidueElem dd = embed_into(d, ext->residue_f);
        acc = acc + piE.pow(k) * ext->lift(dd);
    }
    // precision: x known to x.abs_prec()
    LocalElem out = acc;
    if (out.zero) return make_zero_at(ext, std::min(x.abs_prec(), ext->prec));
    out.rel = std::min(out.rel, x.abs_prec() - out.v);
    return out;
}

LocalElem LocalField::kummer_norm(const LocalElem& x, int d, int j, bool crosscheck) const {
    u64 rc = mixed ? p : laurent_residue->p;
    if (d <= 0 || j <= 0) throw SymkError("kummer_norm: need d, j >= 1");
    if ((u64)(d % (int)rc) == 0) throw WildKummer("kummer_norm: p divides d");
    int e = (int)gcd_u64((u64)j, (u64)d);
    int fdeg = d / e, g = j / e;
    LocalElem pi = uniformizer();
    LocalElem closed = (one() - pi.pow(g) * x.pow(fdeg)).pow(e);
    if (crosscheck) {
        // determinant of multiplication by (1 - x pi^q T^r) on K[T]/(T^d - pi)
        int q = j / d, r = j % d;
        std::vector<std::vector<LocalElem>> m((size_t)d, std::vector<LocalElem>((size_t)d, zero()));
        for (int k = 0; k < d; ++k) {
            m[(size_t)k][(size_t)k] = m[(size_t)k][(size_t)k] + one();
            int row = (r + k) % d;
            int extra = (r + k) / d;
            m[(size_t)row][(size_t)k] = m[(size_t)row][(size_t)k] - x * pi.pow(q + extra);
        }
        // Leibniz expansion (d <= 6)
        std::vector<int> perm((size_t)d);
        for (int i = 0; i < d; ++i) perm[(size_t)i] = i;
        LocalElem det = zero();
        do {
            int sign = 1;
            for (int a = 0; a < d; ++a)
                for (int b = a + 1; b < d; ++b)
                    if (perm[(size_t)a] > perm[(size_t)b]) sign = -sign;
            LocalElem term = one();
            for (int i = 0; i < d; ++i) term = term * m[(size_t)perm[(size_t)i]][(size_t)i];
            det = sign > 0 ? det + term : det - term;
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (!closed.eq_at_precision(det))
            throw SymkError("kummer_norm: closed form disagrees with conjugate product");
    }
    return closed;
}

std::optional<LocalElem> LocalField::principal_unit_pth_root(const LocalElem& a) const {
    if (!mixed) {
        // residue characteristic != p: binomial/Newton series, p invertible
        if (laurent_residue->p == p)
            throw Unsupported("principal_unit_pth_root: equal characteristic p");
        LocalElem m = a - one();
        if (!m.zero && m.v < 1) return std::nullopt;
        LocalElem w = one();
        for (int it = 0; it < 64; ++it) {
            LocalElem fw = w.pow((i64)p) - a;
            if (fw.zero) return w;
            LocalElem dw = from_int((i64)p) * w.pow((i64)p - 1);
            w = w - fw / dw;
        }
        return std::nullopt;
    }
    LocalElem m = a - one();
    if (m.zero) {
        // a == 1 at precision
        return one();
    }
    long jv = m.v;
    Rat eps = epsilon();
    if (Rat(jv, 1) < eps || Rat(jv, 1) == eps) return std::nullopt;
    long e = e_abs;
    LocalElem pi = uniformizer();
    // w = 1 + pi^(j-e) s ; solve g(s) = (w^p - a)/pi^j = 0 by Newton (g' is a unit)
    LocalElem pj = pi.pow(jv);
    LocalElem pje = pi.pow(jv - e);
    auto gfun = [&](const LocalElem& s) {
        LocalElem w = one() + pje * s;
        return (w.pow((i64)p) - a) / pj;
    };
    auto dgfun = [&](const LocalElem& s) {
        LocalElem w = one() + pje * s;
        return from_int((i64)p) * w.pow((i64)p - 1) * pje / pj;
    };
    LocalElem s = zero();
    for (int it = 0; it < 64; ++it) {
        LocalElem gs = gfun(s);
        if (gs.zero) break;
        s = s - gs / dgfun(s);
    }
    if (!gfun(s).zero) return std::nullopt;
    return one() + pje * s;
}

} // namespace symk
