#include "symk/oracles.hpp"

namespace symk {

namespace {

bool is_plain_q2(const LocalFieldPtr& K) {
    return K->mixed && K->p == 2 && !K->has_y && K->steps.empty();
}

// unit part of a 2-adic element modulo 8
u64 unit_mod8(const LocalElem& u) {
    u64 r = 0;
    for (auto& [k, d] : u.digit_expansion(3)) {
        long off = k - u.v;
        if (off >= 0 && off < 3 && !d.is_zero()) r |= (u64)1 << off;
    }
    return r; // odd by construction
}

} // namespace

int hilbert2_q2(const LocalElem& a, const LocalElem& b) {
    const LocalFieldPtr& K = a.field;
    if (!is_plain_q2(K)) throw NoOracle("hilbert2_q2 is defined over the plain 2-adics");
    auto va = a.valuation(), vb = b.valuation();
    if (!va || !vb) throw PrecisionExhausted("hilbert2_q2: uncertified zero");
    LocalElem pi = K->uniformizer();
    LocalElem ua = a / pi.pow(*va);
    LocalElem ub = b / pi.pow(*vb);
    u64 u = unit_mod8(ua), v = unit_mod8(ub);
    auto eps = [](u64 x) { return ((x - 1) / 2) & 1; };
    auto om = [](u64 x) { return ((x * x - 1) / 8) & 1; };
    u64 e = eps(u) * eps(v) + (u64)(*va % 2) * om(v) + (u64)(*vb % 2) * om(u);
    return (e & 1) ? -1 : +1;
}

int hilbert2_value(const SymbolSum& s) {
    int out = +1;
    for (const auto& [c, sym] : s.entries) {
        int h = hilbert2_q2(sym.a, sym.b);
        if (c % 2) out *= h;
    }
    return out;
}

int hilbert2_bruteforce(i64 a, i64 b) {
    const i64 M = 64;
    i64 am = ((a % M) + M) % M, bm = ((b % M) + M) % M;
    for (i64 x = 0; x < M; ++x)
        for (i64 y = 0; y < M; ++y) {
            i64 rhs = (am * x * x + bm * y * y) % M;
            for (i64 z = 0; z < M; ++z) {
                if ((z * z) % M != rhs) continue;
                if ((x | y | z) & 1) return +1; // primitive solution
            }
        }
    return -1;
}

ResidueElem artin_schreier_pairing(const LocalElem& f, const LocalElem& g) {
    const LocalFieldPtr& K = f.field;
    if (K->mixed) throw NoOracle("pairing needs a Laurent series field");
    const FieldPtr& kb = K->residue_field();
    if (kb->kind != ResidueField::Kind::Prime && kb->kind != ResidueField::Kind::Finite)
        throw NoOracle("pairing needs finite residue constants");
    if (g.zero) throw DivisionByUncertifiedZero("pairing: g must be nonzero");
    // g' via the formal derivative of the digit expansion
    LocalElem dg = K->zero();
    {
        LocalElem t = K->uniformizer();
        for (auto& [k, d] : g.digit_expansion(g.rel)) {
            if (k == 0) continue;
            dg = dg + K->from_int(k) * K->lift(d) * t.pow(k - 1);
        }
    }
    LocalElem w = f * dg / g;
    if (w.zero) return ResidueField::prime(kb->p)->zero();
    // residue = coefficient of t^{-1}
    if (w.v > -1) return ResidueField::prime(kb->p)->zero();
    if (w.v + w.rel <= -1)
        throw PoleCollision("pairing: residue coefficient below certified precision");
    ResidueElem coeff = kb->zero();
    for (auto& [k, d] : w.digit_expansion(w.rel))
        if (k == -1) coeff = d;
    // absolute trace to F_p
    ResidueElem tr = coeff;
    ResidueElem acc = coeff;
    int deg = kb->kind == ResidueField::Kind::Prime ? 1 : kb->degree;
    for (int i = 1; i < deg; ++i) {
        acc = acc.pow((i64)kb->p);
        tr = tr + acc;
    }
    auto Fp = ResidueField::prime(kb->p);
    return Fp->from_int(tr.coords.empty() ? 0 : (i64)tr.coords[0]);
}

bool has_oracle(const LocalFieldPtr& K) {
    if (is_plain_q2(K)) return true;
    u64 rc = K->mixed ? K->p : K->residue_field()->p;
    if (rc != K->p &&
        (K->residue_field()->kind == ResidueField::Kind::Prime ||
         K->residue_field()->kind == ResidueField::Kind::Finite))
        return true;
    return false;
}

bool oracle_equal(const SymbolSum& s1, const SymbolSum& s2) {
    const LocalFieldPtr& K = s1.field ? s1.field : s2.field;
    if (!K) throw NoOracle("oracle_equal: no field");
    if (is_plain_q2(K)) return hilbert2_value(s1) == hilbert2_value(s2);
    u64 rc = K->mixed ? K->p : K->residue_field()->p;
    if (rc != K->p) {
        ResidueElem r1 = tame_residue(s1);
        ResidueElem r2 = tame_residue(s2);
        return same_class_mod_pth_powers(r1, r2, K->p);
    }
    throw NoOracle("no oracle covers this field");
}

} // namespace symk
