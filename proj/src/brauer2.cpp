#include "symk/brauer2.hpp"

#include <cmath>
#include <map>
#include <set>

namespace symk {

ResidueElem Brauer2Carrier::y() const {
    return embed_into(inner->generator(), K);
}
ResidueElem Brauer2Carrier::t() const { return K->generator(); }

Brauer2Carrier make_brauer2_carrier(int constants_degree) {
    Brauer2Carrier C;
    C.constants = constants_degree <= 1 ? ResidueField::prime(2)
                                        : ResidueField::finite(2, constants_degree);
    C.inner = ResidueField::rational_function(C.constants, "y");
    C.K = ResidueField::rational_function(C.inner, "t");
    return C;
}

namespace {

// square root of an inner element (constants(y), perfect constants)
ResidueElem inner_sqrt(const ResidueElem& f) {
    auto r = pth_root(f);
    if (!r) throw std::logic_error("inner_sqrt: element is not a square");
    return *r;
}

// decompose an inner element c = a^2 + b^2 y
std::pair<ResidueElem, ResidueElem> inner_decompose(const ResidueElem& c) {
    auto parts = frobenius_decompose(c);
    return {parts[0], parts[1]};
}

} // namespace

ResidueElem sqrt2(const Brauer2Carrier& C, const ResidueElem& f) {
    if (f.is_zero()) return f;
    // f = u/v = u v / v^2 ; sqrt(u v) coefficientwise on even t-powers
    poly::CPoly w = poly::mul(f.num, f.den);
    poly::CPoly root;
    for (size_t i = 0; i < w.size(); ++i) {
        if (w[i].is_zero()) continue;
        if (i % 2) throw std::logic_error("sqrt2: odd t-exponent");
        if (root.size() <= i / 2) root.resize(i / 2 + 1, C.inner->zero());
        root[i / 2] = inner_sqrt(w[i]);
    }
    return make_rational(C.K, root, f.den);
}

std::array<ResidueElem, 4> two_basis_decompose(const Brauer2Carrier& C, const ResidueElem& lam) {
    if (!same_field(lam.field, C.K)) throw FieldMismatch("two_basis_decompose: wrong carrier");
    std::array<ResidueElem, 4> out{C.K->zero(), C.K->zero(), C.K->zero(), C.K->zero()};
    if (lam.is_zero()) return out;
    // lambda = u/v = (u v)/v^2; split w := u v by t-parity and the inner basis
    poly::CPoly w = poly::mul(lam.num, lam.den);
    poly::CPoly r0, r1, r2, r3; // sqrt parts: w = r0^2 + r1^2 y + r2^2 t + r3^2 y t
    auto put = [&](poly::CPoly& dst, size_t j, const ResidueElem& v) {
        if (dst.size() <= j) dst.resize(j + 1, C.inner->zero());
        dst[j] = v;
    };
    for (size_t i = 0; i < w.size(); ++i) {
        if (w[i].is_zero()) continue;
        auto [a, b] = inner_decompose(w[i]); // w_i = a^2 + b^2 y
        if (i % 2 == 0) {
            put(r0, i / 2, a);
            put(r1, i / 2, b);
        } else {
            put(r2, (i - 1) / 2, a);
            put(r3, (i - 1) / 2, b);
        }
    }
    ResidueElem v = make_rational(C.K, lam.den, {C.inner->one()});
    out[0] = make_rational(C.K, poly::trim(r0), {C.inner->one()}) / v;
    out[1] = make_rational(C.K, poly::trim(r1), {C.inner->one()}) / v;
    out[2] = make_rational(C.K, poly::trim(r2), {C.inner->one()}) / v;
    out[3] = make_rational(C.K, poly::trim(r3), {C.inner->one()}) / v;
    return out;
}

Form2 differentiate2(const Brauer2Carrier& C, const ResidueElem& f) {
    // d/dt: the outer formal derivative; d/dy: coefficientwise inner derivative
    using namespace poly;
    CPoly dn_t = derivative(f.num), dd_t = derivative(f.den);
    CPoly nt = sub(mul(dn_t, f.den), mul(f.num, dd_t));
    CPoly dsq = mul(f.den, f.den);
    ResidueElem lt = make_rational(C.K, nt, dsq);
    auto dy_poly = [&](const CPoly& a) {
        CPoly r;
        r.reserve(a.size());
        for (const auto& c : a) r.push_back(differentiate(c).coeff);
        return trim(std::move(r));
    };
    CPoly ny = sub(mul(dy_poly(f.num), f.den), mul(f.num, dy_poly(f.den)));
    ResidueElem ly = make_rational(C.K, ny, dsq);
    return {ly, lt};
}

Form2 inverse_cartier2(const Brauer2Carrier& C, const ResidueElem& lam, int basis) {
    if (basis != 0 && basis != 1) throw NotBasisAligned("inverse_cartier2: basis must be y or t");
    ResidueElem g = basis == 0 ? C.y() : C.t();
    ResidueElem v = lam * lam * g;
    if (basis == 0) return {v, C.K->zero()};
    return {C.K->zero(), v};
}

std::optional<ResidueElem> exactness_witness2(const Brauer2Carrier& C, const Form2& omega) {
    // Laurent-polynomial forms only: integrate the dy part, then the rest in t
    auto is_poly = [&](const ResidueElem& x) { return poly::deg(x.den) == 0; };
    if (!is_poly(omega.ly) || !is_poly(omega.lt))
        throw Unsupported("exactness_witness2: polynomial forms only");
    ResidueElem F1 = C.K->zero();
    ResidueElem yv = C.y();
    // integrate ly in y: every inner coefficient must have zero y-odd part...
    // ly = sum_j c_j(y) t^j; c_j = a^2 + b^2 y integrates iff b = 0 is not
    // needed: int(y^(2k)) = y^(2k+1); int(y^(2k+1)) obstructs
    {
        poly::CPoly n = omega.ly.num;
        poly::CPoly acc;
        for (size_t j = 0; j < n.size(); ++j) {
            if (n[j].is_zero()) continue;
            // inner integral in y: c(y) -> C(y) with C' = c; fails when c has
            // odd-exponent terms... in char 2, d/dy(y^(a+1)) = (a+1) y^a, so
            // only even a integrate; split c accordingly
            const ResidueElem& c = n[j];
            if (poly::deg(c.den) != 0) throw Unsupported("exactness_witness2: polynomial forms only");
            poly::CPoly ci;
            for (size_t a = 0; a < c.num.size(); ++a) {
                if (c.num[a].is_zero()) continue;
                if (a % 2 == 1) return std::nullopt; // odd y-exponent obstructs
                if (ci.size() <= a + 1) ci.resize(a + 2, C.constants->zero());
                ci[a + 1] = c.num[a];
            }
            ResidueElem Ci = make_rational(C.inner, poly::trim(ci), {C.constants->one()});
            if (acc.size() <= j) acc.resize(j + 1, C.inner->zero());
            acc[j] = Ci;
        }
        F1 = make_rational(C.K, poly::trim(acc), {C.inner->one()});
    }
    Form2 rest = omega - differentiate2(C, F1);
    if (!rest.ly.is_zero()) return std::nullopt;
    // integrate the remaining dt part in t
    poly::CPoly n = rest.lt.num;
    poly::CPoly acc;
    for (size_t j = 0; j < n.size(); ++j) {
        if (n[j].is_zero()) continue;
        if (j % 2 == 1) return std::nullopt; // odd t-exponent obstructs
        if (acc.size() <= j + 1) acc.resize(j + 2, C.inner->zero());
        acc[j + 1] = n[j];
    }
    ResidueElem F2 = make_rational(C.K, poly::trim(acc), {C.inner->one()});
    ResidueElem F = F1 + F2;
    if (!(differentiate2(C, F) == omega)) return std::nullopt;
    return F;
}

bool verify_witness(const Brauer2Carrier& C, const Form2& in, const Form2& out,
                    const BrauerWitness& w) {
    Form2 moves = differentiate2(C, w.w0);
    for (const auto& [lam, g] : w.w1) {
        // (gamma - 1)(lambda dg) with the canonical representative
        Form2 dg = differentiate2(C, g);
        ResidueElem c = lam * lam * g - lam;
        moves = moves + Form2{c * dg.ly, c * dg.lt};
    }
    return (in - out) == moves;
}

namespace {

// Solve wp(eta) + slack * x^2 = tau over the (y, t) basis, wp(z) = z^2 + z.
// sigma names the component carrying the free square: 1 -> y, 2 -> t,
// 3 -> yt.  Nullopt when the recursion bottoms out at a nonsplit constant.
std::optional<std::pair<ResidueElem, ResidueElem>> solve_wp(const Brauer2Carrier& C,
                                                            const ResidueElem& tau, int sigma,
                                                            int depth) {
    if (tau.is_zero()) return std::make_pair(C.K->zero(), C.K->zero());
    if (depth > 48) return std::nullopt;
    if (poly::deg(tau.num) == 0 && poly::deg(tau.den) == 0) {
        const ResidueElem& c0 = tau.num[0];
        if (poly::deg(c0.num) == 0 && poly::deg(c0.den) == 0) {
            ResidueElem cst = c0.num.empty() ? C.constants->zero() : c0.num[0];
            if (auto e = artin_schreier_solve(cst))
                return std::make_pair(embed_into(*e, C.K), C.K->zero());
            return std::nullopt;
        }
    }
    ResidueElem yv = C.y(), tv = C.t();
    auto T = two_basis_decompose(C, tau);
    ResidueElem tnext = T[0];
    if (sigma != 1) tnext = tnext + T[1] * T[1] * yv;
    if (sigma != 2) tnext = tnext + T[2] * T[2] * tv;
    if (sigma != 3) tnext = tnext + T[3] * T[3] * yv * tv;
    auto sub = solve_wp(C, tnext, sigma, depth + 1);
    if (!sub) return std::nullopt;
    auto [e, f] = *sub;
    ResidueElem eta = e * e;
    eta = eta + (sigma == 1 ? f : T[1]) * (sigma == 1 ? f : T[1]) * yv;
    eta = eta + (sigma == 2 ? f : T[2]) * (sigma == 2 ? f : T[2]) * tv;
    eta = eta + (sigma == 3 ? f : T[3]) * (sigma == 3 ? f : T[3]) * yv * tv;
    ResidueElem x = T[(size_t)sigma] + f;
    return std::make_pair(eta, x);
}

// Laurent-monomial expansion of a carrier element: map (ey, et) -> bit,
// or nullopt when the denominator is not a monomial
std::optional<std::map<std::pair<int, int>, int>> to_monomials(const Brauer2Carrier&,
                                                               const ResidueElem& f) {
    std::map<std::pair<int, int>, int> out;
    if (f.is_zero()) return out;
    // outer denominator must be a t-monomial with a y-monomial coefficient
    int dt = -1;
    for (size_t i = 0; i < f.den.size(); ++i)
        if (!f.den[i].is_zero()) {
            if (dt >= 0) return std::nullopt;
            dt = (int)i;
        }
    const ResidueElem& dc = f.den[(size_t)dt];
    int dy = -1;
    if (poly::deg(dc.den) != 0) return std::nullopt;
    for (size_t i = 0; i < dc.num.size(); ++i)
        if (!dc.num[i].is_zero()) {
            if (dy >= 0) return std::nullopt;
            dy = (int)i;
        }
    if (!dc.num[(size_t)dy].is_one() || !dc.den[0].is_one()) return std::nullopt;
    for (size_t i = 0; i < f.num.size(); ++i) {
        const ResidueElem& c = f.num[i];
        if (c.is_zero()) continue;
        if (poly::deg(c.den) != 0 || !c.den[0].is_one()) return std::nullopt;
        for (size_t j = 0; j < c.num.size(); ++j) {
            if (c.num[j].is_zero()) continue;
            if (!c.num[j].is_one()) return std::nullopt; // F_2 coefficients only
            out[{(int)j - dy, (int)i - dt}] ^= 1;
        }
    }
    for (auto it = out.begin(); it != out.end();) {
        if (!it->second) it = out.erase(it);
        else ++it;
    }
    return out;
}

ResidueElem from_monomials(const Brauer2Carrier& C,
                           const std::map<std::pair<int, int>, int>& m) {
    ResidueElem f = C.K->zero();
    ResidueElem y = C.y(), t = C.t();
    for (const auto& [e, bit] : m)
        if (bit) f = f + y.pow(e.first) * t.pow(e.second);
    return f;
}

// complete bounded-degree decision of wp(e) + W x^2 = tau for F_2-coefficient
// Laurent data: squaring is F_2-linear on coefficient vectors
std::optional<std::pair<ResidueElem, ResidueElem>> solve_wp_linear(const Brauer2Carrier& C,
                                                                   const ResidueElem& tau,
                                                                   int sigma) {
    if (C.constants->kind != ResidueField::Kind::Prime) return std::nullopt;
    auto mt = to_monomials(C, tau);
    if (!mt) return std::nullopt;
    int lo = 0, hi = 0;
    for (auto& [e, bit] : *mt) {
        lo = std::min({lo, e.first, e.second});
        hi = std::max({hi, e.first, e.second});
    }
    int wy = sigma & 1, wt = sigma >> 1;
    // candidate supports: e in [lo2, hi2]^2, x in the same range
    int lo2 = std::min(lo, (lo - wy) / 2 - 1);
    int hi2 = std::max(hi, hi / 2 + 1) + 1;
    int W = hi2 - lo2 + 1;
    if (W > 26) return std::nullopt; // keep the system small
    int nvars = 2 * W * W;
    auto vid = [&](int which, int a, int b) { return which * W * W + (a - lo2) * W + (b - lo2); };
    // equations indexed by monomials in [2*lo2-1, 2*hi2+1]^2
    int qlo = 2 * lo2 - 1, qhi = 2 * hi2 + 1;
    int Q = qhi - qlo + 1;
    auto eqid = [&](int a, int b) { return (a - qlo) * Q + (b - qlo); };
    std::vector<std::vector<u64>> rows((size_t)(Q * Q),
                                       std::vector<u64>((size_t)(nvars + 64) / 64 + 1, 0));
    std::vector<int> rhs((size_t)(Q * Q), 0);
    auto flip = [&](int eq, int var) { rows[(size_t)eq][(size_t)var >> 6] ^= (u64)1 << (var & 63); };
    for (int a = lo2; a <= hi2; ++a)
        for (int b = lo2; b <= hi2; ++b) {
            int ve = vid(0, a, b), vx = vid(1, a, b);
            // e term: (a,b); e^2 term: (2a, 2b)
            flip(eqid(a, b), ve);
            if (2 * a >= qlo && 2 * a <= qhi && 2 * b >= qlo && 2 * b <= qhi)
                flip(eqid(2 * a, 2 * b), ve);
            int xa = 2 * a + wy, xb = 2 * b + wt;
            if (xa >= qlo && xa <= qhi && xb >= qlo && xb <= qhi) flip(eqid(xa, xb), vx);
        }
    for (auto& [e, bit] : *mt)
        if (bit) rhs[(size_t)eqid(e.first, e.second)] ^= 1;
    // Gaussian elimination
    int nrows = Q * Q;
    std::vector<int> pivot_of_col((size_t)nvars, -1);
    int rank = 0;
    for (int col = 0; col < nvars && rank < nrows; ++col) {
        int sel = -1;
        for (int r = rank; r < nrows; ++r)
            if ((rows[(size_t)r][(size_t)col >> 6] >> (col & 63)) & 1) { sel = r; break; }
        if (sel < 0) continue;
        std::swap(rows[(size_t)sel], rows[(size_t)rank]);
        std::swap(rhs[(size_t)sel], rhs[(size_t)rank]);
        for (int r = 0; r < nrows; ++r) {
            if (r == rank) continue;
            if ((rows[(size_t)r][(size_t)col >> 6] >> (col & 63)) & 1) {
                for (size_t wd = 0; wd < rows[(size_t)r].size(); ++wd)
                    rows[(size_t)r][wd] ^= rows[(size_t)rank][wd];
                rhs[(size_t)r] ^= rhs[(size_t)rank];
            }
        }
        pivot_of_col[(size_t)col] = rank;
        ++rank;
    }
    for (int r = rank; r < nrows; ++r)
        if (rhs[(size_t)r]) return std::nullopt;
    std::map<std::pair<int, int>, int> me, mx;
    for (int a = lo2; a <= hi2; ++a)
        for (int b = lo2; b <= hi2; ++b) {
            int pe = pivot_of_col[(size_t)vid(0, a, b)];
            int px = pivot_of_col[(size_t)vid(1, a, b)];
            if (pe >= 0 && rhs[(size_t)pe]) me[{a, b}] = 1;
            if (px >= 0 && rhs[(size_t)px]) mx[{a, b}] = 1;
        }
    return std::make_pair(from_monomials(C, me), from_monomials(C, mx));
}

// F_2-linear solver for S1 wp(w1) + S2 wp(w2) = target, with S1, S2
// squarefree monomials in (y, t); complete within the degree window
std::optional<std::pair<ResidueElem, ResidueElem>> joint_wp_linear(
    const Brauer2Carrier& C, const ResidueElem& target, std::pair<int, int> s1,
    std::pair<int, int> s2) {
    if (C.constants->kind != ResidueField::Kind::Prime) return std::nullopt;
    auto mt = to_monomials(C, target);
    if (!mt) return std::nullopt;
    int lo = -1, hi = 1;
    for (auto& [e, bit] : *mt) {
        lo = std::min({lo, e.first, e.second});
        hi = std::max({hi, e.first, e.second});
    }
    int lo2 = std::min(lo - 1, (lo - 1) / 2 - 1);
    int hi2 = std::max(hi + 1, hi / 2 + 2);
    int W = hi2 - lo2 + 1;
    if (W > 30) return std::nullopt;
    int nvars = 2 * W * W;
    auto vid = [&](int which, int a, int b) { return which * W * W + (a - lo2) * W + (b - lo2); };
    int qlo = 2 * lo2 - 2, qhi = 2 * hi2 + 2;
    int Q = qhi - qlo + 1;
    auto eqid = [&](int a, int b) { return (a - qlo) * Q + (b - qlo); };
    size_t words = (size_t)(nvars + 64) / 64 + 1;
    std::vector<std::vector<u64>> rows((size_t)(Q * Q), std::vector<u64>(words, 0));
    std::vector<int> rhs((size_t)(Q * Q), 0);
    auto flip = [&](int eq, int var) { rows[(size_t)eq][(size_t)var >> 6] ^= (u64)1 << (var & 63); };
    auto inq = [&](int a, int b) { return a >= qlo && a <= qhi && b >= qlo && b <= qhi; };
    for (int a = lo2; a <= hi2; ++a)
        for (int b = lo2; b <= hi2; ++b) {
            for (int which = 0; which < 2; ++which) {
                auto s = which == 0 ? s1 : s2;
                int v = vid(which, a, b);
                if (inq(2 * a + s.first, 2 * b + s.second))
                    flip(eqid(2 * a + s.first, 2 * b + s.second), v);
                if (inq(a + s.first, b + s.second))
                    flip(eqid(a + s.first, b + s.second), v);
            }
        }
    for (auto& [e, bit] : *mt) {
        if (!bit) continue;
        if (!inq(e.first, e.second)) return std::nullopt;
        rhs[(size_t)eqid(e.first, e.second)] ^= 1;
    }
    int nrows = Q * Q;
    std::vector<int> pivot_of_col((size_t)nvars, -1);
    int rank = 0;
    for (int col = 0; col < nvars && rank < nrows; ++col) {
        int sel = -1;
        for (int r = rank; r < nrows; ++r)
            if ((rows[(size_t)r][(size_t)col >> 6] >> (col & 63)) & 1) { sel = r; break; }
        if (sel < 0) continue;
        std::swap(rows[(size_t)sel], rows[(size_t)rank]);
        std::swap(rhs[(size_t)sel], rhs[(size_t)rank]);
        for (int r = 0; r < nrows; ++r) {
            if (r == rank) continue;
            if ((rows[(size_t)r][(size_t)col >> 6] >> (col & 63)) & 1) {
                for (size_t wd = 0; wd < words; ++wd) rows[(size_t)r][wd] ^= rows[(size_t)rank][wd];
                rhs[(size_t)r] ^= rhs[(size_t)rank];
            }
        }
        pivot_of_col[(size_t)col] = rank;
        ++rank;
    }
    for (int r = rank; r < nrows; ++r)
        if (rhs[(size_t)r]) return std::nullopt;
    std::map<std::pair<int, int>, int> m1, m2;
    for (int a = lo2; a <= hi2; ++a)
        for (int b = lo2; b <= hi2; ++b) {
            int p1 = pivot_of_col[(size_t)vid(0, a, b)];
            int p2 = pivot_of_col[(size_t)vid(1, a, b)];
            if (p1 >= 0 && rhs[(size_t)p1]) m1[{a, b}] = 1;
            if (p2 >= 0 && rhs[(size_t)p2]) m2[{a, b}] = 1;
        }
    return std::make_pair(from_monomials(C, m1), from_monomials(C, m2));
}

// slot monomials for the endgame, as F_2^2 exponent vectors over (y, t)
struct Slot {
    int ey = 0, et = 0; // in {0,1}, not both zero for symbol slots
    ResidueElem value(const Brauer2Carrier& C) const {
        ResidueElem v = C.K->one();
        if (ey) v = v * C.y();
        if (et) v = v * C.t();
        return v;
    }
    Slot operator+(const Slot& o) const { return {ey ^ o.ey, et ^ o.et}; }
    bool zero() const { return !ey && !et; }
    int sigma() const { return ey + 2 * et; } // component index of the monomial
};

// one Artin-Schreier style summand [first, slot): the form first * dlog(slot)
struct ASEntry {
    ResidueElem first;
    Slot slot;
};

} // namespace

QuaternionReduced quaternion_reduce(const Brauer2Carrier& C, const Form2& omega) {
    ResidueElem yv = C.y(), tv = C.t();
    ResidueElem lam = omega.ly, mu = omega.lt;
    BrauerWitness w;
    w.w0 = C.K->zero();

    long maxdeg = 4;
    for (const ResidueElem* e : {&omega.ly, &omega.lt})
        maxdeg = std::max<long>(maxdeg, poly::deg(e->num) + poly::deg(e->den) + 2);
    const int iter_cap = 4 * (2 + (int)std::log2((double)maxdeg + 1)) + 64;

    // fixpoint pass in the (y, t) coordinates
    int sfeedback = 0;
    std::set<std::string> seen;
    for (int iter = 0;; ++iter) {
        if (iter > iter_cap) throw IterationCapExceeded("quaternion_reduce: fixpoint cap");
        std::string key = lam.to_string() + "|" + mu.to_string();
        if (!seen.insert(key).second && !(lam.is_zero() && mu.is_zero()))
            throw IterationCapExceeded("quaternion_reduce: cycle");
        auto L = two_basis_decompose(C, lam);
        auto M = two_basis_decompose(C, mu);
        if (!L[0].is_zero()) w.w0 = w.w0 + L[0] * L[0] * yv;
        if (!M[0].is_zero()) w.w0 = w.w0 + M[0] * M[0] * tv;
        if (!L[1].is_zero()) w.w1.push_back({L[1], yv});
        if (!M[2].is_zero()) w.w1.push_back({M[2], tv});
        ResidueElem nl, nm;
        if (M[3].is_zero()) {
            if (!M[1].is_zero()) w.w0 = w.w0 + M[1] * M[1] * yv * tv;
            nl = L[1] + (L[2] * L[2] + M[1] * M[1]) * tv + L[3] * L[3] * yv * tv;
            nm = M[2];
        } else {
            if (!L[2].is_zero()) w.w0 = w.w0 + L[2] * L[2] * yv * tv;
            nl = L[1] + L[3] * L[3] * yv * tv;
            nm = M[2] + (M[1] * M[1] + L[2] * L[2]) * yv + M[3] * M[3] * yv * tv;
        }
        bool stable = (nl == lam) && (nm == mu);
        lam = nl;
        mu = nm;
        if (!stable) continue;

        // gamma-fixed parts: theta dlog(g) with theta = wp(eta) + g x^2 equals
        // (gamma-1)((eta/g) dg) + d(x^2 g)
        auto Lf = two_basis_decompose(C, lam);
        auto Mf = two_basis_decompose(C, mu);
        ResidueElem lfix = lam + Lf[3] * Lf[3] * yv * tv;
        ResidueElem mfix = Mf[2];
        bool changed = false;
        if (!lfix.is_zero()) {
            auto sol = solve_wp(C, lfix * yv, 1, 0);
            if (!sol) sol = solve_wp_linear(C, lfix * yv, 1);
            if (sol) {
                auto [eta, x] = *sol;
                w.w1.push_back({eta / yv, yv});
                w.w0 = w.w0 + x * x * yv;
                lam = lam + lfix;
                changed = true;
            }
        }
        if (!mfix.is_zero()) {
            auto sol = solve_wp(C, mfix * tv, 2, 0);
            if (!sol) sol = solve_wp_linear(C, mfix * tv, 2);
            if (sol) {
                auto [eta, x] = *sol;
                w.w1.push_back({eta / tv, tv});
                w.w0 = w.w0 + x * x * tv;
                mu = mu + mfix;
                changed = true;
            }
        }
        if (changed) continue;

        // the displayed final shape: when s = m1 l3 / m3 vanishes, omega is
        // exactly (yt + c y) d(l3^2 y + m3^2 t); otherwise one gamma move on
        // s dy lowers the residual and the pass repeats (bounded)
        {
            auto L2 = two_basis_decompose(C, lam);
            auto M2 = two_basis_decompose(C, mu);
            ResidueElem l3 = L2[3], m1 = M2[1], m3 = M2[3];
            bool clean = (lam + l3 * l3 * yv * tv).is_zero() &&
                         (mu + m1 * m1 * yv + m3 * m3 * yv * tv).is_zero();
            if (clean && !m3.is_zero() && !lam.is_zero()) {
                ResidueElem s = m1 * l3 / m3;
                if (s.is_zero()) {
                    ResidueElem g = l3 * l3 * yv + m3 * m3 * tv;
                    ResidueElem f = yv * tv + (m1 * m1) / (m3 * m3) * yv;
                    QuaternionReduced out;
                    out.f = f;
                    out.g = g;
                    out.out = {f * l3 * l3, f * m3 * m3};
                    out.w = w;
                    return out;
                }
                if (sfeedback < 6) {
                    ++sfeedback;
                    w.w1.push_back({s, yv});
                    lam = lam + s * s * yv + s;
                    continue;
                }
            }
        }
        break;
    }

    // terminal: lam dy + mu dt with lam = lfix + l3^2 yt, mu = m1^2 y + m3^2 yt
    // as Artin-Schreier summands [lam*y, y) + [mu*t, t)
    std::vector<ASEntry> entries;
    if (!lam.is_zero()) entries.push_back({lam * yv, Slot{1, 0}});
    if (!mu.is_zero()) entries.push_back({mu * tv, Slot{0, 1}});
    Slot dlog_cfg{0, 0};

    // Endgame over the summands [P, slot): same-slot sums add, a split peels
    // [1, slot) into the dlog pool, and the joint common-slot solve finishes
    // a pair [P, S1) + [Q, S2) through S1 N1 = S2 N2.
    auto solve_full = [&](const ResidueElem& tau, int sigma) {
        auto r = solve_wp(C, tau, sigma, 0);
        if (r) return r;
        return solve_wp_linear(C, tau, sigma);
    };
    auto try_move = [&](ASEntry& e, const Slot& to) -> bool {
        Slot prod = e.slot + to;
        if (prod.zero()) return true;
        auto sol = solve_full(e.first, prod.sigma());
        if (!sol) return false;
        auto [ww, x] = *sol;
        ResidueElem S1 = e.slot.value(C);
        if (x.is_zero()) {
            w.w1.push_back({ww / S1, S1});
            e.first = C.K->zero();
            return true;
        }
        ResidueElem N = ww * ww + ww + e.first;
        w.w0 = w.w0 + N;
        w.w1.push_back({ww / N, N});
        e.slot = to;
        return true;
    };
    // merge [P, S1) + [Q, S2) into a single term via the joint linear solve
    auto joint_finish = [&](const ASEntry& e1, const ASEntry& e2)
        -> std::optional<QuaternionReduced> {
        ResidueElem S1 = e1.slot.value(C), S2 = e2.slot.value(C);
        auto joint = joint_wp_linear(C, S1 * e1.first + S2 * e2.first,
                                     {e1.slot.ey, e1.slot.et}, {e2.slot.ey, e2.slot.et});
        if (!joint) return std::nullopt;
        auto [w1, w2] = *joint;
        ResidueElem N1 = w1 * w1 + w1 + e1.first;
        ResidueElem N2 = w2 * w2 + w2 + e2.first;
        if (N1.is_zero() || N2.is_zero()) {
            // one side is a pure gamma move; drop it and report the other
            const ASEntry& live = N1.is_zero() ? e2 : e1;
            const ASEntry& dead = N1.is_zero() ? e1 : e2;
            const ResidueElem& wd = N1.is_zero() ? w1 : w2;
            ResidueElem Sd = dead.slot.value(C);
            w.w1.push_back({wd / Sd, Sd});
            ResidueElem H = live.slot.value(C);
            QuaternionReduced out;
            out.f = live.first / H;
            out.g = H;
            Form2 dH = differentiate2(C, H);
            out.out = {out.f * dH.ly, out.f * dH.lt};
            out.w = w;
            return out;
        }
        w.w0 = w.w0 + N1;
        w.w1.push_back({w1 / N1, N1});
        w.w0 = w.w0 + N2;
        w.w1.push_back({w2 / N2, N2});
        ResidueElem H = S1 * N1; // equals S2 * N2
        ResidueElem F = e1.first + e2.first;
        QuaternionReduced out;
        out.f = F / H;
        out.g = H;
        Form2 dH = differentiate2(C, H);
        out.out = {out.f * dH.ly, out.f * dH.lt};
        out.w = w;
        return out;
    };

    int guard = 0;
    while (true) {
        if (++guard > 24) throw IterationCapExceeded("quaternion_reduce: endgame cap");
        for (size_t i = 0; i < entries.size();) {
            if (entries[i].first.is_zero()) entries.erase(entries.begin() + (long)i);
            else ++i;
        }
        // same-slot entries add
        for (size_t i = 0; i + 1 < entries.size();) {
            bool merged = false;
            for (size_t j = i + 1; j < entries.size(); ++j) {
                if (entries[i].slot.ey == entries[j].slot.ey &&
                    entries[i].slot.et == entries[j].slot.et) {
                    entries[i].first = entries[i].first + entries[j].first;
                    entries.erase(entries.begin() + (long)j);
                    merged = true;
                    break;
                }
            }
            if (!merged) ++i;
        }
        if (entries.empty()) {
            if (dlog_cfg.zero()) {
                QuaternionReduced out;
                out.f = C.K->zero();
                out.g = yv;
                out.out = {C.K->zero(), C.K->zero()};
                out.w = w;
                return out;
            }
            entries.push_back({C.K->one(), dlog_cfg});
            dlog_cfg = Slot{0, 0};
            continue;
        }
        // fold the dlog pool into a same-slot entry when possible
        if (!dlog_cfg.zero()) {
            bool folded = false;
            for (auto& e : entries) {
                if (e.slot.ey == dlog_cfg.ey && e.slot.et == dlog_cfg.et) {
                    e.first = e.first + C.K->one();
                    dlog_cfg = Slot{0, 0};
                    folded = true;
                    break;
                }
            }
            if (folded) continue;
            entries.push_back({C.K->one(), dlog_cfg});
            dlog_cfg = Slot{0, 0};
            continue;
        }
        if (entries.size() == 1) {
            ASEntry& e = entries[0];
            ResidueElem H = e.slot.value(C);
            QuaternionReduced out;
            out.f = e.first / H;
            out.g = H;
            Form2 dH = differentiate2(C, H);
            out.out = {out.f * dH.ly, out.f * dH.lt};
            out.w = w;
            return out;
        }
        if (entries.size() == 2) {
            if (auto fin = joint_finish(entries[0], entries[1])) return *fin;
        }
        // consolidate: single moves toward fewer distinct slots
        {
            bool acted = false;
            for (size_t i = 0; i < entries.size() && !acted; ++i)
                for (size_t j = 0; j < entries.size() && !acted; ++j) {
                    if (i == j) continue;
                    Slot prod = entries[i].slot + entries[j].slot;
                    if (prod.zero()) continue;
                    if (solve_full(entries[i].first, prod.sigma()).has_value()) {
                        try_move(entries[i], entries[j].slot);
                        acted = true;
                    }
                }
            if (acted) continue;
        }
        // last resort: peel a dlog off the first entry (flips constant cores)
        entries[0].first = entries[0].first + C.K->one();
        dlog_cfg = dlog_cfg + entries[0].slot;
        continue;
    }
}

ResidueElem specialized_pairing_invariant(const Brauer2Carrier& C, const Form2& omega,
                                          const ResidueElem& c, int basis) {
    // substitute the `basis` variable by the constant c and read the residue
    // trace of the surviving part over constants((t))
    if (!same_field(c.field, C.constants)) throw FieldMismatch("specialization constant");
    // build constants((u)) at generous precision
    static std::map<std::string, LocalFieldPtr> cache;
    std::string ck = C.constants->describe();
    LocalFieldPtr L;
    auto it = cache.find(ck);
    if (it != cache.end()) L = it->second;
    else {
        nlohmann::ordered_json j;
        j["p"] = 2;
        j["precision"] = 64;
        j["construction"] = nlohmann::ordered_json::array();
        nlohmann::ordered_json s;
        s["kind"] = "laurent";
        s["variable"] = "u";
        s["residue"] = C.constants->kind == ResidueField::Kind::Prime
                           ? nlohmann::ordered_json{{"kind", "prime"}, {"p", 2}}
                           : nlohmann::ordered_json{{"kind", "finite"},
                                                    {"p", 2},
                                                    {"degree", C.constants->degree}};
        j["construction"].push_back(s);
        L = LocalField::from_json(j);
        cache[ck] = L;
    }

    // specialize: inner elements are rational in y; outer polynomials in t
    auto specialize_inner = [&](const ResidueElem& f) -> ResidueElem {
        // f in constants(y); evaluate at y = c (denominator must not vanish)
        ResidueElem n = poly::is_zero(f.num) ? C.constants->zero() : poly::eval(f.num, c);
        ResidueElem d = poly::eval(f.den, c);
        if (d.is_zero()) throw PoleCollision("specialization hits a pole");
        return n / d;
    };
    auto to_series = [&](const ResidueElem& f) -> LocalElem {
        // f rational in the surviving variable over constants -> series in u
        LocalElem num = L->zero(), den = L->zero();
        LocalElem u = L->uniformizer();
        for (size_t i = 0; i < f.num.size(); ++i)
            num = num + L->lift(f.num[i]) * u.pow((i64)i);
        for (size_t i = 0; i < f.den.size(); ++i)
            den = den + L->lift(f.den[i]) * u.pow((i64)i);
        if (poly::is_zero(f.num)) return L->zero();
        return num / den;
    };

    ResidueElem part = basis == 0 ? omega.lt : omega.ly; // surviving component
    // collect the surviving-variable rational function with inner specialized
    // basis == 0: substitute y := c in lt(y, t): coefficients specialize
    ResidueElem surv;
    if (basis == 0) {
        poly::CPoly n, d;
        for (const auto& ci : part.num) n.push_back(specialize_inner(ci));
        for (const auto& ci : part.den) d.push_back(specialize_inner(ci));
        // rational in t over constants
        auto Kt = ResidueField::rational_function(C.constants, "t");
        surv = make_rational(Kt, std::move(n), std::move(d));
    } else {
        // substitute t := c: evaluate the outer polynomial at c inside inner
        ResidueElem cK = embed_into(c, C.inner);
        ResidueElem n = poly::is_zero(part.num) ? C.inner->zero() : poly::eval(part.num, cK);
        ResidueElem d = poly::eval(part.den, cK);
        if (d.is_zero()) throw PoleCollision("specialization hits a pole");
        surv = n / d; // rational in y over constants
    }
    LocalElem x = to_series(surv);
    // invariant of x d(var): trace of the coefficient of var^{-1}
    auto Fp = ResidueField::prime(2);
    if (x.zero) return Fp->zero();
    ResidueElem coeff = C.constants->zero();
    for (auto& [k, dg] : x.digit_expansion(x.rel))
        if (k == -1) coeff = dg;
    ResidueElem tr = coeff;
    ResidueElem acc = coeff;
    int deg = C.constants->kind == ResidueField::Kind::Prime ? 1 : C.constants->degree;
    for (int i = 1; i < deg; ++i) {
        acc = acc.pow(2);
        tr = tr + acc;
    }
    return Fp->from_int(tr.coords.empty() ? 0 : (i64)tr.coords[0]);
}

} // namespace symk
