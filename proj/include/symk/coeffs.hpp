#ifndef SYMK_COEFFS_HPP
#define SYMK_COEFFS_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "symk/errors.hpp"
#include "symk/smallops.hpp"

namespace symk {

class ResidueField;
class ResidueElem;
using FieldPtr = std::shared_ptr<const ResidueField>;

// Exact arithmetic in residue-level fields: prime fields, finite fields
// (deterministic compatible tower or a custom presentation), a lazily
// extended algebraic closure of F_p, and rational function fields k0(y).
class ResidueField : public std::enable_shared_from_this<ResidueField> {
public:
    enum class Kind { Prime, Finite, Closure, RationalFunction };

    u64 p = 0;
    Kind kind = Kind::Prime;

    // Finite: F_p[g]/(modulus), modulus monic of degree `degree`, ascending coeffs.
    int degree = 1;
    std::vector<u64> modulus;
    std::string gen_name = "g";
    bool tower_compatible = false; // created by the deterministic tower scheme

    // RationalFunction: constants(var)
    FieldPtr constants;
    std::string var;

    static FieldPtr prime(u64 p);
    static FieldPtr finite(u64 p, int n);                 // deterministic compatible modulus
    static FieldPtr finite_custom(u64 p, std::vector<u64> mod, std::string gen = "s");
    static FieldPtr closure(u64 p);
    static FieldPtr rational_function(FieldPtr constants, std::string var = "y");

    bool is_perfect() const { return kind != Kind::RationalFunction; }
    // size of a p-basis: 0 for perfect fields, 1 for k0(y)
    int p_basis_size() const { return kind == Kind::RationalFunction ? 1 : 0; }

    ResidueElem zero() const;
    ResidueElem one() const;
    ResidueElem from_int(i64 n) const;
    ResidueElem generator() const;     // g for finite, y for rational function

    // deterministic compatible modulus for F_{p^n} inside the closure tower
    static std::vector<u64> tower_modulus(u64 p, int n);
    static u64 least_primitive_root(u64 p);

    std::string describe() const;

    // closure internals (shared tower cache keyed by p)
    struct ClosureCache;
    static ClosureCache& closure_cache(u64 p);
};

bool same_field(const FieldPtr& a, const FieldPtr& b);

// Element of a residue-level field, always in canonical form.
//  Prime:            value in [0, p)
//  Finite:           coordinate vector over F_p, length = degree
//  Closure:          (m, coords) in the minimal tower field F_{p^m}
//  RationalFunction: num/den polynomials over the constants field,
//                    den monic, gcd(num, den) = 1, zero = 0/1
class ResidueElem {
public:
    FieldPtr field;
    int sub_degree = 1;           // Closure only
    std::vector<u64> coords;      // Prime (size 1), Finite, Closure
    std::vector<ResidueElem> num; // RationalFunction: ascending, trimmed
    std::vector<ResidueElem> den;

    ResidueElem() = default;

    bool is_zero() const;
    bool is_one() const;
    std::string to_string() const;

    ResidueElem operator+(const ResidueElem& o) const;
    ResidueElem operator-(const ResidueElem& o) const;
    ResidueElem operator*(const ResidueElem& o) const;
    ResidueElem operator/(const ResidueElem& o) const;
    ResidueElem operator-() const;
    bool operator==(const ResidueElem& o) const;
    bool operator!=(const ResidueElem& o) const { return !(*this == o); }

    ResidueElem pow(i64 e) const;
    ResidueElem inv() const;

    // total order on canonical representations (documented tie-break order:
    // compare kind-specific coordinate sequences lexicographically, constant
    // term first; rational functions compare (num, den) degree-then-coeffs)
    int cmp(const ResidueElem& o) const;
};

enum class FieldOp { Add, Sub, Mul, Div, Pow };
ResidueElem field_arithmetic(const ResidueElem& a, const ResidueElem& b, FieldOp op, i64 pow_exp = 0);

// f = sum_l decomposition[l]^p * y^l (requires a p-basis [y])
std::vector<ResidueElem> frobenius_decompose(const ResidueElem& f);

// r with r^p = f, or nullopt when f is not a p-th power
std::optional<ResidueElem> pth_root(const ResidueElem& f);

// t with t^p - t = f, or nullopt; deterministic (minimal solution in cmp order)
std::optional<ResidueElem> artin_schreier_solve(const ResidueElem& f);

// t in M with u*(t^p - t) = embed(f), or nullopt (f not in the twisted subgroup).
// f lives in a subfield of M reachable by the canonical embedding.
std::optional<ResidueElem> twisted_artin_schreier_test(const ResidueElem& f,
                                                       const ResidueElem& u,
                                                       const FieldPtr& M);

// canonical embedding where defined: identity, prime -> any, tower-compatible
// finite/closure -> closure, constants -> rational function field
ResidueElem embed_into(const ResidueElem& x, const FieldPtr& target);
bool embeddable(const FieldPtr& from, const FieldPtr& to);

// canonicalized element num/den of a rational function field
ResidueElem make_rational(const FieldPtr& K, std::vector<ResidueElem> num,
                          std::vector<ResidueElem> den);

// ---- generic polynomial helpers over a coefficient field ----------------
// CPoly: ascending coefficients, trimmed (no trailing zeros); empty = 0.
namespace poly {
using CPoly = std::vector<ResidueElem>;

CPoly trim(CPoly v);
bool is_zero(const CPoly& a);
int deg(const CPoly& a); // -1 for zero
CPoly add(const CPoly& a, const CPoly& b);
CPoly sub(const CPoly& a, const CPoly& b);
CPoly mul(const CPoly& a, const CPoly& b);
CPoly scale(const CPoly& a, const ResidueElem& c);
std::pair<CPoly, CPoly> divrem(const CPoly& a, const CPoly& b);
CPoly gcd(CPoly a, CPoly b); // monic
CPoly monic(CPoly a);
CPoly derivative(const CPoly& a);
ResidueElem eval(const CPoly& a, const ResidueElem& x);
CPoly pow(const CPoly& a, u64 e);
CPoly mulmod(const CPoly& a, const CPoly& b, const CPoly& m);
CPoly powmod(CPoly a, u64 e, const CPoly& m);
bool irreducible(const CPoly& f, const FieldPtr& k); // f monic over finite/prime k

// monic irreducible factorization over a finite constants field
std::vector<std::pair<CPoly, int>> factor(const CPoly& f, const FieldPtr& k);
} // namespace poly

} // namespace symk

#endif
