#ifndef SYMK_LOCAL_FIELD_HPP
#define SYMK_LOCAL_FIELD_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "symk/coeffs.hpp"
#include "symk/expr.hpp"

namespace symk {

class LocalField;
using LocalFieldPtr = std::shared_ptr<const LocalField>;

// Value at one level of the mixed-characteristic tower: at the base,
// a fraction num/den in (Z/p^N0)[y] with den a unit mod p; above it,
// coefficients over the previous level indexed by generator powers.
struct TVal {
    std::vector<u64> num, den;  // base level only
    std::vector<TVal> sub;      // higher levels only
};

// Truncated element of a complete discretely valued field.
// Nonzero-certified: value = pi^v * unit, residue(unit) != 0, valid to
// v + rel pi-adic digits.  Zero-certified: value is 0 modulo pi^v (rel = 0).
class LocalElem {
public:
    LocalFieldPtr field;
    bool zero = true;
    long v = 0;
    long rel = 0;
    TVal unit;                        // mixed-characteristic payload
    std::vector<ResidueElem> digits;  // Laurent payload: unit-part digits
    // cached canonical key (digit serialization); shared across copies
    mutable std::shared_ptr<const std::string> keyc;

    LocalElem() = default;

    // canonical comparison key; equal keys imply equal values at precision
    const std::string& key() const;

    bool is_zero_at_precision() const { return zero; }
    std::optional<long> valuation() const {
        if (zero) return std::nullopt;
        return v;
    }
    long abs_prec() const { return v + rel; }

    LocalElem operator+(const LocalElem& o) const;
    LocalElem operator-(const LocalElem& o) const;
    LocalElem operator*(const LocalElem& o) const;
    LocalElem operator/(const LocalElem& o) const;
    LocalElem operator-() const;
    LocalElem pow(i64 e) const;
    LocalElem inv() const;

    // residue of a unit (valuation 0) in the residue field
    ResidueElem residue() const;

    // truncated digit expansion [(k, digit)] for k = v .. v+n-1, zero digits
    // omitted; canonical serialization feeds certificate hashing
    std::vector<std::pair<long, ResidueElem>> digit_expansion(long n) const;
    std::string serialize(long max_digits = -1) const;

    bool eq_at_precision(const LocalElem& o) const;
};

struct ZetaData {
    LocalFieldPtr home;   // K itself, or the configured cyclotomic extension M
    LocalElem zeta;       // primitive p-th root of unity
    LocalElem pi_power;   // (zeta - 1)^p
};

// Descriptor of a complete discretely valued field:
//   laurent:  k0((t)) over a residue CoeffField
//   mixed:    completion of Q_p (optionally Gauss over Q_p(y)) extended by
//             Eisenstein / unramified steps given by monic polynomials
class LocalField : public std::enable_shared_from_this<LocalField> {
public:
    struct Step {
        bool eisenstein = true;
        std::string name;
        int deg = 0;
        std::vector<TVal> poly;     // lower coefficients (degree entries), monic implied
        std::vector<std::string> poly_exprs;
        // cached helpers for Eisenstein steps
        TVal e0_unit_inv;           // (E0 / pi_lower)^{-1}, exact
    };

    bool mixed = true;
    u64 p = 0;
    long prec = 0;      // working precision in pi-adic digits
    long e_abs = 1;     // v_K(p) for mixed characteristic

    // Laurent
    FieldPtr laurent_residue;
    std::string laurent_var = "t";

    // mixed
    bool has_y = false;
    std::string yvar = "y";
    int N0 = 0;
    u64 M = 0;          // p^N0
    std::vector<Step> steps;

    FieldPtr residue_f; // residue field
    std::vector<FieldPtr> residue_fields; // per tower level
    std::string uniformizer_name;
    int uniformizer_lvl = 0; // level whose generator is the uniformizer (0 = p)
    int unram_level = -1;    // level index of the unramified step, if any
    int active_steps = 0;    // levels in use (== steps.size() once built)

    bool zeta_present = false;
    std::string zeta_seed;
    std::shared_ptr<const LocalField> cyclo_M; // optional extension containing zeta_p
    nlohmann::ordered_json config;             // canonical descriptor json
    std::string hash;

    static LocalFieldPtr laurent(FieldPtr residue, u64 p_interest, long prec,
                                 std::string var = "t");
    static LocalFieldPtr from_json(const nlohmann::ordered_json& j);
    static LocalFieldPtr from_json_text(const std::string& text);
    LocalFieldPtr with_precision(long new_prec) const;

    const FieldPtr& residue_field() const { return residue_f; }
    Rat epsilon() const; // p*v(p)/(p-1); throws EqualCharacteristic for laurent

    LocalElem zero() const;
    LocalElem one() const;
    LocalElem from_int(i64 n) const;
    LocalElem uniformizer() const;
    LocalElem generator_value(const std::string& name) const;
    LocalElem lift(const ResidueElem& r) const; // canonical digitwise lift
    LocalElem eval(const Expr& e) const;
    LocalElem eval_text(const std::string& text) const;

    ZetaData zeta_data() const;
    // u with omega * u = (zeta_p - 1)^p, computed in zeta's home field
    LocalElem unit_u_for(const LocalElem& omega) const;

    // embed an element of this field into an extension whose tower extends ours
    LocalElem embed_into_extension(const LocalElem& x, const LocalFieldPtr& ext) const;

    // N(1 - pi_M^j x) for the Kummer step pi_M^d = pi (tame: gcd(d,p)=1),
    // closed form (1 - pi^g x^f)^e; cross-checked against the multiplication
    // matrix determinant when crosscheck is set
    LocalElem kummer_norm(const LocalElem& x, int d, int j, bool crosscheck = false) const;

    // p-th root of a principal unit a = 1 + m with v(m) > epsilon (Hensel)
    std::optional<LocalElem> principal_unit_pth_root(const LocalElem& a) const;

    LocalElem partial_one(int lvl) const;

    // internal arithmetic helpers (used by LocalElem)
    struct Ops;
};

Rat epsilon_of(const LocalFieldPtr& K);

} // namespace symk

#endif
