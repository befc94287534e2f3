#ifndef SYMK_MILNOR_HPP
#define SYMK_MILNOR_HPP

#include <optional>

#include "symk/local_field.hpp"

namespace symk {

struct Symbol {
    LocalElem a, b;
    bool eq_at_precision(const Symbol& o) const {
        return a.eq_at_precision(o.a) && b.eq_at_precision(o.b);
    }
};

// Formal sum of 2-symbols with coefficients mod p.  Entries are kept merged
// by value; zero coefficients and symbols with a slot equal to 1 are dropped.
class SymbolSum {
public:
    LocalFieldPtr field;
    std::vector<std::pair<int, Symbol>> entries; // coeff in [1, p)

    SymbolSum() = default;
    explicit SymbolSum(LocalFieldPtr f) : field(std::move(f)) {}

    bool empty() const { return entries.empty(); }
    u64 p() const { return field->p; }

    // adds coeff * {a, b}; requires a, b certified nonzero
    void add_term(i64 coeff, const LocalElem& a, const LocalElem& b);
    void add(const SymbolSum& o);
    SymbolSum operator-() const;

    nlohmann::ordered_json to_json() const;
    static SymbolSum from_json(const LocalFieldPtr& f, const nlohmann::ordered_json& j);
    std::string to_string() const;

    bool same_entries(const SymbolSum& o) const;
};

// One rewrite step.  A step is an instance of a defining relation; its
// effect on the F_p-linear combination of symbols is determined by `kind`,
// `dir` and the recorded values, and its premise is checkable by exact
// arithmetic alone.
struct CertStep {
    enum class Kind { Bilinearity, Antisymmetry, SteinbergUnit, SteinbergNeg, PthPower, Substitute };
    Kind kind = Kind::Bilinearity;
    int dir = 1;   // +1: drop/split, -1: insert/merge
    int slot = 0;  // 0 or 1 (Bilinearity, PthPower)
    i64 coeff = 1; // coefficient of the entry acted on
    Symbol sym;
    std::vector<std::pair<LocalElem, i64>> factors; // Bilinearity
    LocalElem witness;                              // PthPower
    Symbol sym_to;                                  // Substitute

    nlohmann::ordered_json to_json() const;
    static CertStep from_json(const LocalFieldPtr& f, const nlohmann::ordered_json& j);
};

const char* cert_kind_name(CertStep::Kind k);

struct Certificate {
    std::string field_hash;
    SymbolSum input;
    SymbolSum output;
    std::vector<CertStep> steps;

    nlohmann::ordered_json to_json() const;
    static Certificate from_json(const LocalFieldPtr& f, const nlohmann::ordered_json& j);
};

// tame residue: multiplicative extension of {pi, u} -> ubar via
// del({a,b}) = class of (-1)^(v(a)v(b)) a^v(b) / b^v(a)
ResidueElem tame_residue(const SymbolSum& s);
ResidueElem tame_residue_symbol(const LocalElem& a, const LocalElem& b);

// x and y represent the same class of kbar^x/(kbar^x)^p
bool same_class_mod_pth_powers(const ResidueElem& x, const ResidueElem& y, u64 p);

// largest i <= cap with the class of s in u_2^i, or nullopt (above cap);
// implemented by the graded machinery (kato.cpp)
std::optional<long> filtration_level(const SymbolSum& s, long cap);

} // namespace symk

#endif
