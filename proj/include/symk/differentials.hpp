#ifndef SYMK_DIFFERENTIALS_HPP
#define SYMK_DIFFERENTIALS_HPP

#include <optional>

#include "symk/coeffs.hpp"

namespace symk {

// One-forms over a rational function field k0(y) with p-basis [y]:
// every form is coeff * dy with coeff in the carrier.  Omega^2 = 0 here,
// so d of any one-form vanishes and ker(d: Omega^1 -> Omega^2) is everything.
struct OneForm {
    ResidueElem coeff; // coefficient of dy

    bool is_zero() const { return coeff.is_zero(); }
    bool operator==(const OneForm& o) const { return coeff == o.coeff; }
    OneForm operator+(const OneForm& o) const { return {coeff + o.coeff}; }
    OneForm operator-(const OneForm& o) const { return {coeff - o.coeff}; }
    std::string to_string() const { return "(" + coeff.to_string() + ")*dy"; }
};

// d(f) via the formal partial derivative with respect to the p-basis element
OneForm differentiate(const ResidueElem& f);

// f with df = w, or nullopt when w is not exact.  Exactness over k0(y) is
// the vanishing of the (p-1)-indexed Frobenius component of the coefficient.
std::optional<ResidueElem> exactness_witness(const OneForm& w);

// canonical representative of the inverse Cartier operator on an aligned
// form: lambda*dy |-> lambda^p * y^(p-1) * dy
OneForm inverse_cartier(const OneForm& w);

} // namespace symk

#endif
