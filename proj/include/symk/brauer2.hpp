#ifndef SYMK_BRAUER2_HPP
#define SYMK_BRAUER2_HPP

#include <array>

#include "symk/differentials.hpp"
#include "symk/local_field.hpp"
#include "symk/oracles.hpp"

namespace symk {

// Characteristic-2 carrier with 2-basis (y, t): rational functions in t over
// constants(y).  All arithmetic is exact; inputs are Laurent polynomials.
struct Brauer2Carrier {
    FieldPtr constants; // F_2 or F_{2^f}
    FieldPtr inner;     // constants(y)
    FieldPtr K;         // constants(y)(t)

    ResidueElem y() const; // the element y of K
    ResidueElem t() const; // the element t of K
};

Brauer2Carrier make_brauer2_carrier(int constants_degree = 1);

// one-form lambda dy + mu dt
struct Form2 {
    ResidueElem ly, lt;
    bool is_zero() const { return ly.is_zero() && lt.is_zero(); }
    bool operator==(const Form2& o) const { return ly == o.ly && lt == o.lt; }
    Form2 operator+(const Form2& o) const { return {ly + o.ly, lt + o.lt}; }
    Form2 operator-(const Form2& o) const { return {ly - o.ly, lt - o.lt}; }
};

// exact square root of an element of K^2
ResidueElem sqrt2(const Brauer2Carrier& C, const ResidueElem& f);

// lambda = l0^2 + l1^2 y + l2^2 t + l3^2 y t, unique
std::array<ResidueElem, 4> two_basis_decompose(const Brauer2Carrier& C, const ResidueElem& lam);

Form2 differentiate2(const Brauer2Carrier& C, const ResidueElem& f);

// gamma(lambda d(basis)) = lambda^2 * basis * d(basis); basis: 0 = y, 1 = t
Form2 inverse_cartier2(const Brauer2Carrier& C, const ResidueElem& lam, int basis);

// f with d(f) = omega for Laurent-polynomial forms, or nullopt
std::optional<ResidueElem> exactness_witness2(const Brauer2Carrier& C, const Form2& omega);

struct BrauerWitness {
    ResidueElem w0;                                       // exact part
    std::vector<std::pair<ResidueElem, ResidueElem>> w1;  // (lambda, g): inputs lambda*dg to gamma-1
};

struct QuaternionReduced {
    ResidueElem f, g;  // omega == f * dg modulo the witness moves
    Form2 out;         // f*dg expanded in dy/dt coordinates
    BrauerWitness w;
};

QuaternionReduced quaternion_reduce(const Brauer2Carrier& C, const Form2& omega);

bool verify_witness(const Brauer2Carrier& C, const Form2& in, const Form2& out,
                    const BrauerWitness& w);

// Artin-Schreier pairing cross-check: specialize y (basis 0) or t (basis 1)
// to a constant and evaluate the residue-trace invariant of the dt (resp. dy)
// part over constants((t)).  Moves of the quotient presentation preserve it.
ResidueElem specialized_pairing_invariant(const Brauer2Carrier& C, const Form2& omega,
                                          const ResidueElem& c, int basis);

} // namespace symk

#endif
