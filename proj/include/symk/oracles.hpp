#ifndef SYMK_ORACLES_HPP
#define SYMK_ORACLES_HPP

#include "symk/milnor.hpp"

namespace symk {

// classical closed-form 2-adic Hilbert symbol (a, b) in {+1, -1}
int hilbert2_q2(const LocalElem& a, const LocalElem& b);

// product of the pairwise values over a sum, entries with multiplicity
int hilbert2_value(const SymbolSum& s);

// exhaustive norm search modulo 2^6 (self-test companion of the formula):
// +1 iff z^2 = a x^2 + b y^2 has a primitive solution mod 64
int hilbert2_bruteforce(i64 a, i64 b);

// Trace(res(f dg/g)) over F_q((t)) with finite residue constants
ResidueElem artin_schreier_pairing(const LocalElem& f, const LocalElem& g);

// true iff every applicable oracle agrees on s1 and s2; throws NoOracle when
// the field has no oracle coverage
bool oracle_equal(const SymbolSum& s1, const SymbolSum& s2);

bool has_oracle(const LocalFieldPtr& K);

} // namespace symk

#endif
