#ifndef SYMK_REDUCE_HPP
#define SYMK_REDUCE_HPP

#include "symk/kato.hpp"

namespace symk {

struct ReduceResult {
    Symbol symbol;     // representative (class-trivial sums report {pi, 1})
    bool trivial;      // certified trivial class: output sum is empty
    Certificate cert;
};

// rewrite any supported sum into a single symbol with a replayable certificate
ReduceResult reduce_to_symbol(const SymbolSum& s);

// residue characteristic != p: every class is {pi, u}
ReduceResult tame_reduce(const SymbolSum& s);

// absorption step: a (single symbol, level i) absorbs the level-j part of b;
// returns the new a, the deeper remainder, and the certificate fragment
struct AbsorbResult {
    Entry a;
    SymbolSum deeper;
    std::vector<CertStep> steps;
};
AbsorbResult absorb_step(const Entry& a, const SymbolSum& b, long i, long j);

// independent replay of a certificate; PrecisionExhausted is distinct from false
bool verify_certificate(const SymbolSum& input, const SymbolSum& output, const Certificate& cert);

} // namespace symk

#endif
