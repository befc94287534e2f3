#ifndef SYMK_KATO_HPP
#define SYMK_KATO_HPP

#include <deque>
#include <optional>
#include <set>

#include "symk/differentials.hpp"
#include "symk/milnor.hpp"

namespace symk {

// Frame data for the graded maps: a uniformizer, the level element
// (omega with v = i, or varpi with v = i/p on p-divisible levels), and the
// second-slot unit for coprime levels.
struct Frame {
    LocalElem pi;
    std::optional<LocalElem> omega;
    std::optional<LocalElem> varpi;
    std::optional<LocalElem> yunit;
};

Frame default_frame(const LocalFieldPtr& K, long level);

// Level-tagged element of the graded groups of the unit filtration.
struct GradedElem {
    enum class Branch { Level0, Coprime, Divisible, Epsilon };
    LocalFieldPtr field;
    long level = 0;
    Branch branch = Branch::Level0;
    ResidueElem payload; // Level0: unit class; Coprime: x with form x*dlog(y);
                         // Divisible: class mod p-th powers; Epsilon: twisted class
    ResidueElem ybar;    // Coprime: residue of the frame's second-slot unit

    bool zero_payload() const { return payload.is_zero(); }
    // the one-form x*dy/y in dy-coordinates (coprime branch, imperfect residue)
    OneForm form() const;
};

GradedElem::Branch branch_of_level(const LocalFieldPtr& K, long level);

// the single symbol attached to a graded element (the forward graded map)
SymbolSum rho_forward(const GradedElem& e, const Frame& fr);

// leading graded part of s at `level`: e with s - rho_forward(e, fr) one
// level deeper, plus the certificate fragment that witnesses the rewrite
struct LeadingResult {
    GradedElem elem;
    Certificate cert; // input s, output rho_forward(elem) + deeper entries
    SymbolSum deeper;
};
LeadingResult leading_graded(const SymbolSum& s, long level, const Frame& fr);

// top-level (epsilon) triviality with a twisted Artin-Schreier witness
struct EpsilonTriviality {
    bool trivial;
    std::optional<ResidueElem> witness;
};
EpsilonTriviality epsilon_level_is_trivial(const GradedElem& e, const LocalElem& omega);

// ---------------------------------------------------------------------------
// certificate-emitting rewrite engine (shared by the graded ops and the
// reduction loop).  Pool entries always have unit first slots and second
// slots that are units or uniformizer values; levels are first-slot levels.
// ---------------------------------------------------------------------------
struct Entry {
    int coeff = 0; // in [1, p)
    LocalElem a, b;
    long lvl = -2; // cached first-slot level; -2 unset, -1 trivial
};

class RewriteEngine {
public:
    LocalFieldPtr K;
    u64 p;
    Rat eps{0, 1};
    bool eps_integral = false;
    long cap = 0; // ceil(eps)
    bool imperfect = false;

    std::vector<Entry> pool;
    std::vector<CertStep> steps;

    explicit RewriteEngine(LocalFieldPtr field);

    void load(const SymbolSum& s);

    // first-slot level: 0 for non-principal units, v(a-1) otherwise;
    // nullopt when the entry is droppable at precision (a == 1)
    std::optional<long> entry_level(const Entry& e) const;
    std::optional<long> min_level();

    struct ExtractFrame {
        LocalElem pi;
        LocalElem yu; // coprime second-slot target / decomposition generator
    };
    ExtractFrame frame_for(const std::optional<Entry>& a) const;

    // rewrites every pool entry at `level` into a single canonical entry
    // (nullopt when the level's contribution dies) plus deeper pool entries
    std::optional<Entry> extract_level(long level, const ExtractFrame& fr);

    // absorption: a at level i, cj the canonical entry at level j > i;
    // returns the new a (same level/branch, possibly new uniformizer slot)
    Entry absorb(const Entry& a, const Entry& cj, long i, long j, const ExtractFrame& fr);

    // drop every entry certified above the filtration cap
    void drop_deep_entries();

    // the full wild-path loop; nullopt = class certified trivial
    std::optional<Entry> reduce_all();

    // --- primitive certificate-emitting edits ---
    void pool_insert(i64 coeff, const LocalElem& a, const LocalElem& b);
    void pool_remove(i64 coeff, const LocalElem& a, const LocalElem& b);
    void steinberg_unit(int dir, i64 coeff, const LocalElem& z, const LocalElem& w);
    void steinberg_neg(int dir, i64 coeff, const LocalElem& z, const LocalElem& w);
    void antisym(i64 coeff, const Symbol& s);
    void bilin_split(i64 coeff, const Symbol& s, int slot,
                     std::vector<std::pair<LocalElem, i64>> factors);
    void bilin_merge(i64 coeff, const Symbol& target, int slot,
                     std::vector<std::pair<LocalElem, i64>> factors);
    void pth_drop(i64 coeff, const Symbol& s, int slot, const LocalElem& witness);

    // residue payload of a principal unit A = 1 + pi^j x at level j
    ResidueElem payload_of(const LocalElem& A, long j, const LocalElem& pi) const;

    SymbolSum pool_as_sum() const;

    i64 norm_c(i64 c) const;
    void depth_raise(const Entry& e);
    bool try_accumulate(std::optional<Entry>& acc, Entry fresh, int slot_kind);
    struct ConeParts {
        long n0;
        ResidueElem root;
    };
    std::optional<ConeParts> cone_decompose(const ResidueElem& u, const ResidueElem& g) const;
    std::vector<ResidueElem> frobenius_wrt(const ResidueElem& z, const ResidueElem& g) const;
};

} // namespace symk

#endif
