#ifndef SYMK_CAMPAIGN_HPP
#define SYMK_CAMPAIGN_HPP

#include "symk/brauer2.hpp"
#include "symk/reduce.hpp"

namespace symk {

// Seeded generators used by the randomized campaigns (selftest, acceptance).

// graded-adapted random sum over a mixed-characteristic field: entries of the
// canonical shapes {u, pi}, {1 - pi^i x, y}, {1 - pi^i x, pi} with slot
// residues in the supported monomial cone
SymbolSum random_graded_sum(const LocalFieldPtr& K, Rng& rng, int max_terms);

// random sum over a tame field (residue characteristic != p)
SymbolSum random_tame_sum(const LocalFieldPtr& K, Rng& rng, int max_terms);

// random one-form with Laurent-polynomial coefficients of bounded degree,
// sampled as a single term f dg plus exact and gamma-move noise (every class
// has this shape; the reducer has to undo the noise)
Form2 random_brauer_form(const Brauer2Carrier& C, Rng& rng, int deg, int noise);

struct CampaignCase {
    int index;
    bool ok;
    std::string detail;
};

struct CampaignReport {
    u64 seed = 0;
    int cases = 0;
    int failures = 0;
    std::vector<CampaignCase> failed_cases;
    double seconds = 0;
    nlohmann::ordered_json to_json() const;
};

// reduce + verify + (oracle when available) over seeded random sums
CampaignReport run_reduce_campaign(const LocalFieldPtr& K, u64 seed, int cases, int max_terms = 4);

// quaternion reduction + witness verification over seeded random forms
CampaignReport run_brauer2_campaign(const Brauer2Carrier& C, u64 seed, int cases, int deg = 8);

} // namespace symk

#endif
