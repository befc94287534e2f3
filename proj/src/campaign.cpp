#include "symk/campaign.hpp"

#include <chrono>

namespace symk {

namespace {

// random residue-cone unit lift: c * y^n * (1 + pi^m * tail), constants c
LocalElem cone_unit(const LocalFieldPtr& K, Rng& rng, int depth) {
    const FieldPtr& kb = K->residue_field();
    bool imperfect = kb->kind == ResidueField::Kind::RationalFunction;
    u64 p = K->p;
    LocalElem u = K->from_int(rng.range(1, (i64)p - 1 > 0 ? (i64)p - 1 : 1));
    if (imperfect) {
        LocalElem y = K->lift(kb->generator());
        u = u * y.pow(rng.range(-1, 2));
    }
    if (depth > 0 && rng.below(2)) {
        LocalElem pi = K->uniformizer();
        LocalElem tail = cone_unit(K, rng, depth - 1);
        u = u * (K->one() + pi.pow((i64)rng.below(3) + 1) * tail);
    }
    return u;
}

} // namespace

SymbolSum random_graded_sum(const LocalFieldPtr& K, Rng& rng, int max_terms) {
    SymbolSum s(K);
    LocalElem pi = K->uniformizer();
    long cap = K->epsilon().ceil();
    bool imperfect = K->residue_field()->kind == ResidueField::Kind::RationalFunction;
    int terms = 1 + (int)rng.below((u64)max_terms);
    for (int t = 0; t < terms; ++t) {
        int shape = (int)rng.below(3);
        if (shape == 0) {
            // {u, pi}
            s.add_term(1 + (i64)rng.below(K->p - 1), cone_unit(K, rng, 1), pi);
            continue;
        }
        long lvl = 1 + (long)rng.below((u64)cap);
        LocalElem x = cone_unit(K, rng, 1);
        if (rng.below(4) == 0) x = x * pi.pow((i64)rng.below(2)); // deeper tails
        LocalElem a = K->one() - pi.pow(lvl) * x;
        if (shape == 1 && imperfect && lvl % (long)K->p != 0 && Rat(lvl, 1) < K->epsilon()) {
            // {1 - pi^i x, y} at a coprime level
            LocalElem y = K->lift(K->residue_field()->generator());
            s.add_term(1 + (i64)rng.below(K->p - 1), a, y);
        } else {
            s.add_term(1 + (i64)rng.below(K->p - 1), a, pi);
        }
    }
    return s;
}

SymbolSum random_tame_sum(const LocalFieldPtr& K, Rng& rng, int max_terms) {
    SymbolSum s(K);
    LocalElem pi = K->uniformizer();
    u64 q = K->residue_field()->p;
    int terms = 1 + (int)rng.below((u64)max_terms);
    for (int t = 0; t < terms; ++t) {
        LocalElem a = K->from_int(rng.range(1, (i64)q - 1)) * pi.pow((i64)rng.below(3));
        LocalElem b = K->from_int(rng.range(1, (i64)q - 1)) * pi.pow((i64)rng.below(2));
        if (rng.below(2)) a = a + pi.pow(a.valuation().value() + 1) * K->from_int(rng.range(0, (i64)q - 1));
        if (a.zero || b.zero) continue;
        s.add_term(1 + (i64)rng.below(K->p - 1), a, b);
    }
    return s;
}

Form2 random_brauer_form(const Brauer2Carrier& C, Rng& rng, int deg, int noise) {
    ResidueElem y = C.y(), t = C.t();
    auto rnd_poly = [&](int d, int terms) {
        ResidueElem f = C.K->zero();
        for (int k = 0; k < terms; ++k) {
            i64 ey = rng.range(-1, d - 1), et = rng.range(-1, d - 1);
            f = f + y.pow(ey) * t.pow(et);
        }
        return f;
    };
    // base single term f dg; the base slot is monomial-aligned (the reducer's
    // common-slot merge covers these completely, see the README scope notes)
    ResidueElem f = rnd_poly(deg / 2 + 1, 2 + (int)rng.below(3));
    ResidueElem g = rng.below(2) ? y : t;
    Form2 dg = differentiate2(C, g);
    Form2 omega{f * dg.ly, f * dg.lt};
    // exact noise
    for (int k = 0; k < noise; ++k) {
        if (rng.below(2)) {
            ResidueElem w0 = rnd_poly(deg / 2 + 1, 1 + (int)rng.below(2));
            omega = omega + differentiate2(C, w0);
        } else {
            ResidueElem lam = rnd_poly(deg / 4 + 1, 1 + (int)rng.below(2));
            int basis = (int)rng.below(2);
            ResidueElem gb = basis == 0 ? y : t;
            // (gamma - 1)(lam d gb)
            ResidueElem c = lam * lam * gb - lam;
            if (basis == 0) omega = omega + Form2{c, C.K->zero()};
            else omega = omega + Form2{C.K->zero(), c};
        }
    }
    return omega;
}

nlohmann::ordered_json CampaignReport::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["cases"] = cases;
    j["failures"] = failures;
    j["failed_cases"] = nlohmann::ordered_json::array();
    for (const auto& c : failed_cases) {
        nlohmann::ordered_json e;
        e["index"] = c.index;
        e["detail"] = c.detail;
        j["failed_cases"].push_back(e);
    }
    j["seconds"] = seconds;
    return j;
}

CampaignReport run_reduce_campaign(const LocalFieldPtr& K, u64 seed, int cases, int max_terms) {
    CampaignReport rep;
    rep.seed = seed;
    rep.cases = cases;
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);
    bool tame = (K->mixed ? K->p : K->residue_field()->p) != K->p;
    for (int i = 0; i < cases; ++i) {
        try {
            SymbolSum s = tame ? random_tame_sum(K, rng, max_terms)
                               : random_graded_sum(K, rng, max_terms);
            if (s.empty()) continue;
            ReduceResult r = reduce_to_symbol(s);
            bool ok = verify_certificate(s, r.cert.output, r.cert);
            if (ok && has_oracle(K)) {
                SymbolSum os(K);
                os.field = K;
                if (!r.trivial) os.add_term(1, r.symbol.a, r.symbol.b);
                ok = oracle_equal(s, os);
            }
            if (!ok) {
                ++rep.failures;
                rep.failed_cases.push_back({i, false, "verification or oracle mismatch"});
            }
        } catch (const SymkError& e) {
            ++rep.failures;
            rep.failed_cases.push_back({i, false, e.what()});
        }
    }
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

CampaignReport run_brauer2_campaign(const Brauer2Carrier& C, u64 seed, int cases, int deg) {
    CampaignReport rep;
    rep.seed = seed;
    rep.cases = cases;
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);
    for (int i = 0; i < cases; ++i) {
        try {
            Form2 in = random_brauer_form(C, rng, deg, 2 + (int)rng.below(3));
            QuaternionReduced r = quaternion_reduce(C, in);
            if (!verify_witness(C, in, r.out, r.w)) {
                ++rep.failures;
                rep.failed_cases.push_back({i, false, "witness verification failed"});
            }
        } catch (const SymkError& e) {
            ++rep.failures;
            rep.failed_cases.push_back({i, false, e.what()});
        }
    }
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace symk
