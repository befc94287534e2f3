#include "doctest.h"

#include "symk/kato.hpp"
#include "symk/reduce.hpp"

using namespace symk;

namespace {

LocalFieldPtr q2() {
    return LocalField::from_json_text(R"({"p": 2, "construction": [{"kind": "padic"}]})");
}
LocalFieldPtr q2_sqrt2() {
    return LocalField::from_json_text(
        R"({"p": 2, "construction": [{"kind": "padic"},
             {"kind": "eisenstein", "name": "pi", "poly": ["-2", "0", "1"]}]})");
}
LocalFieldPtr q3_sqrtm3() {
    return LocalField::from_json_text(
        R"({"p": 3, "construction": [{"kind": "padic"},
             {"kind": "eisenstein", "name": "pi", "poly": ["3", "0", "1"]}],
            "zeta": {"present": true, "seed": "(-1+pi)/2"}})");
}
LocalFieldPtr gauss3_ext() {
    return LocalField::from_json_text(
        R"({"p": 3, "construction": [{"kind": "gauss_padic", "variable": "y"},
             {"kind": "eisenstein", "name": "pi", "poly": ["3", "0", "1"]}],
            "zeta": {"present": true, "seed": "(-1+pi)/2"}})");
}
LocalFieldPtr gauss2_ext() {
    return LocalField::from_json_text(
        R"({"p": 2, "construction": [{"kind": "gauss_padic", "variable": "y"},
             {"kind": "eisenstein", "name": "pi", "poly": ["-2", "0", "1"]}]})");
}
LocalFieldPtr q3_sqrtm6() {
    return LocalField::from_json_text(
        R"({"p": 3,
            "construction": [{"kind": "padic"},
              {"kind": "eisenstein", "name": "pi", "poly": ["6", "0", "1"]}],
            "M": {"p": 3,
                  "construction": [{"kind": "padic"},
                    {"kind": "eisenstein", "name": "pi", "poly": ["6", "0", "1"]},
                    {"kind": "unramified", "name": "s", "poly": ["-2", "0", "1"]}],
                  "zeta": {"present": true, "seed": "(-1+pi/s)/2"}}})");
}
LocalFieldPtr f5t(u64 p) {
    nlohmann::ordered_json j;
    j["p"] = p;
    j["construction"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json s;
    s["kind"] = "laurent";
    s["variable"] = "t";
    s["residue"] = {{"kind", "prime"}, {"p", 5}};
    j["construction"].push_back(s);
    return LocalField::from_json(j);
}

} // namespace

TEST_CASE("tame residue map") {
    auto K = f5t(2);
    LocalElem t = K->uniformizer();
    LocalElem u = K->from_int(2) + t;
    LocalElem v = K->from_int(3);

    SUBCASE("del({pi, u}) = ubar") {
        SymbolSum s(K);
        s.add_term(1, t, u);
        // del({t, u}) = residue of t^0/u^1 ... on generators del({pi,u}) = ubar:
        // our convention evaluates {u, pi} to ubar, so check the generator rule
        SymbolSum s2(K);
        s2.add_term(1, u, t);
        CHECK(tame_residue(s2) == u.residue());
    }
    SUBCASE("unit-unit symbols die") {
        SymbolSum s(K);
        s.add_term(1, u, v);
        CHECK(tame_residue(s).is_one());
    }
    SUBCASE("del({pi,pi}) = residue(-1)") {
        SymbolSum s(K);
        s.add_term(1, t, t);
        CHECK(tame_residue(s) == K->residue_field()->from_int(-1));
    }
    SUBCASE("homomorphism on random sums") {
        Rng rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            SymbolSum s1(K), s2(K);
            for (int i = 0; i < 2; ++i) {
                LocalElem a = t.pow((i64)rng.below(3)) * K->from_int(rng.range(1, 4));
                LocalElem b = t.pow((i64)rng.below(2)) * K->from_int(rng.range(1, 4));
                s1.add_term(1, a, b);
                a = t.pow((i64)rng.below(2)) * K->from_int(rng.range(1, 4));
                b = K->from_int(rng.range(1, 4));
                s2.add_term(1, a, b);
            }
            SymbolSum both = s1;
            both.add(s2);
            CHECK(tame_residue(both) == tame_residue(s1) * tame_residue(s2));
        }
    }
}

TEST_CASE("rho_forward shapes") {
    auto K = gauss3_ext();
    Frame fr = default_frame(K, 0);
    const FieldPtr& kb = K->residue_field();

    GradedElem e;
    e.field = K;
    e.level = 0;
    e.branch = GradedElem::Branch::Level0;
    e.payload = kb->generator();
    SymbolSum s = rho_forward(e, fr);
    REQUIRE(s.entries.size() == 1);
    CHECK(s.entries[0].second.a.eq_at_precision(K->generator_value("y")));
    CHECK(s.entries[0].second.b.eq_at_precision(K->uniformizer()));

    GradedElem z;
    z.field = K;
    z.level = 1;
    z.branch = GradedElem::Branch::Coprime;
    z.payload = kb->zero();
    CHECK(rho_forward(z, default_frame(K, 1)).empty());
}

TEST_CASE("leading/rho round trip") {
    Rng rng(31415);
    SUBCASE("gauss field, coprime levels") {
        auto K = gauss3_ext();
        const FieldPtr& kb = K->residue_field();
        ResidueElem y = kb->generator();
        for (long level : {1L, 2L}) {
            Frame fr = default_frame(K, level);
            for (int t = 0; t < 20; ++t) {
                GradedElem e;
                e.field = K;
                e.level = level;
                e.branch = GradedElem::Branch::Coprime;
                e.ybar = y;
                e.payload = kb->from_int(rng.range(0, 2)) * y.pow((i64)rng.below(3)) +
                            kb->from_int(rng.range(0, 2));
                SymbolSum s = rho_forward(e, fr);
                LeadingResult lr = leading_graded(s, level, fr);
                CHECK(lr.elem.payload == e.payload);
                CHECK(verify_certificate(s, lr.cert.output, lr.cert));
            }
        }
    }
    SUBCASE("gauss field, level 0") {
        auto K = gauss3_ext();
        const FieldPtr& kb = K->residue_field();
        ResidueElem y = kb->generator();
        Frame fr = default_frame(K, 0);
        for (int t = 0; t < 20; ++t) {
            GradedElem e;
            e.field = K;
            e.level = 0;
            e.branch = GradedElem::Branch::Level0;
            e.payload = kb->from_int(rng.range(1, 2)) * y.pow((i64)rng.range(0, 2));
            SymbolSum s = rho_forward(e, fr);
            LeadingResult lr = leading_graded(s, 0, fr);
            // level-0 classes live modulo p-th powers
            if (!lr.elem.payload.is_zero())
                CHECK(same_class_mod_pth_powers(lr.elem.payload, e.payload, 3));
            else
                CHECK(same_class_mod_pth_powers(kb->one(), e.payload, 3));
            CHECK(verify_certificate(s, lr.cert.output, lr.cert));
        }
    }
    SUBCASE("gauss field over Q2, divisible level with real payload") {
        auto K = gauss2_ext(); // eps = 4, residue F2(y), level 2 divisible
        const FieldPtr& kb = K->residue_field();
        ResidueElem y = kb->generator();
        Frame fr = default_frame(K, 2);
        for (int t = 0; t < 20; ++t) {
            GradedElem e;
            e.field = K;
            e.level = 2;
            e.branch = GradedElem::Branch::Divisible;
            e.payload = y.pow((i64)rng.range(0, 1) + 1) + kb->from_int(rng.range(0, 1));
            SymbolSum s = rho_forward(e, fr);
            LeadingResult lr = leading_graded(s, 2, fr);
            // payload is a class mod p-th powers; representatives may differ by
            // a p-th power summand only if equal here (canonical lifts agree)
            ResidueElem diff = lr.elem.payload - e.payload;
            bool ok = diff.is_zero() || pth_root(diff).has_value();
            CHECK(ok);
            CHECK(verify_certificate(s, lr.cert.output, lr.cert));
        }
    }
    SUBCASE("epsilon level over Q3(sqrt(-3))") {
        auto K = q3_sqrtm3();
        Frame fr = default_frame(K, 3);
        const FieldPtr& kb = K->residue_field();
        for (i64 c = 0; c < 3; ++c) {
            GradedElem e;
            e.field = K;
            e.level = 3;
            e.branch = GradedElem::Branch::Epsilon;
            e.payload = kb->from_int(c);
            SymbolSum s = rho_forward(e, fr);
            if (c == 0) {
                CHECK(s.empty());
                continue;
            }
            LeadingResult lr = leading_graded(s, 3, fr);
            CHECK(lr.elem.payload == e.payload);
            CHECK(verify_certificate(s, lr.cert.output, lr.cert));
        }
    }
}

TEST_CASE("lift independence") {
    auto K = gauss3_ext();
    const FieldPtr& kb = K->residue_field();
    ResidueElem y = kb->generator();
    Frame fr = default_frame(K, 1);
    // two lifts of the same residue produce symbols differing one level deeper
    LocalElem x1 = K->lift(y);
    LocalElem x2 = x1 + K->uniformizer() * K->from_int(2);
    LocalElem omega = *fr.omega;
    SymbolSum s(K);
    s.add_term(1, K->one() + omega * x1, *fr.yunit);
    s.add_term(-1, K->one() + omega * x2, *fr.yunit);
    LeadingResult lr = leading_graded(s, 1, fr);
    CHECK(lr.elem.payload.is_zero());
    CHECK(verify_certificate(s, lr.cert.output, lr.cert));
}

TEST_CASE("frame change at level 0") {
    auto K = gauss3_ext();
    const FieldPtr& kb = K->residue_field();
    Frame fr1 = default_frame(K, 0);
    Frame fr2 = fr1;
    fr2.pi = fr1.pi * K->from_int(2); // another uniformizer
    GradedElem e;
    e.field = K;
    e.level = 0;
    e.branch = GradedElem::Branch::Level0;
    e.payload = kb->generator();
    SymbolSum s1 = rho_forward(e, fr1);
    SymbolSum s2 = rho_forward(e, fr2);
    LeadingResult l1 = leading_graded(s1, 0, fr1);
    LeadingResult l2 = leading_graded(s2, 0, fr1); // read both in frame 1
    CHECK(same_class_mod_pth_powers(l1.elem.payload, l2.elem.payload, 3));
}

TEST_CASE("filtration level") {
    auto K = gauss3_ext();
    SUBCASE("empty sum is above any cap") {
        SymbolSum s(K);
        CHECK(!filtration_level(s, 3).has_value());
    }
    SUBCASE("{y, pi} sits at level 0") {
        SymbolSum s(K);
        s.add_term(1, K->generator_value("y"), K->uniformizer());
        auto l = filtration_level(s, 3);
        REQUIRE(l.has_value());
        CHECK(*l == 0);
    }
    SUBCASE("coprime level 1") {
        SymbolSum s(K);
        LocalElem pi = K->uniformizer();
        s.add_term(1, K->one() + pi * K->generator_value("y"), K->generator_value("y"));
        auto l = filtration_level(s, 3);
        REQUIRE(l.has_value());
        CHECK(*l == 1);
    }
    SUBCASE("divisible level 2 over the Q2 gauss field") {
        auto G = gauss2_ext();
        SymbolSum s(G);
        LocalElem pi = G->uniformizer();
        s.add_term(1, G->one() + pi.pow(2) * G->generator_value("y"), pi);
        auto l = filtration_level(s, 4);
        REQUIRE(l.has_value());
        CHECK(*l == 2);
    }
}

TEST_CASE("epsilon triviality (the cyclotomic examples)") {
    SUBCASE("Q3(sqrt(-6)): the top-level group is trivial") {
        auto K = q3_sqrtm6();
        LocalElem omega = K->uniformizer().pow(3);
        const FieldPtr& kb = K->residue_field();
        for (i64 c = 0; c < 3; ++c) {
            GradedElem e;
            e.field = K;
            e.level = 3;
            e.branch = GradedElem::Branch::Epsilon;
            e.payload = kb->from_int(c);
            auto r = epsilon_level_is_trivial(e, omega);
            CHECK(r.trivial);
            if (c != 0) {
                REQUIRE(r.witness.has_value());
                // u * (t^p - t) = payload in the residue field of M
                auto M = K->cyclo_M;
                ResidueElem ub = K->unit_u_for(omega).residue();
                ResidueElem f = embed_into(e.payload, M->residue_field());
                CHECK(ub * (r.witness->pow(3) - *r.witness) == f);
            }
        }
    }
    SUBCASE("Q3(sqrt(-3)): the top-level group is F_3") {
        auto K = q3_sqrtm3();
        LocalElem omega = K->uniformizer().pow(3);
        const FieldPtr& kb = K->residue_field();
        int nontrivial = 0;
        std::vector<ResidueElem> reps;
        for (i64 c = 0; c < 3; ++c) reps.push_back(kb->from_int(c));
        for (auto& r : reps) {
            GradedElem e;
            e.field = K;
            e.level = 3;
            e.branch = GradedElem::Branch::Epsilon;
            e.payload = r;
            if (!epsilon_level_is_trivial(e, omega).trivial) ++nontrivial;
        }
        CHECK(nontrivial == 2); // only the zero class is trivial
        // pairwise inequivalent: difference never in the twisted subgroup
        int classes = 0;
        for (size_t i = 0; i < reps.size(); ++i) {
            bool fresh = true;
            for (size_t j = 0; j < i; ++j) {
                GradedElem d;
                d.field = K;
                d.level = 3;
                d.branch = GradedElem::Branch::Epsilon;
                d.payload = reps[i] - reps[j];
                if (epsilon_level_is_trivial(d, omega).trivial) fresh = false;
            }
            if (fresh) ++classes;
        }
        CHECK(classes == 3);
    }
}

TEST_CASE("reduce: canonical single symbol comes back unchanged") {
    auto K = gauss3_ext();
    LocalElem pi = K->uniformizer();
    LocalElem y = K->generator_value("y");
    SymbolSum s(K);
    s.add_term(1, y, pi);
    ReduceResult r = reduce_to_symbol(s);
    CHECK(verify_certificate(s, r.cert.output, r.cert));
    CHECK(!r.trivial);
    CHECK(r.symbol.a.eq_at_precision(y));
    CHECK(r.symbol.b.eq_at_precision(pi));
    CHECK(r.cert.steps.empty());
}

TEST_CASE("reduce over the 2-adics") {
    auto K = q2();
    SUBCASE("{-1,-1} + {2,5}: both classes are -1, the sum is trivial") {
        SymbolSum s(K);
        s.add_term(1, K->from_int(-1), K->from_int(-1));
        s.add_term(1, K->from_int(2), K->from_int(5));
        ReduceResult r = reduce_to_symbol(s);
        CHECK(verify_certificate(s, r.cert.output, r.cert));
        CHECK(r.trivial);
    }
    SUBCASE("{-1,-1} alone stays nontrivial") {
        SymbolSum s(K);
        s.add_term(1, K->from_int(-1), K->from_int(-1));
        ReduceResult r = reduce_to_symbol(s);
        CHECK(verify_certificate(s, r.cert.output, r.cert));
        CHECK(!r.trivial);
    }
    SUBCASE("{2,5} + {5, 2}: antisymmetric pair is trivial") {
        SymbolSum s(K);
        s.add_term(1, K->from_int(2), K->from_int(5));
        s.add_term(1, K->from_int(5), K->from_int(2));
        ReduceResult r = reduce_to_symbol(s);
        CHECK(verify_certificate(s, r.cert.output, r.cert));
        CHECK(r.trivial);
    }
}

TEST_CASE("tame reduce over F5((t))") {
    for (u64 p : {2ull, 3ull}) {
        auto K = f5t(p);
        LocalElem t = K->uniformizer();
        SymbolSum s(K);
        s.add_term(1, t, K->from_int(2));
        s.add_term(1, t, K->from_int(3));
        ReduceResult r = reduce_to_symbol(s);
        CHECK(verify_certificate(s, r.cert.output, r.cert));
        REQUIRE(!r.trivial);
        // output is {pi, u} with the right tame residue
        CHECK(r.symbol.a.eq_at_precision(t));
        SymbolSum os(K);
        os.add_term(1, r.symbol.a, r.symbol.b);
        ResidueElem lhs = tame_residue(os);
        ResidueElem rhs = tame_residue(s);
        CHECK(same_class_mod_pth_powers(lhs, rhs, p));
    }
}

TEST_CASE("reduce over the gauss field (wild, imperfect residue)") {
    auto K = gauss3_ext();
    LocalElem pi = K->uniformizer();
    LocalElem y = K->generator_value("y");
    SUBCASE("two coprime-level symbols merge") {
        SymbolSum s(K);
        s.add_term(1, K->one() - pi * y, y);
        s.add_term(1, K->one() - pi.pow(2) * K->from_int(2), y);
        ReduceResult r = reduce_to_symbol(s);
        CHECK(verify_certificate(s, r.cert.output, r.cert));
        CHECK(!r.trivial);
    }
    SUBCASE("level 0 plus deeper") {
        SymbolSum s(K);
        s.add_term(1, y, pi);
        s.add_term(1, K->one() - pi * y.pow(2), y);
        s.add_term(1, K->one() - pi.pow(3) * y, pi);
        ReduceResult r = reduce_to_symbol(s);
        CHECK(verify_certificate(s, r.cert.output, r.cert));
        CHECK(!r.trivial);
    }
    SUBCASE("class plus its negative is certified trivial") {
        SymbolSum s(K);
        s.add_term(1, K->one() - pi * y, y);
        ReduceResult r1 = reduce_to_symbol(s);
        SymbolSum both = s;
        SymbolSum neg(K);
        for (auto& [c, sym] : s.entries) neg.add_term(-(i64)c, sym.a, sym.b);
        both.add(neg);
        CHECK(both.empty()); // syntactic cancellation here
        // a genuinely non-syntactic trivial pair: reduce output + negated input
        SymbolSum mix(K);
        mix.add_term(1, r1.symbol.a, r1.symbol.b);
        for (auto& [c, sym] : s.entries) mix.add_term(-(i64)c, sym.a, sym.b);
        ReduceResult r2 = reduce_to_symbol(mix);
        CHECK(verify_certificate(mix, r2.cert.output, r2.cert));
        CHECK(r2.trivial);
    }
}

TEST_CASE("absorb step formulas (paper shapes over the gauss field)") {
    auto K = gauss3_ext();
    LocalElem pi = K->uniformizer();
    LocalElem y = K->generator_value("y");
    SUBCASE("empty b returns a unchanged") {
        Entry a{1, K->one() - pi * y, y};
        SymbolSum b(K);
        auto r = absorb_step(a, b, 1, 2);
        CHECK(r.a.a.eq_at_precision(a.a));
        CHECK(r.steps.empty());
    }
    SUBCASE("coprime absorbs coprime: x' = x + pi^(j-i) z - pi^j x z") {
        LocalElem x = y, z = K->from_int(2) * y;
        Entry a{1, K->one() - pi * x, y};
        SymbolSum b(K);
        b.add_term(1, K->one() - pi.pow(2) * z, y);
        auto r = absorb_step(a, b, 1, 2);
        LocalElem xp = x + pi * z - pi.pow(2) * x * z;
        CHECK(r.a.a.eq_at_precision(K->one() - pi * xp));
        CHECK(r.a.b.eq_at_precision(y));
    }
    SUBCASE("level 0 absorbs coprime: pi' = pi (1 - pi^j z)^{-1}") {
        LocalElem z = y + K->from_int(1);
        Entry a{1, y, pi};
        SymbolSum b(K);
        b.add_term(1, K->one() - pi.pow(2) * z, y);
        auto r = absorb_step(a, b, 0, 2);
        CHECK(r.a.a.eq_at_precision(y));
        LocalElem expected = pi * (K->one() - pi.pow(2) * z).pow(-1);
        // the slot is pi * (1 - pi^2 z)^m for some unit-exponent m with the
        // same class; with coefficients 1 the paper's inverse appears exactly
        CHECK(r.a.b.eq_at_precision(expected));
    }
}

TEST_CASE("certificates: tamper detection") {
    auto K = gauss3_ext();
    LocalElem pi = K->uniformizer();
    LocalElem y = K->generator_value("y");
    SymbolSum s(K);
    s.add_term(1, y, pi);
    s.add_term(1, K->one() - pi * y.pow(2), y);
    ReduceResult r = reduce_to_symbol(s);
    REQUIRE(verify_certificate(s, r.cert.output, r.cert));
    REQUIRE(!r.cert.steps.empty());

    Rng rng(777);
    int rejected = 0, trials = 0;
    for (int t = 0; t < 40; ++t) {
        Certificate mut = r.cert;
        size_t k = rng.below(mut.steps.size());
        CertStep& st = mut.steps[k];
        switch (rng.below(4)) {
            case 0: st.coeff = (st.coeff % 3) + 1 == 3 ? 1 : (st.coeff % 3) + 1; break;
            case 1: st.sym.a = st.sym.a * (K->one() + pi.pow(2)); break;
            case 2:
                if (st.kind == CertStep::Kind::PthPower) st.witness = st.witness + pi;
                else st.sym.b = st.sym.b * (K->one() + pi.pow(3));
                break;
            case 3: mut.steps.erase(mut.steps.begin() + (long)k); break;
        }
        ++trials;
        bool ok;
        try {
            ok = verify_certificate(s, mut.output, mut);
        } catch (const PrecisionExhausted&) {
            ok = false; // distinct from true
        }
        if (!ok) ++rejected;
        else {
            // a mutation may occasionally be a no-op only if it reproduced the
            // original step; treat identical serialization as such
            bool identical = mut.to_json() == r.cert.to_json();
            if (!identical) CHECK(false);
        }
    }
    CHECK(rejected >= trials - 2);
}

TEST_CASE("substitute steps validate componentwise") {
    auto K = q2();
    SymbolSum s(K);
    s.add_term(1, K->from_int(3), K->from_int(5));
    Certificate c;
    c.field_hash = K->hash;
    c.input = s;
    c.output = SymbolSum(K);
    CertStep st;
    st.kind = CertStep::Kind::Substitute;
    st.coeff = 1;
    st.sym = {K->from_int(3), K->from_int(5)};
    st.sym_to = {K->from_int(3), K->from_int(5)};
    c.steps.push_back(st);
    // valid substitute, but output mismatch: state keeps one entry
    CHECK(!verify_certificate(s, c.output, c));
    c.output = s;
    CHECK(verify_certificate(s, c.output, c));
    // perturbed witness: never true
    c.steps[0].sym_to.b = K->from_int(5) + K->from_int(4); // 9 != 5 at precision
    CHECK(!verify_certificate(s, c.output, c));
}
