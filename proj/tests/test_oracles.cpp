#include "doctest.h"

#include "symk/oracles.hpp"
#include "symk/reduce.hpp"

using namespace symk;

namespace {
LocalFieldPtr q2() {
    return LocalField::from_json_text(R"({"p": 2, "construction": [{"kind": "padic"}]})");
}
LocalFieldPtr laurent_fq(u64 p_sym, u64 pres, int deg) {
    nlohmann::ordered_json j;
    j["p"] = p_sym;
    j["construction"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json s;
    s["kind"] = "laurent";
    s["variable"] = "t";
    if (deg == 1) s["residue"] = {{"kind", "prime"}, {"p", pres}};
    else s["residue"] = {{"kind", "finite"}, {"p", pres}, {"degree", deg}};
    j["construction"].push_back(s);
    return LocalField::from_json(j);
}
} // namespace

TEST_CASE("hilbert symbol closed formula") {
    auto K = q2();
    auto H = [&](i64 a, i64 b) { return hilbert2_q2(K->from_int(a), K->from_int(b)); };
    CHECK(H(1, 7) == +1);
    CHECK(H(-1, -1) == -1);
    CHECK(H(2, 5) == -1);
    CHECK(H(5, 5) == +1); // 5 = norm(x^2 - 5 y^2)? (5,5) = (5,-1)*(5,-5) = (5,-1)
    SUBCASE("Steinberg pairs are trivial") {
        Rng rng(1);
        for (int t = 0; t < 40; ++t) {
            i64 a = rng.range(-40, 40);
            if (a == 0 || a == 1) continue;
            CHECK(H(a, 1 - a) == +1);
        }
    }
    SUBCASE("(a, -a) = +1") {
        Rng rng(2);
        for (int t = 0; t < 40; ++t) {
            i64 a = rng.range(-50, 50);
            if (a == 0) continue;
            CHECK(H(a, -a) == +1);
        }
    }
    SUBCASE("bimultiplicative on random triples") {
        Rng rng(3);
        for (int t = 0; t < 200; ++t) {
            i64 a = rng.range(-30, 30), b = rng.range(-30, 30), c = rng.range(-30, 30);
            if (!a || !b || !c) continue;
            CHECK(H(a * b, c) == H(a, c) * H(b, c));
            CHECK(H(c, a * b) == H(c, a) * H(c, b));
        }
    }
    SUBCASE("closed formula matches the norm search on all classes mod 2^6") {
        const i64 reps[8] = {1, -1, 5, -5, 2, -2, 10, -10};
        for (i64 a : reps)
            for (i64 b : reps) CHECK(H(a, b) == hilbert2_bruteforce(a, b));
    }
}

TEST_CASE("artin-schreier residue pairing") {
    auto K = laurent_fq(5, 5, 1); // F5((t)), pairing at p = 5
    LocalElem t = K->uniformizer();
    auto F5 = ResidueField::prime(5);

    SUBCASE("coboundaries vanish") {
        Rng rng(7);
        for (int k = 0; k < 20; ++k) {
            LocalElem h = K->from_int(rng.range(0, 4)) + t.pow((i64)rng.below(3)) * K->from_int(rng.range(0, 4));
            if (h.zero) continue;
            LocalElem f = h.pow(5) - h;
            LocalElem g = t.pow((i64)rng.below(4) + 1);
            auto v = artin_schreier_pairing(f, g);
            CHECK(v == F5->zero());
        }
    }
    SUBCASE("constant against t") {
        for (i64 a = 0; a < 5; ++a) {
            auto v = artin_schreier_pairing(K->from_int(a), t);
            CHECK(v == F5->from_int(a));
        }
    }
    SUBCASE("a/t^2 against t gives zero") {
        LocalElem f = K->from_int(3) * t.pow(-2);
        CHECK(artin_schreier_pairing(f, t) == F5->zero());
    }
    SUBCASE("biadditive in f") {
        Rng rng(8);
        for (int k = 0; k < 30; ++k) {
            LocalElem f1 = K->from_int(rng.range(0, 4)) * t.pow(rng.range(-2, 2));
            LocalElem f2 = K->from_int(rng.range(0, 4)) * t.pow(rng.range(-2, 2));
            LocalElem g = t.pow((i64)rng.below(3) + 1) * (K->one() + t * K->from_int(rng.range(0, 4)));
            auto v1 = artin_schreier_pairing(f1, g);
            auto v2 = artin_schreier_pairing(f2, g);
            auto v12 = artin_schreier_pairing(f1 + f2, g);
            CHECK(v12 == v1 + v2);
        }
    }
    SUBCASE("trace over F4") {
        auto K4 = laurent_fq(2, 2, 2); // F4((t))
        LocalElem t4 = K4->uniformizer();
        const FieldPtr& F4 = K4->residue_field();
        // res(s*dt/t) = s, Tr_{F4/F2}(s) = s + s^2 = 1 for the generator s
        LocalElem f = K4->lift(F4->generator());
        auto v = artin_schreier_pairing(f, t4);
        CHECK(v == ResidueField::prime(2)->one());
    }
}

TEST_CASE("oracle_equal") {
    SUBCASE("identical sums agree") {
        auto K = q2();
        SymbolSum s(K);
        s.add_term(1, K->from_int(-1), K->from_int(-1));
        CHECK(oracle_equal(s, s));
    }
    SUBCASE("{-1,-1} vs empty differs over the 2-adics") {
        auto K = q2();
        SymbolSum s(K), e(K);
        s.add_term(1, K->from_int(-1), K->from_int(-1));
        e.field = K;
        CHECK(!oracle_equal(s, e));
    }
    SUBCASE("tame: {t,2} vs {t,3} over F5((t)) mod 2") {
        auto K = laurent_fq(2, 5, 1);
        LocalElem t = K->uniformizer();
        SymbolSum s1(K), s2(K);
        s1.add_term(1, t, K->from_int(2));
        s2.add_term(1, t, K->from_int(3));
        CHECK(oracle_equal(s1, s2)); // 2 and 3 are both non-squares in F5
    }
    SUBCASE("reduction preserves the oracle value") {
        auto K = q2();
        Rng rng(99);
        const i64 choices[6] = {-1, 1, -2, 2, 5, 13};
        for (int t = 0; t < 50; ++t) {
            SymbolSum s(K);
            for (int k = 0; k < 2; ++k) {
                i64 a = choices[rng.below(6)], b = choices[rng.below(6)];
                s.add_term(1, K->from_int(a), K->from_int(b));
            }
            if (s.empty()) continue;
            ReduceResult r = reduce_to_symbol(s);
            REQUIRE(verify_certificate(s, r.cert.output, r.cert));
            SymbolSum os(K);
            if (!r.trivial) os.add_term(1, r.symbol.a, r.symbol.b);
            else os.field = K;
            CHECK(hilbert2_value(os) == hilbert2_value(s));
        }
    }
}
