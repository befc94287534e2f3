#include "doctest.h"

#include "symk/coeffs.hpp"

using namespace symk;

namespace {

ResidueElem ratmono(const FieldPtr& K, i64 c, int n) {
    // c * y^n over a rational function field
    ResidueElem y = K->generator();
    return K->from_int(c) * y.pow(n);
}

} // namespace

TEST_CASE("prime field basics") {
    auto F3 = ResidueField::prime(3);
    CHECK(F3->from_int(5) == F3->from_int(2));
    CHECK((F3->from_int(2) + F3->from_int(2)) == F3->from_int(1));
    CHECK((F3->from_int(2) * F3->from_int(2)) == F3->from_int(1));
    CHECK((F3->from_int(1) / F3->from_int(2)) == F3->from_int(2));
    CHECK_THROWS_AS(F3->from_int(1) / F3->zero(), DivisionByZero);
}

TEST_CASE("characteristic-3 cancellation in F3(y)") {
    auto F3 = ResidueField::prime(3);
    auto K = ResidueField::rational_function(F3);
    ResidueElem y = K->generator();
    ResidueElem a = y + K->one();                       // y + 1
    ResidueElem b = K->from_int(2) * y + K->from_int(2); // 2y + 2
    CHECK((a + b).is_zero());
    CHECK((y * (K->one() / y)).is_one());
}

TEST_CASE("F4 with custom modulus s^2+s+1") {
    auto F4 = ResidueField::finite_custom(2, {1, 1, 1}, "s");
    ResidueElem s = F4->generator();
    CHECK((s * (s + F4->one())).is_one()); // s*(s+1) = s^2+s = 1
}

TEST_CASE("rational function canonical form") {
    auto F3 = ResidueField::prime(3);
    auto K = ResidueField::rational_function(F3);
    ResidueElem y = K->generator();
    // (y^2 - 1)/(y - 1) = y + 1
    ResidueElem a = (y * y - K->one()) / (y - K->one());
    CHECK(a == y + K->one());
    // denominator monic: 1/(2y) == 2/y * inverse-normalized
    ResidueElem b = K->one() / (K->from_int(2) * y);
    ResidueElem c = K->from_int(2) / y;
    CHECK(b == c);
}

TEST_CASE("frobenius decomposition over F3(y)") {
    auto F3 = ResidueField::prime(3);
    auto K = ResidueField::rational_function(F3);
    ResidueElem y = K->generator();

    SUBCASE("y^2 + y -> (0, 1, 1)") {
        auto d = frobenius_decompose(y * y + y);
        CHECK(d[0].is_zero());
        CHECK(d[1].is_one());
        CHECK(d[2].is_one());
    }
    SUBCASE("constants are fixed") {
        auto d = frobenius_decompose(K->from_int(2));
        CHECK(d[0] == K->from_int(2));
        CHECK(d[1].is_zero());
        CHECK(d[2].is_zero());
    }
    SUBCASE("y^4 -> (0, y, 0)") {
        auto d = frobenius_decompose(y.pow(4));
        CHECK(d[0].is_zero());
        CHECK(d[1] == y);
        CHECK(d[2].is_zero());
    }
    SUBCASE("reconstruction on random elements") {
        Rng rng(12345);
        for (int trial = 0; trial < 100; ++trial) {
            poly::CPoly num, den;
            int dn = (int)rng.below(5), dd = (int)rng.below(3);
            for (int i = 0; i <= dn; ++i) num.push_back(F3->from_int(rng.range(0, 2)));
            for (int i = 0; i <= dd; ++i) den.push_back(F3->from_int(rng.range(0, 2)));
            den.push_back(F3->one()); // nonzero
            ResidueElem f = K->zero();
            for (size_t i = 0; i < num.size(); ++i) f = f + ratmono(K, (i64)num[i].coords[0], (int)i);
            ResidueElem g = K->zero();
            for (size_t i = 0; i < den.size(); ++i) g = g + ratmono(K, (i64)den[i].coords[0], (int)i);
            if (g.is_zero()) continue;
            f = f / g;
            auto d = frobenius_decompose(f);
            ResidueElem back = K->zero();
            for (int l = 0; l < 3; ++l) back = back + d[(size_t)l].pow(3) * y.pow(l);
            CHECK(back == f);
        }
    }
}

TEST_CASE("pth_root") {
    auto F3 = ResidueField::prime(3);
    auto K = ResidueField::rational_function(F3);
    ResidueElem y = K->generator();
    CHECK(pth_root(K->one()).value().is_one());
    CHECK(pth_root(y.pow(3)).value() == y);
    CHECK(!pth_root(y).has_value());
    SUBCASE("roundtrip f^p -> f") {
        Rng rng(777);
        for (int trial = 0; trial < 50; ++trial) {
            ResidueElem f = ratmono(K, rng.range(0, 2), (int)rng.below(4)) + K->from_int(rng.range(0, 2));
            CHECK(pth_root(f.pow(3)).value() == f);
        }
    }
}

TEST_CASE("artin_schreier_solve") {
    SUBCASE("over F9: Phi(sqrt2) = sqrt2") {
        auto F9 = ResidueField::finite(3, 2);
        // sqrt2: the elements with square == 2
        ResidueElem sqrt2;
        bool found = false;
        for (u64 a = 0; a < 3 && !found; ++a)
            for (u64 b = 0; b < 3 && !found; ++b) {
                ResidueElem e;
                e.field = F9;
                e.coords = {a, b};
                if ((e * e) == F9->from_int(2) && b != 0) {
                    sqrt2 = e;
                    found = true;
                }
            }
        REQUIRE(found);
        CHECK(sqrt2.pow(3) - sqrt2 == sqrt2); // the paper's computation Phi(sqrt2)=sqrt2
        auto t = artin_schreier_solve(sqrt2);
        REQUIRE(t.has_value());
        CHECK(t->pow(3) - *t == sqrt2);
        // solutions differ by F_3 and include sqrt2 itself
        bool hit = false;
        for (i64 c = 0; c < 3; ++c)
            if (*t + F9->from_int(c) == sqrt2) hit = true;
        CHECK(hit);
    }
    SUBCASE("f = 0 -> 0") {
        auto F9 = ResidueField::finite(3, 2);
        auto t = artin_schreier_solve(F9->zero());
        REQUIRE(t.has_value());
        CHECK(t->pow(3) - *t == F9->zero());
    }
    SUBCASE("over F3: f = 1 has no solution") {
        auto F3 = ResidueField::prime(3);
        CHECK(!artin_schreier_solve(F3->one()).has_value());
    }
    SUBCASE("solutions differ by the prime field, deterministic minimum") {
        auto F9 = ResidueField::finite(3, 2);
        Rng rng(42);
        for (int trial = 0; trial < 30; ++trial) {
            ResidueElem f;
            f.field = F9;
            f.coords = {rng.below(3), rng.below(3)};
            auto t = artin_schreier_solve(f);
            if (!t) continue;
            for (i64 c = 1; c < 3; ++c) {
                ResidueElem other = *t + F9->from_int(c);
                CHECK(other.pow(3) - other == f);
                CHECK(t->cmp(other) < 0);
            }
        }
    }
    SUBCASE("rational function field: poles and polynomial parts") {
        auto F3 = ResidueField::prime(3);
        auto K = ResidueField::rational_function(F3);
        ResidueElem y = K->generator();
        Rng rng(99);
        for (int trial = 0; trial < 25; ++trial) {
            // pick t, solve for t^3 - t and compare
            ResidueElem t = ratmono(K, rng.range(1, 2), (int)rng.below(3)) +
                            K->from_int(rng.range(0, 2)) / (y + K->one());
            ResidueElem f = t.pow(3) - t;
            auto s = artin_schreier_solve(f);
            REQUIRE(s.has_value());
            CHECK(s->pow(3) - *s == f);
        }
        // y has a simple "pole at infinity" not divisible by p
        CHECK(!artin_schreier_solve(y).has_value());
    }
}

TEST_CASE("twisted artin-schreier test") {
    auto F3 = ResidueField::prime(3);
    auto F9 = ResidueField::finite(3, 2);
    SUBCASE("paper example: u = sqrt2^{-1}, f = 1 is in the twisted subgroup") {
        ResidueElem sqrt2;
        for (u64 a = 0; a < 3; ++a)
            for (u64 b = 1; b < 3; ++b) {
                ResidueElem e;
                e.field = F9;
                e.coords = {a, b};
                if ((e * e) == F9->from_int(2)) sqrt2 = e;
            }
        REQUIRE(!sqrt2.is_zero());
        ResidueElem u = sqrt2.inv();
        auto t = twisted_artin_schreier_test(F3->one(), u, F9);
        REQUIRE(t.has_value());
        CHECK(u * (t->pow(3) - *t) == F9->one());
    }
    SUBCASE("f = 0 -> witness 0") {
        auto t = twisted_artin_schreier_test(F3->zero(), F9->one(), F9);
        REQUIRE(t.has_value());
        CHECK((t->pow(3) - *t).is_zero());
    }
    SUBCASE("u = 1, f = 1 over F9 is not in the subgroup") {
        CHECK(!twisted_artin_schreier_test(F9->one(), F9->one(), F9).has_value());
    }
}

TEST_CASE("lazy closure tower coherence") {
    auto C2 = ResidueField::closure(2);
    auto C3 = ResidueField::closure(3);

    SUBCASE("embedding composition F_{p^m} -> F_{p^n} -> F_{p^k}") {
        for (auto [p, chain] : {std::pair<u64, std::array<int, 3>>{2, {1, 2, 4}},
                                {2, {2, 4, 8}},
                                {2, {3, 6, 12}},
                                {3, {1, 2, 4}},
                                {3, {2, 4, 8}}}) {
            auto C = ResidueField::closure(p);
            auto Fm = ResidueField::finite(p, chain[0]);
            u64 q = ipow_u64(p, (unsigned)chain[0]);
            for (u64 c = 0; c < std::min<u64>(q, 16); ++c) {
                ResidueElem x;
                if (chain[0] == 1) {
                    x = Fm->from_int((i64)c);
                } else {
                    x.field = Fm;
                    x.coords.assign((size_t)chain[0], 0);
                    u64 t = c;
                    for (int i = 0; i < chain[0]; ++i) { x.coords[(size_t)i] = t % p; t /= p; }
                }
                auto Fn = ResidueField::finite(p, chain[1]);
                auto Fk = ResidueField::finite(p, chain[2]);
                ResidueElem via = embed_into(embed_into(x, Fn), Fk);
                ResidueElem direct = embed_into(x, Fk);
                CHECK(via == direct);
                CHECK(embed_into(via, C) == embed_into(direct, C));
            }
        }
    }
    SUBCASE("closure arithmetic across subfields") {
        // elements of F_4 and F_8 multiply inside F_64
        ResidueElem a = embed_into(ResidueField::finite(2, 2)->generator(), C2);
        ResidueElem b = embed_into(ResidueField::finite(2, 3)->generator(), C2);
        ResidueElem prod = a * b;
        CHECK(prod.sub_degree == 6);
        CHECK((prod / b) == a);
    }
    SUBCASE("requesting the same degree twice yields identical fields") {
        auto a = ResidueField::finite(3, 4);
        auto b = ResidueField::finite(3, 4);
        CHECK(a.get() == b.get());
    }
    (void)C3;
}

TEST_CASE("closure artin-schreier extends degree when needed") {
    auto C3 = ResidueField::closure(3);
    ResidueElem one = C3->one();
    auto t = artin_schreier_solve(one); // x^3 - x - 1 splits in F_27
    REQUIRE(t.has_value());
    CHECK(t->pow(3) - *t == one);
    CHECK(t->sub_degree == 3);
}

TEST_CASE("field mismatch is detected") {
    auto F3 = ResidueField::prime(3);
    auto F5 = ResidueField::prime(5);
    CHECK_THROWS_AS(F3->one() + F5->one(), FieldMismatch);
}
