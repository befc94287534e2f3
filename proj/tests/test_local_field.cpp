#include "doctest.h"

#include "symk/local_field.hpp"

using namespace symk;

namespace {

LocalFieldPtr q2(long prec = 0) {
    std::string j = R"({"p": 2, "construction": [{"kind": "padic"}]})";
    auto f = LocalField::from_json_text(j);
    return prec ? f->with_precision(prec) : f;
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

LocalFieldPtr gauss3() {
    return LocalField::from_json_text(
        R"({"p": 3, "construction": [{"kind": "gauss_padic", "variable": "y"}]})");
}

LocalFieldPtr gauss3_ext() {
    return LocalField::from_json_text(
        R"({"p": 3, "construction": [{"kind": "gauss_padic", "variable": "y"},
             {"kind": "eisenstein", "name": "pi", "poly": ["3", "0", "1"]}],
            "zeta": {"present": true, "seed": "(-1+pi)/2"}})");
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

TEST_CASE("2-adic integer arithmetic") {
    auto K = q2();
    LocalElem a = K->from_int(3), b = K->from_int(7);
    LocalElem prod = a * b;
    CHECK(prod.eq_at_precision(K->from_int(21)));
    // 21 = 5 mod 16
    LocalElem diff = prod - K->from_int(5);
    CHECK(!diff.zero);
    CHECK(diff.valuation().value() == 4);

    CHECK(K->uniformizer().valuation().value() == 1);
    LocalElem u = K->one() + K->uniformizer() * K->from_int(3);
    CHECK(u.residue().is_one());
}

TEST_CASE("valuation laws on random elements") {
    auto K = q2_sqrt2();
    Rng rng(2024);
    for (int t = 0; t < 60; ++t) {
        LocalElem a = K->from_int(rng.range(-20, 20)) +
                      K->uniformizer().pow((i64)rng.below(3)) * K->from_int(rng.range(1, 9));
        LocalElem b = K->uniformizer().pow((i64)rng.below(4)) * K->from_int(rng.range(1, 9));
        if (a.zero || b.zero) continue;
        LocalElem ab = a * b;
        CHECK(ab.valuation().value() == a.valuation().value() + b.valuation().value());
        LocalElem s = a + b;
        if (!s.zero) {
            long mv = std::min(a.valuation().value(), b.valuation().value());
            CHECK(s.valuation().value() >= mv);
            if (a.valuation().value() != b.valuation().value())
                CHECK(s.valuation().value() == mv);
        }
    }
}

TEST_CASE("epsilon") {
    CHECK(q2()->epsilon() == Rat(2, 1));
    CHECK(q3_sqrtm3()->epsilon() == Rat(3, 1));
    CHECK(gauss3()->epsilon() == Rat(3, 2));
    CHECK(q2_sqrt2()->epsilon() == Rat(4, 1));
    CHECK_THROWS_AS(f5t(2)->epsilon(), EqualCharacteristic);
}

TEST_CASE("gauss field: canonical lift of the p-basis element") {
    auto K = gauss3();
    ResidueElem ybar = K->residue_field()->generator();
    LocalElem y = K->lift(ybar);
    CHECK(y.valuation().value() == 0);
    CHECK(y.residue() == ybar);
    CHECK(y.eq_at_precision(K->generator_value("y")));
    // rational residues lift and reduce correctly
    ResidueElem r = (ybar + K->residue_field()->one()) / (ybar * ybar + K->residue_field()->from_int(2));
    LocalElem lr = K->lift(r);
    CHECK(lr.residue() == r);
}

TEST_CASE("eisenstein tower arithmetic") {
    auto K = q3_sqrtm3();
    LocalElem pi = K->uniformizer();
    CHECK(pi.valuation().value() == 1);
    LocalElem pi2 = pi * pi;
    CHECK(pi2.eq_at_precision(K->from_int(-3)));
    CHECK((K->one() / pi * pi).eq_at_precision(K->one()));
    CHECK(K->from_int(3).valuation().value() == 2);
    // division and residue
    LocalElem x = (K->one() + pi) / K->from_int(2);
    CHECK(x.valuation().value() == 0);
    CHECK(x.residue() == K->residue_field()->from_int(2));
}

TEST_CASE("precision stability under recomputation") {
    auto lo = q3_sqrtm3();
    auto hi = lo->with_precision(2 * lo->prec);
    auto pipeline = [](const LocalFieldPtr& K) {
        LocalElem pi = K->uniformizer();
        LocalElem a = (K->one() + pi * K->from_int(2)).pow(5);
        LocalElem b = a / (K->one() - pi.pow(3));
        return b * b - pi.pow(2) * b + K->from_int(7);
    };
    LocalElem x = pipeline(lo), y = pipeline(hi);
    auto dx = x.digit_expansion(lo->prec);
    auto dy = y.digit_expansion(lo->prec);
    REQUIRE(dx.size() <= dy.size());
    for (size_t i = 0; i < dx.size(); ++i) {
        CHECK(dx[i].first == dy[i].first);
        CHECK(dx[i].second == dy[i].second);
    }
}

TEST_CASE("kummer norm closed form") {
    auto K = q3_sqrtm3();
    LocalElem pi = K->uniformizer();
    Rng rng(31337);
    SUBCASE("d=2, j=3: N(1 - pi_M^3 x) = 1 - pi^3 x^2") {
        LocalElem x = K->from_int(5);
        LocalElem n = K->kummer_norm(x, 2, 3, true);
        CHECK(n.eq_at_precision(K->one() - pi.pow(3) * x.pow(2)));
    }
    SUBCASE("d=2, j=4: N(1 - pi_M^4 x) = (1 - pi^2 x)^2") {
        LocalElem x = K->from_int(7);
        LocalElem n = K->kummer_norm(x, 2, 4, true);
        CHECK(n.eq_at_precision((K->one() - pi.pow(2) * x).pow(2)));
    }
    SUBCASE("closed form equals conjugate product, small sweep") {
        for (int d = 2; d <= 4; ++d) {
            if (d % 3 == 0) continue;
            for (int j = 1; j <= 6; ++j) {
                LocalElem x = K->from_int(rng.range(1, 12));
                CHECK_NOTHROW(K->kummer_norm(x, d, j, true));
            }
        }
    }
    SUBCASE("wild steps are rejected") {
        CHECK_THROWS_AS(K->kummer_norm(K->one(), 3, 2), WildKummer);
    }
}

TEST_CASE("zeta data") {
    SUBCASE("2-adics: zeta = -1, (zeta-1)^2 = 4, u = 1 for omega = 4") {
        auto K = q2();
        ZetaData z = K->zeta_data();
        CHECK(z.zeta.eq_at_precision(K->from_int(-1)));
        CHECK(z.pi_power.eq_at_precision(K->from_int(4)));
        LocalElem u = K->unit_u_for(K->from_int(4));
        CHECK(u.eq_at_precision(K->one()));
    }
    SUBCASE("Q3(sqrt(-3)): zeta present, residue of u") {
        auto K = q3_sqrtm3();
        ZetaData z = K->zeta_data();
        LocalElem phi = z.zeta * z.zeta + z.zeta + K->one();
        CHECK(phi.zero);
        LocalElem omega = K->uniformizer().pow(3);
        LocalElem u = K->unit_u_for(omega);
        CHECK(u.valuation().value() == 0);
        CHECK(u.residue() == K->residue_field()->from_int(2));
    }
    SUBCASE("Q3(sqrt(-6)): u has residue sqrt2^{-1} in F9") {
        auto K = q3_sqrtm6();
        LocalElem omega = K->uniformizer().pow(3);
        LocalElem u = K->unit_u_for(omega);
        ResidueElem ub = u.residue();
        auto M = K->cyclo_M;
        const FieldPtr& F9 = M->residue_field();
        // ub^2 = 2 = (sqrt2^{-1})^2 in F9, and ub generates F9 over F3
        CHECK(ub * ub == F9->from_int(2));
        CHECK(ub.coords.size() == 2);
        CHECK(ub.coords[1] != 0);
        // omega * u = (zeta-1)^p exactly
        ZetaData z = K->zeta_data();
        LocalElem om_M = K->embed_into_extension(omega, M);
        CHECK((om_M * u).eq_at_precision(z.pi_power));
    }
    SUBCASE("no zeta configured") {
        auto K = gauss3();
        CHECK_THROWS_AS(K->zeta_data(), ZetaAbsent);
    }
}

TEST_CASE("principal unit p-th roots above epsilon") {
    SUBCASE("2-adics, v > 2") {
        auto K = q2();
        LocalElem a = K->one() + K->from_int(8) * K->from_int(3); // 1 + 24, v(24)=3
        auto w = K->principal_unit_pth_root(a);
        REQUIRE(w.has_value());
        CHECK((*w * *w).eq_at_precision(a));
        CHECK(!K->principal_unit_pth_root(K->from_int(5)).has_value()); // v(4) = 2 = eps
    }
    SUBCASE("Q3(sqrt(-3)), v > 3") {
        auto K = q3_sqrtm3();
        LocalElem pi = K->uniformizer();
        LocalElem a = K->one() + pi.pow(4) * K->from_int(2);
        auto w = K->principal_unit_pth_root(a);
        REQUIRE(w.has_value());
        CHECK(w->pow(3).eq_at_precision(a));
    }
    SUBCASE("gauss field, non-integral epsilon: level 2 > 3/2") {
        auto K = gauss3();
        LocalElem y = K->generator_value("y");
        LocalElem a = K->one() + K->from_int(9) * y; // v = 2 > 3/2
        auto w = K->principal_unit_pth_root(a);
        REQUIRE(w.has_value());
        CHECK(w->pow(3).eq_at_precision(a));
    }
    SUBCASE("laurent, residue char != p: everything 1+tO has a root") {
        auto K = f5t(2);
        LocalElem t = K->uniformizer();
        LocalElem a = K->one() + t * K->from_int(3) + t.pow(2);
        auto w = K->principal_unit_pth_root(a);
        REQUIRE(w.has_value());
        CHECK((*w * *w).eq_at_precision(a));
    }
}

TEST_CASE("laurent series field") {
    auto K = f5t(2);
    LocalElem t = K->uniformizer();
    LocalElem x = K->from_int(2) + t.pow(3);
    LocalElem y = t.pow(-2) * K->from_int(3);
    LocalElem z = x * y;
    CHECK(z.valuation().value() == -2);
    CHECK((z / y).eq_at_precision(x));
    CHECK(x.residue() == K->residue_field()->from_int(2));
}

TEST_CASE("expression evaluation against descriptors") {
    auto K = q3_sqrtm3();
    LocalElem a = K->eval_text("1 - pi^2 * 2");
    CHECK(a.eq_at_precision(K->one() - K->uniformizer().pow(2) * K->from_int(2)));
    CHECK(K->eval_text("zeta^3").eq_at_precision(K->one()));
    CHECK_THROWS_AS(K->eval_text("q + 1"), UnknownGenerator);
    auto G = gauss3();
    LocalElem b = G->eval_text("(y^2 + 1) / y");
    CHECK(b.valuation().value() == 0);
}

TEST_CASE("descriptor hashes and serialization") {
    auto K = q3_sqrtm3();
    CHECK(!K->hash.empty());
    LocalElem x = K->eval_text("2 + pi + pi^3");
    std::string s = x.serialize();
    CHECK(s.find("pi^0") != std::string::npos);
    // digits beyond precision are dropped when asked
    CHECK(x.serialize(1).find("pi^1") == std::string::npos);
}
