#include "doctest.h"

#include "symk/expr.hpp"
#include "symk/local_field.hpp"

using namespace symk;

TEST_CASE("element expression round trips") {
    const char* corpus[] = {
        "1 + 2 * y",
        "(y + 1) / (y - 2)",
        "pi^2 * y - 3",
        "-x + 4 / (a * b)",
        "1 - pi^3 * (y + 1)",
        "zeta^2 + zeta + 1",
        "s * pi / 2",
        "y^-1 + t^2",
        "((a))",
        "2 - -3",
    };
    for (const char* text : corpus) {
        Expr e = parse_element_expr(text);
        std::string printed = print_expr(e);
        Expr e2 = parse_element_expr(printed);
        CHECK(print_expr(e2) == printed);
    }
}

TEST_CASE("symbol sum round trips") {
    const char* corpus[] = {
        "{y, pi}",
        "{1 - pi^2 * y, pi} + {y, pi}",
        "-{a, b} + 2*{c, d}",
        "{1 - pi * y, y} - {1 - pi^2, pi} + {u, v}",
        "2*{x, y}",
    };
    for (const char* text : corpus) {
        auto terms = parse_symbol_sum(text);
        std::string printed = print_symbol_sum(terms);
        auto terms2 = parse_symbol_sum(printed);
        CHECK(print_symbol_sum(terms2) == printed);
    }
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_element_expr("1 + * 2"), ParseError);
    CHECK_THROWS_AS(parse_symbol_sum("{1 - pi^2 *, y}"), ParseError);
    CHECK_THROWS_AS(parse_symbol_sum("{a, b"), ParseError);
    CHECK_THROWS_AS(parse_symbol_sum(""), ParseError);
    try {
        parse_symbol_sum("{1 - pi^2 *, y}");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.position > 0);
    }
}

TEST_CASE("unknown generators are rejected against the descriptor") {
    auto K = LocalField::from_json_text(
        R"({"p": 3, "construction": [{"kind": "padic"},
             {"kind": "eisenstein", "name": "pi", "poly": ["3", "0", "1"]}]})");
    CHECK_THROWS_AS(K->eval_text("q + 1"), UnknownGenerator);
    CHECK_NOTHROW(K->eval_text("pi + 1"));
}

TEST_CASE("deterministic serialization") {
    auto K = LocalField::from_json_text(
        R"({"p": 3, "construction": [{"kind": "padic"},
             {"kind": "eisenstein", "name": "pi", "poly": ["3", "0", "1"]}]})");
    LocalElem x = K->eval_text("2 + pi - pi^3 / 2");
    std::string s1 = x.serialize();
    LocalElem y = K->eval_text(s1);
    CHECK(x.eq_at_precision(y));
    CHECK(y.serialize() == s1);
}
