#ifndef SYMK_EXPR_HPP
#define SYMK_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include "symk/errors.hpp"
#include "symk/smallops.hpp"

namespace symk {

// Arithmetic expression AST for field elements: integer literals, named
// generators, + - * / ^ and parentheses.  Precedence ^ > unary - > * / > + -,
// left associative; exponents are integer literals (possibly negative).
struct Expr {
    enum class Kind { Int, Name, Add, Sub, Mul, Div, Neg, Pow };
    Kind kind = Kind::Int;
    i64 ival = 0;           // Int, and exponent for Pow
    std::string name;       // Name
    std::shared_ptr<Expr> lhs, rhs;

    static Expr integer(i64 v);
    static Expr ident(std::string n);
    static Expr binary(Kind k, Expr a, Expr b);
    static Expr negate(Expr a);
    static Expr power(Expr a, i64 e);
};

// One symbol {a, b} with an integer multiplicity (sign folded in).
struct SymbolTermExpr {
    i64 mult = 1;
    Expr a, b;
};

Expr parse_element_expr(const std::string& text);

// sum grammar:  [sign] [int '*'] '{' expr ',' expr '}' (('+'|'-') ...)*
std::vector<SymbolTermExpr> parse_symbol_sum(const std::string& text);

std::string print_expr(const Expr& e);
std::string print_symbol_sum(const std::vector<SymbolTermExpr>& terms);

// generator names appearing in the expression (for validation)
void collect_names(const Expr& e, std::vector<std::string>& out);

} // namespace symk

#endif
