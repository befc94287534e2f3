#include "symk/expr.hpp"

#include <cctype>
#include <sstream>

namespace symk {

Expr Expr::integer(i64 v) {
    Expr e;
    e.kind = Kind::Int;
    e.ival = v;
    return e;
}
Expr Expr::ident(std::string n) {
    Expr e;
    e.kind = Kind::Name;
    e.name = std::move(n);
    return e;
}
Expr Expr::binary(Kind k, Expr a, Expr b) {
    Expr e;
    e.kind = k;
    e.lhs = std::make_shared<Expr>(std::move(a));
    e.rhs = std::make_shared<Expr>(std::move(b));
    return e;
}
Expr Expr::negate(Expr a) {
    Expr e;
    e.kind = Kind::Neg;
    e.lhs = std::make_shared<Expr>(std::move(a));
    return e;
}
Expr Expr::power(Expr a, i64 ex) {
    Expr e;
    e.kind = Kind::Pow;
    e.ival = ex;
    e.lhs = std::make_shared<Expr>(std::move(a));
    return e;
}

namespace {

struct Lexer {
    const std::string& s;
    size_t pos = 0;
    explicit Lexer(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool accept(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "' " + what, pos);
    }
    i64 integer() {
        skip_ws();
        size_t start = pos;
        bool neg = false;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
            neg = s[pos] == '-';
            ++pos;
        }
        if (pos >= s.size() || !std::isdigit((unsigned char)s[pos]))
            throw ParseError("expected integer", start);
        i64 v = 0;
        while (pos < s.size() && std::isdigit((unsigned char)s[pos])) {
            v = v * 10 + (s[pos] - '0');
            if (v > (i64)1 << 60) throw ParseError("integer literal too large", start);
            ++pos;
        }
        return neg ? -v : v;
    }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        if (pos >= s.size() || !(std::isalpha((unsigned char)s[pos]) || s[pos] == '_'))
            throw ParseError("expected identifier", start);
        while (pos < s.size() && (std::isalnum((unsigned char)s[pos]) || s[pos] == '_')) ++pos;
        return s.substr(start, pos - start);
    }
};

struct ElemParser {
    Lexer lx;
    explicit ElemParser(const std::string& t) : lx(t) {}

    Expr parse_sum() {
        Expr e = parse_term();
        while (true) {
            if (lx.accept('+')) e = Expr::binary(Expr::Kind::Add, std::move(e), parse_term());
            else if (lx.accept('-')) e = Expr::binary(Expr::Kind::Sub, std::move(e), parse_term());
            else return e;
        }
    }
    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            if (lx.accept('*')) e = Expr::binary(Expr::Kind::Mul, std::move(e), parse_factor());
            else if (lx.accept('/')) e = Expr::binary(Expr::Kind::Div, std::move(e), parse_factor());
            else return e;
        }
    }
    Expr parse_factor() {
        if (lx.accept('-')) return Expr::negate(parse_factor());
        if (lx.accept('+')) return parse_factor();
        return parse_power();
    }
    Expr parse_power() {
        Expr base = parse_atom();
        if (lx.accept('^')) {
            i64 e = lx.integer();
            return Expr::power(std::move(base), e);
        }
        return base;
    }
    Expr parse_atom() {
        char c = lx.peek();
        if (c == '(') {
            lx.expect('(', "");
            Expr e = parse_sum();
            lx.expect(')', "to close parenthesis");
            return e;
        }
        if (std::isdigit((unsigned char)c)) return Expr::integer(lx.integer());
        if (std::isalpha((unsigned char)c) || c == '_') return Expr::ident(lx.ident());
        throw ParseError("expected value", lx.pos);
    }
};

} // namespace

Expr parse_element_expr(const std::string& text) {
    ElemParser p(text);
    Expr e = p.parse_sum();
    if (!p.lx.eof()) throw ParseError("trailing input", p.lx.pos);
    return e;
}

std::vector<SymbolTermExpr> parse_symbol_sum(const std::string& text) {
    std::vector<SymbolTermExpr> out;
    Lexer lx(text);
    bool first = true;
    while (!lx.eof()) {
        i64 sign = 1;
        if (lx.accept('-')) sign = -1;
        else if (lx.accept('+')) sign = 1;
        else if (!first) throw ParseError("expected '+' or '-' between symbols", lx.pos);
        i64 mult = 1;
        if (std::isdigit((unsigned char)lx.peek())) {
            mult = lx.integer();
            lx.expect('*', "after symbol multiplicity");
        }
        lx.expect('{', "to open a symbol");
        // parse the two component expressions up to the matching ',' / '}'
        ElemParser sub(lx.s);
        sub.lx.pos = lx.pos;
        Expr a = sub.parse_sum();
        sub.lx.expect(',', "between symbol entries");
        Expr b = sub.parse_sum();
        sub.lx.expect('}', "to close the symbol");
        lx.pos = sub.lx.pos;
        out.push_back({sign * mult, std::move(a), std::move(b)});
        first = false;
    }
    if (out.empty()) throw ParseError("empty symbol sum", 0);
    return out;
}

namespace {
int prec_of(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Pow: return 4;
        default: return 5;
    }
}

void print_rec(const Expr& e, std::ostringstream& os, int parent_prec) {
    int myp = prec_of(e.kind);
    bool paren = myp < parent_prec;
    if (paren) os << "(";
    switch (e.kind) {
        case Expr::Kind::Int: os << e.ival; break;
        case Expr::Kind::Name: os << e.name; break;
        case Expr::Kind::Add:
            print_rec(*e.lhs, os, myp);
            os << " + ";
            print_rec(*e.rhs, os, myp + 1);
            break;
        case Expr::Kind::Sub:
            print_rec(*e.lhs, os, myp);
            os << " - ";
            print_rec(*e.rhs, os, myp + 1);
            break;
        case Expr::Kind::Mul:
            print_rec(*e.lhs, os, myp);
            os << " * ";
            print_rec(*e.rhs, os, myp + 1);
            break;
        case Expr::Kind::Div:
            print_rec(*e.lhs, os, myp);
            os << " / ";
            print_rec(*e.rhs, os, myp + 1);
            break;
        case Expr::Kind::Neg:
            os << "-";
            print_rec(*e.lhs, os, myp + 1);
            break;
        case Expr::Kind::Pow:
            print_rec(*e.lhs, os, myp + 1);
            os << "^" << e.ival;
            break;
    }
    if (paren) os << ")";
}
} // namespace

std::string print_expr(const Expr& e) {
    std::ostringstream os;
    print_rec(e, os, 0);
    return os.str();
}

std::string print_symbol_sum(const std::vector<SymbolTermExpr>& terms) {
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms) {
        i64 m = t.mult;
        if (first) {
            if (m < 0) { os << "-"; m = -m; }
        } else {
            os << (m < 0 ? " - " : " + ");
            if (m < 0) m = -m;
        }
        if (m != 1) os << m << "*";
        os << "{" << print_expr(t.a) << ", " << print_expr(t.b) << "}";
        first = false;
    }
    return os.str();
}

void collect_names(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::Name: out.push_back(e.name); break;
        case Expr::Kind::Int: break;
        default:
            if (e.lhs) collect_names(*e.lhs, out);
            if (e.rhs) collect_names(*e.rhs, out);
    }
}

} // namespace symk
