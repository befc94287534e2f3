#include <fstream>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "symk/campaign.hpp"
#include "symk/expr.hpp"
#include "symk/kato.hpp"
#include "symk/oracles.hpp"
#include "symk/reduce.hpp"

using namespace symk;

namespace {

// exit codes: 0 ok/verified, 1 verification failed, 2 unsupported shape,
// 3 precision exhausted, 4 parse/config error
constexpr int EXIT_VERIFY_FAILED = 1;
constexpr int EXIT_UNSUPPORTED = 2;
constexpr int EXIT_PRECISION = 3;
constexpr int EXIT_PARSE = 4;

LocalFieldPtr load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field descriptor: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return LocalField::from_json_text(text);
}

SymbolSum parse_sum(const LocalFieldPtr& K, const std::string& expr) {
    SymbolSum s(K);
    for (const auto& term : parse_symbol_sum(expr)) {
        std::vector<std::string> names;
        collect_names(term.a, names);
        collect_names(term.b, names);
        LocalElem a = K->eval(term.a);
        LocalElem b = K->eval(term.b);
        s.add_term(term.mult, a, b);
    }
    return s;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

int run_reduce(const std::string& field_path, const std::string& expr,
               const std::string& cert_out) {
    auto K = load_field(field_path);
    SymbolSum s = parse_sum(K, expr);
    ReduceResult r = reduce_to_symbol(s);
    bool ok = verify_certificate(s, r.cert.output, r.cert);
    std::cout << "input:  " << s.to_string() << "\n";
    std::cout << "output: " << (r.trivial ? std::string("0 (class is trivial)")
                                          : "{" + r.symbol.a.serialize() + ", " +
                                                r.symbol.b.serialize() + "}")
              << "\n";
    std::cout << "steps:  " << r.cert.steps.size() << "\n";
    std::cout << "verified: " << (ok ? "yes" : "NO") << "\n";
    if (!cert_out.empty()) write_json(cert_out, r.cert.to_json());
    return ok ? 0 : EXIT_VERIFY_FAILED;
}

int run_verify(const std::string& field_path, const std::string& cert_path) {
    auto K = load_field(field_path);
    std::ifstream in(cert_path);
    if (!in) throw ConfigError("cannot open certificate: " + cert_path);
    nlohmann::ordered_json j;
    in >> j;
    Certificate c = Certificate::from_json(K, j);
    bool ok = verify_certificate(c.input, c.output, c);
    std::cout << (ok ? "verified" : "verification FAILED") << "\n";
    return ok ? 0 : EXIT_VERIFY_FAILED;
}

int run_graded(const std::string& field_path, const std::string& expr, long level) {
    auto K = load_field(field_path);
    SymbolSum s = parse_sum(K, expr);
    Frame fr = default_frame(K, level);
    LeadingResult lr = leading_graded(s, level, fr);
    std::cout << "level " << level << " payload: " << lr.elem.payload.to_string() << "\n";
    std::cout << "deeper remainder: " << lr.deeper.to_string() << "\n";
    bool ok = verify_certificate(s, lr.cert.output, lr.cert);
    std::cout << "certificate fragment verified: " << (ok ? "yes" : "NO") << "\n";
    return ok ? 0 : EXIT_VERIFY_FAILED;
}

int run_residue(const std::string& field_path, const std::string& expr) {
    auto K = load_field(field_path);
    SymbolSum s = parse_sum(K, expr);
    std::cout << tame_residue(s).to_string() << "\n";
    return 0;
}

int run_oracle_hilbert(const std::string& a_txt, const std::string& b_txt) {
    auto K = LocalField::from_json_text(R"({"p":2,"construction":[{"kind":"padic"}]})");
    LocalElem a = K->eval_text(a_txt), b = K->eval_text(b_txt);
    std::cout << (hilbert2_q2(a, b) > 0 ? "+1" : "-1") << "\n";
    return 0;
}

int run_oracle_aspair(const std::string& field_path, const std::string& f_txt,
                      const std::string& g_txt) {
    auto K = load_field(field_path);
    LocalElem f = K->eval_text(f_txt), g = K->eval_text(g_txt);
    std::cout << artin_schreier_pairing(f, g).to_string() << "\n";
    return 0;
}

int run_brauer2(const std::string& ly_txt, const std::string& lt_txt, int constants_deg) {
    auto C = make_brauer2_carrier(constants_deg);
    auto parse_elem = [&](const std::string& txt) {
        Expr e = parse_element_expr(txt);
        // evaluate over the carrier: y, t and integers
        std::function<ResidueElem(const Expr&)> ev = [&](const Expr& n) -> ResidueElem {
            switch (n.kind) {
                case Expr::Kind::Int: return C.K->from_int(n.ival);
                case Expr::Kind::Name:
                    if (n.name == "y") return C.y();
                    if (n.name == "t") return C.t();
                    throw UnknownGenerator("unknown generator '" + n.name + "'", 0);
                case Expr::Kind::Add: return ev(*n.lhs) + ev(*n.rhs);
                case Expr::Kind::Sub: return ev(*n.lhs) - ev(*n.rhs);
                case Expr::Kind::Mul: return ev(*n.lhs) * ev(*n.rhs);
                case Expr::Kind::Div: return ev(*n.lhs) / ev(*n.rhs);
                case Expr::Kind::Neg: return -ev(*n.lhs);
                case Expr::Kind::Pow: return ev(*n.lhs).pow(n.ival);
            }
            throw std::logic_error("eval");
        };
        return ev(e);
    };
    Form2 in{parse_elem(ly_txt), parse_elem(lt_txt)};
    QuaternionReduced r = quaternion_reduce(C, in);
    bool ok = verify_witness(C, in, r.out, r.w);
    std::cout << "f = " << r.f.to_string() << "\n";
    std::cout << "g = " << r.g.to_string() << "\n";
    std::cout << "witness verified: " << (ok ? "yes" : "NO") << "\n";
    return ok ? 0 : EXIT_VERIFY_FAILED;
}

int run_selftest(u64 seed, int cases, const std::string& report_out) {
    nlohmann::ordered_json report;
    report["seed"] = seed;
    report["campaigns"] = nlohmann::ordered_json::array();
    int failures = 0;

    struct FieldSpec {
        const char* name;
        const char* json;
    };
    const FieldSpec fields[] = {
        {"Q2", R"({"p":2,"construction":[{"kind":"padic"}]})"},
        {"Q2(sqrt2)",
         R"({"p":2,"construction":[{"kind":"padic"},{"kind":"eisenstein","name":"pi","poly":["-2","0","1"]}]})"},
        {"Q3(sqrt-3)",
         R"({"p":3,"construction":[{"kind":"padic"},{"kind":"eisenstein","name":"pi","poly":["3","0","1"]}],"zeta":{"present":true,"seed":"(-1+pi)/2"}})"},
        {"Gauss3(pi2=-3)",
         R"({"p":3,"construction":[{"kind":"gauss_padic","variable":"y"},{"kind":"eisenstein","name":"pi","poly":["3","0","1"]}],"zeta":{"present":true,"seed":"(-1+pi)/2"}})"},
        {"F5((t)) mod 2",
         R"({"p":2,"construction":[{"kind":"laurent","variable":"t","residue":{"kind":"prime","p":5}}]})"},
    };
    for (const auto& fs : fields) {
        auto K = LocalField::from_json_text(fs.json);
        CampaignReport rep = run_reduce_campaign(K, seed, cases);
        nlohmann::ordered_json cj = rep.to_json();
        cj["name"] = fs.name;
        report["campaigns"].push_back(cj);
        failures += rep.failures;
        std::cout << fs.name << ": " << rep.cases - rep.failures << "/" << rep.cases
                  << " ok (" << rep.seconds << "s)\n";
    }
    {
        auto C = make_brauer2_carrier();
        CampaignReport rep = run_brauer2_campaign(C, seed, cases);
        nlohmann::ordered_json cj = rep.to_json();
        cj["name"] = "brauer2/F2";
        report["campaigns"].push_back(cj);
        failures += rep.failures;
        std::cout << "brauer2/F2: " << rep.cases - rep.failures << "/" << rep.cases << " ok ("
                  << rep.seconds << "s)\n";
    }
    report["failures"] = failures;
    if (!report_out.empty()) write_json(report_out, report);
    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : EXIT_VERIFY_FAILED;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified symbol reduction in Milnor K-theory mod p over complete "
                 "discretely valued fields"};
    app.require_subcommand(1);

    std::string field_path, expr, cert_path, report_path;
    long level = 0;
    u64 seed = 1;
    int cases = 50;
    int cdeg = 1;
    std::string a_txt, b_txt;

    auto* c_reduce = app.add_subcommand("reduce", "reduce a symbol sum to a single symbol");
    c_reduce->add_option("-f,--field", field_path, "field descriptor JSON")->required();
    c_reduce->add_option("-e,--expr", expr, "symbol sum, e.g. '{1 - pi^2*y, pi} + {y, pi}'")
        ->required();
    c_reduce->add_option("--certificate", cert_path, "write the certificate JSON here");

    auto* c_verify = app.add_subcommand("verify", "replay a certificate");
    c_verify->add_option("-f,--field", field_path)->required();
    c_verify->add_option("-c,--certificate", cert_path)->required();

    auto* c_graded = app.add_subcommand("graded", "leading graded part at a level");
    c_graded->add_option("-f,--field", field_path)->required();
    c_graded->add_option("-e,--expr", expr)->required();
    c_graded->add_option("--level", level)->required();

    auto* c_residue = app.add_subcommand("residue", "tame residue of a symbol sum");
    c_residue->add_option("-f,--field", field_path)->required();
    c_residue->add_option("-e,--expr", expr)->required();

    auto* c_oracle = app.add_subcommand("oracle", "independent class oracles");
    auto* c_hilbert = c_oracle->add_subcommand("hilbert2", "2-adic Hilbert symbol");
    c_hilbert->add_option("a", a_txt)->required();
    c_hilbert->add_option("b", b_txt)->required();
    auto* c_aspair = c_oracle->add_subcommand("aspair", "Artin-Schreier residue pairing");
    c_aspair->add_option("-f,--field", field_path)->required();
    c_aspair->add_option("fexpr", a_txt)->required();
    c_aspair->add_option("gexpr", b_txt)->required();

    auto* c_br = app.add_subcommand("brauer2-reduce",
                                    "reduce a characteristic-2 one-form to a single term");
    std::string ly_txt, lt_txt;
    c_br->add_option("-e,--form", expr, "form 'lambda * dy + mu * dt' given as LY;LT");
    c_br->add_option("--ly", ly_txt, "dy coefficient");
    c_br->add_option("--lt", lt_txt, "dt coefficient");
    c_br->add_option("--constants-degree", cdeg, "F_{2^f} constants degree");

    auto* c_self = app.add_subcommand("selftest", "seeded randomized campaigns");
    c_self->add_option("--seed", seed)->required();
    c_self->add_option("--cases", cases)->required();
    c_self->add_option("--report", report_path, "machine-readable report JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_reduce->parsed()) return run_reduce(field_path, expr, cert_path);
        if (c_verify->parsed()) return run_verify(field_path, cert_path);
        if (c_graded->parsed()) return run_graded(field_path, expr, level);
        if (c_residue->parsed()) return run_residue(field_path, expr);
        if (c_oracle->parsed()) {
            if (c_hilbert->parsed()) return run_oracle_hilbert(a_txt, b_txt);
            if (c_aspair->parsed()) return run_oracle_aspair(field_path, a_txt, b_txt);
            std::cerr << "oracle: choose hilbert2 or aspair\n";
            return EXIT_PARSE;
        }
        if (c_br->parsed()) {
            if (ly_txt.empty() && lt_txt.empty() && !expr.empty()) {
                auto semi = expr.find(';');
                if (semi == std::string::npos) throw ParseError("expected 'LY;LT'", 0);
                ly_txt = expr.substr(0, semi);
                lt_txt = expr.substr(semi + 1);
            }
            if (ly_txt.empty()) ly_txt = "0";
            if (lt_txt.empty()) lt_txt = "0";
            return run_brauer2(ly_txt, lt_txt, cdeg);
        }
        if (c_self->parsed()) return run_selftest(seed, cases, report_path);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return EXIT_PARSE;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return EXIT_PARSE;
    } catch (const PrecisionExhausted& e) {
        std::cerr << "precision exhausted: " << e.what() << "\n";
        return EXIT_PRECISION;
    } catch (const UnsupportedShape& e) {
        std::cerr << "unsupported shape: " << e.what() << "\n";
        return EXIT_UNSUPPORTED;
    } catch (const UnsupportedResidue& e) {
        std::cerr << "unsupported residue: " << e.what() << "\n";
        return EXIT_UNSUPPORTED;
    } catch (const Unsupported& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return EXIT_UNSUPPORTED;
    } catch (const SymkError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_UNSUPPORTED;
    }
    return EXIT_PARSE;
}
