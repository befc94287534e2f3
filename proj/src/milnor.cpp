#include "symk/milnor.hpp"

#include <sstream>

namespace symk {

void SymbolSum::add_term(i64 coeff, const LocalElem& a, const LocalElem& b) {
    if (!field) field = a.field;
    if (a.field.get() != field.get() || b.field.get() != field.get())
        throw FieldMismatch("symbol entries must live in the descriptor field");
    i64 c = coeff % (i64)p();
    if (c < 0) c += (i64)p();
    if (c == 0) return;
    if (a.zero || b.zero)
        throw DivisionByUncertifiedZero("symbol entry is not certified nonzero");
    if (a.key() == field->one().key() || b.key() == field->one().key()) return;
    for (auto it = entries.begin(); it != entries.end(); ++it) {
        if (it->second.a.key() == a.key() && it->second.b.key() == b.key()) {
            it->first = (int)(((i64)it->first + c) % (i64)p());
            if (it->first == 0) entries.erase(it);
            return;
        }
    }
    entries.push_back({(int)c, Symbol{a, b}});
}

void SymbolSum::add(const SymbolSum& o) {
    for (const auto& [c, s] : o.entries) add_term(c, s.a, s.b);
}

SymbolSum SymbolSum::operator-() const {
    SymbolSum r(field);
    for (const auto& [c, s] : entries) r.add_term(-(i64)c, s.a, s.b);
    return r;
}

bool SymbolSum::same_entries(const SymbolSum& o) const {
    if (entries.size() != o.entries.size()) return false;
    std::vector<bool> used(o.entries.size(), false);
    for (const auto& [c, s] : entries) {
        bool hit = false;
        for (size_t i = 0; i < o.entries.size(); ++i) {
            if (used[i]) continue;
            if (o.entries[i].first == c && o.entries[i].second.eq_at_precision(s)) {
                used[i] = true;
                hit = true;
                break;
            }
        }
        if (!hit) return false;
    }
    return true;
}

nlohmann::ordered_json SymbolSum::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& [c, s] : entries)
        j.push_back({c, s.a.serialize(), s.b.serialize()});
    return j;
}

SymbolSum SymbolSum::from_json(const LocalFieldPtr& f, const nlohmann::ordered_json& j) {
    SymbolSum s(f);
    for (const auto& e : j) {
        i64 c = e.at(0).get<i64>();
        LocalElem a = f->eval_text(e.at(1).get<std::string>());
        LocalElem b = f->eval_text(e.at(2).get<std::string>());
        s.add_term(c, a, b);
    }
    return s;
}

std::string SymbolSum::to_string() const {
    if (entries.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [c, s] : entries) {
        if (!first) os << " + ";
        first = false;
        if (c != 1) os << c << "*";
        os << "{" << s.a.serialize() << ", " << s.b.serialize() << "}";
    }
    return os.str();
}

const char* cert_kind_name(CertStep::Kind k) {
    switch (k) {
        case CertStep::Kind::Bilinearity: return "bilinearity";
        case CertStep::Kind::Antisymmetry: return "antisymmetry";
        case CertStep::Kind::SteinbergUnit: return "steinberg_unit";
        case CertStep::Kind::SteinbergNeg: return "steinberg_neg";
        case CertStep::Kind::PthPower: return "pth_power";
        case CertStep::Kind::Substitute: return "substitute";
    }
    return "?";
}

nlohmann::ordered_json CertStep::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = cert_kind_name(kind);
    j["dir"] = dir;
    j["slot"] = slot;
    j["coeff"] = coeff;
    j["sym"] = {sym.a.serialize(), sym.b.serialize()};
    if (kind == Kind::Bilinearity) {
        nlohmann::ordered_json fs = nlohmann::ordered_json::array();
        for (const auto& [v, e] : factors) fs.push_back({v.serialize(), e});
        j["factors"] = fs;
    }
    if (kind == Kind::PthPower) j["witness"] = witness.serialize();
    if (kind == Kind::Substitute) j["to"] = {sym_to.a.serialize(), sym_to.b.serialize()};
    return j;
}

CertStep CertStep::from_json(const LocalFieldPtr& f, const nlohmann::ordered_json& j) {
    CertStep s;
    std::string k = j.at("kind").get<std::string>();
    if (k == "bilinearity") s.kind = Kind::Bilinearity;
    else if (k == "antisymmetry") s.kind = Kind::Antisymmetry;
    else if (k == "steinberg_unit") s.kind = Kind::SteinbergUnit;
    else if (k == "steinberg_neg") s.kind = Kind::SteinbergNeg;
    else if (k == "pth_power") s.kind = Kind::PthPower;
    else if (k == "substitute") s.kind = Kind::Substitute;
    else throw ConfigError("certificate: unknown step kind " + k);
    s.dir = j.value("dir", 1);
    s.slot = j.value("slot", 0);
    s.coeff = j.value("coeff", (i64)1);
    s.sym.a = f->eval_text(j.at("sym").at(0).get<std::string>());
    s.sym.b = f->eval_text(j.at("sym").at(1).get<std::string>());
    if (s.kind == Kind::Bilinearity) {
        for (const auto& e : j.at("factors"))
            s.factors.push_back({f->eval_text(e.at(0).get<std::string>()), e.at(1).get<i64>()});
    }
    if (s.kind == Kind::PthPower) s.witness = f->eval_text(j.at("witness").get<std::string>());
    if (s.kind == Kind::Substitute) {
        s.sym_to.a = f->eval_text(j.at("to").at(0).get<std::string>());
        s.sym_to.b = f->eval_text(j.at("to").at(1).get<std::string>());
    }
    return s;
}

nlohmann::ordered_json Certificate::to_json() const {
    nlohmann::ordered_json j;
    j["field"] = field_hash;
    j["input"] = input.to_json();
    j["output"] = output.to_json();
    j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : steps) j["steps"].push_back(s.to_json());
    return j;
}

Certificate Certificate::from_json(const LocalFieldPtr& f, const nlohmann::ordered_json& j) {
    Certificate c;
    c.field_hash = j.at("field").get<std::string>();
    c.input = SymbolSum::from_json(f, j.at("input"));
    c.output = SymbolSum::from_json(f, j.at("output"));
    for (const auto& js : j.at("steps")) c.steps.push_back(CertStep::from_json(f, js));
    return c;
}

ResidueElem tame_residue_symbol(const LocalElem& a, const LocalElem& b) {
    const LocalFieldPtr& K = a.field;
    auto va = a.valuation(), vb = b.valuation();
    if (!va || !vb) throw DivisionByUncertifiedZero("tame residue of uncertified entry");
    LocalElem pi = K->uniformizer();
    LocalElem ua = a / pi.pow(*va);
    LocalElem ub = b / pi.pow(*vb);
    ResidueElem r = ua.residue().pow(*vb) / ub.residue().pow(*va);
    if ((*va % 2) && (*vb % 2)) r = -r;
    return r;
}

ResidueElem tame_residue(const SymbolSum& s) {
    const FieldPtr& kb = s.field->residue_field();
    ResidueElem out = kb->one();
    for (const auto& [c, sym] : s.entries)
        out = out * tame_residue_symbol(sym.a, sym.b).pow(c);
    return out;
}

bool same_class_mod_pth_powers(const ResidueElem& x, const ResidueElem& y, u64 p) {
    if (x.is_zero() || y.is_zero()) throw DivisionByZero("class of zero");
    ResidueElem q = x / y;
    switch (q.field->kind) {
        case ResidueField::Kind::Prime:
        case ResidueField::Kind::Finite: {
            int deg = q.field->kind == ResidueField::Kind::Prime ? 1 : q.field->degree;
            u64 order = ipow_u64(q.field->p, (unsigned)deg) - 1;
            u64 g = gcd_u64(p, order);
            if (g == 1) return true;
            return q.pow((i64)(order / g)).is_one();
        }
        case ResidueField::Kind::Closure: {
            u64 order = ipow_u64(q.field->p, (unsigned)q.sub_degree) - 1;
            u64 g = gcd_u64(p, order);
            if (g == 1) return true;
            return q.pow((i64)(order / g)).is_one();
        }
        case ResidueField::Kind::RationalFunction: {
            if (q.field->p == p) {
                return pth_root(q).has_value();
            }
            // residue char != p: x is a p-th power iff its divisor is p-divisible
            // and its "leading unit" is one in the constants; test via p-th root
            // of the constants leading coefficient after checking exponents.
            throw Unsupported("class test for rational residues away from p");
        }
    }
    throw Unsupported("same_class_mod_pth_powers");
}

} // namespace symk
