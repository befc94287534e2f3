#include "symk/differentials.hpp"

namespace symk {

OneForm differentiate(const ResidueElem& f) {
    const FieldPtr& K = f.field;
    if (K->kind != ResidueField::Kind::RationalFunction)
        throw NoPBasis("differentiate: carrier has no p-basis");
    using namespace poly;
    // (u/v)' = (u'v - uv')/v^2
    CPoly n = sub(mul(derivative(f.num), f.den), mul(f.num, derivative(f.den)));
    CPoly d = mul(f.den, f.den);
    return {make_rational(K, std::move(n), std::move(d))};
}

std::optional<ResidueElem> exactness_witness(const OneForm& w) {
    const FieldPtr& K = w.coeff.field;
    u64 p = K->p;
    if (K->kind != ResidueField::Kind::RationalFunction)
        throw Unsupported("exactness_witness: unsupported carrier");
    if (w.is_zero()) return K->zero();
    auto parts = frobenius_decompose(w.coeff);
    // c = sum_l c_l^p y^l ; the y^(p-1) component obstructs, every other
    // component integrates to c_l^p y^(l+1)/(l+1)
    if (!parts[p - 1].is_zero()) return std::nullopt;
    ResidueElem y = K->generator();
    ResidueElem f = K->zero();
    for (u64 l = 0; l < p - 1 || (p == 1); ++l) {
        if (parts[l].is_zero()) continue;
        f = f + parts[l].pow((i64)p) * y.pow((i64)l + 1) / K->from_int((i64)l + 1);
    }
    return f;
}

OneForm inverse_cartier(const OneForm& w) {
    const FieldPtr& K = w.coeff.field;
    if (K->kind != ResidueField::Kind::RationalFunction)
        throw NotBasisAligned("inverse_cartier: carrier has no aligned basis form");
    ResidueElem y = K->generator();
    return {w.coeff.pow((i64)K->p) * y.pow((i64)K->p - 1)};
}

} // namespace symk
