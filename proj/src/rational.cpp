#include "gradcalc/rational.hpp"

namespace gradcalc {

Rational rat_parse(const std::string& text) {
    if (text.empty()) throw structural_error("empty rational literal");
    Rational r;
    if (r.set_str(text, 10) != 0)
        throw structural_error("bad rational literal '" + text + "'");
    if (r.get_den() == 0)
        throw structural_error("rational with zero denominator: '" + text + "'");
    r.canonicalize();
    return r;
}

Rational rat_pow(const Rational& base, long exp) {
    if (exp < 0) {
        if (base == 0) throw structural_error("zero raised to negative power");
        return 1 / rat_pow(base, -exp);
    }
    Rational acc = 1;
    Rational b = base;
    while (exp > 0) {
        if (exp & 1) acc *= b;
        b *= b;
        exp >>= 1;
    }
    return acc;
}

Rational rat_binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rational(b);
}

} // namespace gradcalc
