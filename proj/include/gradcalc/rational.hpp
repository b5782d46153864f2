#pragma once

#include <gmpxx.h>

#include <string>

#include "gradcalc/error.hpp"

namespace gradcalc {

// Exact rational scalar. GMP keeps the canonical form (gcd 1, positive
// denominator) for all arithmetic results; only the raw two-integer
// constructor needs an explicit canonicalize, which make_rational does.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw structural_error("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational make_rational(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw structural_error("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Prints "n" for integers, "n/d" otherwise (GMP's mpq string form).
inline std::string rat_to_string(const Rational& r) { return r.get_str(); }

Rational rat_parse(const std::string& text);

Rational rat_pow(const Rational& base, long exp);

// n choose k as an exact integer-valued rational, 0 when k < 0 or k > n.
Rational rat_binomial(long n, long k);

} // namespace gradcalc
