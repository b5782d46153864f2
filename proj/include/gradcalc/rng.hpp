#pragma once

#include <cstdint>
#include <random>

#include "gradcalc/module.hpp"

namespace gradcalc {

// Seeded deterministic randomness for the sampling cross-checks. mt19937_64
// has a standardized output sequence, so fixed seed means fixed stream.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // Uniform integer in [lo, hi], inclusive; rejection keeps it unbiased.
    long uniform(long lo, long hi);

    Rational rational(long num_bound = 9, long den_bound = 4);
    Rational nonzero_rational(long num_bound = 9, long den_bound = 4);
    std::vector<Rational> rational_point(size_t n, long num_bound = 9, long den_bound = 4);

    // Dense-ish polynomial with all monomials of total degree <= max_degree
    // and integer coefficients in [-coef_bound, coef_bound].
    Poly poly(const VarList& vars, int max_degree, long coef_bound = 3);
    Poly nonzero_poly(const VarList& vars, int max_degree, long coef_bound = 3);

    PolyMatrix matrix(const VarList& vars, size_t rows, size_t cols, int max_degree,
                      long coef_bound = 3);

    ModuleElement element(const FreeGradedModule& m, int max_degree, long coef_bound = 3);

private:
    std::mt19937_64 gen_;
};

// All monomials over vars with total degree <= max_degree, graded-lex order.
std::vector<Monomial> monomials_up_to(const VarList& vars, int max_degree);

} // namespace gradcalc
