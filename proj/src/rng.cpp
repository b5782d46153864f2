#include "gradcalc/rng.hpp"

#include <algorithm>

namespace gradcalc {

long Rng::uniform(long lo, long hi) {
    if (lo > hi) throw structural_error("rng uniform: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v;
    do {
        v = gen_();
    } while (v >= limit);
    return lo + static_cast<long>(v % span);
}

Rational Rng::rational(long num_bound, long den_bound) {
    return make_rational(uniform(-num_bound, num_bound), uniform(1, den_bound));
}

Rational Rng::nonzero_rational(long num_bound, long den_bound) {
    Rational r;
    do {
        r = rational(num_bound, den_bound);
    } while (r == 0);
    return r;
}

std::vector<Rational> Rng::rational_point(size_t n, long num_bound, long den_bound) {
    std::vector<Rational> p(n);
    for (auto& x : p) x = rational(num_bound, den_bound);
    return p;
}

std::vector<Monomial> monomials_up_to(const VarList& vars, int max_degree) {
    std::vector<Monomial> out;
    Monomial cur(vars.size(), 0);
    // Odometer over exponent vectors, filtered by total degree, then sorted
    // into graded-lex so callers get a canonical ordering.
    while (true) {
        if (mono_degree(cur) <= max_degree) out.push_back(cur);
        size_t i = 0;
        while (i < cur.size()) {
            if (++cur[i] > max_degree) {
                cur[i] = 0;
                ++i;
            } else {
                break;
            }
        }
        if (i == cur.size()) break;
        if (vars.size() == 0) break;
    }
    if (vars.size() == 0) out.assign(1, Monomial{});
    std::sort(out.begin(), out.end(), GradedLexLess{});
    return out;
}

Poly Rng::poly(const VarList& vars, int max_degree, long coef_bound) {
    Poly p(vars);
    for (const auto& m : monomials_up_to(vars, max_degree))
        p.add_term(m, Rational(uniform(-coef_bound, coef_bound)));
    return p;
}

Poly Rng::nonzero_poly(const VarList& vars, int max_degree, long coef_bound) {
    Poly p;
    do {
        p = poly(vars, max_degree, coef_bound);
    } while (p.is_zero());
    return p;
}

PolyMatrix Rng::matrix(const VarList& vars, size_t rows, size_t cols, int max_degree,
                       long coef_bound) {
    PolyMatrix m(vars, rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) m.at(i, j) = poly(vars, max_degree, coef_bound);
    return m;
}

ModuleElement Rng::element(const FreeGradedModule& m, int max_degree, long coef_bound) {
    ModuleElement e(m);
    for (auto& c : e.coords) c = poly(m.base().vars, max_degree, coef_bound);
    return e;
}

} // namespace gradcalc
