#pragma once

#include <map>
#include <string>
#include <vector>

#include "gradcalc/module.hpp"

namespace gradcalc {

// Scalar differential operator between free modules in normal form
//   D(v) = sum_alpha C_alpha * d^alpha(v),
// alpha a multi-index over the base variables, C_alpha a polynomial matrix
// (target rank x source rank), zero matrices never stored. The normal form is
// unique, so operator equality is container equality.
class OperatorExpr {
public:
    using TermMap = std::map<Monomial, PolyMatrix, GradedLexLess>;

    OperatorExpr() = default;
    OperatorExpr(FreeGradedModule source, FreeGradedModule target);

    static OperatorExpr zero(const FreeGradedModule& src, const FreeGradedModule& tgt) {
        return OperatorExpr(src, tgt);
    }
    static OperatorExpr identity(const FreeGradedModule& m);
    // Order-0 operator given by an A-linear matrix.
    static OperatorExpr from_matrix(const FreeGradedModule& src, const FreeGradedModule& tgt,
                                    const PolyMatrix& m);
    // Multiplication by a scalar polynomial on a module.
    static OperatorExpr mult(const FreeGradedModule& m, const Poly& a);
    // d/d(var i) applied coordinatewise on a module.
    static OperatorExpr partial(const FreeGradedModule& m, size_t var_index);
    // The coordinate derivation d/d(var i) of the base algebra itself.
    static OperatorExpr coordinate_derivation(const BaseAlgebra& A, size_t var_index);

    const FreeGradedModule& source() const { return source_; }
    const FreeGradedModule& target() const { return target_; }
    const TermMap& terms() const { return terms_; }
    const BaseAlgebra& base() const { return source_.base(); }

    void add_term(const Monomial& alpha, const PolyMatrix& C);

    bool is_zero() const { return terms_.empty(); }
    // Max |alpha| over stored terms; 0 for the zero operator (it sits in
    // order 0 along with the endomorphisms).
    int syntactic_order() const;

    ModuleElement eval(const ModuleElement& v) const;
    // Convenience for rank-1 sources: wraps the polynomial as the coordinate.
    ModuleElement eval_poly(const Poly& a) const;

    OperatorExpr operator+(const OperatorExpr& o) const;
    OperatorExpr operator-(const OperatorExpr& o) const;
    OperatorExpr operator-() const;
    // Left scaling a * D (target-side multiplication).
    OperatorExpr scaled(const Poly& a) const;
    OperatorExpr scaled(const Rational& c) const;
    // this after inner; partials get pushed across inner's coefficients by
    // the Leibniz rule so the result is again in normal form.
    OperatorExpr compose(const OperatorExpr& inner) const;

    bool operator==(const OperatorExpr& o) const;
    bool operator!=(const OperatorExpr& o) const { return !(*this == o); }

    std::string to_string() const;

private:
    FreeGradedModule source_, target_;
    TermMap terms_;
};

std::ostream& operator<<(std::ostream& os, const OperatorExpr& op);

// delta_a(D) = a o D - D o a. Both gradings involved here are 0 (base algebra
// elements have degree 0), so no Koszul sign appears on this path.
OperatorExpr delta(const Poly& a, const OperatorExpr& D);

// Graded variant: delta_a(D) = a o D - (-1)^(|a|*|D|) D o a with |D| the
// operator's degree shift. Under the trivial convention the sign is always +.
OperatorExpr delta_graded(const Poly& a, int a_degree, const OperatorExpr& D,
                          SignConvention conv);

// delta_{a_0,...,a_k} = delta_{a_0} o ... o delta_{a_k}.
OperatorExpr delta_seq(const std::vector<Poly>& as, const OperatorExpr& D);

// Exhaustive delta test over generator tuples. Testing tuples drawn from the
// algebra generators (with repetition) suffices: delta is linear in each slot,
// delta_1 = 0, and delta_{ab} = a*delta_b + delta_a*b lets an induction over
// monomials extend vanishing from generators to the whole algebra, slot by
// slot. Tuple order is irrelevant in degree 0 since delta_a delta_b =
// delta_b delta_a, so only non-decreasing index tuples are enumerated.
struct OrderCheckResult {
    bool ok = false;
    std::vector<std::string> witness_tuple; // generator names of the violation
    OperatorExpr residual;                  // the nonzero nested delta

    std::string witness_string() const;
};

OrderCheckResult check_order(const OperatorExpr& D, int k);

// Derivation test for D : A -> V (source must be rank 1, the base algebra
// seen as a module): order <= 1, D(1) = 0, plus seeded random Leibniz pairs
// as a cross-check.
struct DerivationCheckResult {
    bool ok = false;
    std::string reason;
};

DerivationCheckResult is_derivation(const OperatorExpr& D, uint64_t seed = 0);

// For first-order D : P -> P with all d/dx_i coefficients scalar multiples of
// the identity, returns the scalar derivation sum sigma_i d_i of A. An
// endomorphism yields the zero derivation.
struct SymbolResult {
    bool ok = false;
    OperatorExpr symbol;
    std::string message;
    PolyMatrix offending;
};

SymbolResult scalar_symbol(const OperatorExpr& D);

// Module of universal 1-forms: the free module on dx_1..dx_m together with
// the universal derivation d(p) = sum d_i(p) dx_i.
struct UniversalD {
    FreeGradedModule omega1;
    OperatorExpr d;
};

UniversalD universal_d(const BaseAlgebra& A);

// Factors a derivation X : A -> V through d as X = h o d with h(dx_i) =
// X(x_i); the factorization identity is checked exactly in normal form.
struct FactorResult {
    bool ok = false;
    ModuleHom h;
    OperatorExpr residual;
};

FactorResult factor_through_d(const OperatorExpr& X, const UniversalD& ud);

} // namespace gradcalc
