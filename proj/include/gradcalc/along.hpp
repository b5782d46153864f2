#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradcalc/certificate.hpp"
#include "gradcalc/connection.hpp"
#include "gradcalc/operator.hpp"

namespace gradcalc {

// Ring homomorphism phi : A -> B between polynomial algebras, given by the
// images of the source variables.
struct AlgebraMap {
    BaseAlgebra source, target;
    std::vector<Poly> images;

    AlgebraMap() = default;
    AlgebraMap(BaseAlgebra src, BaseAlgebra tgt, std::vector<Poly> imgs);

    static AlgebraMap identity(const BaseAlgebra& A);

    Poly apply(const Poly& a) const;
    std::vector<Poly> apply(const std::vector<Poly>& v) const;
    PolyMatrix apply(const PolyMatrix& m) const;

    bool operator==(const AlgebraMap& o) const {
        return source == o.source && target == o.target && images == o.images;
    }
    bool operator!=(const AlgebraMap& o) const { return !(*this == o); }

    std::string to_string() const;
};

// k-linear differential operator P -> Q across an algebra map, in the normal
// form D(p) = sum_gamma C_gamma * phi(d^gamma p): P is a module over the
// source algebra, Q over the target, gamma runs over source multi-indices and
// C_gamma is a target-side matrix (rank Q x rank P). The form is unique, so
// equality is container equality. delta_a(D) = phi(a) o D - D o a keeps this
// shape, which is what makes the order checks below terminate.
class AlongOperator {
public:
    using TermMap = std::map<Monomial, PolyMatrix, GradedLexLess>;

    AlongOperator() = default;
    AlongOperator(AlgebraMap phi, FreeGradedModule source, FreeGradedModule target);

    static AlongOperator zero(const AlgebraMap& phi, const FreeGradedModule& src,
                              const FreeGradedModule& tgt) {
        return AlongOperator(phi, src, tgt);
    }
    // Order-0 operator p |-> C * phi(coords p); these are exactly the
    // A-linear maps into the restricted module.
    static AlongOperator semilinear(const AlgebraMap& phi, const FreeGradedModule& src,
                                    const FreeGradedModule& tgt, const PolyMatrix& C);
    // Reinterpret an ordinary operator over A as one along the identity.
    static AlongOperator from_ordinary(const OperatorExpr& D);

    const AlgebraMap& map() const { return phi_; }
    const FreeGradedModule& source() const { return source_; }
    const FreeGradedModule& target() const { return target_; }
    const TermMap& terms() const { return terms_; }

    void add_term(const Monomial& gamma, const PolyMatrix& C);

    bool is_zero() const { return terms_.empty(); }
    // Max |gamma|; 0 for the zero operator.
    int syntactic_order() const;

    ModuleElement eval(const ModuleElement& p) const;
    Poly eval_poly(const Poly& a) const;

    AlongOperator operator+(const AlongOperator& o) const;
    AlongOperator operator-(const AlongOperator& o) const;
    AlongOperator operator-() const;
    // Target-side scaling b * D, b over the target algebra.
    AlongOperator scaled(const Poly& b) const;
    // D o (mult by a), a over the source algebra; Leibniz pushes the partials
    // across a and phi transports the resulting coefficients.
    AlongOperator precompose_mult(const Poly& a) const;

    bool operator==(const AlongOperator& o) const;
    bool operator!=(const AlongOperator& o) const { return !(*this == o); }

    std::string to_string() const;

private:
    AlgebraMap phi_;
    FreeGradedModule source_, target_;
    TermMap terms_;
};

// delta_a(D) = phi(a) o D - D o a for a over the source algebra.
AlongOperator delta_along(const Poly& a, const AlongOperator& D);
AlongOperator delta_along_seq(const std::vector<Poly>& as, const AlongOperator& D);

// Same generator-tuple sufficiency as the one-algebra order check: delta is
// slot-linear, delta_1 = 0, and delta_{ab} = phi(a) delta_b + delta_a o b, so
// vanishing on non-decreasing generator tuples extends to the whole algebra.
struct AlongOrderCheck {
    bool ok = false;
    std::vector<std::string> witness_tuple;
    AlongOperator residual;

    std::string witness_string() const;
};

AlongOrderCheck check_order_along(const AlongOperator& D, int k);

// Shared result shape for the rule checks below.
struct AlongCheckResult {
    bool ok = true;
    std::string violation;
    std::optional<ModuleElement> defect;
    std::optional<Poly> defect_poly;
};

// Leibniz rule across the map: X(a a') = X(a) phi(a') + phi(a) X(a') for a
// scalar operator X (rank-1 modules on both sides). Tested on all monomial
// pairs up to the operator's displayed order, which decides the identity: the
// defect is a bidifferential expression in (a, a') and vanishing on that
// triangular family forces every kernel coefficient to zero.
AlongCheckResult derivation_along_alg_check(const AlongOperator& X);

// Module map P -> Q across phi: phibar(p) = matrix * phi(coords p), an
// A-linear map into Q with scalars restricted along phi.
struct AlongModule {
    AlgebraMap phi;
    FreeGradedModule P, Q;
    PolyMatrix phibar;

    ModuleElement push(const ModuleElement& p) const;
};

AlongModule make_along_module(AlgebraMap phi, FreeGradedModule P, FreeGradedModule Q,
                              PolyMatrix phibar);

// Checks Delta(a p) = X(a) phibar(p) + phi(a) Delta(p); X must itself pass
// derivation_along_alg_check. Monomial-pair grid up to the displayed orders
// (exact, same argument as above) plus seeded random cross-checks.
AlongCheckResult derivation_along_map_check(const AlongOperator& Delta, const AlongModule& mod,
                                            const AlongOperator& X, uint64_t seed = 0);

// Order-k compatibility across the map: (a) the scalar part has order <= k in
// the transported delta-calculus, (b) phibar(p) * delta_a^k(D_A)(1) =
// delta_a^k(D_P)(p) with delta_a^k the k-fold repetition of the single
// element a, tested for generator a and basis p plus seeded random a.
AlongCheckResult diff_along_map_check(const AlongOperator& D_A, const AlongOperator& D_P, int k,
                                      const AlongModule& mod, uint64_t seed = 0);

// phibar o nabla_i as an operator along the map.
AlongOperator along_covariant_derivative(const Connection& nabla, const AlongModule& mod,
                                         size_t i);

// The derivation along phi with prescribed generator images X(x_i); over a
// polynomial source these images determine it: X = sum images[i] (phi o d_i).
AlongOperator derivation_along_from_images(const AlgebraMap& phi, const std::vector<Poly>& images);

// Constructive exactness of
//   0 -> Hom(P, Q) -> {Der operators along phibar} -> {derivations along phi} -> 0
// over the supplied module map. The faithfulness precondition on the image
// span of phibar is probed by full-row-rank sampling at 5 random rational
// points (one redraw per dropped point); a drop yields an inconclusive
// certificate, never a refutation. The splitting is X |-> phibar o nabla_X
// for the supplied connection (trivial when absent).
ExactnessCertificate atiyah_along_map(const AlongModule& mod,
                                      std::optional<Connection> nabla = std::nullopt,
                                      uint64_t seed = 0);

} // namespace gradcalc
