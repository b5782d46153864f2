#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gradcalc/certificate.hpp"
#include "gradcalc/connection.hpp"
#include "gradcalc/nole.hpp"
#include "gradcalc/operator.hpp"

namespace gradcalc {

// First failing instance of a component rule, with the defect element.
struct ComponentCheckResult {
    bool ok = true;
    std::string violation;
    std::optional<ModuleElement> defect;
};

// Degree-raising derivation component pair on a truncated module over a
// diole algebra A (+) N: checks X_P(a p) = beta(X_A(a), p) + a X_P(p) for
// X_A : A -> N and X_P : W_0 -> W_1, with beta the module action of N on W_0.
// The defect is a bidifferential expression in (a, coords p), so vanishing on
// the monomial grid up to the displayed orders decides the rule exactly; the
// seeded random pairs are an independent cross-check.
ComponentCheckResult diolic_degree0_check(const OperatorExpr& X_A, const OperatorExpr& X_P,
                                          const TruncatedModule& W, uint64_t seed = 0);

// Degree-0 derivation triple of a triole algebra A (+) P (+) Q: X_A must be a
// derivation of A, X_P and X_Q must both have scalar symbol X_A, and
// X_Q(g(p1,p2)) = g(X_P(p1),p2) + g(p1,X_P(p2)). Once the symbols agree the
// g-defect is A-bilinear, so basis pairs decide it.
ComponentCheckResult triolic_derivation0_check(const OperatorExpr& X_A, const OperatorExpr& X_P,
                                               const OperatorExpr& X_Q, const NoleAlgebra& T,
                                               uint64_t seed = 0);

// Degree-1 derivation pair: X_A a P-valued derivation of A and X_P : P -> Q
// with X_P(a p) = g(X_A(a), p) + a X_P(p), the Der rule for the pairing g.
ComponentCheckResult triolic_derivation1_check(const OperatorExpr& X_A, const OperatorExpr& X_P,
                                               const NoleAlgebra& T, uint64_t seed = 0);

// chi(g(p1,p2)) = g(psi(p1),p2) + g(p1,psi(p2)) on all basis pairs; exact by
// A-bilinearity of both sides.
bool end_g_pair_check(const ModuleHom& psi, const ModuleHom& chi, const BilinearMap& g);

// Constructive exactness of 0 -> End(g;P,Q) -> D1(T)_0 -> D(A) -> 0 for a
// triole T. The kernel family is the complete solution space of the pairing
// relation with entries of degree <= degree_bound; surjectivity is witnessed
// by the lift X -> (X, nabla_X, box_X) through a g-preserving connection
// pair, either supplied, trivial, or found by solving the linear preservation
// equations for Christoffel matrices within the same degree bound. When no
// pair exists within the bound the certificate is inconclusive, stating the
// bound; that outcome never claims non-exactness.
ExactnessCertificate triolic_atiyah(const NoleAlgebra& T,
                                    std::optional<std::pair<Connection, Connection>> preserving =
                                        std::nullopt,
                                    int degree_bound = 2, uint64_t seed = 0);

struct RelationReport {
    std::string relation;
    bool ok = true;
    std::string witness;
};

struct DiffkCheckResult {
    bool precondition_ok = true;
    std::string precondition_violation;
    bool ok = true;
    std::vector<RelationReport> relations;
};

// Order-k triple (D_A, D_P, D_Q) over a triole: each component must pass
// check_order(., k) first; then the transport relations
//   p * delta_a^k(D_A)(1) = delta_a^k(D_P)(p)
//   q * delta_a^k(D_A)(1) = delta_a^k(D_Q)(q)
//   g(p0, delta_a^k(D_P)(p1)) = delta_a^k(D_Q)(g(p0,p1))
// and, for k >= 1, the reduced compatibility
//   delta_a^{k-1}(D_Q)(g(p1,p0)) = g(p1, delta_a^{k-1}(D_P)(p0))
//     + g(p0, delta_a^{k-1}(D_P)(p1)) - g(p0,p1) * delta_a^{k-1}(D_A)(1).
// delta_a^k repeats the single element a; strict mode additionally runs all
// non-decreasing generator tuples of the appropriate length. The a pool holds
// the generators, their pairwise products, and seeded random polynomials, so
// degree-2 cross terms cannot hide.
DiffkCheckResult triolic_diffk_check(const OperatorExpr& D_A, const OperatorExpr& D_P,
                                     const OperatorExpr& D_Q, int k, const NoleAlgebra& T,
                                     bool strict_tuples = false, uint64_t seed = 0);

struct PairSymmetryResult {
    bool ok = false;
    bool order_ok = false;
    bool relation_ok = false;
    std::string violation;
};

// Symmetry pairs of the pairing g at level k: both components of order
// <= k-1 and
//   delta_a^{k-1}(N_Q)(g(p1,p2)) =
//     g(delta_a^{k-1}(N_P)(p1), p2) + g(p1, delta_a^{k-1}(N_P)(p2)).
// At k = 1 this is exactly end_g_pair_check. Both the order gate and the
// relation are evaluated and reported; ok needs both.
PairSymmetryResult diffk_symmetry_pair_check(const OperatorExpr& N_P, const OperatorExpr& N_Q,
                                             int k, const BilinearMap& g,
                                             bool strict_tuples = false, uint64_t seed = 0);

} // namespace gradcalc
