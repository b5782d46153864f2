#pragma once

#include <memory>
#include <optional>

#include "gradcalc/nole.hpp"
#include "gradcalc/operator.hpp"

namespace gradcalc {

// The whole truncated algebra N = A + N_1 + ... + N_n flattened to one free
// module so a graded map N -> N is a single OperatorExpr. Basis names carry
// their degree as a "d:" prefix ("0:1", "1:e", "2:f", ...); block boundaries
// are recovered from component ranks, not from the names.
FreeGradedModule total_module(const NoleAlgebra& alg);

// Homogeneous degree-l derivation of an n-ole algebra, stored blockwise:
// a scalar part A -> N_l and one component part N_k -> N_{k+l} for each
// k = 1..n-l. Instances coming out of decompose_nole_derivation are
// certified; assemble() does not re-verify.
struct GradedDerivation {
    std::shared_ptr<const NoleAlgebra> over;
    int degree = 0;
    OperatorExpr scalar_part;
    std::vector<OperatorExpr> component_parts;

    const OperatorExpr& component_part(int k) const;
};

// Places blocks into the total module: scalar_part in the degree-0 column,
// each component part in its column, rows shifted up by `degree`. Shapes are
// validated; the Leibniz laws are not.
OperatorExpr assemble_blocks(const NoleAlgebra& alg, int degree, const OperatorExpr& scalar_part,
                             const std::vector<OperatorExpr>& component_parts);

OperatorExpr assemble(const GradedDerivation& X);

struct DecomposeResult {
    bool ok = false;
    GradedDerivation derivation; // meaningful only when ok
    std::string violation;
    std::string defect;
};

// Splits a graded operator on total_module(alg) into its blocks and certifies
// the derivation laws exactly:
//   (a) the scalar part is an N_l-valued derivation of A,
//   (b) each component part satisfies the twisted module Leibniz rule
//       X(a p) = X^A(a) p + a X(p), established per generator through the
//       operator identity -delta_{x_t}(X^k) = multiplication by beta(X^A(x_t), -),
//   (c) the product rule X(beta(p,q)) = beta(X p, q) + eps beta(p, X q) on
//       basis pairs, eps the convention sign for moving X past p.
// Generator and basis checks decide the laws in full: (b)'s defect is
// derivation-like in a by the delta product identity, and (c)'s defect is
// A-bilinear once (a) and (b) hold. A few seeded random-polynomial pairs are
// re-tested as a cross-check on top.
// The operator's degree is inferred from its nonzero blocks unless given;
// inconsistent block grading is a structural error, violated laws come back
// as ok = false with the first failing relation and its defect.
DecomposeResult decompose_nole_derivation(std::shared_ptr<const NoleAlgebra> alg,
                                          const OperatorExpr& D,
                                          std::optional<int> degree = std::nullopt,
                                          uint64_t seed = 0);

} // namespace gradcalc
