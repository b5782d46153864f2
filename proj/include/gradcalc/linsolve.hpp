#pragma once

#include <vector>

#include "gradcalc/polymatrix.hpp"

namespace gradcalc {

// Exact solver for A*x = rhs over the rationals (Gauss-Jordan, no pivoting
// heuristics needed since arithmetic is exact). Nullspace vectors are ordered
// by free column and scaled so the first nonzero entry is 1, which makes the
// output canonical for a given input.
struct LinSolveResult {
    bool feasible = false;
    std::vector<Rational> particular;
    std::vector<std::vector<Rational>> nullspace;
};

LinSolveResult rat_linsolve(std::vector<std::vector<Rational>> A, std::vector<Rational> rhs);

// Convenience overload for constant polynomial matrices; throws
// structural_error when an entry is non-constant.
LinSolveResult rat_linsolve(const PolyMatrix& A, const std::vector<Rational>& rhs);

size_t rat_rank(std::vector<std::vector<Rational>> A);

} // namespace gradcalc
