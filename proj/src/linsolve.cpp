#include "gradcalc/linsolve.hpp"

#include <algorithm>

namespace gradcalc {

namespace {

// Reduced row echelon form in place; returns the pivot column of each row.
std::vector<size_t> rref(std::vector<std::vector<Rational>>& M) {
    size_t rows = M.size();
    size_t cols = rows ? M[0].size() : 0;
    std::vector<size_t> pivots;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t sel = rows;
        for (size_t i = r; i < rows; ++i)
            if (M[i][c] != 0) {
                sel = i;
                break;
            }
        if (sel == rows) continue;
        std::swap(M[r], M[sel]);
        Rational inv = Rational(1) / M[r][c];
        for (size_t j = c; j < cols; ++j) M[r][j] *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || M[i][c] == 0) continue;
            Rational f = M[i][c];
            for (size_t j = c; j < cols; ++j) M[i][j] -= f * M[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

} // namespace

LinSolveResult rat_linsolve(std::vector<std::vector<Rational>> A, std::vector<Rational> rhs) {
    size_t rows = A.size();
    if (rhs.size() != rows) throw structural_error("linsolve: rhs length mismatch");
    size_t cols = rows ? A[0].size() : 0;
    for (const auto& row : A)
        if (row.size() != cols) throw structural_error("linsolve: ragged matrix");

    // Augment, reduce, then read the solution off the echelon form.
    std::vector<std::vector<Rational>> M = std::move(A);
    for (size_t i = 0; i < rows; ++i) M[i].push_back(rhs[i]);
    std::vector<size_t> pivots = rref(M);

    LinSolveResult res;
    if (!pivots.empty() && pivots.back() == cols) {
        res.feasible = false;
        return res;
    }
    res.feasible = true;
    res.particular.assign(cols, Rational(0));
    for (size_t r = 0; r < pivots.size(); ++r) res.particular[pivots[r]] = M[r][cols];

    std::vector<bool> is_pivot(cols, false);
    for (size_t c : pivots) is_pivot[c] = true;
    for (size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rational> v(cols, Rational(0));
        v[f] = 1;
        for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -M[r][f];
        for (const auto& x : v)
            if (x != 0) {
                Rational inv = Rational(1) / x;
                for (auto& y : v) y *= inv;
                break;
            }
        res.nullspace.push_back(std::move(v));
    }
    return res;
}

LinSolveResult rat_linsolve(const PolyMatrix& A, const std::vector<Rational>& rhs) {
    std::vector<std::vector<Rational>> M(A.rows(), std::vector<Rational>(A.cols()));
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j) {
            if (!A.at(i, j).is_constant())
                throw structural_error("linsolve expects constant matrix entries, got " +
                                       A.at(i, j).to_string());
            M[i][j] = A.at(i, j).constant_value();
        }
    return rat_linsolve(std::move(M), rhs);
}

size_t rat_rank(std::vector<std::vector<Rational>> A) {
    return rref(A).size();
}

} // namespace gradcalc
