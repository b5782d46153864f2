#pragma once

#include <string>
#include <vector>

#include "gradcalc/poly.hpp"

namespace gradcalc {

// Dense matrix over the polynomial ring. Desk-scale: inverses go through the
// adjugate, so they are only for small ranks and constant nonzero determinant.
class PolyMatrix {
public:
    PolyMatrix() : rows_(0), cols_(0) {}
    PolyMatrix(VarList vars, size_t rows, size_t cols);

    static PolyMatrix identity(const VarList& vars, size_t n);
    static PolyMatrix zero(const VarList& vars, size_t rows, size_t cols) {
        return PolyMatrix(vars, rows, cols);
    }
    static PolyMatrix scalar(const VarList& vars, size_t n, const Poly& p);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    const VarList& vars() const { return vars_; }

    Poly& at(size_t i, size_t j);
    const Poly& at(size_t i, size_t j) const;

    bool is_zero() const;
    bool is_identity() const;
    // True when the matrix equals p*I for a polynomial scalar p; the scalar
    // is returned through `out` when non-null.
    bool is_scalar_multiple_of_identity(Poly* out = nullptr) const;
    bool is_constant() const;

    PolyMatrix operator-() const;
    PolyMatrix operator+(const PolyMatrix& o) const;
    PolyMatrix operator-(const PolyMatrix& o) const;
    PolyMatrix operator*(const PolyMatrix& o) const;
    PolyMatrix operator*(const Poly& p) const;
    PolyMatrix operator*(const Rational& c) const;
    friend PolyMatrix operator*(const Poly& p, const PolyMatrix& m) { return m * p; }
    bool operator==(const PolyMatrix& o) const;
    bool operator!=(const PolyMatrix& o) const { return !(*this == o); }

    std::vector<Poly> apply(const std::vector<Poly>& v) const;

    PolyMatrix transpose() const;
    PolyMatrix partial(size_t var_index) const;
    PolyMatrix kronecker(const PolyMatrix& o) const;

    Poly det() const;
    // Adjugate-based exact inverse; requires det to be a nonzero constant so
    // the inverse stays polynomial.
    PolyMatrix inverse() const;

    std::vector<std::vector<Rational>> eval(const std::vector<Rational>& point) const;

    std::string to_string() const;
    static PolyMatrix parse(const std::string& text, const VarList& vars);

private:
    void check_shape(const PolyMatrix& o) const;

    VarList vars_;
    size_t rows_, cols_;
    std::vector<Poly> data_;
};

std::ostream& operator<<(std::ostream& os, const PolyMatrix& m);

} // namespace gradcalc
