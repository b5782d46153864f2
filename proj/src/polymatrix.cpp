#include "gradcalc/polymatrix.hpp"

#include <map>
#include <ostream>

namespace gradcalc {

PolyMatrix::PolyMatrix(VarList vars, size_t rows, size_t cols)
    : vars_(std::move(vars)), rows_(rows), cols_(cols), data_(rows * cols, Poly(vars_)) {}

PolyMatrix PolyMatrix::identity(const VarList& vars, size_t n) {
    PolyMatrix m(vars, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = Poly::constant(vars, 1);
    return m;
}

PolyMatrix PolyMatrix::scalar(const VarList& vars, size_t n, const Poly& p) {
    PolyMatrix m(vars, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = p;
    return m;
}

Poly& PolyMatrix::at(size_t i, size_t j) {
    if (i >= rows_ || j >= cols_) throw structural_error("matrix index out of range");
    return data_[i * cols_ + j];
}

const Poly& PolyMatrix::at(size_t i, size_t j) const {
    if (i >= rows_ || j >= cols_) throw structural_error("matrix index out of range");
    return data_[i * cols_ + j];
}

bool PolyMatrix::is_zero() const {
    for (const auto& p : data_)
        if (!p.is_zero()) return false;
    return true;
}

bool PolyMatrix::is_identity() const {
    if (rows_ != cols_) return false;
    return *this == identity(vars_, rows_);
}

bool PolyMatrix::is_scalar_multiple_of_identity(Poly* out) const {
    if (rows_ != cols_ || rows_ == 0) return false;
    const Poly& d = at(0, 0);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) {
            if (i == j ? (at(i, j) != d) : !at(i, j).is_zero()) return false;
        }
    if (out) *out = d;
    return true;
}

bool PolyMatrix::is_constant() const {
    for (const auto& p : data_)
        if (!p.is_constant()) return false;
    return true;
}

void PolyMatrix::check_shape(const PolyMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw structural_error("matrix shape mismatch");
    if (vars_ != o.vars_) throw structural_error("matrices over different variable lists");
}

PolyMatrix PolyMatrix::operator-() const {
    PolyMatrix r = *this;
    for (auto& p : r.data_) p = -p;
    return r;
}

PolyMatrix PolyMatrix::operator+(const PolyMatrix& o) const {
    check_shape(o);
    PolyMatrix r = *this;
    for (size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
    return r;
}

PolyMatrix PolyMatrix::operator-(const PolyMatrix& o) const {
    check_shape(o);
    PolyMatrix r = *this;
    for (size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
    return r;
}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& o) const {
    if (vars_ != o.vars_) throw structural_error("matrices over different variable lists");
    if (cols_ != o.rows_) throw structural_error("matrix product shape mismatch");
    PolyMatrix r(vars_, rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t k = 0; k < cols_; ++k) {
            const Poly& a = at(i, k);
            if (a.is_zero()) continue;
            for (size_t j = 0; j < o.cols_; ++j) {
                const Poly& b = o.at(k, j);
                if (!b.is_zero()) r.at(i, j) += a * b;
            }
        }
    return r;
}

PolyMatrix PolyMatrix::operator*(const Poly& p) const {
    PolyMatrix r = *this;
    for (auto& q : r.data_) q *= p;
    return r;
}

PolyMatrix PolyMatrix::operator*(const Rational& c) const {
    PolyMatrix r = *this;
    for (auto& q : r.data_) q = q * c;
    return r;
}

bool PolyMatrix::operator==(const PolyMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && vars_ == o.vars_ && data_ == o.data_;
}

std::vector<Poly> PolyMatrix::apply(const std::vector<Poly>& v) const {
    if (v.size() != cols_) throw structural_error("matrix apply: vector length mismatch");
    std::vector<Poly> out(rows_, Poly(vars_));
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j)
            if (!at(i, j).is_zero()) out[i] += at(i, j) * v[j];
    return out;
}

PolyMatrix PolyMatrix::transpose() const {
    PolyMatrix r(vars_, cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

PolyMatrix PolyMatrix::partial(size_t var_index) const {
    PolyMatrix r = *this;
    for (auto& p : r.data_) p = p.partial(var_index);
    return r;
}

PolyMatrix PolyMatrix::kronecker(const PolyMatrix& o) const {
    if (vars_ != o.vars_) throw structural_error("matrices over different variable lists");
    PolyMatrix r(vars_, rows_ * o.rows_, cols_ * o.cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) {
            if (at(i, j).is_zero()) continue;
            for (size_t k = 0; k < o.rows_; ++k)
                for (size_t l = 0; l < o.cols_; ++l)
                    r.at(i * o.rows_ + k, j * o.cols_ + l) = at(i, j) * o.at(k, l);
        }
    return r;
}

namespace {

// Laplace expansion memoized on the set of still-available columns. The row
// is implied by how many columns were consumed, so one map per call suffices.
Poly det_rec(const PolyMatrix& m, unsigned mask, size_t row,
             std::map<unsigned, Poly>& memo) {
    if (mask == 0) return Poly::constant(m.vars(), 1);
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    Poly acc(m.vars());
    int sign = 1;
    for (size_t j = 0; j < m.cols(); ++j) {
        if (!(mask & (1u << j))) continue;
        if (!m.at(row, j).is_zero()) {
            Poly sub = det_rec(m, mask & ~(1u << j), row + 1, memo);
            Poly t = m.at(row, j) * sub;
            acc += sign > 0 ? t : -t;
        }
        sign = -sign;
    }
    memo.emplace(mask, acc);
    return acc;
}

} // namespace

Poly PolyMatrix::det() const {
    if (rows_ != cols_) throw structural_error("determinant of non-square matrix");
    if (rows_ > 16) throw structural_error("determinant limited to rank <= 16");
    if (rows_ == 0) return Poly::constant(vars_, 1);
    std::map<unsigned, Poly> memo;
    return det_rec(*this, (1u << rows_) - 1, 0, memo);
}

PolyMatrix PolyMatrix::inverse() const {
    if (rows_ != cols_) throw structural_error("inverse of non-square matrix");
    Poly d = det();
    if (!d.is_constant() || d.is_zero())
        throw structural_error("matrix not invertible over the polynomial ring (det = " +
                               d.to_string() + ")");
    Rational dc = d.constant_value();
    PolyMatrix adj(vars_, rows_, cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) {
            PolyMatrix minor(vars_, rows_ - 1, cols_ - 1);
            for (size_t r = 0, rr = 0; r < rows_; ++r) {
                if (r == i) continue;
                for (size_t c = 0, cc = 0; c < cols_; ++c) {
                    if (c == j) continue;
                    minor.at(rr, cc) = at(r, c);
                    ++cc;
                }
                ++rr;
            }
            Poly cof = minor.det();
            if ((i + j) % 2 == 1) cof = -cof;
            adj.at(j, i) = cof * Rational(Rational(1) / dc);
        }
    return adj;
}

std::vector<std::vector<Rational>> PolyMatrix::eval(const std::vector<Rational>& point) const {
    std::vector<std::vector<Rational>> out(rows_, std::vector<Rational>(cols_));
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) out[i][j] = at(i, j).eval(point);
    return out;
}

std::string PolyMatrix::to_string() const {
    std::string s = "[";
    for (size_t i = 0; i < rows_; ++i) {
        if (i) s += ",";
        s += "[";
        for (size_t j = 0; j < cols_; ++j) {
            if (j) s += ",";
            s += at(i, j).to_string();
        }
        s += "]";
    }
    s += "]";
    return s;
}

std::ostream& operator<<(std::ostream& os, const PolyMatrix& m) { return os << m.to_string(); }

PolyMatrix PolyMatrix::parse(const std::string& text, const VarList& vars) {
    // Row-major [[a,b],[c,d]]; entries are canonical polynomials, which never
    // contain brackets or commas, so flat splitting is enough.
    size_t pos = 0;
    auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto expect = [&](char c) {
        skip();
        if (pos >= text.size() || text[pos] != c)
            throw structural_error(std::string("matrix literal: expected '") + c + "'");
        ++pos;
    };
    std::vector<std::vector<Poly>> rows;
    expect('[');
    skip();
    while (true) {
        expect('[');
        std::vector<Poly> row;
        size_t start = pos;
        while (pos < text.size() && text[pos] != ']') {
            if (text[pos] == ',') {
                row.push_back(Poly::parse(text.substr(start, pos - start), vars));
                start = pos + 1;
            }
            ++pos;
        }
        if (pos >= text.size()) throw structural_error("matrix literal: unterminated row");
        row.push_back(Poly::parse(text.substr(start, pos - start), vars));
        ++pos;
        rows.push_back(std::move(row));
        skip();
        if (pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
        }
        break;
    }
    expect(']');
    skip();
    if (pos != text.size()) throw structural_error("matrix literal: trailing input");
    size_t cols = rows.empty() ? 0 : rows[0].size();
    for (const auto& r : rows)
        if (r.size() != cols) throw structural_error("matrix literal: ragged rows");
    PolyMatrix m(vars, rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols; ++j) m.at(i, j) = rows[i][j];
    return m;
}

} // namespace gradcalc
