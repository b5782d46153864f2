#pragma once

#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "gradcalc/rational.hpp"

namespace gradcalc {

// Ordered list of variable names, shared by every polynomial of an algebra.
// Value semantics with a pointer fast path for the common same-algebra case.
class VarList {
public:
    VarList() : names_(std::make_shared<const std::vector<std::string>>()) {}
    explicit VarList(std::vector<std::string> names);

    size_t size() const { return names_->size(); }
    const std::string& name(size_t i) const { return (*names_)[i]; }
    const std::vector<std::string>& names() const { return *names_; }
    int index_of(const std::string& n) const;

    bool operator==(const VarList& o) const {
        return names_ == o.names_ || *names_ == *o.names_;
    }
    bool operator!=(const VarList& o) const { return !(*this == o); }

private:
    std::shared_ptr<const std::vector<std::string>> names_;
};

// Exponent vector, one entry per variable of the owning VarList.
using Monomial = std::vector<int>;

inline int mono_degree(const Monomial& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

// Graded lexicographic: lower total degree first, ties broken by the first
// differing exponent (smaller exponent = smaller monomial). Map iteration in
// reverse therefore yields the canonical descending print order.
struct GradedLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        int da = mono_degree(a), db = mono_degree(b);
        if (da != db) return da < db;
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return a[i] < b[i];
        return false;
    }
};

// Multivariate polynomial over Rational in canonical form: the term map never
// holds a zero coefficient, so equality is plain container equality.
class Poly {
public:
    using TermMap = std::map<Monomial, Rational, GradedLexLess>;

    Poly() = default;
    explicit Poly(VarList vars) : vars_(std::move(vars)) {}

    static Poly zero(const VarList& vars) { return Poly(vars); }
    static Poly constant(const VarList& vars, const Rational& c);
    static Poly variable(const VarList& vars, size_t index);
    static Poly variable(const VarList& vars, const std::string& name);
    static Poly monomial(const VarList& vars, const Monomial& m, const Rational& c);

    const VarList& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    // Zero for the zero polynomial, otherwise the constant term's value.
    Rational constant_value() const;
    // -1 for the zero polynomial.
    int total_degree() const;

    Rational coeff(const Monomial& m) const;
    void add_term(const Monomial& m, const Rational& c);

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(const Poly& o);
    Poly operator*(const Rational& c) const;
    friend Poly operator*(const Rational& c, const Poly& p) { return p * c; }
    Poly pow(int e) const;

    bool operator==(const Poly& o) const;
    bool operator!=(const Poly& o) const { return !(*this == o); }

    // d/d(var index i), exact term-by-term.
    Poly partial(size_t i) const;

    Rational eval(const std::vector<Rational>& point) const;
    // Ring-hom style substitution: variable i goes to images[i]. All images
    // must share one VarList, which becomes the result's VarList.
    Poly compose(const std::vector<Poly>& images) const;

    std::string to_string() const;
    static Poly parse(const std::string& text, const VarList& vars);

private:
    void check_same_vars(const Poly& o) const;

    VarList vars_;
    TermMap terms_;
};

std::ostream& operator<<(std::ostream& os, const Poly& p);

} // namespace gradcalc
