#include "gradcalc/operator.hpp"

#include <ostream>

#include "gradcalc/rng.hpp"

namespace gradcalc {

OperatorExpr::OperatorExpr(FreeGradedModule source, FreeGradedModule target)
    : source_(std::move(source)), target_(std::move(target)) {
    if (source_.base() != target_.base())
        throw structural_error("operator across different base algebras");
}

OperatorExpr OperatorExpr::identity(const FreeGradedModule& m) {
    return from_matrix(m, m, PolyMatrix::identity(m.base().vars, m.rank()));
}

OperatorExpr OperatorExpr::from_matrix(const FreeGradedModule& src, const FreeGradedModule& tgt,
                                       const PolyMatrix& m) {
    OperatorExpr op(src, tgt);
    op.add_term(Monomial(src.base().nvars(), 0), m);
    return op;
}

OperatorExpr OperatorExpr::mult(const FreeGradedModule& m, const Poly& a) {
    return from_matrix(m, m, PolyMatrix::scalar(m.base().vars, m.rank(), a));
}

OperatorExpr OperatorExpr::partial(const FreeGradedModule& m, size_t var_index) {
    if (var_index >= m.base().nvars())
        throw structural_error("partial w.r.t. unknown variable");
    OperatorExpr op(m, m);
    Monomial alpha(m.base().nvars(), 0);
    alpha[var_index] = 1;
    op.add_term(alpha, PolyMatrix::identity(m.base().vars, m.rank()));
    return op;
}

OperatorExpr OperatorExpr::coordinate_derivation(const BaseAlgebra& A, size_t var_index) {
    return partial(unit_module(A), var_index);
}

void OperatorExpr::add_term(const Monomial& alpha, const PolyMatrix& C) {
    if (alpha.size() != source_.base().nvars())
        throw structural_error("operator multi-index length mismatch");
    if (C.rows() != target_.rank() || C.cols() != source_.rank())
        throw structural_error("operator coefficient matrix shape mismatch");
    if (C.vars() != source_.base().vars)
        throw structural_error("operator coefficient over wrong variable list");
    auto it = terms_.find(alpha);
    if (it == terms_.end()) {
        if (!C.is_zero()) terms_.emplace(alpha, C);
    } else {
        it->second = it->second + C;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

int OperatorExpr::syntactic_order() const {
    if (terms_.empty()) return 0; // zero map sits in order 0
    return mono_degree(terms_.rbegin()->first);
}

namespace {

std::vector<Poly> iterated_partial(std::vector<Poly> v, const Monomial& alpha) {
    for (size_t i = 0; i < alpha.size(); ++i)
        for (int k = 0; k < alpha[i]; ++k)
            for (auto& p : v) p = p.partial(i);
    return v;
}

PolyMatrix iterated_partial(PolyMatrix m, const Monomial& alpha) {
    for (size_t i = 0; i < alpha.size(); ++i)
        for (int k = 0; k < alpha[i]; ++k) m = m.partial(i);
    return m;
}

// All gamma with 0 <= gamma <= beta coordinatewise.
void sub_indices(const Monomial& beta, std::vector<Monomial>& out) {
    Monomial cur(beta.size(), 0);
    while (true) {
        out.push_back(cur);
        size_t i = 0;
        while (i < cur.size()) {
            if (++cur[i] > beta[i]) {
                cur[i] = 0;
                ++i;
            } else {
                break;
            }
        }
        if (i == cur.size()) break;
    }
}

Rational multi_binomial(const Monomial& beta, const Monomial& gamma) {
    Rational b = 1;
    for (size_t i = 0; i < beta.size(); ++i) b *= rat_binomial(beta[i], gamma[i]);
    return b;
}

} // namespace

ModuleElement OperatorExpr::eval(const ModuleElement& v) const {
    if (v.mod != source_) throw structural_error("operator applied to element of wrong module");
    ModuleElement out(target_);
    for (const auto& [alpha, C] : terms_) {
        std::vector<Poly> dv = iterated_partial(v.coords, alpha);
        std::vector<Poly> w = C.apply(dv);
        for (size_t i = 0; i < w.size(); ++i) out.coords[i] += w[i];
    }
    return out;
}

ModuleElement OperatorExpr::eval_poly(const Poly& a) const {
    if (source_.rank() != 1)
        throw structural_error("eval_poly needs a rank-1 source module");
    return eval(ModuleElement(source_, {a}));
}

OperatorExpr OperatorExpr::operator+(const OperatorExpr& o) const {
    if (source_ != o.source_ || target_ != o.target_)
        throw structural_error("adding operators of different type");
    OperatorExpr r = *this;
    for (const auto& [alpha, C] : o.terms_) r.add_term(alpha, C);
    return r;
}

OperatorExpr OperatorExpr::operator-(const OperatorExpr& o) const {
    return *this + (-o);
}

OperatorExpr OperatorExpr::operator-() const {
    OperatorExpr r(source_, target_);
    for (const auto& [alpha, C] : terms_) r.terms_.emplace(alpha, -C);
    return r;
}

OperatorExpr OperatorExpr::scaled(const Poly& a) const {
    OperatorExpr r(source_, target_);
    for (const auto& [alpha, C] : terms_) r.add_term(alpha, C * a);
    return r;
}

OperatorExpr OperatorExpr::scaled(const Rational& c) const {
    OperatorExpr r(source_, target_);
    for (const auto& [alpha, C] : terms_) r.add_term(alpha, C * c);
    return r;
}

OperatorExpr OperatorExpr::compose(const OperatorExpr& inner) const {
    if (inner.target_ != source_)
        throw structural_error("operator composition type mismatch");
    // d^beta o A = sum_{gamma <= beta} binom(beta,gamma) (d^(beta-gamma) A) d^gamma
    OperatorExpr r(inner.source_, target_);
    for (const auto& [beta, B] : terms_) {
        std::vector<Monomial> gammas;
        sub_indices(beta, gammas);
        for (const auto& [alpha, A] : inner.terms_) {
            for (const auto& gamma : gammas) {
                Monomial rest(beta.size());
                for (size_t i = 0; i < beta.size(); ++i) rest[i] = beta[i] - gamma[i];
                PolyMatrix dA = iterated_partial(A, rest);
                if (dA.is_zero()) continue;
                Monomial idx(alpha.size());
                for (size_t i = 0; i < alpha.size(); ++i) idx[i] = alpha[i] + gamma[i];
                r.add_term(idx, (B * dA) * multi_binomial(beta, gamma));
            }
        }
    }
    return r;
}

bool OperatorExpr::operator==(const OperatorExpr& o) const {
    return source_ == o.source_ && target_ == o.target_ && terms_ == o.terms_;
}

std::string OperatorExpr::to_string() const {
    if (terms_.empty()) return "0";
    const VarList& vars = source_.base().vars;
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [alpha, C] = *it;
        std::string piece;
        if (C.rows() == 1 && C.cols() == 1) {
            const Poly& p = C.at(0, 0);
            piece = (p.terms().size() > 1) ? "(" + p.to_string() + ")" : p.to_string();
        } else {
            piece = C.to_string();
        }
        for (size_t i = 0; i < alpha.size(); ++i) {
            if (alpha[i] == 0) continue;
            piece += " * d/d" + vars.name(i);
            if (alpha[i] > 1) piece += "^" + std::to_string(alpha[i]);
        }
        out += out.empty() ? piece : " + " + piece;
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const OperatorExpr& op) {
    return os << op.to_string();
}

OperatorExpr delta(const Poly& a, const OperatorExpr& D) {
    return D.scaled(a) - D.compose(OperatorExpr::mult(D.source(), a));
}

OperatorExpr delta_graded(const Poly& a, int a_degree, const OperatorExpr& D,
                          SignConvention conv) {
    int d_degree = D.target().degree() - D.source().degree();
    bool flip = conv == SignConvention::koszul && (a_degree * d_degree) % 2 != 0;
    OperatorExpr right = D.compose(OperatorExpr::mult(D.source(), a));
    return flip ? D.scaled(a) + right : D.scaled(a) - right;
}

OperatorExpr delta_seq(const std::vector<Poly>& as, const OperatorExpr& D) {
    OperatorExpr cur = D;
    for (auto it = as.rbegin(); it != as.rend(); ++it) cur = delta(*it, cur);
    return cur;
}

std::string OrderCheckResult::witness_string() const {
    std::string s = "(";
    for (size_t i = 0; i < witness_tuple.size(); ++i) {
        if (i) s += ",";
        s += witness_tuple[i];
    }
    return s + ")";
}

namespace {

bool check_order_rec(const OperatorExpr& D, const BaseAlgebra& A, size_t from, int remaining,
                     std::vector<std::string>& names, OrderCheckResult& out) {
    if (remaining == 0) {
        if (D.is_zero()) return true;
        out.ok = false;
        out.witness_tuple = names;
        out.residual = D;
        return false;
    }
    for (size_t i = from; i < A.nvars(); ++i) {
        names.push_back(A.vars.name(i));
        OperatorExpr next = delta(A.var(i), D);
        if (!check_order_rec(next, A, i, remaining - 1, names, out)) return false;
        names.pop_back();
    }
    return true;
}

} // namespace

OrderCheckResult check_order(const OperatorExpr& D, int k) {
    if (k < 0) throw structural_error("check_order needs k >= 0");
    OrderCheckResult res;
    res.residual = OperatorExpr::zero(D.source(), D.target());
    std::vector<std::string> names;
    res.ok = check_order_rec(D, D.base(), 0, k + 1, names, res);
    return res;
}

DerivationCheckResult is_derivation(const OperatorExpr& D, uint64_t seed) {
    DerivationCheckResult res;
    if (D.source().rank() != 1) {
        res.reason = "source is not the base algebra (rank-1 module)";
        return res;
    }
    OrderCheckResult oc = check_order(D, 1);
    if (!oc.ok) {
        res.reason = "operator has order > 1: delta" + oc.witness_string() +
                     " residual = " + oc.residual.to_string();
        return res;
    }
    const BaseAlgebra& A = D.base();
    ModuleElement at_one = D.eval_poly(A.one());
    if (!at_one.is_zero()) {
        res.reason = "D(1) = " + at_one.to_string() + " (must vanish)";
        return res;
    }
    // Order <= 1 plus D(1) = 0 already forces the Leibniz rule; the sampled
    // pairs below are the spec'd independent cross-check.
    Rng rng(seed);
    for (int t = 0; t < 20; ++t) {
        Poly p = rng.poly(A.vars, 2);
        Poly q = rng.poly(A.vars, 2);
        ModuleElement lhs = D.eval_poly(p * q);
        ModuleElement rhs = D.eval_poly(p) * q + D.eval_poly(q) * p;
        if (lhs != rhs) {
            res.reason = "Leibniz defect at p = " + p.to_string() + ", q = " + q.to_string() +
                         ": " + (lhs - rhs).to_string();
            return res;
        }
    }
    res.ok = true;
    return res;
}

SymbolResult scalar_symbol(const OperatorExpr& D) {
    SymbolResult res;
    if (D.source() != D.target()) {
        res.message = "scalar symbol needs an operator P -> P";
        return res;
    }
    const BaseAlgebra& A = D.base();
    FreeGradedModule U = unit_module(A);
    OperatorExpr sym(U, U);
    for (const auto& [alpha, C] : D.terms()) {
        int d = mono_degree(alpha);
        if (d > 1) {
            res.message = "operator has order > 1 (term d^" + std::to_string(d) + ")";
            res.offending = C;
            return res;
        }
        if (d == 0) continue;
        Poly sigma;
        if (!C.is_scalar_multiple_of_identity(&sigma)) {
            res.message = "non-scalar first-order coefficient " + C.to_string();
            res.offending = C;
            return res;
        }
        sym.add_term(alpha, PolyMatrix::scalar(A.vars, 1, sigma));
    }
    res.ok = true;
    res.symbol = sym;
    return res;
}

UniversalD universal_d(const BaseAlgebra& A) {
    std::vector<std::string> names;
    for (const auto& v : A.vars.names()) names.push_back("d" + v);
    FreeGradedModule omega1(A, 0, std::move(names));
    OperatorExpr d(unit_module(A), omega1);
    for (size_t i = 0; i < A.nvars(); ++i) {
        Monomial alpha(A.nvars(), 0);
        alpha[i] = 1;
        PolyMatrix col(A.vars, A.nvars(), 1);
        col.at(i, 0) = A.one();
        d.add_term(alpha, col);
    }
    return {omega1, d};
}

FactorResult factor_through_d(const OperatorExpr& X, const UniversalD& ud) {
    FactorResult res;
    const BaseAlgebra& A = X.base();
    if (X.source().rank() != 1)
        throw structural_error("factor_through_d expects a derivation of the base algebra");
    DerivationCheckResult dc = is_derivation(X);
    if (!dc.ok) throw validation_error("factor_through_d input is not a derivation", dc.reason);
    const FreeGradedModule& V = X.target();
    PolyMatrix m(A.vars, V.rank(), ud.omega1.rank());
    for (size_t i = 0; i < A.nvars(); ++i) {
        ModuleElement xi = X.eval_poly(A.var(i));
        for (size_t r = 0; r < V.rank(); ++r) m.at(r, i) = xi.coords[r];
    }
    res.h = ModuleHom(ud.omega1, V, m);
    OperatorExpr h_op = OperatorExpr::from_matrix(ud.omega1, V, m);
    res.residual = h_op.compose(ud.d) - X;
    res.ok = res.residual.is_zero();
    return res;
}

} // namespace gradcalc
