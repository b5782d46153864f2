#include "gradcalc/derivation.hpp"

#include "gradcalc/rng.hpp"

namespace gradcalc {

namespace {

struct Layout {
    std::vector<size_t> off;
    std::vector<size_t> rank;
    size_t total = 0;

    int degree_of(size_t index) const {
        for (size_t d = off.size(); d-- > 0;)
            if (index >= off[d]) return static_cast<int>(d);
        throw structural_error("index outside the total module");
    }
};

Layout layout_of(const NoleAlgebra& alg) {
    Layout l;
    l.off.push_back(0);
    l.rank.push_back(1);
    for (int d = 1; d <= alg.n(); ++d) {
        l.off.push_back(l.off.back() + l.rank.back());
        l.rank.push_back(alg.component(d).rank());
    }
    l.total = l.off.back() + l.rank.back();
    return l;
}

// Multiplication by n (an element of N_l with polynomial coordinates) as an
// order-0 operator N_k -> N_{k+l}.
OperatorExpr mult_by_element(const NoleAlgebra& alg, const ModuleElement& n, int l, int k) {
    FreeGradedModule src = alg.component_or_unit(k);
    FreeGradedModule tgt = alg.component_or_unit(k + l);
    PolyMatrix M(alg.base().vars, tgt.rank(), src.rank());
    for (size_t j = 0; j < src.rank(); ++j) {
        ModuleElement col(tgt);
        if (l == 0)
            col = ModuleElement::basis(src, j) * n.coords[0];
        else if (k == 0)
            col = n * ModuleElement::basis(src, j).coords[0];
        else
            col = alg.beta(l, k).eval(n, ModuleElement::basis(src, j));
        for (size_t r = 0; r < tgt.rank(); ++r) M.at(r, j) = col.coords[r];
    }
    return OperatorExpr::from_matrix(src, tgt, M);
}

Rational relation_sign(const NoleAlgebra& alg, int op_degree, int slot_degree) {
    if (alg.convention() == SignConvention::koszul && (op_degree * slot_degree) % 2 != 0)
        return Rational(-1);
    return Rational(1);
}

} // namespace

FreeGradedModule total_module(const NoleAlgebra& alg) {
    std::vector<std::string> names{"0:1"};
    for (int d = 1; d <= alg.n(); ++d)
        for (const std::string& b : alg.component(d).basis())
            names.push_back(std::to_string(d) + ":" + b);
    return FreeGradedModule(alg.base(), 0, std::move(names));
}

const OperatorExpr& GradedDerivation::component_part(int k) const {
    if (k < 1 || k > static_cast<int>(component_parts.size()))
        throw structural_error("no component part of index " + std::to_string(k));
    return component_parts[k - 1];
}

OperatorExpr assemble_blocks(const NoleAlgebra& alg, int degree, const OperatorExpr& scalar_part,
                             const std::vector<OperatorExpr>& component_parts) {
    int n = alg.n();
    if (degree < 0 || degree > n)
        throw structural_error("derivation degree " + std::to_string(degree) +
                               " outside 0.." + std::to_string(n));
    if (static_cast<int>(component_parts.size()) != n - degree)
        throw structural_error("expected " + std::to_string(n - degree) +
                               " component parts, got " +
                               std::to_string(component_parts.size()));
    if (scalar_part.source() != alg.component_or_unit(0) ||
        scalar_part.target() != alg.component_or_unit(degree))
        throw structural_error("scalar part must map the base algebra into the degree-" +
                               std::to_string(degree) + " component");
    for (int k = 1; k <= n - degree; ++k) {
        const OperatorExpr& part = component_parts[k - 1];
        if (part.source() != alg.component(k) ||
            part.target() != alg.component_or_unit(k + degree))
            throw structural_error("component part " + std::to_string(k) +
                                   " has mismatched source or target");
    }

    Layout lay = layout_of(alg);
    FreeGradedModule T = total_module(alg);
    OperatorExpr D(T, T);
    auto paste = [&](const OperatorExpr& part, int k) {
        size_t r0 = lay.off[k + degree], c0 = lay.off[k];
        for (const auto& [alpha, C] : part.terms()) {
            PolyMatrix big(alg.base().vars, lay.total, lay.total);
            for (size_t r = 0; r < C.rows(); ++r)
                for (size_t c = 0; c < C.cols(); ++c) big.at(r0 + r, c0 + c) = C.at(r, c);
            D.add_term(alpha, big);
        }
    };
    paste(scalar_part, 0);
    for (int k = 1; k <= n - degree; ++k) paste(component_parts[k - 1], k);
    return D;
}

OperatorExpr assemble(const GradedDerivation& X) {
    if (!X.over) throw structural_error("derivation without an algebra");
    return assemble_blocks(*X.over, X.degree, X.scalar_part, X.component_parts);
}

DecomposeResult decompose_nole_derivation(std::shared_ptr<const NoleAlgebra> alg,
                                          const OperatorExpr& D, std::optional<int> degree,
                                          uint64_t seed) {
    const NoleAlgebra& N = *alg;
    FreeGradedModule T = total_module(N);
    if (D.source() != T || D.target() != T)
        throw structural_error("operator does not act on the total module of the algebra");
    Layout lay = layout_of(N);
    int n = N.n();

    // The degree shift must be the same for every nonzero entry.
    std::optional<int> shift = degree;
    for (const auto& [alpha, C] : D.terms())
        for (size_t r = 0; r < lay.total; ++r)
            for (size_t c = 0; c < lay.total; ++c) {
                if (C.at(r, c).is_zero()) continue;
                int s = lay.degree_of(r) - lay.degree_of(c);
                if (!shift)
                    shift = s;
                else if (*shift != s)
                    throw structural_error(
                        "grading mismatch: operator mixes degree shifts " +
                        std::to_string(*shift) + " and " + std::to_string(s));
            }
    int l = shift.value_or(0);
    if (l < 0 || l > n)
        throw structural_error("degree shift " + std::to_string(l) + " outside 0.." +
                               std::to_string(n));

    // Slice into blocks.
    auto block = [&](int k) {
        FreeGradedModule src = N.component_or_unit(k);
        FreeGradedModule tgt = N.component_or_unit(k + l);
        OperatorExpr part(src, tgt);
        size_t r0 = lay.off[k + l], c0 = lay.off[k];
        for (const auto& [alpha, C] : D.terms()) {
            PolyMatrix sub(N.base().vars, lay.rank[k + l], lay.rank[k]);
            for (size_t r = 0; r < sub.rows(); ++r)
                for (size_t c = 0; c < sub.cols(); ++c) sub.at(r, c) = C.at(r0 + r, c0 + c);
            if (!sub.is_zero()) part.add_term(alpha, sub);
        }
        return part;
    };

    DecomposeResult res;
    res.derivation.over = alg;
    res.derivation.degree = l;
    res.derivation.scalar_part = block(0);
    for (int k = 1; k <= n - l; ++k) res.derivation.component_parts.push_back(block(k));
    const OperatorExpr& XA = res.derivation.scalar_part;

    // (a) scalar part: order <= 1 and kills the unit.
    OrderCheckResult oc = check_order(XA, 1);
    if (!oc.ok) {
        res.violation = "scalar part is not a first-order operator; delta residual at " +
                        oc.witness_string() + " is nonzero";
        res.defect = oc.residual.to_string();
        return res;
    }
    ModuleElement at_one = XA.eval_poly(N.base().one());
    if (!at_one.is_zero()) {
        res.violation = "scalar part does not annihilate the unit";
        res.defect = at_one.to_string();
        return res;
    }

    // (b) module Leibniz rule per component, one generator at a time:
    // delta_{x_t}(X^k) + (multiplication by X^A(x_t)) = 0. The delta product
    // identity then extends the rule from generators to every polynomial.
    for (int k = 1; k <= n - l; ++k) {
        const OperatorExpr& Xk = res.derivation.component_parts[k - 1];
        for (size_t t = 0; t < N.base().nvars(); ++t) {
            Poly xt = N.base().var(t);
            ModuleElement XAxt = XA.eval_poly(xt);
            OperatorExpr E = delta(xt, Xk) + mult_by_element(N, XAxt, l, k);
            if (!E.is_zero()) {
                res.violation = "module Leibniz rule fails on component " + std::to_string(k) +
                                " at generator " + N.base().vars.name(t);
                res.defect = E.to_string();
                return res;
            }
        }
    }

    // (c) product rule across the beta pairings on basis pairs; the defect is
    // A-bilinear once (a) and (b) hold, so basis pairs decide it.
    for (int i = 1; i <= n; ++i)
        for (int j = 1; i + j + l <= n; ++j) {
            const BilinearMap& b_ij = N.beta(i, j);
            const BilinearMap& b_il_j = N.beta(i + l, j);
            const BilinearMap& b_i_jl = N.beta(i, j + l);
            const OperatorExpr& Xi = res.derivation.component_parts[i - 1];
            const OperatorExpr& Xj = res.derivation.component_parts[j - 1];
            const OperatorExpr& Xij = res.derivation.component_parts[i + j - 1];
            Rational epsv = relation_sign(N, l, i);
            auto relation_defect = [&](const ModuleElement& p, const ModuleElement& q) {
                ModuleElement lhs = Xij.eval(b_ij.eval(p, q));
                ModuleElement rhs = b_il_j.eval(Xi.eval(p), q) +
                                    b_i_jl.eval(p, Xj.eval(q)) *
                                        Poly::constant(N.base().vars, epsv);
                return lhs - rhs;
            };
            for (size_t a = 0; a < N.component(i).rank(); ++a)
                for (size_t b = 0; b < N.component(j).rank(); ++b) {
                    ModuleElement defect =
                        relation_defect(ModuleElement::basis(N.component(i), a),
                                        ModuleElement::basis(N.component(j), b));
                    if (!defect.is_zero()) {
                        res.violation = "product rule fails at degrees (" + std::to_string(i) +
                                        "," + std::to_string(j) + "), basis (" +
                                        N.component(i).basis_name(a) + "," +
                                        N.component(j).basis_name(b) + ")";
                        res.defect = defect.to_string();
                        return res;
                    }
                }
            Rng rng(seed ^ (0x9e3779b97f4a7c15ull + static_cast<uint64_t>(i * 37 + j)));
            for (int trial = 0; trial < 5; ++trial) {
                ModuleElement p = rng.element(N.component(i), 2, 2);
                ModuleElement q = rng.element(N.component(j), 2, 2);
                ModuleElement defect = relation_defect(p, q);
                if (!defect.is_zero()) {
                    res.violation = "product rule fails on random elements at degrees (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")";
                    res.defect = defect.to_string();
                    return res;
                }
            }
        }

    res.ok = true;
    return res;
}

} // namespace gradcalc
