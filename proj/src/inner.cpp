#include "gradcalc/inner.hpp"

#include "gradcalc/rng.hpp"

namespace gradcalc {

namespace {

std::vector<size_t> dims_of(const InnerStructureSpec& Xi) {
    return slot_dims(Xi.sig, Xi.P.rank(), Xi.Q ? Xi.Q->rank() : 0);
}

// Derivative of the slotwise transform action at the identity, restricted to
// the P-slots and negated: contravariant slots contribute +phi^T on their
// index, covariant slots -phi. The sign makes the fully contravariant case
// read sum_i Xi(p_1,...,phi(p_i),...,p_q).
ModuleElement infinitesimal_P_action(const InnerStructureSpec& Xi, const PolyMatrix& phi) {
    std::vector<SlotInfo> slots = slots_of(Xi.sig);
    std::vector<size_t> dims = dims_of(Xi);
    PolyMatrix phi_T = phi.transpose();
    std::vector<Poly> acc(Xi.carrier.rank(), Poly(Xi.base().vars));
    for (size_t s = 0; s < slots.size(); ++s) {
        if (!slots[s].on_P) continue;
        std::vector<Poly> moved =
            slot_apply(dims, s, slots[s].covariant ? phi : phi_T, Xi.tensor.coords);
        for (size_t i = 0; i < acc.size(); ++i)
            acc[i] = slots[s].covariant ? acc[i] - moved[i] : acc[i] + moved[i];
    }
    return ModuleElement(Xi.carrier, std::move(acc));
}

void require_invertible(const ModuleHom& phi, const char* who) {
    Poly d = phi.matrix.det();
    if (!d.is_constant() || d.is_zero())
        throw structural_error(std::string(who) + " must be invertible over the base algebra");
}

} // namespace

InnerStructureSpec make_inner_structure(const FreeGradedModule& P,
                                        const std::optional<FreeGradedModule>& Q,
                                        const TypeSignature& sig, ModuleElement value) {
    if ((sig.r > 0 || sig.s > 0) && !Q)
        throw structural_error("type signature uses Q-slots but no Q module given");
    InnerStructureSpec Xi;
    Xi.P = P;
    Xi.Q = Q;
    Xi.sig = sig;
    Xi.carrier = typed_module(sig, P, Q);
    if (value.mod.rank() != Xi.carrier.rank() || value.mod.base() != P.base())
        throw structural_error("inner tensor has " + std::to_string(value.mod.rank()) +
                               " coordinates, carrier needs " +
                               std::to_string(Xi.carrier.rank()));
    Xi.tensor = ModuleElement(Xi.carrier, value.coords);
    return Xi;
}

InnerStructureSpec inner_from_bilinear(const BilinearMap& g) {
    if (g.left() != g.right())
        throw structural_error("bilinear inner structures need both arguments on one module");
    const FreeGradedModule& P = g.left();
    const FreeGradedModule& Q = g.target();
    TypeSignature sig{0, 2, 1, 0};
    FreeGradedModule carrier = typed_module(sig, P, Q);
    std::vector<Poly> coords(carrier.rank(), Poly(P.base().vars));
    size_t rP = P.rank(), rQ = Q.rank();
    for (size_t a = 0; a < rP; ++a)
        for (size_t b = 0; b < rP; ++b)
            for (size_t k = 0; k < rQ; ++k)
                coords[(a * rP + b) * rQ + k] = g.value(a, b).coords[k];
    return make_inner_structure(P, Q, sig, ModuleElement(carrier, std::move(coords)));
}

BilinearMap bilinear_view(const InnerStructureSpec& Xi) {
    TypeSignature want{0, 2, 1, 0};
    if (!(Xi.sig == want) || !Xi.Q)
        throw structural_error("bilinear view needs type (0,2)x(1,0)");
    BilinearMap g(Xi.P, Xi.P, *Xi.Q);
    size_t rP = Xi.P.rank(), rQ = Xi.Q->rank();
    for (size_t a = 0; a < rP; ++a)
        for (size_t b = 0; b < rP; ++b) {
            std::vector<Poly> val(rQ, Poly(Xi.base().vars));
            for (size_t k = 0; k < rQ; ++k) val[k] = Xi.tensor.coords[(a * rP + b) * rQ + k];
            g.value(a, b) = ModuleElement(*Xi.Q, std::move(val));
        }
    return g;
}

InnerStructureSpec transform(const InnerStructureSpec& Xi, const ModuleHom& phi,
                             const std::optional<ModuleHom>& psi) {
    if (phi.source != Xi.P || phi.target != Xi.P)
        throw structural_error("transform needs an endomorphism of P");
    require_invertible(phi, "transform map on P");
    bool uses_Q = Xi.sig.r > 0 || Xi.sig.s > 0;
    PolyMatrix psi_m = PolyMatrix::identity(Xi.base().vars, Xi.Q ? Xi.Q->rank() : 0);
    if (uses_Q) {
        if (psi) {
            if (psi->source != *Xi.Q || psi->target != *Xi.Q)
                throw structural_error("transform needs an endomorphism of Q");
            require_invertible(*psi, "transform map on Q");
            psi_m = psi->matrix;
        }
    }
    PolyMatrix phi_inv_T = phi.matrix.inverse().transpose();
    PolyMatrix psi_inv_T =
        uses_Q ? psi_m.inverse().transpose() : PolyMatrix::identity(Xi.base().vars, 0);

    std::vector<SlotInfo> slots = slots_of(Xi.sig);
    std::vector<size_t> dims = dims_of(Xi);
    std::vector<Poly> v = Xi.tensor.coords;
    for (size_t s = 0; s < slots.size(); ++s) {
        const PolyMatrix& M = slots[s].on_P ? (slots[s].covariant ? phi.matrix : phi_inv_T)
                                            : (slots[s].covariant ? psi_m : psi_inv_T);
        v = slot_apply(dims, s, M, v);
    }
    InnerStructureSpec out = Xi;
    out.tensor = ModuleElement(Xi.carrier, std::move(v));
    return out;
}

SymmetryDefect in_infinitesimal_symmetry(const ModuleHom& phi, const InnerStructureSpec& Xi) {
    if (phi.source != Xi.P || phi.target != Xi.P)
        throw structural_error("infinitesimal symmetry needs an endomorphism of P");
    SymmetryDefect out;
    out.defect = infinitesimal_P_action(Xi, phi.matrix);
    out.ok = out.defect.is_zero();
    return out;
}

bool in_symmetry_group(const ModuleHom& phi, const InnerStructureSpec& Xi,
                       const std::optional<ModuleHom>& psi) {
    return transform(Xi, phi, psi).tensor == Xi.tensor;
}

bool in_orthogonal_group(const ModuleHom& phi, const BilinearMap& b) {
    if (b.left() != b.right()) throw structural_error("orthogonality needs a form on one module");
    if (phi.source != b.left() || phi.target != b.left())
        throw structural_error("orthogonality needs an endomorphism of the form's module");
    require_invertible(phi, "orthogonal group member");
    for (size_t i = 0; i < b.left().rank(); ++i)
        for (size_t j = 0; j < b.left().rank(); ++j) {
            ModuleElement lhs = b.eval(phi.apply(ModuleElement::basis(b.left(), i)),
                                       phi.apply(ModuleElement::basis(b.left(), j)));
            if (lhs != b.value(i, j)) return false;
        }
    return true;
}

bool in_commutant(const ModuleHom& Phi, const ModuleHom& psi) {
    if (Phi.source != psi.source || Phi.target != psi.target || Phi.source != Phi.target)
        throw structural_error("commutant test needs endomorphisms of one module");
    return (Phi.matrix * psi.matrix - psi.matrix * Phi.matrix).is_zero();
}

bool is_complex_structure(const ModuleHom& J) {
    if (J.source != J.target) throw structural_error("complex structure must be an endomorphism");
    PolyMatrix sq = J.matrix * J.matrix;
    return (sq + PolyMatrix::identity(J.matrix.vars(), J.matrix.rows())).is_zero();
}

ModuleHom lie_bracket(const ModuleHom& a, const ModuleHom& b) {
    if (a.source != b.source || a.target != b.target || a.source != a.target)
        throw structural_error("bracket needs endomorphisms of one module");
    return ModuleHom(a.source, a.source, a.matrix * b.matrix - b.matrix * a.matrix);
}

std::vector<ModuleHom> symmetry_algebra_basis(const InnerStructureSpec& Xi,
                                              int coefficient_degree_bound) {
    const BaseAlgebra& A = Xi.base();
    size_t rP = Xi.P.rank();
    std::vector<Monomial> monos = monomials_up_to(A.vars, coefficient_degree_bound);
    size_t unknowns = rP * rP * monos.size();

    // Defect of each elementary unknown phi = x^m E_{rc}; the condition is
    // k-linear in phi, so columns of the system are these defects expanded
    // into coefficient vectors.
    std::vector<ModuleElement> columns;
    columns.reserve(unknowns);
    for (size_t r = 0; r < rP; ++r)
        for (size_t c = 0; c < rP; ++c)
            for (const Monomial& m : monos) {
                PolyMatrix E = PolyMatrix::zero(A.vars, rP, rP);
                E.at(r, c) = Poly::monomial(A.vars, m, 1);
                columns.push_back(
                    in_infinitesimal_symmetry(ModuleHom(Xi.P, Xi.P, E), Xi).defect);
            }

    // Row space: one equation per (carrier coordinate, monomial) pair.
    std::map<std::pair<size_t, Monomial>, size_t> row_of;
    for (const ModuleElement& col : columns)
        for (size_t i = 0; i < col.coords.size(); ++i)
            for (const auto& [m, cval] : col.coords[i].terms()) {
                (void)cval;
                row_of.emplace(std::make_pair(i, m), row_of.size());
            }
    size_t rows = row_of.size();
    std::vector<std::vector<Rational>> M(rows, std::vector<Rational>(unknowns, Rational(0)));
    for (size_t u = 0; u < unknowns; ++u)
        for (size_t i = 0; i < columns[u].coords.size(); ++i)
            for (const auto& [m, cval] : columns[u].coords[i].terms())
                M[row_of.at({i, m})][u] = cval;

    LinSolveResult sol = rat_linsolve(M, std::vector<Rational>(rows, Rational(0)));
    std::vector<ModuleHom> basis;
    for (const std::vector<Rational>& v : sol.nullspace) {
        PolyMatrix phi = PolyMatrix::zero(A.vars, rP, rP);
        size_t u = 0;
        for (size_t r = 0; r < rP; ++r)
            for (size_t c = 0; c < rP; ++c)
                for (const Monomial& m : monos) {
                    if (v[u] != 0) phi.at(r, c) = phi.at(r, c) + Poly::monomial(A.vars, m, v[u]);
                    ++u;
                }
        basis.emplace_back(Xi.P, Xi.P, phi);
    }
    return basis;
}

} // namespace gradcalc
