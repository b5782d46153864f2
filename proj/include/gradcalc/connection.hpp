#pragma once

#include "gradcalc/inner.hpp"
#include "gradcalc/operator.hpp"

namespace gradcalc {

// Linear connection on a free module, one Christoffel matrix per base
// variable: nabla_{d/dx_i} = d/dx_i + Gamma_i, extended A-linearly in the
// direction field. The Leibniz rule holds by the shape of the formula.
struct Connection {
    FreeGradedModule module;
    std::vector<PolyMatrix> christoffels;

    const BaseAlgebra& base() const { return module.base(); }
    std::string to_string() const;

    bool operator==(const Connection& o) const {
        return module == o.module && christoffels == o.christoffels;
    }
};

Connection make_connection(FreeGradedModule P, std::vector<PolyMatrix> christoffels);
Connection trivial_connection(const FreeGradedModule& P);

// nabla in the i-th coordinate direction as a first-order operator.
OperatorExpr covariant_derivative(const Connection& c, size_t i);
// nabla_X for X = sum coeffs[i] d/dx_i.
OperatorExpr covariant_derivative(const Connection& c, const std::vector<Poly>& coeffs);

// R_ij = d_i Gamma_j - d_j Gamma_i + [Gamma_i, Gamma_j], stored for i < j;
// the complete flatness obstruction since coordinate fields commute.
struct CurvatureTensor {
    FreeGradedModule module;
    std::map<std::pair<size_t, size_t>, PolyMatrix> components;

    bool is_flat() const;
    const PolyMatrix& at(size_t i, size_t j) const;
    std::string to_string() const;
};

CurvatureTensor curvature(const Connection& c);

Connection dual_connection(const Connection& c);
Connection tensor_connection(const Connection& a, const Connection& b);
// On hom(P,Q): (nabla h)(p) = box(h(p)) - h(nabla p).
Connection hom_connection(const Connection& on_P, const Connection& on_Q);
// On Bil(P;Q) = hom(P (x) P, Q):
// (nabla g)(p1,p2) = box(g(p1,p2)) - g(nabla p1, p2) - g(p1, nabla p2).
Connection bil_connection(const Connection& on_P, const Connection& on_Q);
// On the carrier of an inner-structure type: covariant slots ride with
// Gamma, contravariant slots with -Gamma^T.
Connection typed_connection(const TypeSignature& sig, const Connection& on_P,
                            const std::optional<Connection>& on_Q);

struct GaugeCheckResult {
    bool ok = false;
    // One entry per base variable: nabla^induced_{d/dx_i}(Xi).
    std::vector<std::pair<std::string, ModuleElement>> defects;

    std::string defect_string() const;
};

// Xi is preserved iff its covariant derivative in every coordinate direction
// vanishes; coordinate directions suffice since nabla_X is A-linear in X.
GaugeCheckResult check_gauge_structure(const Connection& nabla,
                                       const std::optional<Connection>& box,
                                       const InnerStructureSpec& Xi);

// d_nabla : P -> Omega1 (x) P, p |-> sum_i dx_i (x) nabla_i(p).
OperatorExpr covariant_differential(const Connection& c);

// The family X |-> phibar o nabla_X restricted to coordinate directions.
std::vector<OperatorExpr> connection_along_map(const Connection& c, const ModuleHom& phibar);

struct GaugeEquivalenceResult {
    bool ok = false;
    size_t var_index = 0;  // first failing direction when !ok
    PolyMatrix defect;     // Gamma-tilde_i - (phi Gamma_i phi^-1 - (d_i phi) phi^-1)
};

// Does conjugation by phi carry `a` to `b`? Checked in Christoffel form:
// the operator identity nabla~ = phi o nabla o phi^-1 unfolds to
// Gamma~_i = phi Gamma_i phi^-1 - (d_i phi) phi^-1.
GaugeEquivalenceResult gauge_equivalent(const Connection& a, const Connection& b,
                                        const ModuleHom& phi);

// Gauge equivalence through a structure-preserving map of determinant one.
bool xi_gauge_orbit_check(const Connection& a, const Connection& b, const ModuleHom& phi,
                          const InnerStructureSpec& Xi);

Connection affine_combination(const Connection& a, const Connection& b, const Rational& t);

} // namespace gradcalc
