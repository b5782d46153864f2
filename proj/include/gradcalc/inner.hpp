#pragma once

#include <optional>

#include "gradcalc/linsolve.hpp"
#include "gradcalc/module.hpp"

namespace gradcalc {

// A tensor living in P^p_q (x) Q^r_s, stored as its coordinate vector over
// the induced basis. The signature fixes which slots transform covariantly
// (plain factors) and contravariantly (dual factors).
struct InnerStructureSpec {
    FreeGradedModule P;
    std::optional<FreeGradedModule> Q;
    TypeSignature sig;
    FreeGradedModule carrier; // typed_module(sig, P, Q)
    ModuleElement tensor;     // element of carrier

    const BaseAlgebra& base() const { return P.base(); }
};

InnerStructureSpec make_inner_structure(const FreeGradedModule& P,
                                        const std::optional<FreeGradedModule>& Q,
                                        const TypeSignature& sig, ModuleElement value);

// A Q-valued bilinear form on P is the special case of type (0,2)x(1,0);
// coordinates transfer slot for slot.
InnerStructureSpec inner_from_bilinear(const BilinearMap& g);
BilinearMap bilinear_view(const InnerStructureSpec& Xi);

// Structure transport along invertible maps: covariant slots pick up phi
// (resp. psi), contravariant slots the inverse transpose.
InnerStructureSpec transform(const InnerStructureSpec& Xi, const ModuleHom& phi,
                             const std::optional<ModuleHom>& psi = std::nullopt);

struct SymmetryDefect {
    bool ok = false;
    ModuleElement defect; // element of the carrier module
};

// Infinitesimal symmetry condition for phi acting on the P-slots: the
// derivative of the transform action at the identity must kill the tensor.
// For a fully contravariant tensor this is the displayed sum
// sum_i Xi(p_1,...,phi(p_i),...) = 0; mixed types use the same slotwise
// derivative. Defect sign is chosen so the (0,2) case reads
// Xi(phi p, q) + Xi(p, phi q).
SymmetryDefect in_infinitesimal_symmetry(const ModuleHom& phi, const InnerStructureSpec& Xi);

// Finite (group) version: transform fixes the tensor.
bool in_symmetry_group(const ModuleHom& phi, const InnerStructureSpec& Xi,
                       const std::optional<ModuleHom>& psi = std::nullopt);

// b(phi p, phi q) = b(p, q) on all basis pairs; phi must be invertible.
bool in_orthogonal_group(const ModuleHom& phi, const BilinearMap& b);

bool in_commutant(const ModuleHom& Phi, const ModuleHom& psi);

bool is_complex_structure(const ModuleHom& J);

ModuleHom lie_bracket(const ModuleHom& a, const ModuleHom& b);

// Basis over the rationals of all phi with polynomial entries of total
// degree <= bound solving the infinitesimal symmetry condition. The full
// solution set is an A-module; this returns a k-basis of its degree-bounded
// slice, found by linear algebra on the entry coefficients.
std::vector<ModuleHom> symmetry_algebra_basis(const InnerStructureSpec& Xi,
                                              int coefficient_degree_bound);

} // namespace gradcalc
