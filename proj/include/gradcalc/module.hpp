#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gradcalc/polymatrix.hpp"

namespace gradcalc {

// Commutativity discipline for graded products: trivial means b(p,q) =
// b(q,p) in any degrees, koszul inserts (-1)^(ij).
enum class SignConvention { trivial, koszul };

inline std::string sign_convention_name(SignConvention s) {
    return s == SignConvention::trivial ? "trivial" : "koszul";
}

// The base ring: a polynomial algebra over the rationals, sitting in degree 0.
struct BaseAlgebra {
    VarList vars;

    BaseAlgebra() = default;
    explicit BaseAlgebra(VarList v) : vars(std::move(v)) {}
    explicit BaseAlgebra(std::vector<std::string> names) : vars(std::move(names)) {}

    size_t nvars() const { return vars.size(); }
    Poly zero() const { return Poly(vars); }
    Poly one() const { return Poly::constant(vars, 1); }
    Poly var(size_t i) const { return Poly::variable(vars, i); }
    Poly parse(const std::string& text) const { return Poly::parse(text, vars); }

    bool operator==(const BaseAlgebra& o) const { return vars == o.vars; }
    bool operator!=(const BaseAlgebra& o) const { return !(*this == o); }
};

// Finitely generated free module with a grading label and named basis.
class FreeGradedModule {
public:
    FreeGradedModule() = default;
    FreeGradedModule(BaseAlgebra base, int degree, std::vector<std::string> basis);
    // Basis autonamed prefix1..prefixN.
    FreeGradedModule(BaseAlgebra base, int degree, size_t rank, const std::string& prefix);

    const BaseAlgebra& base() const { return base_; }
    int degree() const { return degree_; }
    size_t rank() const { return basis_.size(); }
    const std::vector<std::string>& basis() const { return basis_; }
    const std::string& basis_name(size_t i) const { return basis_[i]; }
    int basis_index(const std::string& name) const;

    bool operator==(const FreeGradedModule& o) const {
        return base_ == o.base_ && degree_ == o.degree_ && basis_ == o.basis_;
    }
    bool operator!=(const FreeGradedModule& o) const { return !(*this == o); }

private:
    BaseAlgebra base_;
    int degree_ = 0;
    std::vector<std::string> basis_;
};

// The base algebra seen as the rank-1 free module over itself; derivations
// A -> V and scalar symbols live on this.
FreeGradedModule unit_module(const BaseAlgebra& A);

// Element of a free module: coordinate vector in the named basis.
struct ModuleElement {
    FreeGradedModule mod;
    std::vector<Poly> coords;

    ModuleElement() = default;
    explicit ModuleElement(const FreeGradedModule& m);
    ModuleElement(FreeGradedModule m, std::vector<Poly> c);

    static ModuleElement basis(const FreeGradedModule& m, size_t i);

    bool is_zero() const;
    ModuleElement operator+(const ModuleElement& o) const;
    ModuleElement operator-(const ModuleElement& o) const;
    ModuleElement operator-() const;
    ModuleElement operator*(const Poly& a) const;
    friend ModuleElement operator*(const Poly& a, const ModuleElement& v) { return v * a; }
    bool operator==(const ModuleElement& o) const;
    bool operator!=(const ModuleElement& o) const { return !(*this == o); }

    std::string to_string() const;
};

// A-linear map between free modules, stored as its basis matrix
// (target rank x source rank). Grading shift is target deg - source deg.
struct ModuleHom {
    FreeGradedModule source, target;
    PolyMatrix matrix;

    ModuleHom() = default;
    ModuleHom(FreeGradedModule src, FreeGradedModule tgt, PolyMatrix m);

    static ModuleHom identity(const FreeGradedModule& m);
    static ModuleHom zero(const FreeGradedModule& src, const FreeGradedModule& tgt);

    int degree_shift() const { return target.degree() - source.degree(); }
    ModuleElement apply(const ModuleElement& v) const;
    ModuleHom compose(const ModuleHom& inner) const; // this after inner
    ModuleHom inverse() const;
    ModuleHom transpose_as_dual() const; // dual(target) -> dual(source)

    bool operator==(const ModuleHom& o) const {
        return source == o.source && target == o.target && matrix == o.matrix;
    }
    bool operator!=(const ModuleHom& o) const { return !(*this == o); }
};

// A-bilinear map left x right -> target, stored by its structure tensor
// tensor[i][j] = value on (left basis i, right basis j).
class BilinearMap {
public:
    BilinearMap() = default;
    BilinearMap(FreeGradedModule left, FreeGradedModule right, FreeGradedModule target);

    const FreeGradedModule& left() const { return left_; }
    const FreeGradedModule& right() const { return right_; }
    const FreeGradedModule& target() const { return target_; }

    ModuleElement& value(size_t i, size_t j);
    const ModuleElement& value(size_t i, size_t j) const;

    ModuleElement eval(const ModuleElement& u, const ModuleElement& v) const;
    // The map with swapped arguments as a bilinear map right x left -> target.
    BilinearMap flipped() const;
    bool is_symmetric() const;
    bool is_antisymmetric() const;
    bool is_zero() const;

    bool operator==(const BilinearMap& o) const;
    bool operator!=(const BilinearMap& o) const { return !(*this == o); }

    std::string table_string(const std::string& name) const;

private:
    FreeGradedModule left_, right_, target_;
    std::vector<std::vector<ModuleElement>> values_;
};

// --- induced module constructions ---

FreeGradedModule dual_module(const FreeGradedModule& P);
FreeGradedModule tensor_module(const FreeGradedModule& P, const FreeGradedModule& Q);
FreeGradedModule hom_module(const FreeGradedModule& P, const FreeGradedModule& Q);
FreeGradedModule bil_module(const FreeGradedModule& P, const FreeGradedModule& Q);

// Conversions between maps and elements of the induced modules.
ModuleElement hom_to_element(const ModuleHom& h);
ModuleHom element_to_hom(const ModuleElement& e, const FreeGradedModule& P,
                         const FreeGradedModule& Q);
ModuleElement bil_to_element(const BilinearMap& g);
BilinearMap element_to_bil(const ModuleElement& e, const FreeGradedModule& P,
                           const FreeGradedModule& Q);
// Natural pairing <theta, p> for theta in dual(P), p in P.
Poly dual_pairing(const ModuleElement& theta, const ModuleElement& p);

// --- tensor slot machinery shared by inner structures and connections ---

// Type signature (p,q) x (r,s): p covariant and q contravariant P slots, then
// r covariant and s contravariant Q slots, in that fixed order.
struct TypeSignature {
    int p = 0, q = 0, r = 0, s = 0;
    bool pure_P() const { return r == 0 && s == 0; }
    bool operator==(const TypeSignature& o) const {
        return p == o.p && q == o.q && r == o.r && s == o.s;
    }
    std::string to_string() const;
};

struct SlotInfo {
    bool on_P;
    bool covariant;
};

std::vector<SlotInfo> slots_of(const TypeSignature& t);

// P^(x)p (x) P*^(x)q (x) Q^(x)r (x) Q*^(x)s, slot 0 slowest in the flattening.
FreeGradedModule typed_module(const TypeSignature& t, const FreeGradedModule& P,
                              const std::optional<FreeGradedModule>& Q);

// Applies the square matrix M to one tensor slot of the flattened coordinate
// vector (dims lists each slot's dimension, slot 0 slowest).
std::vector<Poly> slot_apply(const std::vector<size_t>& dims, size_t slot, const PolyMatrix& M,
                             const std::vector<Poly>& v);

std::vector<size_t> slot_dims(const TypeSignature& t, size_t rankP, size_t rankQ);

} // namespace gradcalc
