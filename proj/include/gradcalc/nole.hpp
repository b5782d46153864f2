#pragma once

#include <map>
#include <memory>
#include <optional>

#include "gradcalc/module.hpp"

namespace gradcalc {

// Graded commutative algebra N = A (+) N_1 (+) ... (+) N_n with products
// beta(i,j) : N_i x N_j -> N_{i+j} and everything above degree n cut off.
// Components are free modules labeled by their degree; component degree i
// lives at index i-1. All (i,j) products with i+j <= n are stored, the
// flipped orientation being filled in from the given one via the sign
// convention when only one side is supplied.
class NoleAlgebra {
public:
    NoleAlgebra() = default;

    const BaseAlgebra& base() const { return base_; }
    int n() const { return static_cast<int>(components_.size()); }
    const FreeGradedModule& component(int degree) const;
    // degree 0 gives the unit module.
    FreeGradedModule component_or_unit(int degree) const;
    const BilinearMap& beta(int i, int j) const;
    SignConvention convention() const { return conv_; }

    bool operator==(const NoleAlgebra& o) const;

    friend NoleAlgebra build_nole(BaseAlgebra base, std::vector<FreeGradedModule> components,
                                  std::map<std::pair<int, int>, BilinearMap> betas,
                                  SignConvention conv);

private:
    BaseAlgebra base_;
    std::vector<FreeGradedModule> components_;
    std::map<std::pair<int, int>, BilinearMap> betas_;
    SignConvention conv_ = SignConvention::trivial;
};

// Outcome of validating candidate n-ole data. Associativity is checked
// before commutativity (first violated instance wins), both on basis
// triples/pairs, which is exact because every law is A-multilinear.
struct NoleCheckResult {
    bool ok = false;
    std::string violation; // law + basis witness, empty when ok
    std::string defect;    // the nonzero difference, canonical text
};

NoleCheckResult check_nole_data(const BaseAlgebra& base,
                                const std::vector<FreeGradedModule>& components,
                                const std::map<std::pair<int, int>, BilinearMap>& betas,
                                SignConvention conv);

// Throws validation_error carrying the first violated instance.
NoleAlgebra build_nole(BaseAlgebra base, std::vector<FreeGradedModule> components,
                       std::map<std::pair<int, int>, BilinearMap> betas, SignConvention conv);

// Diole A (+) P: no products among positive degrees at all.
NoleAlgebra build_diole(const BaseAlgebra& A, const FreeGradedModule& P,
                        SignConvention conv = SignConvention::trivial);

// Triole A (+) P (+) Q with the single product g : P x P -> Q.
NoleAlgebra build_triole(const BaseAlgebra& A, const FreeGradedModule& P,
                         const FreeGradedModule& Q, const BilinearMap& g,
                         SignConvention conv = SignConvention::trivial);

// Regularity of a triole: the adjoint map P -> Hom(P,Q), p |-> g(p,-), is
// invertible over A. Non-square adjoints are reported as not regular.
struct RegularityResult {
    bool regular = false;
    std::string reason;
};

RegularityResult is_regular(const NoleAlgebra& triole);

// Homogeneous-component decomposition of an algebra element; the degree-0
// part rides along as an element of the unit module so everything is uniform.
class GradedElement {
public:
    GradedElement() = default;
    explicit GradedElement(std::shared_ptr<const NoleAlgebra> alg) : alg_(std::move(alg)) {}

    static GradedElement scalar(std::shared_ptr<const NoleAlgebra> alg, const Poly& a);
    static GradedElement part(std::shared_ptr<const NoleAlgebra> alg, int degree,
                              ModuleElement v);

    const NoleAlgebra& algebra() const;
    // Zero element of component `degree` when absent.
    ModuleElement component(int degree) const;
    void set_component(int degree, ModuleElement v);

    bool is_zero() const;
    GradedElement operator+(const GradedElement& o) const;
    GradedElement operator-(const GradedElement& o) const;
    // Truncated graded product: cross terms above degree n vanish.
    GradedElement operator*(const GradedElement& o) const;
    bool operator==(const GradedElement& o) const;
    bool operator!=(const GradedElement& o) const { return !(*this == o); }

    std::string to_string() const;

private:
    std::shared_ptr<const NoleAlgebra> alg_;
    std::map<int, ModuleElement> parts_;
};

// Truncated module over an n-ole: components W_0..W_n with actions
// lambda(k,j) : N_k x W_j -> W_{k+j}. The degree-0 action of A is the module
// structure itself; the stored actions all have k >= 1.
class TruncatedModule {
public:
    TruncatedModule() = default;

    const NoleAlgebra& algebra() const { return *alg_; }
    const FreeGradedModule& component(int j) const;
    int top() const { return static_cast<int>(comps_.size()) - 1; }
    // Zero map when the action was not supplied.
    std::optional<BilinearMap> action(int k, int j) const;

    friend TruncatedModule build_truncated(std::shared_ptr<const NoleAlgebra> alg,
                                           std::vector<FreeGradedModule> comps,
                                           std::map<std::pair<int, int>, BilinearMap> actions);

private:
    std::shared_ptr<const NoleAlgebra> alg_;
    std::vector<FreeGradedModule> comps_;
    std::map<std::pair<int, int>, BilinearMap> actions_;
};

struct TruncatedCheckResult {
    bool ok = false;
    std::string violation;
    std::string defect;
};

TruncatedCheckResult check_truncated_data(const NoleAlgebra& alg,
                                          const std::vector<FreeGradedModule>& comps,
                                          const std::map<std::pair<int, int>, BilinearMap>& actions);

TruncatedModule build_truncated(std::shared_ptr<const NoleAlgebra> alg,
                                std::vector<FreeGradedModule> comps,
                                std::map<std::pair<int, int>, BilinearMap> actions);

// The diole's canonical module over itself: W_0 = A, W_1 = P with the action
// P x A -> P the module structure.
TruncatedModule trivial_diole_module(std::shared_ptr<const NoleAlgebra> diole);

} // namespace gradcalc
