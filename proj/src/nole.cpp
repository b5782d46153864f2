#include "gradcalc/nole.hpp"

namespace gradcalc {

namespace {

Rational eps(SignConvention conv, int i, int j) {
    if (conv == SignConvention::koszul && (i * j) % 2 != 0) return Rational(-1);
    return Rational(1);
}

BilinearMap flip_with_sign(const BilinearMap& b, const Rational& sign) {
    BilinearMap f = b.flipped();
    if (sign != 1)
        for (size_t i = 0; i < f.left().rank(); ++i)
            for (size_t j = 0; j < f.right().rank(); ++j)
                f.value(i, j) = f.value(i, j) * Poly::constant(b.left().base().vars, sign);
    return f;
}

// Completes the product table: every (i,j) with i+j <= n gets a map, the
// missing orientation coming from the given one via the convention's sign.
std::map<std::pair<int, int>, BilinearMap> effective_betas(
    const BaseAlgebra& base, const std::vector<FreeGradedModule>& components,
    const std::map<std::pair<int, int>, BilinearMap>& betas, SignConvention conv) {
    int n = static_cast<int>(components.size());
    std::map<std::pair<int, int>, BilinearMap> full;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; i + j <= n; ++j) {
            auto given = betas.find({i, j});
            if (given != betas.end()) {
                full.emplace(std::make_pair(i, j), given->second);
                continue;
            }
            auto other = betas.find({j, i});
            if (other != betas.end()) {
                full.emplace(std::make_pair(i, j), flip_with_sign(other->second, eps(conv, i, j)));
                continue;
            }
            BilinearMap zero(components[i - 1], components[j - 1], components[i + j - 1]);
            full.emplace(std::make_pair(i, j), zero);
        }
    (void)base;
    return full;
}

void structural_check(const BaseAlgebra& base, const std::vector<FreeGradedModule>& components,
                      const std::map<std::pair<int, int>, BilinearMap>& betas) {
    int n = static_cast<int>(components.size());
    for (int d = 1; d <= n; ++d) {
        const FreeGradedModule& c = components[d - 1];
        if (c.base() != base)
            throw structural_error("component of degree " + std::to_string(d) +
                                   " over a different base algebra");
        if (c.degree() != d)
            throw structural_error("component at degree " + std::to_string(d) +
                                   " carries grading label " + std::to_string(c.degree()));
    }
    for (const auto& [key, b] : betas) {
        auto [i, j] = key;
        if (i < 1 || j < 1 || i + j > n)
            throw structural_error("product beta(" + std::to_string(i) + "," + std::to_string(j) +
                                   ") out of range for an " + std::to_string(n) + "-ole");
        if (b.left() != components[i - 1] || b.right() != components[j - 1] ||
            b.target() != components[i + j - 1])
            throw structural_error("product beta(" + std::to_string(i) + "," + std::to_string(j) +
                                   ") has mismatched component modules");
    }
}

} // namespace

const FreeGradedModule& NoleAlgebra::component(int degree) const {
    if (degree < 1 || degree > n())
        throw structural_error("no component of degree " + std::to_string(degree));
    return components_[degree - 1];
}

FreeGradedModule NoleAlgebra::component_or_unit(int degree) const {
    if (degree == 0) return unit_module(base_);
    return component(degree);
}

const BilinearMap& NoleAlgebra::beta(int i, int j) const {
    auto it = betas_.find({i, j});
    if (it == betas_.end())
        throw structural_error("no product beta(" + std::to_string(i) + "," + std::to_string(j) +
                               ")");
    return it->second;
}

bool NoleAlgebra::operator==(const NoleAlgebra& o) const {
    return base_ == o.base_ && components_ == o.components_ && betas_ == o.betas_ &&
           conv_ == o.conv_;
}

NoleCheckResult check_nole_data(const BaseAlgebra& base,
                                const std::vector<FreeGradedModule>& components,
                                const std::map<std::pair<int, int>, BilinearMap>& betas,
                                SignConvention conv) {
    structural_check(base, components, betas);
    auto full = effective_betas(base, components, betas, conv);
    int n = static_cast<int>(components.size());
    NoleCheckResult res;

    // Associativity first so mixed violations report the associator, then
    // graded commutativity. Both laws are A-multilinear, hence basis tuples
    // decide them exactly.
    for (int i = 1; i <= n; ++i)
        for (int j = 1; i + j <= n; ++j)
            for (int k = 1; i + j + k <= n; ++k) {
                const auto& b_jk = full.at({j, k});
                const auto& b_i_jk = full.at({i, j + k});
                const auto& b_ij = full.at({i, j});
                const auto& b_ij_k = full.at({i + j, k});
                for (size_t a = 0; a < components[i - 1].rank(); ++a)
                    for (size_t b = 0; b < components[j - 1].rank(); ++b)
                        for (size_t c = 0; c < components[k - 1].rank(); ++c) {
                            ModuleElement pa = ModuleElement::basis(components[i - 1], a);
                            ModuleElement pb = ModuleElement::basis(components[j - 1], b);
                            ModuleElement pc = ModuleElement::basis(components[k - 1], c);
                            ModuleElement nested_right = b_i_jk.eval(pa, b_jk.eval(pb, pc));
                            ModuleElement nested_left = b_ij_k.eval(b_ij.eval(pa, pb), pc);
                            ModuleElement defect = nested_left - nested_right;
                            if (!defect.is_zero()) {
                                res.ok = false;
                                res.violation =
                                    "associativity violated at degrees (" + std::to_string(i) +
                                    "," + std::to_string(j) + "," + std::to_string(k) +
                                    "), basis (" + components[i - 1].basis_name(a) + "," +
                                    components[j - 1].basis_name(b) + "," +
                                    components[k - 1].basis_name(c) + ")";
                                res.defect = defect.to_string();
                                return res;
                            }
                        }
            }

    for (int i = 1; i <= n; ++i)
        for (int j = i; i + j <= n; ++j) {
            const auto& b_ij = full.at({i, j});
            const auto& b_ji = full.at({j, i});
            Rational e = eps(conv, i, j);
            for (size_t a = 0; a < components[i - 1].rank(); ++a)
                for (size_t b = 0; b < components[j - 1].rank(); ++b) {
                    ModuleElement pa = ModuleElement::basis(components[i - 1], a);
                    ModuleElement pb = ModuleElement::basis(components[j - 1], b);
                    ModuleElement lhs = b_ij.eval(pa, pb);
                    ModuleElement rhs =
                        b_ji.eval(pb, pa) * Poly::constant(base.vars, e);
                    ModuleElement defect = lhs - rhs;
                    if (!defect.is_zero()) {
                        res.ok = false;
                        res.violation = "graded commutativity (" + sign_convention_name(conv) +
                                        ") violated at degrees (" + std::to_string(i) + "," +
                                        std::to_string(j) + "), basis (" +
                                        components[i - 1].basis_name(a) + "," +
                                        components[j - 1].basis_name(b) + ")";
                        res.defect = defect.to_string();
                        return res;
                    }
                }
        }

    res.ok = true;
    return res;
}

NoleAlgebra build_nole(BaseAlgebra base, std::vector<FreeGradedModule> components,
                       std::map<std::pair<int, int>, BilinearMap> betas, SignConvention conv) {
    NoleCheckResult chk = check_nole_data(base, components, betas, conv);
    if (!chk.ok) throw validation_error(chk.violation, chk.defect);
    NoleAlgebra alg;
    alg.base_ = base;
    alg.betas_ = effective_betas(base, components, betas, conv);
    alg.components_ = std::move(components);
    alg.conv_ = conv;
    return alg;
}

NoleAlgebra build_diole(const BaseAlgebra& A, const FreeGradedModule& P, SignConvention conv) {
    return build_nole(A, {P}, {}, conv);
}

NoleAlgebra build_triole(const BaseAlgebra& A, const FreeGradedModule& P,
                         const FreeGradedModule& Q, const BilinearMap& g, SignConvention conv) {
    std::map<std::pair<int, int>, BilinearMap> betas;
    betas.emplace(std::make_pair(1, 1), g);
    return build_nole(A, {P, Q}, std::move(betas), conv);
}

RegularityResult is_regular(const NoleAlgebra& triole) {
    RegularityResult res;
    if (triole.n() != 2) throw structural_error("is_regular expects a triole");
    const FreeGradedModule& P = triole.component(1);
    const FreeGradedModule& Q = triole.component(2);
    const BilinearMap& g = triole.beta(1, 1);
    size_t rP = P.rank(), rQ = Q.rank();
    if (rP != rP * rQ) {
        res.regular = false;
        res.reason = "adjoint matrix is " + std::to_string(rP * rQ) + "x" + std::to_string(rP) +
                     ", not square";
        return res;
    }
    // rQ == 1 here; adjoint column i holds the coordinates of g(e_i, -).
    PolyMatrix G(P.base().vars, rP, rP);
    for (size_t i = 0; i < rP; ++i)
        for (size_t a = 0; a < rP; ++a) G.at(a, i) = g.value(i, a).coords[0];
    Poly d = G.det();
    if (d.is_constant() && !d.is_zero()) {
        res.regular = true;
        res.reason = "adjoint determinant = " + d.to_string();
    } else {
        res.regular = false;
        res.reason = "adjoint determinant = " + d.to_string() +
                     (d.is_zero() ? " (zero)" : " (not a unit in the polynomial ring)");
    }
    return res;
}

GradedElement GradedElement::scalar(std::shared_ptr<const NoleAlgebra> alg, const Poly& a) {
    GradedElement e(alg);
    if (!a.is_zero()) e.parts_.emplace(0, ModuleElement(unit_module(alg->base()), {a}));
    return e;
}

GradedElement GradedElement::part(std::shared_ptr<const NoleAlgebra> alg, int degree,
                                  ModuleElement v) {
    GradedElement e(alg);
    if (v.mod != alg->component_or_unit(degree))
        throw structural_error("graded element part lives in the wrong component");
    if (!v.is_zero()) e.parts_.emplace(degree, std::move(v));
    return e;
}

const NoleAlgebra& GradedElement::algebra() const {
    if (!alg_) throw structural_error("graded element without an algebra");
    return *alg_;
}

ModuleElement GradedElement::component(int degree) const {
    auto it = parts_.find(degree);
    if (it != parts_.end()) return it->second;
    return ModuleElement(algebra().component_or_unit(degree));
}

void GradedElement::set_component(int degree, ModuleElement v) {
    if (v.mod != algebra().component_or_unit(degree))
        throw structural_error("graded element part lives in the wrong component");
    if (v.is_zero())
        parts_.erase(degree);
    else
        parts_[degree] = std::move(v);
}

bool GradedElement::is_zero() const { return parts_.empty(); }

GradedElement GradedElement::operator+(const GradedElement& o) const {
    if (algebra() != o.algebra()) throw structural_error("adding elements of different algebras");
    GradedElement r = *this;
    for (const auto& [d, v] : o.parts_) r.set_component(d, r.component(d) + v);
    return r;
}

GradedElement GradedElement::operator-(const GradedElement& o) const {
    if (algebra() != o.algebra())
        throw structural_error("subtracting elements of different algebras");
    GradedElement r = *this;
    for (const auto& [d, v] : o.parts_) r.set_component(d, r.component(d) - v);
    return r;
}

GradedElement GradedElement::operator*(const GradedElement& o) const {
    const NoleAlgebra& alg = algebra();
    if (alg != o.algebra()) throw structural_error("multiplying elements of different algebras");
    GradedElement r(alg_);
    for (const auto& [i, u] : parts_)
        for (const auto& [j, v] : o.parts_) {
            int k = i + j;
            if (k > alg.n()) continue; // truncation
            ModuleElement w(alg.component_or_unit(k));
            if (i == 0)
                w = v * u.coords[0];
            else if (j == 0)
                w = u * v.coords[0];
            else
                w = alg.beta(i, j).eval(u, v);
            r.set_component(k, r.component(k) + w);
        }
    return r;
}

bool GradedElement::operator==(const GradedElement& o) const {
    return algebra() == o.algebra() && parts_ == o.parts_;
}

std::string GradedElement::to_string() const {
    if (parts_.empty()) return "0";
    std::string out;
    for (const auto& [d, v] : parts_) {
        std::string piece = d == 0 ? v.coords[0].to_string() : v.to_string();
        if (parts_.size() > 1 && piece.find(" + ") != std::string::npos)
            piece = "(" + piece + ")";
        if (!out.empty()) out += " + ";
        out += piece;
    }
    return out;
}

const FreeGradedModule& TruncatedModule::component(int j) const {
    if (j < 0 || j > top())
        throw structural_error("truncated module has no component " + std::to_string(j));
    return comps_[j];
}

std::optional<BilinearMap> TruncatedModule::action(int k, int j) const {
    auto it = actions_.find({k, j});
    if (it == actions_.end()) return std::nullopt;
    return it->second;
}

TruncatedCheckResult check_truncated_data(
    const NoleAlgebra& alg, const std::vector<FreeGradedModule>& comps,
    const std::map<std::pair<int, int>, BilinearMap>& actions) {
    int n = alg.n();
    if (static_cast<int>(comps.size()) != n + 1)
        throw structural_error("truncated module over an " + std::to_string(n) +
                               "-ole needs components W_0..W_" + std::to_string(n));
    for (int j = 0; j <= n; ++j) {
        if (comps[j].base() != alg.base())
            throw structural_error("truncated component over a different base algebra");
        if (comps[j].degree() != j)
            throw structural_error("truncated component W_" + std::to_string(j) +
                                   " carries grading label " + std::to_string(comps[j].degree()));
    }
    for (const auto& [key, lam] : actions) {
        auto [k, j] = key;
        if (k < 1 || j < 0 || k + j > n)
            throw structural_error("action lambda(" + std::to_string(k) + "," + std::to_string(j) +
                                   ") out of range");
        if (lam.left() != alg.component(k) || lam.right() != comps[j] ||
            lam.target() != comps[k + j])
            throw structural_error("action lambda(" + std::to_string(k) + "," +
                                   std::to_string(j) + ") has mismatched modules");
    }

    TruncatedCheckResult res;
    auto act = [&](int k, int j) -> const BilinearMap* {
        auto it = actions.find({k, j});
        return it == actions.end() ? nullptr : &it->second;
    };
    // lambda_i(n_i, lambda_j(n_j, w)) = lambda_{i+j}(beta(i,j)(n_i,n_j), w);
    // A-trilinear in all three slots, so basis triples decide it.
    for (int i = 1; i <= n; ++i)
        for (int j = 1; i + j <= n; ++j)
            for (int k = 0; i + j + k <= n; ++k) {
                const BilinearMap* inner = act(j, k);
                const BilinearMap* outer = act(i, j + k);
                const BilinearMap* joined = act(i + j, k);
                const BilinearMap& prod = alg.beta(i, j);
                for (size_t a = 0; a < alg.component(i).rank(); ++a)
                    for (size_t b = 0; b < alg.component(j).rank(); ++b)
                        for (size_t c = 0; c < comps[k].rank(); ++c) {
                            ModuleElement ni = ModuleElement::basis(alg.component(i), a);
                            ModuleElement nj = ModuleElement::basis(alg.component(j), b);
                            ModuleElement w = ModuleElement::basis(comps[k], c);
                            ModuleElement lhs(comps[i + j + k]);
                            if (inner && outer) lhs = outer->eval(ni, inner->eval(nj, w));
                            ModuleElement rhs(comps[i + j + k]);
                            if (joined) rhs = joined->eval(prod.eval(ni, nj), w);
                            ModuleElement defect = lhs - rhs;
                            if (!defect.is_zero()) {
                                res.ok = false;
                                res.violation =
                                    "action compatibility violated at (i,j,k) = (" +
                                    std::to_string(i) + "," + std::to_string(j) + "," +
                                    std::to_string(k) + "), basis (" +
                                    alg.component(i).basis_name(a) + "," +
                                    alg.component(j).basis_name(b) + "," +
                                    comps[k].basis_name(c) + ")";
                                res.defect = defect.to_string();
                                return res;
                            }
                        }
            }
    res.ok = true;
    return res;
}

TruncatedModule build_truncated(std::shared_ptr<const NoleAlgebra> alg,
                                std::vector<FreeGradedModule> comps,
                                std::map<std::pair<int, int>, BilinearMap> actions) {
    TruncatedCheckResult chk = check_truncated_data(*alg, comps, actions);
    if (!chk.ok) throw validation_error(chk.violation, chk.defect);
    TruncatedModule w;
    w.alg_ = std::move(alg);
    w.comps_ = std::move(comps);
    w.actions_ = std::move(actions);
    return w;
}

TruncatedModule trivial_diole_module(std::shared_ptr<const NoleAlgebra> diole) {
    if (diole->n() != 1) throw structural_error("trivial diole module expects a diole");
    const BaseAlgebra& A = diole->base();
    const FreeGradedModule& P = diole->component(1);
    FreeGradedModule W0 = unit_module(A);
    BilinearMap lam(P, W0, P);
    for (size_t i = 0; i < P.rank(); ++i) lam.value(i, 0) = ModuleElement::basis(P, i);
    std::map<std::pair<int, int>, BilinearMap> actions;
    actions.emplace(std::make_pair(1, 0), std::move(lam));
    return build_truncated(std::move(diole), {W0, P}, std::move(actions));
}

} // namespace gradcalc
