#include "gradcalc/connection.hpp"

namespace gradcalc {

namespace {

// I_pre (x) M (x) I_post for one tensor slot of the flattened module.
PolyMatrix slot_matrix(const std::vector<size_t>& dims, size_t slot, const PolyMatrix& M) {
    size_t pre = 1, post = 1;
    for (size_t s = 0; s < slot; ++s) pre *= dims[s];
    for (size_t s = slot + 1; s < dims.size(); ++s) post *= dims[s];
    PolyMatrix out = PolyMatrix::identity(M.vars(), pre).kronecker(M);
    return out.kronecker(PolyMatrix::identity(M.vars(), post));
}

void require_connection_on(const Connection& c, const FreeGradedModule& m, const char* who) {
    if (c.module != m)
        throw structural_error(std::string(who) + " is a connection on the wrong module");
}

} // namespace

std::string Connection::to_string() const {
    std::string out;
    for (size_t i = 0; i < christoffels.size(); ++i) {
        if (!out.empty()) out += "\n";
        out += "Gamma[" + base().vars.name(i) + "] = " + christoffels[i].to_string();
    }
    return out;
}

Connection make_connection(FreeGradedModule P, std::vector<PolyMatrix> christoffels) {
    if (christoffels.size() != P.base().nvars())
        throw structural_error("need one Christoffel matrix per base variable, got " +
                               std::to_string(christoffels.size()));
    for (const PolyMatrix& g : christoffels) {
        if (g.rows() != P.rank() || g.cols() != P.rank())
            throw structural_error("Christoffel matrix must be square of the module rank");
        if (g.vars() != P.base().vars)
            throw structural_error("Christoffel matrix over the wrong variable list");
    }
    return Connection{std::move(P), std::move(christoffels)};
}

Connection trivial_connection(const FreeGradedModule& P) {
    std::vector<PolyMatrix> gs(P.base().nvars(),
                               PolyMatrix::zero(P.base().vars, P.rank(), P.rank()));
    return Connection{P, std::move(gs)};
}

OperatorExpr covariant_derivative(const Connection& c, size_t i) {
    if (i >= c.christoffels.size()) throw structural_error("no such base variable");
    return OperatorExpr::partial(c.module, i) +
           OperatorExpr::from_matrix(c.module, c.module, c.christoffels[i]);
}

OperatorExpr covariant_derivative(const Connection& c, const std::vector<Poly>& coeffs) {
    if (coeffs.size() != c.christoffels.size())
        throw structural_error("direction field needs one coefficient per variable");
    OperatorExpr out = OperatorExpr::zero(c.module, c.module);
    for (size_t i = 0; i < coeffs.size(); ++i)
        out = out + covariant_derivative(c, i).scaled(coeffs[i]);
    return out;
}

bool CurvatureTensor::is_flat() const {
    for (const auto& [ij, R] : components)
        if (!R.is_zero()) return false;
    return true;
}

const PolyMatrix& CurvatureTensor::at(size_t i, size_t j) const {
    auto it = components.find({i, j});
    if (it == components.end()) throw structural_error("curvature component needs i < j");
    return it->second;
}

std::string CurvatureTensor::to_string() const {
    std::string out;
    for (const auto& [ij, R] : components) {
        if (!out.empty()) out += "\n";
        out += "R[" + module.base().vars.name(ij.first) + "," +
               module.base().vars.name(ij.second) + "] = " + R.to_string();
    }
    return out;
}

CurvatureTensor curvature(const Connection& c) {
    CurvatureTensor R;
    R.module = c.module;
    size_t n = c.christoffels.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const PolyMatrix& Gi = c.christoffels[i];
            const PolyMatrix& Gj = c.christoffels[j];
            R.components.emplace(std::make_pair(i, j),
                                 Gj.partial(i) - Gi.partial(j) + Gi * Gj - Gj * Gi);
        }
    return R;
}

Connection dual_connection(const Connection& c) {
    std::vector<PolyMatrix> gs;
    for (const PolyMatrix& g : c.christoffels) gs.push_back(-g.transpose());
    return Connection{dual_module(c.module), std::move(gs)};
}

Connection tensor_connection(const Connection& a, const Connection& b) {
    if (a.base() != b.base()) throw structural_error("connections over different base algebras");
    std::vector<PolyMatrix> gs;
    PolyMatrix Ia = PolyMatrix::identity(a.base().vars, a.module.rank());
    PolyMatrix Ib = PolyMatrix::identity(b.base().vars, b.module.rank());
    for (size_t i = 0; i < a.christoffels.size(); ++i)
        gs.push_back(a.christoffels[i].kronecker(Ib) + Ia.kronecker(b.christoffels[i]));
    return Connection{tensor_module(a.module, b.module), std::move(gs)};
}

Connection hom_connection(const Connection& on_P, const Connection& on_Q) {
    Connection h = tensor_connection(dual_connection(on_P), on_Q);
    h.module = hom_module(on_P.module, on_Q.module);
    return h;
}

Connection bil_connection(const Connection& on_P, const Connection& on_Q) {
    Connection b = hom_connection(tensor_connection(on_P, on_P), on_Q);
    b.module = bil_module(on_P.module, on_Q.module);
    return b;
}

Connection typed_connection(const TypeSignature& sig, const Connection& on_P,
                            const std::optional<Connection>& on_Q) {
    if ((sig.r > 0 || sig.s > 0) && !on_Q)
        throw structural_error("type signature uses Q-slots but no connection on Q given");
    const BaseAlgebra& A = on_P.base();
    if (on_Q && on_Q->base() != A)
        throw structural_error("connections over different base algebras");
    FreeGradedModule carrier =
        typed_module(sig, on_P.module,
                     on_Q ? std::optional<FreeGradedModule>(on_Q->module) : std::nullopt);
    std::vector<SlotInfo> slots = slots_of(sig);
    std::vector<size_t> dims =
        slot_dims(sig, on_P.module.rank(), on_Q ? on_Q->module.rank() : 0);
    std::vector<PolyMatrix> gs;
    for (size_t i = 0; i < A.nvars(); ++i) {
        PolyMatrix G = PolyMatrix::zero(A.vars, carrier.rank(), carrier.rank());
        for (size_t s = 0; s < slots.size(); ++s) {
            const PolyMatrix& base_G =
                slots[s].on_P ? on_P.christoffels[i] : on_Q->christoffels[i];
            PolyMatrix piece = slots[s].covariant ? base_G : -base_G.transpose();
            G = G + slot_matrix(dims, s, piece);
        }
        gs.push_back(G);
    }
    return Connection{carrier, std::move(gs)};
}

std::string GaugeCheckResult::defect_string() const {
    std::string out;
    for (const auto& [var, d] : defects) {
        if (d.is_zero()) continue;
        if (!out.empty()) out += "; ";
        out += "nabla[" + var + "](Xi) = " + d.to_string();
    }
    return out.empty() ? "0" : out;
}

GaugeCheckResult check_gauge_structure(const Connection& nabla,
                                       const std::optional<Connection>& box,
                                       const InnerStructureSpec& Xi) {
    require_connection_on(nabla, Xi.P, "nabla");
    if ((Xi.sig.r > 0 || Xi.sig.s > 0)) {
        if (!box) throw structural_error("inner structure uses Q-slots, connection on Q needed");
        require_connection_on(*box, *Xi.Q, "box");
    }
    Connection ind = typed_connection(Xi.sig, nabla, box);
    GaugeCheckResult res;
    res.ok = true;
    for (size_t i = 0; i < nabla.base().nvars(); ++i) {
        ModuleElement d = covariant_derivative(ind, i).eval(
            ModuleElement(ind.module, Xi.tensor.coords));
        if (!d.is_zero()) res.ok = false;
        res.defects.emplace_back(nabla.base().vars.name(i),
                                 ModuleElement(Xi.carrier, d.coords));
    }
    return res;
}

OperatorExpr covariant_differential(const Connection& c) {
    const BaseAlgebra& A = c.base();
    UniversalD ud = universal_d(A);
    FreeGradedModule target = tensor_module(ud.omega1, c.module);
    size_t rP = c.module.rank(), n = A.nvars();
    OperatorExpr d(c.module, target);
    for (size_t i = 0; i < n; ++i) {
        PolyMatrix first(A.vars, target.rank(), rP);
        for (size_t j = 0; j < rP; ++j) first.at(i * rP + j, j) = A.one();
        Monomial alpha(n, 0);
        alpha[i] = 1;
        d.add_term(alpha, first);

        PolyMatrix zero_order(A.vars, target.rank(), rP);
        for (size_t r = 0; r < rP; ++r)
            for (size_t cidx = 0; cidx < rP; ++cidx)
                zero_order.at(i * rP + r, cidx) = c.christoffels[i].at(r, cidx);
        if (!zero_order.is_zero()) d.add_term(Monomial(n, 0), zero_order);
    }
    return d;
}

std::vector<OperatorExpr> connection_along_map(const Connection& c, const ModuleHom& phibar) {
    if (phibar.source != c.module)
        throw structural_error("map must start on the connection's module");
    OperatorExpr post =
        OperatorExpr::from_matrix(phibar.source, phibar.target, phibar.matrix);
    std::vector<OperatorExpr> out;
    for (size_t i = 0; i < c.base().nvars(); ++i)
        out.push_back(post.compose(covariant_derivative(c, i)));
    return out;
}

GaugeEquivalenceResult gauge_equivalent(const Connection& a, const Connection& b,
                                        const ModuleHom& phi) {
    if (a.module != b.module) throw structural_error("connections live on different modules");
    if (phi.source != a.module || phi.target != a.module)
        throw structural_error("gauge map must be an endomorphism of the module");
    PolyMatrix inv = phi.matrix.inverse(); // throws structural_error when not a unit
    GaugeEquivalenceResult res;
    res.ok = true;
    for (size_t i = 0; i < a.christoffels.size(); ++i) {
        PolyMatrix expected =
            phi.matrix * a.christoffels[i] * inv - phi.matrix.partial(i) * inv;
        PolyMatrix defect = b.christoffels[i] - expected;
        if (!defect.is_zero()) {
            res.ok = false;
            res.var_index = i;
            res.defect = defect;
            return res;
        }
    }
    res.defect = PolyMatrix::zero(a.base().vars, a.module.rank(), a.module.rank());
    return res;
}

bool xi_gauge_orbit_check(const Connection& a, const Connection& b, const ModuleHom& phi,
                          const InnerStructureSpec& Xi) {
    if (!gauge_equivalent(a, b, phi).ok) return false;
    if (!in_symmetry_group(phi, Xi)) return false;
    return phi.matrix.det() == Poly::constant(a.base().vars, 1);
}

Connection affine_combination(const Connection& a, const Connection& b, const Rational& t) {
    if (a.module != b.module) throw structural_error("connections live on different modules");
    std::vector<PolyMatrix> gs;
    for (size_t i = 0; i < a.christoffels.size(); ++i)
        gs.push_back(a.christoffels[i] * t + b.christoffels[i] * (Rational(1) - t));
    return Connection{a.module, std::move(gs)};
}

} // namespace gradcalc
