#include "gradcalc/module.hpp"

#include <set>

namespace gradcalc {

FreeGradedModule::FreeGradedModule(BaseAlgebra base, int degree, std::vector<std::string> basis)
    : base_(std::move(base)), degree_(degree), basis_(std::move(basis)) {
    std::set<std::string> seen;
    for (const auto& b : basis_) {
        if (b.empty()) throw structural_error("empty basis name");
        if (!seen.insert(b).second) throw structural_error("duplicate basis name '" + b + "'");
    }
}

FreeGradedModule::FreeGradedModule(BaseAlgebra base, int degree, size_t rank,
                                   const std::string& prefix)
    : base_(std::move(base)), degree_(degree) {
    for (size_t i = 1; i <= rank; ++i) basis_.push_back(prefix + std::to_string(i));
}

int FreeGradedModule::basis_index(const std::string& name) const {
    for (size_t i = 0; i < basis_.size(); ++i)
        if (basis_[i] == name) return static_cast<int>(i);
    return -1;
}

FreeGradedModule unit_module(const BaseAlgebra& A) {
    return FreeGradedModule(A, 0, {"1"});
}

ModuleElement::ModuleElement(const FreeGradedModule& m)
    : mod(m), coords(m.rank(), Poly(m.base().vars)) {}

ModuleElement::ModuleElement(FreeGradedModule m, std::vector<Poly> c)
    : mod(std::move(m)), coords(std::move(c)) {
    if (coords.size() != mod.rank())
        throw structural_error("element coordinate count does not match module rank");
}

ModuleElement ModuleElement::basis(const FreeGradedModule& m, size_t i) {
    ModuleElement e(m);
    if (i >= m.rank()) throw structural_error("basis index out of range");
    e.coords[i] = Poly::constant(m.base().vars, 1);
    return e;
}

bool ModuleElement::is_zero() const {
    for (const auto& c : coords)
        if (!c.is_zero()) return false;
    return true;
}

ModuleElement ModuleElement::operator+(const ModuleElement& o) const {
    if (mod != o.mod) throw structural_error("adding elements of different modules");
    ModuleElement r = *this;
    for (size_t i = 0; i < coords.size(); ++i) r.coords[i] += o.coords[i];
    return r;
}

ModuleElement ModuleElement::operator-(const ModuleElement& o) const {
    if (mod != o.mod) throw structural_error("subtracting elements of different modules");
    ModuleElement r = *this;
    for (size_t i = 0; i < coords.size(); ++i) r.coords[i] -= o.coords[i];
    return r;
}

ModuleElement ModuleElement::operator-() const {
    ModuleElement r = *this;
    for (auto& c : r.coords) c = -c;
    return r;
}

ModuleElement ModuleElement::operator*(const Poly& a) const {
    ModuleElement r = *this;
    for (auto& c : r.coords) c *= a;
    return r;
}

bool ModuleElement::operator==(const ModuleElement& o) const {
    return mod == o.mod && coords == o.coords;
}

std::string ModuleElement::to_string() const {
    std::string out;
    for (size_t i = 0; i < coords.size(); ++i) {
        const Poly& c = coords[i];
        if (c.is_zero()) continue;
        std::string piece;
        std::string cs = c.to_string();
        if (cs == "1")
            piece = mod.basis_name(i);
        else if (cs == "-1")
            piece = "-" + mod.basis_name(i);
        else if (c.terms().size() == 1)
            piece = cs + "*" + mod.basis_name(i);
        else
            piece = "(" + cs + ")*" + mod.basis_name(i);
        if (out.empty())
            out = piece;
        else if (piece[0] == '-')
            out += " - " + piece.substr(1);
        else
            out += " + " + piece;
    }
    return out.empty() ? "0" : out;
}

ModuleHom::ModuleHom(FreeGradedModule src, FreeGradedModule tgt, PolyMatrix m)
    : source(std::move(src)), target(std::move(tgt)), matrix(std::move(m)) {
    if (source.base() != target.base())
        throw structural_error("module hom across different base algebras");
    if (matrix.rows() != target.rank() || matrix.cols() != source.rank())
        throw structural_error("module hom matrix shape mismatch");
    if (matrix.vars() != source.base().vars)
        throw structural_error("module hom matrix over wrong variable list");
}

ModuleHom ModuleHom::identity(const FreeGradedModule& m) {
    return ModuleHom(m, m, PolyMatrix::identity(m.base().vars, m.rank()));
}

ModuleHom ModuleHom::zero(const FreeGradedModule& src, const FreeGradedModule& tgt) {
    return ModuleHom(src, tgt, PolyMatrix::zero(src.base().vars, tgt.rank(), src.rank()));
}

ModuleElement ModuleHom::apply(const ModuleElement& v) const {
    if (v.mod != source) throw structural_error("hom applied to element of wrong module");
    return ModuleElement(target, matrix.apply(v.coords));
}

ModuleHom ModuleHom::compose(const ModuleHom& inner) const {
    if (inner.target != source) throw structural_error("hom composition type mismatch");
    return ModuleHom(inner.source, target, matrix * inner.matrix);
}

ModuleHom ModuleHom::inverse() const {
    if (source.rank() != target.rank()) throw structural_error("inverse of non-square hom");
    return ModuleHom(target, source, matrix.inverse());
}

ModuleHom ModuleHom::transpose_as_dual() const {
    return ModuleHom(dual_module(target), dual_module(source), matrix.transpose());
}

BilinearMap::BilinearMap(FreeGradedModule left, FreeGradedModule right, FreeGradedModule target)
    : left_(std::move(left)), right_(std::move(right)), target_(std::move(target)) {
    if (left_.base() != right_.base() || left_.base() != target_.base())
        throw structural_error("bilinear map across different base algebras");
    values_.assign(left_.rank(),
                   std::vector<ModuleElement>(right_.rank(), ModuleElement(target_)));
}

ModuleElement& BilinearMap::value(size_t i, size_t j) {
    if (i >= left_.rank() || j >= right_.rank())
        throw structural_error("bilinear table index out of range");
    return values_[i][j];
}

const ModuleElement& BilinearMap::value(size_t i, size_t j) const {
    if (i >= left_.rank() || j >= right_.rank())
        throw structural_error("bilinear table index out of range");
    return values_[i][j];
}

ModuleElement BilinearMap::eval(const ModuleElement& u, const ModuleElement& v) const {
    if (u.mod != left_) throw structural_error("bilinear eval: left argument in wrong module");
    if (v.mod != right_) throw structural_error("bilinear eval: right argument in wrong module");
    ModuleElement acc(target_);
    for (size_t i = 0; i < left_.rank(); ++i) {
        if (u.coords[i].is_zero()) continue;
        for (size_t j = 0; j < right_.rank(); ++j) {
            if (v.coords[j].is_zero()) continue;
            acc = acc + values_[i][j] * (u.coords[i] * v.coords[j]);
        }
    }
    return acc;
}

BilinearMap BilinearMap::flipped() const {
    BilinearMap f(right_, left_, target_);
    for (size_t i = 0; i < left_.rank(); ++i)
        for (size_t j = 0; j < right_.rank(); ++j) f.value(j, i) = values_[i][j];
    return f;
}

bool BilinearMap::is_symmetric() const {
    if (left_ != right_) return false;
    for (size_t i = 0; i < left_.rank(); ++i)
        for (size_t j = i + 1; j < right_.rank(); ++j)
            if (values_[i][j] != values_[j][i]) return false;
    return true;
}

bool BilinearMap::is_antisymmetric() const {
    if (left_ != right_) return false;
    for (size_t i = 0; i < left_.rank(); ++i)
        for (size_t j = i; j < right_.rank(); ++j)
            if (values_[i][j] != -values_[j][i]) return false;
    return true;
}

bool BilinearMap::is_zero() const {
    for (const auto& row : values_)
        for (const auto& v : row)
            if (!v.is_zero()) return false;
    return true;
}

bool BilinearMap::operator==(const BilinearMap& o) const {
    return left_ == o.left_ && right_ == o.right_ && target_ == o.target_ &&
           values_ == o.values_;
}

std::string BilinearMap::table_string(const std::string& name) const {
    std::string out;
    for (size_t i = 0; i < left_.rank(); ++i)
        for (size_t j = 0; j < right_.rank(); ++j) {
            if (!out.empty()) out += "; ";
            out += name + "(" + left_.basis_name(i) + "," + right_.basis_name(j) +
                   ") = " + values_[i][j].to_string();
        }
    return out;
}

namespace {

std::string dual_name(const std::string& n) {
    // Composite names get parenthesized so the star binds to the whole thing.
    if (n.find("(x)") != std::string::npos || n.find('*') != std::string::npos)
        return "(" + n + ")*";
    return n + "*";
}

} // namespace

FreeGradedModule dual_module(const FreeGradedModule& P) {
    std::vector<std::string> names;
    for (const auto& n : P.basis()) names.push_back(dual_name(n));
    return FreeGradedModule(P.base(), -P.degree(), std::move(names));
}

FreeGradedModule tensor_module(const FreeGradedModule& P, const FreeGradedModule& Q) {
    if (P.base() != Q.base()) throw structural_error("tensor across different base algebras");
    std::vector<std::string> names;
    for (const auto& a : P.basis())
        for (const auto& b : Q.basis()) names.push_back(a + "(x)" + b);
    return FreeGradedModule(P.base(), P.degree() + Q.degree(), std::move(names));
}

FreeGradedModule hom_module(const FreeGradedModule& P, const FreeGradedModule& Q) {
    return tensor_module(dual_module(P), Q);
}

FreeGradedModule bil_module(const FreeGradedModule& P, const FreeGradedModule& Q) {
    return hom_module(tensor_module(P, P), Q);
}

ModuleElement hom_to_element(const ModuleHom& h) {
    FreeGradedModule H = hom_module(h.source, h.target);
    ModuleElement e(H);
    size_t rQ = h.target.rank();
    for (size_t a = 0; a < h.source.rank(); ++a)
        for (size_t b = 0; b < rQ; ++b) e.coords[a * rQ + b] = h.matrix.at(b, a);
    return e;
}

ModuleHom element_to_hom(const ModuleElement& e, const FreeGradedModule& P,
                         const FreeGradedModule& Q) {
    if (e.mod != hom_module(P, Q))
        throw structural_error("element is not in hom(P,Q)");
    PolyMatrix m(P.base().vars, Q.rank(), P.rank());
    size_t rQ = Q.rank();
    for (size_t a = 0; a < P.rank(); ++a)
        for (size_t b = 0; b < rQ; ++b) m.at(b, a) = e.coords[a * rQ + b];
    return ModuleHom(P, Q, m);
}

ModuleElement bil_to_element(const BilinearMap& g) {
    if (g.left() != g.right())
        throw structural_error("bil element expects equal left/right modules");
    FreeGradedModule B = bil_module(g.left(), g.target());
    ModuleElement e(B);
    size_t rP = g.left().rank(), rQ = g.target().rank();
    for (size_t i = 0; i < rP; ++i)
        for (size_t j = 0; j < rP; ++j)
            for (size_t k = 0; k < rQ; ++k)
                e.coords[(i * rP + j) * rQ + k] = g.value(i, j).coords[k];
    return e;
}

BilinearMap element_to_bil(const ModuleElement& e, const FreeGradedModule& P,
                           const FreeGradedModule& Q) {
    if (e.mod != bil_module(P, Q)) throw structural_error("element is not in bil(P;Q)");
    BilinearMap g(P, P, Q);
    size_t rP = P.rank(), rQ = Q.rank();
    for (size_t i = 0; i < rP; ++i)
        for (size_t j = 0; j < rP; ++j)
            for (size_t k = 0; k < rQ; ++k)
                g.value(i, j).coords[k] = e.coords[(i * rP + j) * rQ + k];
    return g;
}

Poly dual_pairing(const ModuleElement& theta, const ModuleElement& p) {
    if (theta.mod != dual_module(p.mod))
        throw structural_error("pairing expects an element of the dual module");
    Poly acc(p.mod.base().vars);
    for (size_t i = 0; i < p.mod.rank(); ++i) acc += theta.coords[i] * p.coords[i];
    return acc;
}

std::string TypeSignature::to_string() const {
    std::string out = "(" + std::to_string(p) + "," + std::to_string(q) + ")";
    if (r != 0 || s != 0) out += "x(" + std::to_string(r) + "," + std::to_string(s) + ")";
    return out;
}

std::vector<SlotInfo> slots_of(const TypeSignature& t) {
    if (t.p < 0 || t.q < 0 || t.r < 0 || t.s < 0)
        throw structural_error("negative arity in type signature");
    std::vector<SlotInfo> out;
    for (int i = 0; i < t.p; ++i) out.push_back({true, true});
    for (int i = 0; i < t.q; ++i) out.push_back({true, false});
    for (int i = 0; i < t.r; ++i) out.push_back({false, true});
    for (int i = 0; i < t.s; ++i) out.push_back({false, false});
    return out;
}

FreeGradedModule typed_module(const TypeSignature& t, const FreeGradedModule& P,
                              const std::optional<FreeGradedModule>& Q) {
    if ((t.r > 0 || t.s > 0) && !Q)
        throw structural_error("type signature uses Q slots but no Q module given");
    auto slots = slots_of(t);
    if (slots.empty()) return unit_module(P.base());
    auto slot_mod = [&](const SlotInfo& s) {
        const FreeGradedModule& M = s.on_P ? P : *Q;
        return s.covariant ? M : dual_module(M);
    };
    FreeGradedModule acc = slot_mod(slots[0]);
    for (size_t i = 1; i < slots.size(); ++i) acc = tensor_module(acc, slot_mod(slots[i]));
    return acc;
}

std::vector<size_t> slot_dims(const TypeSignature& t, size_t rankP, size_t rankQ) {
    std::vector<size_t> dims;
    for (const auto& s : slots_of(t)) dims.push_back(s.on_P ? rankP : rankQ);
    return dims;
}

std::vector<Poly> slot_apply(const std::vector<size_t>& dims, size_t slot, const PolyMatrix& M,
                             const std::vector<Poly>& v) {
    if (slot >= dims.size()) throw structural_error("slot index out of range");
    size_t total = 1;
    for (size_t d : dims) total *= d;
    if (v.size() != total) throw structural_error("slot_apply: vector length mismatch");
    size_t d = dims[slot];
    if (M.rows() != d || M.cols() != d) throw structural_error("slot_apply: matrix size mismatch");

    size_t stride = 1;
    for (size_t k = slot + 1; k < dims.size(); ++k) stride *= dims[k];
    size_t block = stride * d;

    std::vector<Poly> out(total, Poly(M.vars()));
    for (size_t base = 0; base < total; base += block)
        for (size_t off = 0; off < stride; ++off)
            for (size_t a = 0; a < d; ++a) {
                Poly acc(M.vars());
                for (size_t b = 0; b < d; ++b) {
                    const Poly& me = M.at(a, b);
                    if (!me.is_zero()) acc += me * v[base + b * stride + off];
                }
                out[base + a * stride + off] = acc;
            }
    return out;
}

} // namespace gradcalc
