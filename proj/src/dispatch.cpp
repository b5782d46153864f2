#include "gradcalc/dispatch.hpp"

#include <charconv>
#include <stdexcept>

#include "gradcalc/derivation.hpp"
#include "gradcalc/triolecalc.hpp"

namespace gradcalc {

namespace {

[[noreturn]] void usage(const std::string& u) {
    throw std::runtime_error("usage: " + u);
}

const Entry& need(const Workspace& ws, const std::string& name) {
    const Entry* e = ws.find(name);
    if (!e) throw std::runtime_error("unknown name '" + name + "'");
    return *e;
}

const OperatorExpr& as_operator(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::op) throw std::runtime_error("'" + n + "' is not an operator");
    return std::get<OperatorExpr>(e.value);
}

const Connection& as_connection(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::connection)
        throw std::runtime_error("'" + n + "' is not a connection");
    return std::get<Connection>(e.value);
}

const ModuleHom& as_hom(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::hom) throw std::runtime_error("'" + n + "' is not a hom");
    return std::get<ModuleHom>(e.value);
}

const BilinearMap& as_bilinear(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::bilinear)
        throw std::runtime_error("'" + n + "' is not a bilinear map");
    return std::get<BilinearMap>(e.value);
}

const std::shared_ptr<const NoleAlgebra>& as_ole(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::ole) throw std::runtime_error("'" + n + "' is not an ole algebra");
    return std::get<std::shared_ptr<const NoleAlgebra>>(e.value);
}

const TruncatedModule& as_truncated(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::truncated)
        throw std::runtime_error("'" + n + "' is not a truncated module");
    return std::get<TruncatedModule>(e.value);
}

const AlongModule& as_along(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind != EntryKind::along)
        throw std::runtime_error("'" + n + "' is not a module along a map");
    return std::get<AlongModule>(e.value);
}

// Inner-structure position: an inner name or a bilinear name (wrapped on the
// fly).
InnerStructureSpec as_inner(const Workspace& ws, const std::string& n) {
    const Entry& e = need(ws, n);
    if (e.kind == EntryKind::inner) return std::get<InnerStructureSpec>(e.value);
    if (e.kind == EntryKind::bilinear) return inner_from_bilinear(std::get<BilinearMap>(e.value));
    throw std::runtime_error("'" + n + "' is not an inner structure or bilinear map");
}

int int_arg(const std::string& tok, int lo, int hi, const std::string& what) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw std::runtime_error(what + " must be an integer, got '" + tok + "'");
    if (v < lo || v > hi)
        throw std::runtime_error(what + " out of range [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
    return v;
}

// binomial(nvars + bound, nvars): number of monomials up to total degree
// `bound`.
size_t count_monos(size_t nvars, int bound) {
    size_t num = 1, den = 1;
    for (size_t i = 1; i <= nvars; ++i) {
        num *= static_cast<size_t>(bound) + i;
        den *= i;
    }
    return num / den;
}

void guard_solver_size(size_t unknowns) {
    if (unknowns > 20000)
        throw std::runtime_error("problem size above the supported bound (" +
                                 std::to_string(unknowns) + " unknowns, limit 20000)");
}

void fill_from_certificate(const ExactnessCertificate& cert, CheckReport& rep) {
    rep.status = cert.ok() ? ReportStatus::pass : ReportStatus::inconclusive;
    rep.witnesses.push_back(cert.sequence);
    for (const auto& w : cert.witnesses) {
        std::string line = w.name + ": " + (w.ok ? "ok" : "unresolved");
        if (!w.detail.empty()) line += "; " + w.detail;
        rep.witnesses.push_back(line);
    }
    if (!cert.note.empty()) rep.witnesses.push_back(cert.note);
}

void fill_component_result(const ComponentCheckResult& r, const std::string& pass_note,
                           CheckReport& rep) {
    if (r.ok) {
        rep.status = ReportStatus::pass;
        rep.witnesses.push_back(pass_note);
        return;
    }
    rep.status = ReportStatus::fail;
    rep.witnesses.push_back(r.violation);
    if (r.defect && !r.defect->is_zero())
        rep.witnesses.push_back("defect = " + r.defect->to_string());
}

void dispatch(const Workspace& ws, const std::vector<std::string>& t, const RunOptions& opts,
              CheckReport& rep) {
    const std::string& cmd = t[0];

    if (cmd == "check-order") {
        if (t.size() != 3) usage("check-order <operator> <k>");
        const OperatorExpr& D = as_operator(ws, t[1]);
        int k = int_arg(t[2], 0, 6, "order k");
        OrderCheckResult r = check_order(D, k);
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back("syntactic order " + std::to_string(D.syntactic_order()));
            rep.witnesses.push_back("all nested deltas of length " + std::to_string(k + 1) +
                                    " vanish on generator tuples");
        } else {
            rep.status = ReportStatus::fail;
            rep.witnesses.push_back("order above " + std::to_string(k) +
                                    ": the nested delta at generator tuple " +
                                    r.witness_string() + " is nonzero");
            rep.witnesses.push_back("residual = " + r.residual.to_string());
        }
        return;
    }

    if (cmd == "check-derivation") {
        if (t.size() != 2) usage("check-derivation <operator>");
        DerivationCheckResult r = is_derivation(as_operator(ws, t[1]), opts.seed);
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back("Leibniz rule verified on the generator grid");
        } else {
            rep.status = ReportStatus::fail;
            rep.witnesses.push_back(r.reason);
        }
        return;
    }

    if (cmd == "check-nole") {
        if (t.size() != 2) usage("check-nole <ole>");
        const auto& alg = as_ole(ws, t[1]);
        std::vector<FreeGradedModule> comps;
        for (int i = 1; i <= alg->n(); ++i) comps.push_back(alg->component(i));
        std::map<std::pair<int, int>, BilinearMap> betas;
        for (int i = 1; i <= alg->n(); ++i)
            for (int j = 1; j <= alg->n(); ++j)
                if (i + j <= alg->n()) betas.emplace(std::make_pair(i, j), alg->beta(i, j));
        NoleCheckResult r = check_nole_data(alg->base(), comps, betas, alg->convention());
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back("graded product laws verified on basis tuples (n = " +
                                    std::to_string(alg->n()) + ", " +
                                    sign_convention_name(alg->convention()) + " signs)");
        } else {
            rep.status = ReportStatus::fail;
            rep.witnesses.push_back(r.violation);
            if (!r.defect.empty()) rep.witnesses.push_back("defect = " + r.defect);
        }
        return;
    }

    if (cmd == "check-truncated") {
        if (t.size() != 2) usage("check-truncated <truncated>");
        const TruncatedModule& W = as_truncated(ws, t[1]);
        const NoleAlgebra& alg = W.algebra();
        std::vector<FreeGradedModule> comps;
        for (int j = 0; j <= W.top(); ++j) comps.push_back(W.component(j));
        std::map<std::pair<int, int>, BilinearMap> actions;
        for (int k = 1; k <= alg.n(); ++k)
            for (int j = 0; j <= W.top(); ++j)
                if (auto a = W.action(k, j)) actions.emplace(std::make_pair(k, j), *a);
        TruncatedCheckResult r = check_truncated_data(alg, comps, actions);
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back("action compatibility verified on basis tuples (components 0.." +
                                    std::to_string(W.top()) + ")");
        } else {
            rep.status = ReportStatus::fail;
            rep.witnesses.push_back(r.violation);
            if (!r.defect.empty()) rep.witnesses.push_back("defect = " + r.defect);
        }
        return;
    }

    if (cmd == "decompose") {
        if (t.size() != 3 && t.size() != 4) usage("decompose <ole> <operator> [degree]");
        const auto& alg = as_ole(ws, t[1]);
        const OperatorExpr& D = as_operator(ws, t[2]);
        std::optional<int> degree;
        if (t.size() == 4) degree = int_arg(t[3], -6, 6, "degree");
        DecomposeResult r = decompose_nole_derivation(alg, D, degree, opts.seed);
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back("graded derivation of degree " +
                                    std::to_string(r.derivation.degree));
            rep.witnesses.push_back("scalar part: " + r.derivation.scalar_part.to_string());
            for (size_t i = 0; i < r.derivation.component_parts.size(); ++i)
                rep.witnesses.push_back("component part " + std::to_string(i + 1) + ": " +
                                        r.derivation.component_parts[i].to_string());
        } else {
            rep.status = ReportStatus::fail;
            rep.witnesses.push_back(r.violation);
            if (!r.defect.empty()) rep.witnesses.push_back("defect = " + r.defect);
        }
        return;
    }

    if (cmd == "curvature") {
        if (t.size() != 2) usage("curvature <connection>");
        const Connection& c = as_connection(ws, t[1]);
        CurvatureTensor R = curvature(c);
        rep.status = ReportStatus::pass;
        if (R.is_flat()) {
            rep.witnesses.push_back("flat: every R[i,j] vanishes");
        } else {
            const VarList& vars = c.base().vars;
            for (const auto& [ij, m] : R.components)
                rep.witnesses.push_back("R[" + vars.name(ij.first) + "," + vars.name(ij.second) +
                                        "] = " + m.to_string());
        }
        return;
    }

    if (cmd == "check-gauge") {
        if (t.size() != 3 && t.size() != 4)
            usage("check-gauge <connection> [<box connection>] <inner|bilinear>");
        const Connection& nabla = as_connection(ws, t[1]);
        std::optional<Connection> box;
        std::string xi_name = t[t.size() - 1];
        if (t.size() == 4) box = as_connection(ws, t[2]);
        InnerStructureSpec Xi = as_inner(ws, xi_name);
        GaugeCheckResult r = check_gauge_structure(nabla, box, Xi);
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back(
                "the induced connection kills the tensor in every coordinate direction");
        } else {
            rep.status = ReportStatus::fail;
            for (const auto& [var, defect] : r.defects)
                if (!defect.is_zero())
                    rep.witnesses.push_back("direction " + var + ": defect = " +
                                            defect.to_string());
        }
        return;
    }

    if (cmd == "check-exact-atiyah") {
        if (t.size() != 2 && t.size() != 3)
            usage("check-exact-atiyah <along> [<connection>]");
        const AlongModule& M = as_along(ws, t[1]);
        std::optional<Connection> nabla;
        if (t.size() == 3) nabla = as_connection(ws, t[2]);
        fill_from_certificate(atiyah_along_map(M, nabla, opts.seed), rep);
        return;
    }

    if (cmd == "check-exact-triolic-atiyah") {
        if (t.size() != 2 && t.size() != 4)
            usage("check-exact-triolic-atiyah <ole> [<connection P> <connection Q>]");
        const auto& alg = as_ole(ws, t[1]);
        if (alg->n() != 2) throw std::runtime_error("'" + t[1] + "' is not a triole");
        std::optional<std::pair<Connection, Connection>> pair;
        if (t.size() == 4)
            pair = std::make_pair(as_connection(ws, t[2]), as_connection(ws, t[3]));
        size_t p = alg->component(1).rank(), q = alg->component(2).rank();
        guard_solver_size((p * p + q * q) *
                          count_monos(alg->base().nvars(), opts.degree_bound));
        fill_from_certificate(triolic_atiyah(*alg, pair, opts.degree_bound, opts.seed), rep);
        return;
    }

    if (cmd == "check-triolic-der0") {
        if (t.size() != 5) usage("check-triolic-der0 <ole> <X_A> <X_P> <X_Q>");
        const auto& alg = as_ole(ws, t[1]);
        fill_component_result(
            triolic_derivation0_check(as_operator(ws, t[2]), as_operator(ws, t[3]),
                                      as_operator(ws, t[4]), *alg, opts.seed),
            "degree-0 derivation triple verified", rep);
        return;
    }

    if (cmd == "check-triolic-der1") {
        if (t.size() != 4) usage("check-triolic-der1 <ole> <X_A> <X_P>");
        const auto& alg = as_ole(ws, t[1]);
        fill_component_result(triolic_derivation1_check(as_operator(ws, t[2]),
                                                        as_operator(ws, t[3]), *alg, opts.seed),
                              "degree-1 derivation pair verified", rep);
        return;
    }

    if (cmd == "check-diffk") {
        if (t.size() == 6) {
            const auto& alg = as_ole(ws, t[1]);
            int k = int_arg(t[5], 0, 6, "order k");
            DiffkCheckResult r =
                triolic_diffk_check(as_operator(ws, t[2]), as_operator(ws, t[3]),
                                    as_operator(ws, t[4]), k, *alg, opts.strict_tuples,
                                    opts.seed);
            if (!r.precondition_ok) {
                rep.status = ReportStatus::fail;
                rep.witnesses.push_back(r.precondition_violation);
                return;
            }
            rep.status = r.ok ? ReportStatus::pass : ReportStatus::fail;
            for (const auto& rel : r.relations) {
                if (rel.ok)
                    rep.witnesses.push_back(rel.relation + ": verified");
                else
                    rep.witnesses.push_back(rel.relation + ": " + rel.witness);
            }
            return;
        }
        if (t.size() == 5) {
            const BilinearMap& g = as_bilinear(ws, t[1]);
            int k = int_arg(t[4], 0, 6, "level k");
            PairSymmetryResult r =
                diffk_symmetry_pair_check(as_operator(ws, t[2]), as_operator(ws, t[3]), k, g,
                                          opts.strict_tuples, opts.seed);
            if (r.ok) {
                rep.status = ReportStatus::pass;
                rep.witnesses.push_back("symmetry pair conditions hold at level " +
                                        std::to_string(k));
            } else {
                rep.status = ReportStatus::fail;
                rep.witnesses.push_back(r.violation);
            }
            return;
        }
        usage("check-diffk <ole> <D_A> <D_P> <D_Q> <k>  |  check-diffk <bilinear> <N_P> <N_Q> <k>");
    }

    if (cmd == "symmetry-basis") {
        if (t.size() != 3) usage("symmetry-basis <inner|bilinear> <coefficient degree bound>");
        InnerStructureSpec Xi = as_inner(ws, t[1]);
        int bound = int_arg(t[2], 0, 6, "degree bound");
        size_t p = Xi.P.rank(), q = Xi.Q ? Xi.Q->rank() : 0;
        guard_solver_size((p * p + q * q) * count_monos(Xi.base().nvars(), bound));
        std::vector<ModuleHom> basis = symmetry_algebra_basis(Xi, bound);
        rep.status = ReportStatus::pass;
        rep.witnesses.push_back("dimension " + std::to_string(basis.size()));
        for (size_t i = 0; i < basis.size(); ++i)
            rep.witnesses.push_back("generator " + std::to_string(i) + ": " +
                                    basis[i].matrix.to_string());
        return;
    }

    if (cmd == "membership") {
        if (t.size() < 3) usage("membership orthogonal|commutant|complex <args>");
        const std::string& mode = t[1];
        if (mode == "orthogonal") {
            if (t.size() != 4) usage("membership orthogonal <hom> <bilinear>");
            const ModuleHom& h = as_hom(ws, t[2]);
            const BilinearMap& b = as_bilinear(ws, t[3]);
            if (in_orthogonal_group(h, b)) {
                rep.status = ReportStatus::pass;
                rep.witnesses.push_back("the map preserves the form on every basis pair");
                return;
            }
            rep.status = ReportStatus::fail;
            for (size_t i = 0; i < b.left().rank(); ++i) {
                for (size_t j = 0; j < b.right().rank(); ++j) {
                    ModuleElement moved =
                        b.eval(h.apply(ModuleElement::basis(b.left(), i)),
                               h.apply(ModuleElement::basis(b.right(), j)));
                    if (moved != b.value(i, j)) {
                        rep.witnesses.push_back(
                            "fails at basis pair (" + b.left().basis_name(i) + ", " +
                            b.right().basis_name(j) + "): transformed value = " +
                            moved.to_string() + ", original = " + b.value(i, j).to_string());
                        return;
                    }
                }
            }
            rep.witnesses.push_back("the form moves under the map");
            return;
        }
        if (mode == "commutant") {
            if (t.size() != 4) usage("membership commutant <hom> <hom>");
            const ModuleHom& a = as_hom(ws, t[2]);
            const ModuleHom& b = as_hom(ws, t[3]);
            if (in_commutant(a, b)) {
                rep.status = ReportStatus::pass;
                rep.witnesses.push_back("the maps commute");
            } else {
                rep.status = ReportStatus::fail;
                rep.witnesses.push_back("commutator = " + lie_bracket(a, b).matrix.to_string());
            }
            return;
        }
        if (mode == "complex") {
            if (t.size() != 3) usage("membership complex <hom>");
            const ModuleHom& J = as_hom(ws, t[2]);
            if (is_complex_structure(J)) {
                rep.status = ReportStatus::pass;
                rep.witnesses.push_back("J squares to minus the identity");
            } else {
                rep.status = ReportStatus::fail;
                if (J.source == J.target)
                    rep.witnesses.push_back("J^2 = " + J.compose(J).matrix.to_string() +
                                            ", expected minus the identity");
                else
                    rep.witnesses.push_back("J is not an endomorphism");
            }
            return;
        }
        throw std::runtime_error("unknown membership mode '" + mode +
                                 "' (orthogonal, commutant, complex)");
    }

    if (cmd == "gauge-equivalent") {
        if (t.size() != 4) usage("gauge-equivalent <connection> <connection> <hom>");
        const Connection& a = as_connection(ws, t[1]);
        const Connection& b = as_connection(ws, t[2]);
        const ModuleHom& phi = as_hom(ws, t[3]);
        GaugeEquivalenceResult r = gauge_equivalent(a, b, phi);
        if (r.ok) {
            rep.status = ReportStatus::pass;
            rep.witnesses.push_back(
                "conjugation by the map carries the first connection to the second");
        } else {
            rep.status = ReportStatus::fail;
            rep.witnesses.push_back("direction " + a.base().vars.name(r.var_index) +
                                    ": defect = " + r.defect.to_string());
        }
        return;
    }

    rep.status = ReportStatus::error;
    rep.witnesses.push_back("unknown command '" + cmd + "'");
    rep.witnesses.push_back(
        "known commands: check-order, check-derivation, decompose, curvature, check-gauge, "
        "check-exact-atiyah, check-exact-triolic-atiyah, check-triolic-der0, "
        "check-triolic-der1, check-diffk, check-nole, check-truncated, symmetry-basis, "
        "membership, gauge-equivalent");
}

} // namespace

CheckReport run_command(const Workspace& ws, const Command& cmd, const RunOptions& opts) {
    CheckReport rep;
    rep.seed = opts.seed;
    std::string echo;
    for (size_t i = 0; i < cmd.tokens.size(); ++i) {
        if (i) echo += " ";
        echo += cmd.tokens[i];
    }
    rep.command = echo;
    if (cmd.tokens.empty()) {
        rep.status = ReportStatus::error;
        rep.witnesses.push_back("empty command");
        return rep;
    }
    try {
        dispatch(ws, cmd.tokens, opts, rep);
    } catch (const std::exception& e) {
        rep.status = ReportStatus::error;
        rep.witnesses.clear();
        rep.witnesses.push_back(e.what());
    }
    return rep;
}

std::vector<CheckReport> run_workspace(const Workspace& ws, const RunOptions& opts) {
    std::vector<CheckReport> out;
    for (const Command& cmd : ws.commands()) out.push_back(run_command(ws, cmd, opts));
    return out;
}

} // namespace gradcalc
