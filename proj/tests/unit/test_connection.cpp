#include <doctest.h>

#include "gradcalc/connection.hpp"
#include "gradcalc/rng.hpp"

using namespace gradcalc;

namespace {

const BaseAlgebra AXY(std::vector<std::string>{"x", "y"});
const BaseAlgebra AX(std::vector<std::string>{"x"});

Poly pxy(const std::string& s) { return Poly::parse(s, AXY.vars); }

Connection random_connection(Rng& rng, const FreeGradedModule& P, int deg = 1) {
    std::vector<PolyMatrix> gs;
    for (size_t i = 0; i < P.base().nvars(); ++i)
        gs.push_back(rng.matrix(P.base().vars, P.rank(), P.rank(), deg, 2));
    return make_connection(P, gs);
}

ModuleHom random_unimodular(Rng& rng, const FreeGradedModule& P, int deg = 1) {
    size_t n = P.rank();
    PolyMatrix L = PolyMatrix::identity(P.base().vars, n);
    PolyMatrix U = PolyMatrix::identity(P.base().vars, n);
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < n; ++c) {
            if (r > c) L.at(r, c) = rng.poly(P.base().vars, deg, 2);
            if (r < c) U.at(r, c) = rng.poly(P.base().vars, deg, 2);
        }
    return ModuleHom(P, P, L * U);
}

} // namespace

TEST_CASE("covariant derivatives satisfy the Leibniz rule by construction") {
    FreeGradedModule P(AXY, 0, 2, "e");
    PolyMatrix gx = PolyMatrix::zero(AXY.vars, 2, 2);
    gx.at(0, 1) = pxy("1");
    Connection c = make_connection(P, {gx, PolyMatrix::zero(AXY.vars, 2, 2)});

    ModuleElement e2 = ModuleElement::basis(P, 1);
    CHECK(covariant_derivative(c, 0).eval(e2) == ModuleElement::basis(P, 0));

    SUBCASE("A-linearity in the direction") {
        OperatorExpr nx = covariant_derivative(c, 0);
        OperatorExpr nxx = covariant_derivative(c, {pxy("x"), pxy("0")});
        CHECK(nxx == nx.scaled(pxy("x")));
    }

    SUBCASE("Leibniz on random pairs") {
        Rng rng(21);
        for (int trial = 0; trial < 20; ++trial) {
            Poly a = rng.poly(AXY.vars, 2, 2);
            ModuleElement p = rng.element(P, 2, 2);
            for (size_t i = 0; i < 2; ++i) {
                OperatorExpr n = covariant_derivative(c, i);
                CHECK(n.eval(p * a) == p * a.partial(i) + n.eval(p) * a);
            }
        }
    }

    SUBCASE("shape validation") {
        CHECK_THROWS_AS(make_connection(P, {gx}), structural_error);
        CHECK_THROWS_AS(make_connection(P, {PolyMatrix::zero(AXY.vars, 1, 2), gx}),
                        structural_error);
    }
}

TEST_CASE("curvature detects non-flat connections") {
    FreeGradedModule P(AXY, 0, 2, "e");

    SUBCASE("trivial connection is flat") {
        CHECK(curvature(trivial_connection(P)).is_flat());
    }

    SUBCASE("x-dependent Christoffel in the y direction") {
        PolyMatrix gy = PolyMatrix::zero(AXY.vars, 2, 2);
        gy.at(0, 0) = pxy("x");
        Connection c = make_connection(P, {PolyMatrix::zero(AXY.vars, 2, 2), gy});
        CurvatureTensor R = curvature(c);
        CHECK_FALSE(R.is_flat());
        CHECK(R.at(0, 1) == PolyMatrix::parse("[[1,0],[0,0]]", AXY.vars));
        CHECK(R.to_string() == "R[x,y] = [[1,0],[0,0]]");
    }

    SUBCASE("equal constant Christoffels commute") {
        PolyMatrix c0 = PolyMatrix::parse("[[1,2],[3,4]]", AXY.vars);
        CHECK(curvature(make_connection(P, {c0, c0})).is_flat());
    }
}

TEST_CASE("induced connections satisfy their defining formulas") {
    Rng rng(33);
    FreeGradedModule P(AXY, 0, 2, "p");
    FreeGradedModule Q(AXY, 0, 2, "q");
    Connection cP = random_connection(rng, P);
    Connection cQ = random_connection(rng, Q);

    SUBCASE("dual: pairing is parallel") {
        Connection cD = dual_connection(cP);
        FreeGradedModule D = dual_module(P);
        for (int trial = 0; trial < 10; ++trial) {
            ModuleElement theta = rng.element(D, 2, 2);
            ModuleElement p = rng.element(P, 2, 2);
            for (size_t i = 0; i < 2; ++i) {
                Poly lhs = dual_pairing(theta, p).partial(i);
                Poly rhs = dual_pairing(covariant_derivative(cD, i).eval(theta), p) +
                           dual_pairing(theta, covariant_derivative(cP, i).eval(p));
                CHECK(lhs == rhs);
            }
        }
        CHECK(dual_connection(trivial_connection(P)).christoffels[0].is_zero());
    }

    SUBCASE("tensor: derivative distributes over the factors") {
        Connection cT = tensor_connection(cP, cQ);
        for (size_t a = 0; a < 2; ++a)
            for (size_t b = 0; b < 2; ++b)
                for (size_t i = 0; i < 2; ++i) {
                    // column of the induced Christoffel on basis p_a (x) q_b
                    ModuleElement got = covariant_derivative(cT, i).eval(
                        ModuleElement::basis(cT.module, a * 2 + b));
                    std::vector<Poly> want(4, Poly(AXY.vars));
                    for (size_t r = 0; r < 2; ++r) {
                        want[r * 2 + b] = want[r * 2 + b] + cP.christoffels[i].at(r, a);
                        want[a * 2 + r] = want[a * 2 + r] + cQ.christoffels[i].at(r, b);
                    }
                    CHECK(got == ModuleElement(cT.module, want));
                }
    }

    SUBCASE("hom: (nabla h)(p) = box(h(p)) - h(nabla p)") {
        Connection cH = hom_connection(cP, cQ);
        for (int trial = 0; trial < 10; ++trial) {
            ModuleHom h(P, Q, rng.matrix(AXY.vars, 2, 2, 2, 2));
            ModuleElement p = rng.element(P, 2, 2);
            for (size_t i = 0; i < 2; ++i) {
                ModuleElement nh = covariant_derivative(cH, i).eval(hom_to_element(h));
                ModuleHom nh_hom = element_to_hom(nh, P, Q);
                ModuleElement lhs = nh_hom.apply(p);
                ModuleElement rhs = covariant_derivative(cQ, i).eval(h.apply(p)) -
                                    h.apply(covariant_derivative(cP, i).eval(p));
                CHECK(lhs == rhs);
            }
        }
    }

    SUBCASE("bil: term-by-term formula on all basis pairs") {
        FreeGradedModule Q1(AXY, 0, 1, "q");
        Connection cQ1 = random_connection(rng, Q1);
        Connection cB = bil_connection(cP, cQ1);
        BilinearMap g(P, P, Q1);
        for (size_t a = 0; a < 2; ++a)
            for (size_t b = 0; b < 2; ++b)
                g.value(a, b) = ModuleElement(Q1, {rng.poly(AXY.vars, 2, 2)});
        for (size_t i = 0; i < 2; ++i) {
            ModuleElement ng = covariant_derivative(cB, i).eval(bil_to_element(g));
            BilinearMap ng_bil = element_to_bil(ng, P, Q1);
            for (size_t a = 0; a < 2; ++a)
                for (size_t bb = 0; bb < 2; ++bb) {
                    ModuleElement ea = ModuleElement::basis(P, a);
                    ModuleElement eb = ModuleElement::basis(P, bb);
                    ModuleElement rhs =
                        covariant_derivative(cQ1, i).eval(g.eval(ea, eb)) -
                        g.eval(covariant_derivative(cP, i).eval(ea), eb) -
                        g.eval(ea, covariant_derivative(cP, i).eval(eb));
                    CHECK(ng_bil.eval(ea, eb) == rhs);
                }
        }
        CHECK(bil_connection(trivial_connection(P), trivial_connection(Q1))
                  .christoffels[0]
                  .is_zero());
    }

    SUBCASE("typed carrier connection matches the bil construction entrywise") {
        FreeGradedModule Q1(AXY, 0, 1, "q");
        Connection cQ1 = random_connection(rng, Q1);
        Connection via_bil = bil_connection(cP, cQ1);
        Connection via_type = typed_connection(TypeSignature{0, 2, 1, 0}, cP, cQ1);
        for (size_t i = 0; i < 2; ++i)
            CHECK(via_bil.christoffels[i] == via_type.christoffels[i]);
    }
}

TEST_CASE("gauge structures are connections preserving the inner tensor") {
    FreeGradedModule P(AX, 0, 1, "e");
    FreeGradedModule Q(AX, 0, 1, "f");

    SUBCASE("variable coefficient breaks parallelism under the trivial pair") {
        BilinearMap g(P, P, Q);
        g.value(0, 0) = ModuleElement(Q, {AX.var(0)});
        GaugeCheckResult r = check_gauge_structure(trivial_connection(P),
                                                   trivial_connection(Q),
                                                   inner_from_bilinear(g));
        CHECK_FALSE(r.ok);
        REQUIRE(r.defects.size() == 1);
        CHECK(r.defects[0].first == "x");
        CHECK(r.defects[0].second.coords[0] == AX.one());
    }

    SUBCASE("constant coefficients under the trivial pair always pass") {
        Rng rng(44);
        FreeGradedModule P2(AX, 0, 2, "e");
        for (int trial = 0; trial < 50; ++trial) {
            BilinearMap g(P2, P2, Q);
            for (size_t a = 0; a < 2; ++a)
                for (size_t b = 0; b < 2; ++b)
                    g.value(a, b) = ModuleElement(Q, {Poly::constant(AX.vars, rng.rational())});
            GaugeCheckResult r = check_gauge_structure(trivial_connection(P2),
                                                       trivial_connection(Q),
                                                       inner_from_bilinear(g));
            CHECK(r.ok);
            CHECK(r.defect_string() == "0");
        }
    }

    SUBCASE("antisymmetric Christoffel preserves the standard form") {
        FreeGradedModule P2(AX, 0, 2, "e");
        BilinearMap b(P2, P2, Q);
        b.value(0, 0) = ModuleElement::basis(Q, 0);
        b.value(1, 1) = ModuleElement::basis(Q, 0);
        PolyMatrix gamma = PolyMatrix::zero(AX.vars, 2, 2);
        gamma.at(0, 1) = AX.var(0);
        gamma.at(1, 0) = Poly(AX.vars) - AX.var(0);
        GaugeCheckResult r = check_gauge_structure(make_connection(P2, {gamma}),
                                                   trivial_connection(Q),
                                                   inner_from_bilinear(b));
        CHECK(r.ok);
    }

    SUBCASE("Q-typed tensors require the second connection") {
        BilinearMap g(P, P, Q);
        g.value(0, 0) = ModuleElement::basis(Q, 0);
        CHECK_THROWS_AS(check_gauge_structure(trivial_connection(P), std::nullopt,
                                              inner_from_bilinear(g)),
                        structural_error);
    }
}

TEST_CASE("covariant differential packages all directions") {
    FreeGradedModule P(AXY, 0, 1, "e");

    SUBCASE("trivial connection gives the coordinate differential") {
        OperatorExpr d = covariant_differential(trivial_connection(P));
        ModuleElement xe = ModuleElement(P, {pxy("x")});
        ModuleElement image = d.eval(xe);
        CHECK(image.coords[0] == pxy("1")); // dx (x) e component
        CHECK(image.coords[1].is_zero());   // dy (x) e component
        CHECK(check_order(d, 1).ok);
    }

    SUBCASE("basis images list the Christoffel columns") {
        Rng rng(55);
        FreeGradedModule P2(AXY, 0, 2, "e");
        Connection c = random_connection(rng, P2);
        OperatorExpr d = covariant_differential(c);
        for (size_t j = 0; j < 2; ++j) {
            ModuleElement im = d.eval(ModuleElement::basis(P2, j));
            for (size_t i = 0; i < 2; ++i)
                for (size_t r = 0; r < 2; ++r)
                    CHECK(im.coords[i * 2 + r] == c.christoffels[i].at(r, j));
        }
    }

    SUBCASE("Leibniz rule against the universal differential") {
        Rng rng(66);
        FreeGradedModule P2(AXY, 0, 2, "e");
        Connection c = random_connection(rng, P2);
        OperatorExpr d = covariant_differential(c);
        for (int trial = 0; trial < 10; ++trial) {
            Poly a = rng.poly(AXY.vars, 2, 2);
            ModuleElement p = rng.element(P2, 2, 2);
            ModuleElement lhs = d.eval(p * a);
            std::vector<Poly> want(4, Poly(AXY.vars));
            ModuleElement dp = d.eval(p);
            for (size_t i = 0; i < 2; ++i)
                for (size_t r = 0; r < 2; ++r)
                    want[i * 2 + r] = a.partial(i) * p.coords[r] + a * dp.coords[i * 2 + r];
            CHECK(lhs == ModuleElement(lhs.mod, want));
        }
    }
}

TEST_CASE("connections push forward along module maps") {
    FreeGradedModule P(AXY, 0, 2, "p");
    FreeGradedModule Q(AXY, 0, 2, "q");
    Rng rng(77);
    Connection c = random_connection(rng, P);

    std::vector<OperatorExpr> along_id =
        connection_along_map(c, ModuleHom::identity(P));
    for (size_t i = 0; i < 2; ++i) CHECK(along_id[i] == covariant_derivative(c, i));

    PolyMatrix M = PolyMatrix::parse("[[1,2],[0,1]]", AXY.vars);
    std::vector<OperatorExpr> along =
        connection_along_map(trivial_connection(P), ModuleHom(P, Q, M));
    ModuleElement p = rng.element(P, 2, 2);
    for (size_t i = 0; i < 2; ++i) {
        std::vector<Poly> dp = {p.coords[0].partial(i), p.coords[1].partial(i)};
        CHECK(along[i].eval(p) == ModuleElement(Q, M.apply(dp)));
    }
}

TEST_CASE("gauge equivalence is conjugation in Christoffel form") {
    FreeGradedModule P(AXY, 0, 2, "e");
    Rng rng(88);

    SUBCASE("identity map means equal Christoffels") {
        Connection a = random_connection(rng, P);
        CHECK(gauge_equivalent(a, a, ModuleHom::identity(P)).ok);
        Connection b = a;
        b.christoffels[0].at(0, 0) = b.christoffels[0].at(0, 0) + pxy("1");
        GaugeEquivalenceResult r = gauge_equivalent(a, b, ModuleHom::identity(P));
        CHECK_FALSE(r.ok);
        CHECK(r.var_index == 0);
        CHECK(r.defect == PolyMatrix::parse("[[1,0],[0,0]]", AXY.vars));
    }

    SUBCASE("constant maps fix the trivial connection") {
        ModuleHom phi(P, P, PolyMatrix::parse("[[1,2],[0,1]]", AXY.vars));
        CHECK(gauge_equivalent(trivial_connection(P), trivial_connection(P), phi).ok);
        FreeGradedModule L(AX, 0, 1, "e");
        ModuleHom c(L, L, PolyMatrix::parse("[[5]]", AX.vars));
        CHECK(gauge_equivalent(trivial_connection(L), trivial_connection(L), c).ok);
    }

    SUBCASE("transported connections are equivalent and the relation is an equivalence") {
        for (int trial = 0; trial < 20; ++trial) {
            Connection a = random_connection(rng, P);
            ModuleHom phi = random_unimodular(rng, P);
            ModuleHom psi = random_unimodular(rng, P);
            PolyMatrix inv = phi.matrix.inverse();
            std::vector<PolyMatrix> gs;
            for (size_t i = 0; i < 2; ++i)
                gs.push_back(phi.matrix * a.christoffels[i] * inv -
                             phi.matrix.partial(i) * inv);
            Connection b = make_connection(P, gs);
            CHECK(gauge_equivalent(a, b, phi).ok);
            CHECK(gauge_equivalent(b, a, ModuleHom(P, P, inv)).ok);

            // transitivity through a second map
            PolyMatrix inv2 = psi.matrix.inverse();
            std::vector<PolyMatrix> gs2;
            for (size_t i = 0; i < 2; ++i)
                gs2.push_back(psi.matrix * b.christoffels[i] * inv2 -
                              psi.matrix.partial(i) * inv2);
            Connection cc = make_connection(P, gs2);
            CHECK(gauge_equivalent(a, cc, ModuleHom(P, P, psi.matrix * phi.matrix)).ok);
        }
    }

    SUBCASE("non-invertible gauge maps are rejected") {
        ModuleHom bad(P, P, PolyMatrix::parse("[[x,0],[0,1]]", AXY.vars));
        CHECK_THROWS_AS(
            gauge_equivalent(trivial_connection(P), trivial_connection(P), bad),
            structural_error);
    }
}

TEST_CASE("curvature transforms by conjugation under constant gauge maps") {
    FreeGradedModule P(AXY, 0, 2, "e");
    Rng rng(909);
    for (int trial = 0; trial < 20; ++trial) {
        Connection a = random_connection(rng, P);
        ModuleHom phi = random_unimodular(rng, P, 0); // constant
        PolyMatrix inv = phi.matrix.inverse();
        std::vector<PolyMatrix> gs;
        for (size_t i = 0; i < 2; ++i) gs.push_back(phi.matrix * a.christoffels[i] * inv);
        Connection b = make_connection(P, gs);
        CurvatureTensor Ra = curvature(a), Rb = curvature(b);
        CHECK(Rb.at(0, 1) == phi.matrix * Ra.at(0, 1) * inv);
    }
}

TEST_CASE("structure-preserving gauge orbits") {
    FreeGradedModule P(AX, 0, 2, "e");
    FreeGradedModule Q(AX, 0, 1, "f");
    BilinearMap b(P, P, Q);
    b.value(0, 0) = ModuleElement::basis(Q, 0);
    b.value(1, 1) = ModuleElement::basis(Q, 0);
    InnerStructureSpec Xi = inner_from_bilinear(b);
    Connection triv = trivial_connection(P);

    CHECK(xi_gauge_orbit_check(triv, triv, ModuleHom::identity(P), Xi));

    ModuleHom rot(P, P, PolyMatrix::parse("[[3/5,-4/5],[4/5,3/5]]", AX.vars));
    CHECK(xi_gauge_orbit_check(triv, triv, rot, Xi));

    ModuleHom squeeze(P, P, PolyMatrix::parse("[[2,0],[0,1/2]]", AX.vars));
    CHECK_FALSE(xi_gauge_orbit_check(triv, triv, squeeze, Xi)); // det 1 but not orthogonal

    ModuleHom reflect(P, P, PolyMatrix::parse("[[1,0],[0,-1]]", AX.vars));
    CHECK_FALSE(xi_gauge_orbit_check(triv, triv, reflect, Xi)); // orthogonal but det -1
}

TEST_CASE("affine combinations of connections") {
    FreeGradedModule P(AX, 0, 2, "e");
    Rng rng(111);
    Connection a = random_connection(rng, P), b = random_connection(rng, P);
    CHECK(affine_combination(a, b, Rational(1)) == a);
    CHECK(affine_combination(a, b, Rational(0)) == b);

    // Two structure-preserving connections stay preserving along the line.
    FreeGradedModule Q(AX, 0, 1, "f");
    BilinearMap form(P, P, Q);
    form.value(0, 0) = ModuleElement::basis(Q, 0);
    form.value(1, 1) = ModuleElement::basis(Q, 0);
    InnerStructureSpec Xi = inner_from_bilinear(form);
    auto antisym = [&](const Poly& u) {
        PolyMatrix g = PolyMatrix::zero(AX.vars, 2, 2);
        g.at(0, 1) = u;
        g.at(1, 0) = Poly(AX.vars) - u;
        return make_connection(P, {g});
    };
    Connection c1 = antisym(AX.var(0));
    Connection c2 = antisym(Poly::parse("x^2 - 3", AX.vars));
    Connection qtriv = trivial_connection(Q);
    REQUIRE(check_gauge_structure(c1, qtriv, Xi).ok);
    REQUIRE(check_gauge_structure(c2, qtriv, Xi).ok);
    Connection mid = affine_combination(c1, c2, Rational(1, 3));
    CHECK(check_gauge_structure(mid, qtriv, Xi).ok);
}
