#include <doctest.h>

#include "gradcalc/along.hpp"
#include "gradcalc/rng.hpp"

using namespace gradcalc;

namespace {

const BaseAlgebra AX(std::vector<std::string>{"x"});
const BaseAlgebra AXY(std::vector<std::string>{"x", "y"});
const BaseAlgebra BT(std::vector<std::string>{"t"});

Poly px(const std::string& s) { return Poly::parse(s, AX.vars); }
Poly pt(const std::string& s) { return Poly::parse(s, BT.vars); }

// x |-> t^2, the running non-identity algebra map.
AlgebraMap square_map() { return AlgebraMap(AX, BT, {pt("t^2")}); }

AlongOperator random_along(Rng& rng, const AlgebraMap& phi, const FreeGradedModule& P,
                           const FreeGradedModule& Q, int order) {
    AlongOperator op(phi, P, Q);
    std::vector<Monomial> monos = monomials_up_to(phi.source.vars, order);
    for (const auto& gamma : monos)
        op.add_term(gamma, rng.matrix(phi.target.vars, Q.rank(), P.rank(), 1));
    return op;
}

} // namespace

TEST_CASE("algebra maps substitute like ring homomorphisms") {
    AlgebraMap phi = square_map();
    CHECK(phi.apply(px("x^3 - 2*x")) == pt("t^6 - 2*t^2"));
    CHECK(phi.apply(px("5")) == pt("5"));
    CHECK(phi.to_string() == "x -> t^2");

    Rng rng(11);
    for (int t = 0; t < 10; ++t) {
        Poly a = rng.poly(AX.vars, 3);
        Poly b = rng.poly(AX.vars, 3);
        CHECK(phi.apply(a * b) == phi.apply(a) * phi.apply(b));
        CHECK(phi.apply(a + b) == phi.apply(a) + phi.apply(b));
    }

    AlgebraMap id = AlgebraMap::identity(AXY);
    Poly p = Poly::parse("x*y - 3*y^2", AXY.vars);
    CHECK(id.apply(p) == p);

    CHECK_THROWS_AS(AlgebraMap(AXY, BT, {pt("t")}), structural_error);
    CHECK_THROWS_AS(AlgebraMap(AX, BT, {px("x")}), structural_error);
    CHECK_THROWS_AS(phi.apply(Poly::parse("y", AXY.vars)), structural_error);
}

TEST_CASE("operators along a map form an algebra in normal form") {
    AlgebraMap phi = square_map();
    FreeGradedModule P(AX, 0, 2, "e");
    FreeGradedModule Q(BT, 0, 2, "f");

    PolyMatrix C = PolyMatrix::parse("[[t, 0], [1, t^2]]", BT.vars);
    AlongOperator D = AlongOperator::semilinear(phi, P, Q, C);
    CHECK(D.syntactic_order() == 0);
    CHECK_FALSE(D.is_zero());

    // Semilinear evaluation: coordinates pass through phi, then the matrix.
    ModuleElement p(P, {px("x"), px("x^2 - 1")});
    ModuleElement out = D.eval(p);
    CHECK(out.coords[0] == pt("t^3"));
    CHECK(out.coords[1] == pt("t^6"));

    CHECK(D + AlongOperator::zero(phi, P, Q) == D);
    CHECK(D - D == AlongOperator::zero(phi, P, Q));
    CHECK((-D).scaled(pt("-1")) == D);

    // Shape and algebra mismatches are structural errors.
    CHECK_THROWS_AS(D.add_term(Monomial{0, 0}, C), structural_error);
    CHECK_THROWS_AS(D.add_term(Monomial{0}, PolyMatrix::identity(BT.vars, 3)),
                    structural_error);
    CHECK_THROWS_AS(D.add_term(Monomial{0}, PolyMatrix::identity(AX.vars, 2)),
                    structural_error);
    CHECK_THROWS_AS(D.eval(ModuleElement::basis(Q, 0)), structural_error);

    // Reinterpreting an ordinary operator along the identity map preserves
    // its action.
    OperatorExpr ordinary = OperatorExpr::partial(FreeGradedModule(AXY, 0, 2, "e"), 1);
    AlongOperator lifted = AlongOperator::from_ordinary(ordinary);
    ModuleElement q(FreeGradedModule(AXY, 0, 2, "e"),
                    {Poly::parse("x*y^2", AXY.vars), Poly::parse("y^3", AXY.vars)});
    CHECK(lifted.eval(q) == ordinary.eval(q));
    CHECK(lifted.map() == AlgebraMap::identity(AXY));
}

TEST_CASE("precomposition with multiplication matches pointwise evaluation") {
    AlgebraMap phi = square_map();
    FreeGradedModule P(AX, 0, 2, "e");
    FreeGradedModule Q(BT, 0, 1, "f");
    Rng rng(23);
    for (int t = 0; t < 10; ++t) {
        AlongOperator D = random_along(rng, phi, P, Q, 2);
        Poly a = rng.poly(AX.vars, 2);
        ModuleElement p = rng.element(P, 2);
        CHECK(D.precompose_mult(a).eval(p) == D.eval(p * a));
        CHECK(D.scaled(pt("t")).eval(p) == D.eval(p) * pt("t"));
    }
}

TEST_CASE("delta along a map obeys the product rule on the first slot") {
    AlgebraMap phi = square_map();
    FreeGradedModule P(AX, 0, 2, "e");
    FreeGradedModule Q(BT, 0, 2, "f");
    Rng rng(31);
    for (int t = 0; t < 8; ++t) {
        AlongOperator D = random_along(rng, phi, P, Q, 2);
        Poly a = rng.poly(AX.vars, 2);
        Poly b = rng.poly(AX.vars, 2);
        AlongOperator lhs = delta_along(a * b, D);
        AlongOperator rhs =
            delta_along(b, D).scaled(phi.apply(a)) + delta_along(a, D).precompose_mult(b);
        CHECK(lhs == rhs);
    }
    // delta_1 = 0, the other ingredient of the generator-tuple argument.
    AlongOperator D = random_along(rng, phi, P, Q, 2);
    CHECK(delta_along(px("1"), D).is_zero());
}

TEST_CASE("transported order check bounds operators along a map") {
    AlgebraMap phi = square_map();
    FreeGradedModule UA = unit_module(AX);
    FreeGradedModule UB = unit_module(BT);

    // The chain-rule derivation X = 2t * (phi o d/dx) has order exactly 1.
    AlongOperator X = derivation_along_from_images(phi, {pt("2*t")});
    CHECK(X.syntactic_order() == 1);
    CHECK(X.to_string() == "2*t * phi o d/dx");
    AlongOrderCheck oc0 = check_order_along(X, 0);
    CHECK_FALSE(oc0.ok);
    CHECK(oc0.witness_string() == "(x)");
    CHECK(delta_along(px("x"), X).eval_poly(px("1")) == pt("-2*t"));
    CHECK(check_order_along(X, 1).ok);

    // Semilinear operators sit in order 0; the zero operator too.
    AlongOperator S = AlongOperator::semilinear(phi, UA, UB,
                                                PolyMatrix::scalar(BT.vars, 1, pt("t^3")));
    CHECK(check_order_along(S, 0).ok);
    CHECK(check_order_along(AlongOperator::zero(phi, UA, UB), 0).ok);
    CHECK_THROWS_AS(check_order_along(X, -1), structural_error);

    // A second-order term needs two deltas.
    AlongOperator D2(phi, UA, UB);
    D2.add_term(Monomial{2}, PolyMatrix::scalar(BT.vars, 1, pt("1")));
    CHECK_FALSE(check_order_along(D2, 1).ok);
    CHECK(check_order_along(D2, 2).ok);
}

TEST_CASE("the Leibniz rule across a map singles out chain-rule derivations") {
    AlgebraMap phi = square_map();

    // d/dx along the identity is a derivation along it.
    AlongOperator dx = AlongOperator::from_ordinary(
        OperatorExpr::coordinate_derivation(AX, 0));
    CHECK(derivation_along_alg_check(dx).ok);

    // X(x) = 2t against phi(x) = t^2 is the chain rule; any generator image
    // gives a derivation along phi, but a second-order term cannot.
    CHECK(derivation_along_alg_check(derivation_along_from_images(phi, {pt("2*t")})).ok);
    CHECK(derivation_along_alg_check(derivation_along_from_images(phi, {pt("t^3 - 1")})).ok);
    AlongOperator second(phi, unit_module(AX), unit_module(BT));
    second.add_term(Monomial{2}, PolyMatrix::scalar(BT.vars, 1, pt("1")));
    AlongCheckResult wrong = derivation_along_alg_check(second);
    CHECK_FALSE(wrong.ok);
    CHECK(wrong.defect_poly.has_value());

    // phi itself, viewed as an operator, is not a derivation along phi.
    AlongOperator as_op = AlongOperator::semilinear(phi, unit_module(AX), unit_module(BT),
                                                    PolyMatrix::scalar(BT.vars, 1, pt("1")));
    AlongCheckResult r = derivation_along_alg_check(as_op);
    CHECK_FALSE(r.ok);
    CHECK(r.violation == "Leibniz rule across the map fails at (a, a') = (1, 1)");
}

TEST_CASE("the Der rule across a map certifies connection pushforwards") {
    FreeGradedModule P(AXY, 0, 2, "e");
    AlgebraMap id = AlgebraMap::identity(AXY);
    AlongModule mod =
        make_along_module(id, P, P, PolyMatrix::identity(AXY.vars, 2));
    AlongOperator X = AlongOperator::from_ordinary(
        OperatorExpr::coordinate_derivation(AXY, 0));

    // nabla_x of any connection satisfies the rule with X = d/dx.
    Rng rng(7);
    for (int t = 0; t < 5; ++t) {
        std::vector<PolyMatrix> gammas = {rng.matrix(AXY.vars, 2, 2, 1),
                                          rng.matrix(AXY.vars, 2, 2, 1)};
        Connection c = make_connection(P, gammas);
        AlongOperator D = along_covariant_derivative(c, mod, 0);
        CHECK(derivation_along_map_check(D, mod, X).ok);
    }

    // Dropping the Christoffel correction breaks the rule only when the
    // scalar part is removed too: a bare partial with X = 0 fails.
    AlongOperator bare = along_covariant_derivative(trivial_connection(P), mod, 0);
    AlongOperator zeroX =
        AlongOperator::zero(id, unit_module(AXY), unit_module(AXY));
    AlongCheckResult r = derivation_along_map_check(bare, mod, zeroX);
    CHECK_FALSE(r.ok);
    CHECK(r.defect.has_value());

    // Semilinear operators are exactly the X = 0 members.
    AlongOperator H = AlongOperator::semilinear(id, P, P, rng.matrix(AXY.vars, 2, 2, 2));
    CHECK(derivation_along_map_check(H, mod, zeroX).ok);

    // A scalar part that is not a derivation along the map is rejected up
    // front.
    AlongOperator badX = AlongOperator::semilinear(id, unit_module(AXY), unit_module(AXY),
                                                   PolyMatrix::scalar(AXY.vars, 1,
                                                                      Poly::parse("1", AXY.vars)));
    AlongCheckResult pre = derivation_along_map_check(H, mod, badX);
    CHECK_FALSE(pre.ok);
    CHECK(pre.violation.find("scalar part is not a derivation along the map") == 0);
}

TEST_CASE("connections transport across genuinely non-identity maps") {
    // P over Q[x], Q over Q[t], phi(x) = t^2, phibar the obvious inclusion.
    AlgebraMap phi = square_map();
    FreeGradedModule P(AX, 0, 2, "e");
    FreeGradedModule Q(BT, 0, 2, "f");
    AlongModule mod = make_along_module(phi, P, Q, PolyMatrix::identity(BT.vars, 2));

    AlongOperator X = derivation_along_from_images(phi, {pt("2*t")});
    Rng rng(19);
    Connection c = make_connection(P, {rng.matrix(AX.vars, 2, 2, 1)});
    // phibar o nabla scaled by X(x) follows X: Delta(p) = X(x) (phibar o
    // nabla_x)(p) is the chain-rule lift of X.
    AlongOperator D = along_covariant_derivative(c, mod, 0).scaled(pt("2*t"));
    CHECK(derivation_along_map_check(D, mod, X).ok);

    // The unscaled pushforward instead follows phi o d/dx, which is not a
    // derivation along phi, so the rule must fail.
    AlongOperator bare = along_covariant_derivative(c, mod, 0);
    CHECK_FALSE(derivation_along_map_check(bare, mod, X).ok);
}

TEST_CASE("order-k compatibility across a map") {
    AlgebraMap id = AlgebraMap::identity(AX);
    FreeGradedModule U = unit_module(AX);
    AlongModule mod = make_along_module(id, U, U, PolyMatrix::identity(AX.vars, 1));

    AlongOperator ddx = AlongOperator::from_ordinary(
        OperatorExpr::coordinate_derivation(AX, 0));

    SUBCASE("a derivation pair passes at k = 1") {
        CHECK(diff_along_map_check(ddx, ddx, 1, mod).ok);
    }

    SUBCASE("k = 0 is the semilinear pairing") {
        AlongOperator DA = AlongOperator::semilinear(id, U, U,
                                                     PolyMatrix::scalar(AX.vars, 1, px("x^2")));
        CHECK(diff_along_map_check(DA, DA, 0, mod).ok);
        AlongOperator DP = AlongOperator::semilinear(id, U, U,
                                                     PolyMatrix::scalar(AX.vars, 1, px("x")));
        AlongCheckResult r = diff_along_map_check(DA, DP, 0, mod);
        CHECK_FALSE(r.ok);
        CHECK(r.defect.has_value());
    }

    SUBCASE("mismatched orders fail with the witness a = x") {
        AlongOperator d2(id, U, U);
        d2.add_term(Monomial{2}, PolyMatrix::scalar(AX.vars, 1, px("1")));
        AlongCheckResult r = diff_along_map_check(ddx, d2, 1, mod);
        CHECK_FALSE(r.ok);
        CHECK(r.violation.find("a = x") != std::string::npos);
    }

    SUBCASE("the scalar part must obey the transported order bound") {
        AlongOperator d2(id, U, U);
        d2.add_term(Monomial{2}, PolyMatrix::scalar(AX.vars, 1, px("1")));
        AlongCheckResult r = diff_along_map_check(d2, ddx, 1, mod);
        CHECK_FALSE(r.ok);
        CHECK(r.violation.find("exceeds order 1") != std::string::npos);
    }

    SUBCASE("the chain-rule pair passes along the squaring map") {
        AlgebraMap phi = square_map();
        FreeGradedModule UA = unit_module(AX);
        FreeGradedModule UB = unit_module(BT);
        AlongModule m2 = make_along_module(phi, UA, UB, PolyMatrix::identity(BT.vars, 1));
        AlongOperator X = derivation_along_from_images(phi, {pt("2*t")});
        CHECK(diff_along_map_check(X, X, 1, m2).ok);
        CHECK(diff_along_map_check(X, X, 2, m2).ok);
    }
}

TEST_CASE("the along-map symbol sequence certifies constructively") {
    Rng rng(3);

    SUBCASE("identity data reproduce the classical sequence") {
        FreeGradedModule P(AXY, 0, 2, "e");
        AlgebraMap id = AlgebraMap::identity(AXY);
        AlongModule mod = make_along_module(id, P, P, PolyMatrix::identity(AXY.vars, 2));
        ExactnessCertificate cert = atiyah_along_map(mod);
        CHECK(cert.ok());
        CHECK(cert.status == CertStatus::certified);
        CHECK(cert.sequence == "0 -> Hom(P,Q) -> D1(P,Q; phi)_0 -> D(A; phi) -> 0");
        REQUIRE(cert.witnesses.size() == 3);
        CHECK(cert.witnesses[0].name == "injectivity");
        CHECK(cert.witnesses[1].name == "kernel");
        CHECK(cert.witnesses[2].name == "surjectivity");
        for (const auto& w : cert.witnesses) CHECK(w.ok);

        // A supplied connection behaves the same.
        std::vector<PolyMatrix> gammas = {rng.matrix(AXY.vars, 2, 2, 1),
                                          rng.matrix(AXY.vars, 2, 2, 1)};
        CHECK(atiyah_along_map(mod, make_connection(P, gammas), 5).ok());
    }

    SUBCASE("a rank-preserving inclusion into a different module certifies") {
        FreeGradedModule P(AX, 0, 2, "e");
        FreeGradedModule Q(BT, 0, 2, "f");
        AlongModule mod =
            make_along_module(square_map(), P, Q, PolyMatrix::identity(BT.vars, 2));
        ExactnessCertificate cert = atiyah_along_map(mod, std::nullopt, 41);
        CHECK(cert.ok());
    }

    SUBCASE("the zero module map is reported inconclusive, not refuted") {
        FreeGradedModule P(AX, 0, 2, "e");
        FreeGradedModule Q(BT, 0, 2, "f");
        AlongModule mod = make_along_module(square_map(), P, Q,
                                            PolyMatrix::zero(BT.vars, 2, 2));
        ExactnessCertificate cert = atiyah_along_map(mod);
        CHECK_FALSE(cert.ok());
        CHECK(cert.status == CertStatus::inconclusive);
        CHECK(cert.note.find("faithfulness") != std::string::npos);
        CHECK(cert.witnesses.empty());
        // The certificate printer carries the caveat.
        CHECK(cert.to_string().find("inconclusive") != std::string::npos);
    }

    SUBCASE("a wider target than the image span is inconclusive too") {
        FreeGradedModule P(AX, 0, 1, "e");
        FreeGradedModule Q(BT, 0, 2, "f");
        PolyMatrix phibar(BT.vars, 2, 1);
        phibar.at(0, 0) = pt("1");
        AlongModule mod = make_along_module(square_map(), P, Q, phibar);
        CHECK(atiyah_along_map(mod).status == CertStatus::inconclusive);
    }
}

TEST_CASE("along covariant derivatives reduce to partials for trivial data") {
    FreeGradedModule P(AXY, 0, 2, "e");
    AlgebraMap id = AlgebraMap::identity(AXY);
    AlongModule mod = make_along_module(id, P, P, PolyMatrix::identity(AXY.vars, 2));
    for (size_t i = 0; i < 2; ++i) {
        AlongOperator D = along_covariant_derivative(trivial_connection(P), mod, i);
        CHECK(D == AlongOperator::from_ordinary(OperatorExpr::partial(P, i)));
    }
    CHECK_THROWS_AS(along_covariant_derivative(trivial_connection(P), mod, 2),
                    structural_error);
}
