#include <doctest.h>

#include "gradcalc/linsolve.hpp"
#include "gradcalc/poly.hpp"
#include "gradcalc/polymatrix.hpp"
#include "gradcalc/rng.hpp"

using namespace gradcalc;

namespace {
const VarList XY({"x", "y"});
Poly P(const std::string& s) { return Poly::parse(s, XY); }
} // namespace

TEST_CASE("rational canonical form") {
    CHECK(rat_to_string(make_rational(2, 4)) == "1/2");
    CHECK(rat_to_string(make_rational(-3, -6)) == "1/2");
    CHECK(rat_to_string(make_rational(3, -6)) == "-1/2");
    CHECK(rat_to_string(make_rational(7)) == "7");
    CHECK(rat_parse("3/2") == make_rational(3, 2));
    CHECK(rat_parse("-7") == make_rational(-7));
    CHECK_THROWS_AS(make_rational(1, 0), structural_error);
    CHECK_THROWS_AS(rat_parse("x"), structural_error);
    CHECK(rat_binomial(4, 2) == 6);
    CHECK(rat_binomial(3, 5) == 0);
    CHECK(rat_pow(make_rational(2, 3), 3) == make_rational(8, 27));
    CHECK(rat_pow(make_rational(2, 3), -1) == make_rational(3, 2));
}

TEST_CASE("polynomial arithmetic and canonical print") {
    Poly s = P("x") + P("y");
    CHECK((s * s).to_string() == "x^2 + 2*x*y + y^2");
    CHECK(P("3/2*x^2*y - 1").to_string() == "3/2*x^2*y - 1");
    CHECK(P("0").is_zero());
    CHECK(Poly::zero(XY).to_string() == "0");
    CHECK((P("x + 1") * P("x - 1") - P("x^2") + P("1")).is_zero());
    CHECK(P("-x + 1").to_string() == "-x + 1");
    CHECK(P("x").pow(0).to_string() == "1");
    CHECK(P("2*x").pow(3).to_string() == "8*x^3");
    CHECK(P("x^2*y").total_degree() == 3);
    CHECK(Poly::zero(XY).total_degree() == -1);
}

TEST_CASE("polynomial partial derivative") {
    CHECK(P("3/2*x^2*y - 1").partial(0).to_string() == "3*x*y");
    CHECK(P("3/2*x^2*y - 1").partial(1).to_string() == "3/2*x^2");
    CHECK(P("7").partial(0).is_zero());
    // product rule on random pairs
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        Poly p = rng.poly(XY, 3), q = rng.poly(XY, 3);
        for (size_t v = 0; v < 2; ++v)
            CHECK((p * q).partial(v) == p.partial(v) * q + p * q.partial(v));
    }
}

TEST_CASE("polynomial ring laws on seeded instances") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        Poly a = rng.poly(XY, 2), b = rng.poly(XY, 2), c = rng.poly(XY, 2);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a * b == b * a);
        CHECK(a + b == b + a);
        CHECK((a - a).is_zero());
    }
}

TEST_CASE("parse print fixpoint on random polynomials") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        Poly p = rng.poly(XY, 4, 5);
        CHECK(Poly::parse(p.to_string(), XY) == p);
    }
}

TEST_CASE("polynomial substitution is a ring hom") {
    VarList T({"t"});
    std::vector<Poly> images = {Poly::parse("t^2", T), Poly::parse("t + 1", T)};
    Poly p = P("x*y - y^2");
    Poly q = P("x + 3*y");
    CHECK(p.compose(images) == Poly::parse("t^2", T).pow(1) * Poly::parse("t + 1", T) -
                                   Poly::parse("t + 1", T).pow(2));
    CHECK((p * q).compose(images) == p.compose(images) * q.compose(images));
    CHECK((p + q).compose(images) == p.compose(images) + q.compose(images));
}

TEST_CASE("polynomial evaluation") {
    CHECK(P("x^2 + y").eval({make_rational(1, 2), make_rational(3)}) == make_rational(13, 4));
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        Poly a = rng.poly(XY, 3), b = rng.poly(XY, 3);
        auto pt = rng.rational_point(2);
        CHECK((a * b).eval(pt) == a.eval(pt) * b.eval(pt));
    }
}

TEST_CASE("variable list mismatch is a structural error") {
    VarList X1({"x"});
    CHECK_THROWS_AS(P("x") + Poly::parse("x", X1), structural_error);
    CHECK_THROWS_AS(Poly::parse("z", XY), structural_error);
    CHECK_THROWS_AS(VarList({"x", "x"}), structural_error);
}

TEST_CASE("matrix arithmetic frozen cases") {
    PolyMatrix m = PolyMatrix::parse("[[x,1],[0,1]]", XY);
    CHECK(m.det() == P("x"));
    CHECK(m.transpose() == PolyMatrix::parse("[[x,0],[1,1]]", XY));
    CHECK((m * PolyMatrix::identity(XY, 2)) == m);
    PolyMatrix rot = PolyMatrix::parse("[[3/5,-4/5],[4/5,3/5]]", XY);
    CHECK(rot.det() == Poly::constant(XY, 1));
    CHECK(rot.inverse() == rot.transpose());
    CHECK((rot * rot.inverse()).is_identity());
    CHECK_THROWS_AS(m.inverse(), structural_error); // det = x not constant
    PolyMatrix sing = PolyMatrix::parse("[[1,1],[1,1]]", XY);
    CHECK_THROWS_AS(sing.inverse(), structural_error);
}

TEST_CASE("matrix determinant multiplicative on random constant matrices") {
    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
        PolyMatrix a = rng.matrix(XY, 3, 3, 0);
        PolyMatrix b = rng.matrix(XY, 3, 3, 0);
        CHECK((a * b).det() == a.det() * b.det());
    }
}

TEST_CASE("kronecker product matches slotwise action") {
    PolyMatrix a = PolyMatrix::parse("[[0,1],[1,0]]", XY);
    PolyMatrix b = PolyMatrix::parse("[[x,0],[0,y]]", XY);
    PolyMatrix k = a.kronecker(b);
    CHECK(k.rows() == 4);
    CHECK(k.at(0, 2) == P("x"));
    CHECK(k.at(1, 3) == P("y"));
    // (A(x)B)(u(x)v) = Au (x) Bv on flattened vectors
    Rng rng(13);
    std::vector<Poly> u = {rng.poly(XY, 1), rng.poly(XY, 1)};
    std::vector<Poly> v = {rng.poly(XY, 1), rng.poly(XY, 1)};
    std::vector<Poly> uv(4, Poly(XY));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) uv[i * 2 + j] = u[i] * v[j];
    auto lhs = k.apply(uv);
    auto au = a.apply(u);
    auto bv = b.apply(v);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(lhs[i * 2 + j] == au[i] * bv[j]);
}

TEST_CASE("rat_linsolve hand-reduced cases") {
    // x + 2y = 1 duplicated row: one pivot, one free column
    LinSolveResult r = rat_linsolve({{Rational(1), Rational(2)}, {Rational(2), Rational(4)}},
                                    {Rational(1), Rational(2)});
    REQUIRE(r.feasible);
    CHECK(r.particular == std::vector<Rational>{Rational(1), Rational(0)});
    REQUIRE(r.nullspace.size() == 1);
    CHECK(r.nullspace[0] == std::vector<Rational>{Rational(1), make_rational(-1, 2)});

    LinSolveResult bad = rat_linsolve({{Rational(1), Rational(1)}, {Rational(1), Rational(1)}},
                                      {Rational(1), Rational(2)});
    CHECK(!bad.feasible);

    LinSolveResult uniq = rat_linsolve({{Rational(2), Rational(0)}, {Rational(0), Rational(4)}},
                                       {Rational(1), Rational(1)});
    REQUIRE(uniq.feasible);
    CHECK(uniq.particular == std::vector<Rational>{make_rational(1, 2), make_rational(1, 4)});
    CHECK(uniq.nullspace.empty());
}

TEST_CASE("rat_linsolve random consistency") {
    Rng rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        size_t m = static_cast<size_t>(rng.uniform(1, 5));
        size_t n = static_cast<size_t>(rng.uniform(1, 5));
        std::vector<std::vector<Rational>> A(m, std::vector<Rational>(n));
        for (auto& row : A)
            for (auto& x : row) x = Rational(rng.uniform(-4, 4));
        std::vector<Rational> x0(n);
        for (auto& x : x0) x = rng.rational(5, 3);
        std::vector<Rational> b(m, Rational(0));
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) b[i] += A[i][j] * x0[j];

        LinSolveResult r = rat_linsolve(A, b);
        REQUIRE(r.feasible);
        for (size_t i = 0; i < m; ++i) {
            Rational acc = 0;
            for (size_t j = 0; j < n; ++j) acc += A[i][j] * r.particular[j];
            CHECK(acc == b[i]);
        }
        CHECK(r.nullspace.size() == n - rat_rank(A));
        for (const auto& v : r.nullspace) {
            for (size_t i = 0; i < m; ++i) {
                Rational acc = 0;
                for (size_t j = 0; j < n; ++j) acc += A[i][j] * v[j];
                CHECK(acc == 0);
            }
            bool found = false;
            for (const auto& c : v) {
                if (c != 0) {
                    CHECK(c == 1); // canonical scaling
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
        // determinism: the solver is a pure function of its input
        LinSolveResult again = rat_linsolve(A, b);
        CHECK(again.particular == r.particular);
        CHECK(again.nullspace == r.nullspace);
    }
}
