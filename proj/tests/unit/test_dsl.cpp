#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gradcalc/dispatch.hpp"
#include "gradcalc/rng.hpp"

using namespace gradcalc;

namespace {

const std::string kSourceDir = GRADCALC_SOURCE_DIR;

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::filesystem::path> corpus_files() {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(kSourceDir + "/corpus"))
        if (e.path().extension() == ".gc") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

int error_line(const std::string& text) {
    try {
        parse_workspace(text);
    } catch (const dsl_error& e) {
        return e.line();
    }
    return -1;
}

} // namespace

TEST_CASE("workspace declarations build validated objects") {
    Workspace ws = parse_workspace("algebra A = poly(x,y)\n"
                                   "module P = free(A,2) degree 1\n"
                                   "module Q = free(A,1) degree 2 basis (f)\n"
                                   "bilinear g : P*P -> Q = [[x,0],[0,1]]\n"
                                   "ole T = triole(A,P,Q,g)\n"
                                   "check-nole T\n");
    REQUIRE(ws.entries().size() == 5);
    CHECK(ws.commands().size() == 1);

    const auto& A = std::get<BaseAlgebra>(ws.find("A")->value);
    CHECK(A.nvars() == 2);
    CHECK(A.vars.name(0) == "x");

    const auto& P = std::get<FreeGradedModule>(ws.find("P")->value);
    CHECK(P.rank() == 2);
    CHECK(P.degree() == 1);
    CHECK(P.basis_name(0) == "p1");

    const auto& Q = std::get<FreeGradedModule>(ws.find("Q")->value);
    CHECK(Q.basis_name(0) == "f");

    const auto& g = std::get<BilinearMap>(ws.find("g")->value);
    CHECK(g.value(0, 0) == ModuleElement(Q, {A.var(0)}));
    CHECK(g.value(0, 1).is_zero());
    CHECK(g.is_symmetric());

    const auto& T = std::get<std::shared_ptr<const NoleAlgebra>>(ws.find("T")->value);
    CHECK(T->n() == 2);
    CHECK(T->component(1) == P);
}

TEST_CASE("parse diagnostics carry source positions") {
    CHECK(error_line("algebra A = poly(x)\nmodule P = free(B,2)\n") == 2);
    CHECK(error_line("algebra A = poly(x)\nalgebra A = poly(y)\n") == 2);
    CHECK(error_line("algebra A = poly(x)\nmodule P = free(A,0)\n") == 2);
    CHECK(error_line("algebra A = poly(x)\nmodule P = free(A,65)\n") == 2);
    CHECK(error_line("algebra A = poly(x,x)\n") == 1);
    CHECK(error_line("algebra A = poly(a,b,c,d,e,f,g,h,i)\n") == 1);

    try {
        parse_workspace("algebra A = poly(x)\nmodule P = free(B,2)\n");
        CHECK(false);
    } catch (const dsl_error& e) {
        CHECK(e.col() == 17);
        CHECK(std::string(e.what()) == "unknown name 'B'");
    }

    SUBCASE("bracket discipline") {
        CHECK_THROWS_AS(parse_workspace("algebra A = poly(x\n"), dsl_error);
        CHECK_THROWS_AS(parse_workspace("algebra A = poly(x))\n"), dsl_error);
    }

    SUBCASE("literal size limits") {
        std::string head = "algebra A = poly(x)\nmodule P = free(A,1) degree 0 basis (e)\n";
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = [[x^9]]\n"), dsl_error);
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = [[x^22]]\n"), dsl_error);
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = [[x^2*x^5]]\n"),
                        dsl_error);
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = 1 * d/dx^7\n"),
                        dsl_error);
        CHECK_NOTHROW(parse_workspace(head + "operator D : P -> P = [[x^6]]\n"));
    }

    SUBCASE("operator shape and variable checks") {
        std::string head = "algebra A = poly(x)\nmodule P = free(A,2) degree 0\n";
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = [[1,0]] * d/dx\n"),
                        dsl_error);
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = 1 * d/dt\n"), dsl_error);
        CHECK_THROWS_AS(parse_workspace(head + "operator D : P -> P = 1 * q/dx\n"), dsl_error);
    }

    SUBCASE("declaration construction failures point at the declaration") {
        std::string text = "algebra A = poly(x)\n"
                           "module P = free(A,2) degree 1\n"
                           "module Q = free(A,1) degree 2\n"
                           "bilinear bad : P*P -> Q = [[x,1],[0,1]]\n"
                           "ole T = triole(A,P,Q,bad)\n";
        try {
            parse_workspace(text);
            CHECK(false);
        } catch (const dsl_error& e) {
            CHECK(e.line() == 5);
            CHECK(std::string(e.what()).find("in declaration 'T'") == 0);
        }
    }
}

TEST_CASE("comments and bracket continuation assemble logical lines") {
    Workspace ws = parse_workspace("# a leading comment\n"
                                   "algebra A = poly(x,y)   # trailing comment\n"
                                   "\n"
                                   "module P = free(A,2) degree 0 basis (e1,\n"
                                   "                                     e2)\n"
                                   "operator D : P -> P = [[0,1],\n"
                                   "                       [1,0]] * d/dx  # split matrix\n"
                                   "check-order D 1\n");
    CHECK(ws.entries().size() == 3);
    const auto& D = std::get<OperatorExpr>(ws.find("D")->value);
    CHECK(D.syntactic_order() == 1);
    CHECK(ws.commands().size() == 1);
    CHECK(ws.commands()[0].line == 8);
}

TEST_CASE("the corpus exercises every command and the printer is a fixpoint") {
    auto files = corpus_files();
    CHECK(files.size() >= 20);

    std::set<std::string> heads;
    for (const auto& f : files) {
        std::string text = read_file(f);
        CAPTURE(f.string());
        Workspace ws1 = parse_workspace(text);
        std::string p1 = print_workspace(ws1);
        Workspace ws2 = parse_workspace(p1);
        std::string p2 = print_workspace(ws2);
        CHECK(p1 == p2);
        CHECK(ws1.entries().size() == ws2.entries().size());
        CHECK(ws1.commands().size() == ws2.commands().size());
        for (const auto& cmd : ws1.commands()) {
            heads.insert(cmd.tokens[0]);
            if (cmd.tokens[0] == "membership") heads.insert("membership " + cmd.tokens[1]);
        }
    }
    for (const char* required :
         {"check-order", "check-derivation", "decompose", "curvature", "check-gauge",
          "check-exact-atiyah", "check-exact-triolic-atiyah", "check-triolic-der0",
          "check-triolic-der1", "check-diffk", "check-nole", "check-truncated",
          "symmetry-basis", "membership orthogonal", "membership commutant",
          "membership complex", "gauge-equivalent"})
        CHECK_MESSAGE(heads.count(required) == 1, "missing command: " << required);
}

TEST_CASE("printed values round-trip to equal objects") {
    std::string text = "algebra A = poly(x,y)\n"
                       "module P = free(A,2) degree 1 basis (e1,e2)\n"
                       "module Q = free(A,2) degree 2 basis (f1,f2)\n"
                       "map phi : A -> A = (x^2,y + 1)\n"
                       "hom h : P -> Q = [[1/2,x],[0,y^2 - 3]]\n"
                       "bilinear g : P*P -> Q = [[(x,0),(1,1)],[(1,1),(0,-2)]]\n"
                       "operator D : P -> P = [[1,0],[0,1]] * d/dx^2 * d/dy + [[x + 1,0],[0,1]]\n"
                       "operator S : A -> A = (x^2 - 1/3) * d/dy + -2\n"
                       "connection N on P = ([[0,x],[-x,0]],[[1,0],[0,1]])\n"
                       "inner Xi = bilinear(g)\n"
                       "ole T = triole(A,P,Q,g)\n"
                       "module U0 = free(A,1) degree 0 basis (u)\n"
                       "module U1 = free(A,2) degree 1 basis (w1,w2)\n"
                       "module U2 = free(A,1) degree 2 basis (v)\n"
                       "truncated W = over(T; U0,U1,U2)\n";
    Workspace ws1 = parse_workspace(text);
    std::string p1 = print_workspace(ws1);
    Workspace ws2 = parse_workspace(p1);

    CHECK(std::get<AlgebraMap>(ws1.find("phi")->value) ==
          std::get<AlgebraMap>(ws2.find("phi")->value));
    CHECK(std::get<ModuleHom>(ws1.find("h")->value) == std::get<ModuleHom>(ws2.find("h")->value));
    CHECK(std::get<BilinearMap>(ws1.find("g")->value) ==
          std::get<BilinearMap>(ws2.find("g")->value));
    CHECK(std::get<OperatorExpr>(ws1.find("D")->value) ==
          std::get<OperatorExpr>(ws2.find("D")->value));
    CHECK(std::get<OperatorExpr>(ws1.find("S")->value) ==
          std::get<OperatorExpr>(ws2.find("S")->value));
    CHECK(std::get<Connection>(ws1.find("N")->value) ==
          std::get<Connection>(ws2.find("N")->value));
    CHECK(print_workspace(ws2) == p1);

    SUBCASE("operator coefficient conveniences") {
        Workspace w = parse_workspace("algebra A = poly(x)\n"
                                      "module P = free(A,2) degree 0\n"
                                      "operator I2 : P -> P = d/dx\n"
                                      "operator S2 : P -> P = x * d/dx\n"
                                      "operator Z : P -> P = 0\n");
        const auto& P = std::get<FreeGradedModule>(w.find("P")->value);
        CHECK(std::get<OperatorExpr>(w.find("I2")->value) == OperatorExpr::partial(P, 0));
        CHECK(std::get<OperatorExpr>(w.find("S2")->value) ==
              OperatorExpr::partial(P, 0).scaled(Poly::variable(P.base().vars, 0)));
        CHECK(std::get<OperatorExpr>(w.find("Z")->value).is_zero());
    }
}

TEST_CASE("reports are deterministic and byte-stable at a fixed seed") {
    for (const char* name : {"01_operator_order.gc", "10_diffk_triple.gc",
                             "19_bounded_search.gc", "22_zero_pairing.gc"}) {
        std::string text = read_file(kSourceDir + "/corpus/" + name);
        Workspace ws = parse_workspace(text);
        RunOptions opts;
        opts.seed = 12345;
        auto r1 = run_workspace(ws, opts);
        auto r2 = run_workspace(parse_workspace(text), opts);
        REQUIRE(r1.size() == r2.size());
        for (size_t i = 0; i < r1.size(); ++i) {
            CHECK(emit_report(r1[i], ReportFormat::structured) ==
                  emit_report(r2[i], ReportFormat::structured));
            CHECK(r1[i].timing_ms == 0);
            CHECK(r1[i].seed == 12345);
        }
    }
}

TEST_CASE("structured reports expose the fixed key order") {
    Workspace ws = parse_workspace("algebra A = poly(x)\n"
                                   "operator X : A -> A = 1 * d/dx\n"
                                   "check-derivation X\n");
    RunOptions opts;
    opts.seed = 3;
    CheckReport rep = run_command(ws, ws.commands()[0], opts);
    CHECK(emit_report(rep, ReportFormat::structured) ==
          "{\"command\":\"check-derivation X\",\"status\":\"pass\","
          "\"witnesses\":[\"Leibniz rule verified on the generator grid\"],"
          "\"timing_ms\":0,\"seed\":3}");
    CHECK(emit_report(rep, ReportFormat::text) ==
          "check-derivation X: pass [seed 3]\n  Leibniz rule verified on the generator grid");
}

TEST_CASE("command dispatch reports usage and lookup failures as errors") {
    Workspace ws = parse_workspace("algebra A = poly(x)\n"
                                   "module P = free(A,2) degree 0\n"
                                   "operator D : P -> P = 1 * d/dx\n"
                                   "frobnicate D\n"
                                   "check-order D\n"
                                   "check-order E 1\n"
                                   "check-order D 9\n"
                                   "curvature D\n"
                                   "membership sideways D D\n");
    RunOptions opts;
    auto reports = run_workspace(ws, opts);
    REQUIRE(reports.size() == 6);
    for (const auto& r : reports) CHECK(r.status == ReportStatus::error);
    CHECK(reports[0].witnesses[0] == "unknown command 'frobnicate'");
    CHECK(reports[0].witnesses[1].find("check-exact-triolic-atiyah") != std::string::npos);
    CHECK(reports[1].witnesses[0] == "usage: check-order <operator> <k>");
    CHECK(reports[2].witnesses[0] == "unknown name 'E'");
    CHECK(reports[3].witnesses[0] == "order k out of range [0, 6]");
    CHECK(reports[4].witnesses[0] == "'D' is not a connection");
    CHECK(reports[5].witnesses[0].find("unknown membership mode") == 0);
    CHECK(exit_code_for(reports) == 1);
}

TEST_CASE("exit codes fold pass, fail, inconclusive, error in precedence order") {
    auto rep = [](ReportStatus s) {
        CheckReport r;
        r.status = s;
        return r;
    };
    CHECK(exit_code_for({}) == 0);
    CHECK(exit_code_for({rep(ReportStatus::pass)}) == 0);
    CHECK(exit_code_for({rep(ReportStatus::pass), rep(ReportStatus::inconclusive)}) == 3);
    CHECK(exit_code_for({rep(ReportStatus::inconclusive), rep(ReportStatus::fail)}) == 2);
    CHECK(exit_code_for({rep(ReportStatus::fail), rep(ReportStatus::error)}) == 1);
}

TEST_CASE("seeded text mutations never escape the controlled diagnostic") {
    auto files = corpus_files();
    std::vector<std::string> texts;
    for (const auto& f : files) texts.push_back(read_file(f));
    Rng rng(2026);
    const std::string printable =
        " abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
        "()[]{},;:=*+-^/#_.\n";
    int parsed = 0, rejected = 0;
    for (int iter = 0; iter < 200; ++iter) {
        std::string t = texts[rng.uniform(0, static_cast<long>(texts.size()) - 1)];
        int edits = static_cast<int>(rng.uniform(1, 4));
        for (int e = 0; e < edits && !t.empty(); ++e) {
            size_t pos = static_cast<size_t>(rng.uniform(0, static_cast<long>(t.size()) - 1));
            switch (rng.uniform(0, 3)) {
                case 0:
                    t[pos] = printable[static_cast<size_t>(
                        rng.uniform(0, static_cast<long>(printable.size()) - 1))];
                    break;
                case 1: t.erase(pos, 1); break;
                case 2: t.insert(pos, 1, t[pos]); break;
                default: t = t.substr(0, pos); break;
            }
        }
        try {
            Workspace ws = parse_workspace(t);
            ++parsed;
        } catch (const dsl_error&) {
            ++rejected;
        }
        // anything else propagates and fails the test
    }
    CHECK(parsed + rejected == 200);
    CHECK(rejected > 0);
}
