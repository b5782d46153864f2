#include "gradcalc/workspace.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "gradcalc/derivation.hpp"
#include "gradcalc/error.hpp"

namespace gradcalc {

namespace {

constexpr size_t kMaxVars = 8;
constexpr size_t kMaxRank = 64;
constexpr int kMaxDegree = 6;

// One statement after comment stripping and bracket continuation, with the
// physical (line, col) of every character for diagnostics.
struct LogicalLine {
    std::string text;
    std::vector<std::pair<int, int>> org;
    int line = 1;
};

std::vector<LogicalLine> split_logical(const std::string& text) {
    std::vector<LogicalLine> out;
    LogicalLine cur;
    int line = 1, col = 0;
    int depth = 0;
    bool in_comment = false;
    auto flush = [&]() {
        bool blank = true;
        for (char ch : cur.text)
            if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
        if (!blank) out.push_back(cur);
        cur = LogicalLine{};
    };
    for (char ch : text) {
        if (ch == '\n') {
            ++line;
            col = 0;
            in_comment = false;
            if (depth == 0) {
                flush();
            } else if (!cur.text.empty()) {
                cur.text += ' ';
                cur.org.emplace_back(line - 1, col + 1);
            }
            continue;
        }
        ++col;
        if (in_comment) continue;
        if (ch == '#') {
            in_comment = true;
            continue;
        }
        if (ch == '(' || ch == '[' || ch == '{') ++depth;
        if (ch == ')' || ch == ']' || ch == '}') {
            --depth;
            if (depth < 0) throw dsl_error(line, col, "unbalanced closing bracket");
        }
        if (cur.text.empty()) {
            if (std::isspace(static_cast<unsigned char>(ch))) continue;
            cur.line = line;
        }
        cur.text += ch;
        cur.org.emplace_back(line, col);
    }
    if (depth > 0)
        throw dsl_error(cur.line, 1, "unclosed bracket at end of input");
    flush();
    return out;
}

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Splits on `delim` outside any bracket nesting. An empty input yields no
// parts rather than one empty part.
std::vector<std::string> split_top(const std::string& s, char delim) {
    std::vector<std::string> parts;
    if (trim(s).empty()) return parts;
    std::string curp;
    int d = 0;
    for (char c : s) {
        if (c == '(' || c == '[' || c == '{') ++d;
        if (c == ')' || c == ']' || c == '}') --d;
        if (c == delim && d == 0) {
            parts.push_back(curp);
            curp.clear();
        } else {
            curp += c;
        }
    }
    parts.push_back(curp);
    return parts;
}

// Left-to-right scanner over one logical line.
class Cur {
public:
    explicit Cur(const LogicalLine& L) : L_(L) {}

    void ws() {
        while (i_ < L_.text.size() && std::isspace(static_cast<unsigned char>(L_.text[i_]))) ++i_;
    }
    bool eof() {
        ws();
        return i_ >= L_.text.size();
    }
    char peek() {
        ws();
        return i_ < L_.text.size() ? L_.text[i_] : '\0';
    }
    std::pair<int, int> loc() {
        ws();
        if (L_.org.empty()) return {L_.line, 1};
        size_t k = i_ < L_.org.size() ? i_ : L_.org.size() - 1;
        return L_.org[k];
    }
    [[noreturn]] void fail(const std::string& msg) {
        auto [l, c] = loc();
        throw dsl_error(l, c, msg);
    }
    bool consume(char c) {
        if (peek() == c) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect(char c, const std::string& where) {
        if (!consume(c)) fail(std::string("expected '") + c + "' " + where);
    }
    bool consume_word(const std::string& w) {
        ws();
        if (L_.text.compare(i_, w.size(), w) != 0) return false;
        size_t after = i_ + w.size();
        if (after < L_.text.size() && ident_char(L_.text[after])) return false;
        i_ = after;
        return true;
    }
    std::string ident(const std::string& what) {
        ws();
        if (i_ >= L_.text.size() || !ident_start(L_.text[i_])) fail("expected " + what);
        size_t s = i_;
        while (i_ < L_.text.size() && ident_char(L_.text[i_])) ++i_;
        return L_.text.substr(s, i_ - s);
    }
    // Identifier or digit run; basis names may be bare numbers.
    std::string name_token(const std::string& what) {
        ws();
        if (i_ >= L_.text.size() || !ident_char(L_.text[i_])) fail("expected " + what);
        size_t s = i_;
        while (i_ < L_.text.size() && ident_char(L_.text[i_])) ++i_;
        return L_.text.substr(s, i_ - s);
    }
    long integer(const std::string& what, long lo, long hi) {
        ws();
        bool neg = false;
        size_t s = i_;
        if (i_ < L_.text.size() && L_.text[i_] == '-') {
            neg = true;
            ++i_;
        }
        long v = 0;
        size_t digits = 0;
        while (i_ < L_.text.size() && std::isdigit(static_cast<unsigned char>(L_.text[i_]))) {
            v = v * 10 + (L_.text[i_] - '0');
            ++digits;
            ++i_;
            if (v > 1000000) break;
        }
        if (digits == 0) {
            i_ = s;
            fail("expected " + what);
        }
        if (neg) v = -v;
        if (v < lo || v > hi) {
            i_ = s;
            fail(what + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return v;
    }
    // Consumes a bracketed group starting at `open`, returned including the
    // outer delimiters. Nesting of all bracket kinds is respected.
    std::string balanced(char open, const std::string& what) {
        ws();
        if (peek() != open) fail("expected '" + std::string(1, open) + "' " + what);
        size_t s = i_;
        int d = 0;
        while (i_ < L_.text.size()) {
            char c = L_.text[i_];
            if (c == '(' || c == '[' || c == '{') ++d;
            if (c == ')' || c == ']' || c == '}') --d;
            ++i_;
            if (d == 0) break;
        }
        if (d != 0) fail("unterminated bracket " + what);
        return L_.text.substr(s, i_ - s);
    }
    void end(const std::string& where) {
        if (!eof()) fail("unexpected trailing text " + where);
    }
    std::string rest_of_line() {
        ws();
        return i_ < L_.text.size() ? L_.text.substr(i_) : std::string();
    }

private:
    const LogicalLine& L_;
    size_t i_ = 0;
};

// Rejects literal exponents that a later Poly::parse would choke on or that
// exceed the supported degree bound, before any parsing work happens.
void guard_literal(const std::string& s, int line, int col) {
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '^') continue;
        size_t j = i + 1;
        while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        size_t d0 = j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        if (j == d0) throw dsl_error(line, col, "exponent must be a digit");
        if (j - d0 > 1 || s[d0] > '0' + kMaxDegree)
            throw dsl_error(line, col,
                            "exponent above the supported bound " + std::to_string(kMaxDegree));
    }
}

void guard_degree(const Poly& p, int line, int col) {
    if (p.total_degree() > kMaxDegree)
        throw dsl_error(line, col,
                        "polynomial degree above the supported bound " +
                            std::to_string(kMaxDegree));
}

Poly parse_poly_at(const std::string& text, const VarList& vars, int line, int col) {
    guard_literal(text, line, col);
    try {
        Poly p = Poly::parse(text, vars);
        guard_degree(p, line, col);
        return p;
    } catch (const dsl_error&) {
        throw;
    } catch (const std::exception& e) {
        throw dsl_error(line, col, e.what());
    }
}

PolyMatrix parse_matrix_at(const std::string& text, const VarList& vars, int line, int col) {
    guard_literal(text, line, col);
    try {
        PolyMatrix m = PolyMatrix::parse(text, vars);
        for (size_t i = 0; i < m.rows(); ++i)
            for (size_t j = 0; j < m.cols(); ++j) guard_degree(m.at(i, j), line, col);
        return m;
    } catch (const dsl_error&) {
        throw;
    } catch (const std::exception& e) {
        throw dsl_error(line, col, e.what());
    }
}

// Operator right-hand sides use the operator's own printed syntax: terms
// joined by depth-0 '+', each a coefficient (matrix, parenthesized
// polynomial, or bare polynomial; omitted means identity) followed by
// "d/d<var>[^k]" factors.
OperatorExpr parse_operator_rhs(const std::string& rhs, const FreeGradedModule& src,
                                const FreeGradedModule& tgt, int line, int col) {
    OperatorExpr D(src, tgt);
    std::string body = trim(rhs);
    if (body.empty()) throw dsl_error(line, col, "operator right-hand side is empty");
    if (body == "0") return D;
    guard_literal(body, line, col);
    const VarList& vars = src.base().vars;
    for (const std::string& raw : split_top(body, '+')) {
        std::string term = trim(raw);
        if (term.empty()) throw dsl_error(line, col, "empty operator term");
        size_t dpos = std::string::npos;
        int d = 0;
        for (size_t i = 0; i + 2 < term.size(); ++i) {
            char c = term[i];
            if (c == '(' || c == '[' || c == '{') ++d;
            else if (c == ')' || c == ']' || c == '}') --d;
            else if (d == 0 && term.compare(i, 3, "d/d") == 0) {
                dpos = i;
                break;
            }
        }
        std::string coeff = trim(dpos == std::string::npos ? term : term.substr(0, dpos));
        if (!coeff.empty() && coeff.back() == '*') coeff = trim(coeff.substr(0, coeff.size() - 1));
        PolyMatrix C;
        if (coeff.empty()) {
            if (src.rank() != tgt.rank())
                throw dsl_error(line, col, "an identity coefficient needs equal ranks");
            C = PolyMatrix::identity(vars, src.rank());
        } else if (coeff.front() == '[') {
            C = parse_matrix_at(coeff, vars, line, col);
        } else {
            std::string ptext = coeff;
            if (ptext.front() == '(') {
                if (ptext.back() != ')')
                    throw dsl_error(line, col, "unbalanced parenthesis in operator coefficient");
                ptext = trim(ptext.substr(1, ptext.size() - 2));
            }
            Poly p = parse_poly_at(ptext, vars, line, col);
            if (src.rank() != tgt.rank())
                throw dsl_error(line, col, "a scalar coefficient needs equal ranks");
            C = PolyMatrix::scalar(vars, src.rank(), p);
        }
        if (C.rows() != tgt.rank() || C.cols() != src.rank())
            throw dsl_error(line, col,
                            "operator coefficient must be " + std::to_string(tgt.rank()) + "x" +
                                std::to_string(src.rank()));
        Monomial alpha(vars.size(), 0);
        if (dpos != std::string::npos) {
            const std::string f = term.substr(dpos);
            size_t i = 0;
            while (i < f.size()) {
                if (std::isspace(static_cast<unsigned char>(f[i]))) {
                    ++i;
                    continue;
                }
                if (f[i] == '*') {
                    ++i;
                    continue;
                }
                if (f.compare(i, 3, "d/d") != 0)
                    throw dsl_error(line, col, "expected a d/d factor in the operator term");
                i += 3;
                size_t s = i;
                while (i < f.size() && ident_char(f[i])) ++i;
                if (s == i) throw dsl_error(line, col, "missing variable name after d/d");
                std::string vn = f.substr(s, i - s);
                int vi = vars.index_of(vn);
                if (vi < 0) throw dsl_error(line, col, "unknown variable '" + vn + "'");
                int k = 1;
                if (i < f.size() && f[i] == '^') {
                    ++i;
                    if (i >= f.size() || !std::isdigit(static_cast<unsigned char>(f[i])))
                        throw dsl_error(line, col, "exponent must be a digit");
                    k = f[i] - '0';
                    ++i;
                    if (k < 1 || k > kMaxDegree)
                        throw dsl_error(line, col, "d/d exponent out of range [1, " +
                                                       std::to_string(kMaxDegree) + "]");
                }
                alpha[static_cast<size_t>(vi)] += k;
            }
        }
        int total = 0;
        for (int e : alpha) total += e;
        if (total > kMaxDegree)
            throw dsl_error(line, col,
                            "operator order above the supported bound " +
                                std::to_string(kMaxDegree));
        try {
            D.add_term(alpha, C);
        } catch (const std::exception& e) {
            throw dsl_error(line, col, e.what());
        }
    }
    return D;
}

const Entry& resolve(const Workspace& ws, const std::string& n, int line, int col) {
    const Entry* e = ws.find(n);
    if (!e) throw dsl_error(line, col, "unknown name '" + n + "'");
    return *e;
}

const BaseAlgebra& want_algebra(const Workspace& ws, const std::string& n, int line, int col) {
    const Entry& e = resolve(ws, n, line, col);
    if (e.kind != EntryKind::algebra)
        throw dsl_error(line, col, "'" + n + "' is not an algebra");
    return std::get<BaseAlgebra>(e.value);
}

const FreeGradedModule& want_module(const Workspace& ws, const std::string& n, int line, int col) {
    const Entry& e = resolve(ws, n, line, col);
    if (e.kind != EntryKind::module)
        throw dsl_error(line, col, "'" + n + "' is not a module");
    return std::get<FreeGradedModule>(e.value);
}

const BilinearMap& want_bilinear(const Workspace& ws, const std::string& n, int line, int col) {
    const Entry& e = resolve(ws, n, line, col);
    if (e.kind != EntryKind::bilinear)
        throw dsl_error(line, col, "'" + n + "' is not a bilinear map");
    return std::get<BilinearMap>(e.value);
}

const AlgebraMap& want_map(const Workspace& ws, const std::string& n, int line, int col) {
    const Entry& e = resolve(ws, n, line, col);
    if (e.kind != EntryKind::map)
        throw dsl_error(line, col, "'" + n + "' is not an algebra map");
    return std::get<AlgebraMap>(e.value);
}

const std::shared_ptr<const NoleAlgebra>& want_ole(const Workspace& ws, const std::string& n,
                                                   int line, int col) {
    const Entry& e = resolve(ws, n, line, col);
    if (e.kind != EntryKind::ole)
        throw dsl_error(line, col, "'" + n + "' is not an ole algebra");
    return std::get<std::shared_ptr<const NoleAlgebra>>(e.value);
}

// Source or target position of an operator declaration: a module name, an
// algebra name (the unit module), or an ole name (its flattened total
// module).
FreeGradedModule operator_end(const Workspace& ws, const std::string& n, int line, int col) {
    const Entry& e = resolve(ws, n, line, col);
    if (e.kind == EntryKind::module) return std::get<FreeGradedModule>(e.value);
    if (e.kind == EntryKind::algebra) return unit_module(std::get<BaseAlgebra>(e.value));
    if (e.kind == EntryKind::ole)
        return total_module(*std::get<std::shared_ptr<const NoleAlgebra>>(e.value));
    throw dsl_error(line, col, "'" + n + "' is not a module, algebra, or ole");
}

BilinearMap parse_bilinear_table(const std::string& text, const FreeGradedModule& L,
                                 const FreeGradedModule& R, const FreeGradedModule& T, int line,
                                 int col) {
    std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw dsl_error(line, col, "expected a bracketed value table");
    guard_literal(t, line, col);
    const VarList& vars = T.base().vars;
    std::vector<std::string> rows = split_top(t.substr(1, t.size() - 2), ',');
    if (rows.size() != L.rank())
        throw dsl_error(line, col,
                        "value table needs " + std::to_string(L.rank()) + " rows, got " +
                            std::to_string(rows.size()));
    BilinearMap g(L, R, T);
    for (size_t i = 0; i < rows.size(); ++i) {
        std::string row = trim(rows[i]);
        if (row.size() < 2 || row.front() != '[' || row.back() != ']')
            throw dsl_error(line, col, "each table row must be bracketed");
        std::vector<std::string> cells = split_top(row.substr(1, row.size() - 2), ',');
        if (cells.size() != R.rank())
            throw dsl_error(line, col,
                            "table row " + std::to_string(i) + " needs " +
                                std::to_string(R.rank()) + " entries, got " +
                                std::to_string(cells.size()));
        for (size_t j = 0; j < cells.size(); ++j) {
            std::string cell = trim(cells[j]);
            if (cell.empty()) throw dsl_error(line, col, "empty table entry");
            if (cell.front() == '(') {
                if (cell.back() != ')')
                    throw dsl_error(line, col, "unbalanced tuple in table entry");
                std::vector<std::string> coords = split_top(cell.substr(1, cell.size() - 2), ',');
                if (coords.size() != T.rank())
                    throw dsl_error(line, col,
                                    "tuple entry needs " + std::to_string(T.rank()) +
                                        " coordinates, got " + std::to_string(coords.size()));
                std::vector<Poly> cs;
                for (const auto& co : coords) cs.push_back(parse_poly_at(trim(co), vars, line, col));
                g.value(i, j) = ModuleElement(T, std::move(cs));
            } else {
                if (T.rank() != 1)
                    throw dsl_error(line, col,
                                    "entry must be a tuple of " + std::to_string(T.rank()) +
                                        " coordinates for this target");
                g.value(i, j) = ModuleElement(T, {parse_poly_at(cell, vars, line, col)});
            }
        }
    }
    return g;
}

// "action(k,j) = name" inside a truncated-module declaration.
struct ActionClause {
    int k = 0, j = 0;
    std::string name;
};

ActionClause parse_action_clause(const std::string& text, int line, int col) {
    LogicalLine L;
    L.text = text;
    L.line = line;
    for (size_t p = 0; p < text.size(); ++p) L.org.emplace_back(line, col);
    Cur c(L);
    if (!c.consume_word("action")) c.fail("expected an action(k,j) = name clause");
    c.expect('(', "after action");
    ActionClause a;
    a.k = static_cast<int>(c.integer("action degree k", 0, kMaxDegree));
    c.expect(',', "between action indices");
    a.j = static_cast<int>(c.integer("action degree j", 0, kMaxDegree));
    c.expect(')', "after action indices");
    c.expect('=', "in action clause");
    a.name = c.ident("a bilinear map name");
    c.end("after action clause");
    return a;
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> toks;
    std::istringstream is(s);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

EntryKind keyword_kind(const std::string& w, bool& found) {
    found = true;
    if (w == "algebra") return EntryKind::algebra;
    if (w == "module") return EntryKind::module;
    if (w == "map") return EntryKind::map;
    if (w == "hom") return EntryKind::hom;
    if (w == "bilinear") return EntryKind::bilinear;
    if (w == "operator") return EntryKind::op;
    if (w == "connection") return EntryKind::connection;
    if (w == "inner") return EntryKind::inner;
    if (w == "ole") return EntryKind::ole;
    if (w == "truncated") return EntryKind::truncated;
    if (w == "along") return EntryKind::along;
    found = false;
    return EntryKind::algebra;
}

Entry parse_declaration(EntryKind kind, Cur& c, const Workspace& ws, const LogicalLine& L) {
    Entry e;
    e.kind = kind;
    auto [nl, nc] = c.loc();
    e.name = c.ident("a declaration name");
    if (ws.has(e.name)) throw dsl_error(nl, nc, "duplicate name '" + e.name + "'");
    auto [dl, dc] = c.loc();

    auto wrap = [&](auto&& fn) {
        try {
            fn();
        } catch (const dsl_error&) {
            throw;
        } catch (const std::exception& ex) {
            throw dsl_error(dl, dc, "in declaration '" + e.name + "': " + ex.what());
        }
    };

    switch (kind) {
        case EntryKind::algebra: {
            c.expect('=', "in algebra declaration");
            if (!c.consume_word("poly")) c.fail("expected poly(...)");
            c.expect('(', "after poly");
            std::vector<std::string> names;
            if (!c.consume(')')) {
                do {
                    names.push_back(c.ident("a variable name"));
                } while (c.consume(','));
                c.expect(')', "after the variable list");
            }
            c.end("after algebra declaration");
            if (names.size() > kMaxVars)
                throw dsl_error(dl, dc,
                                "at most " + std::to_string(kMaxVars) + " variables supported");
            std::set<std::string> uniq(names.begin(), names.end());
            if (uniq.size() != names.size())
                throw dsl_error(dl, dc, "variable names must be distinct");
            wrap([&] { e.value = BaseAlgebra(names); });
            break;
        }
        case EntryKind::module: {
            c.expect('=', "in module declaration");
            if (!c.consume_word("free")) c.fail("expected free(algebra, rank)");
            c.expect('(', "after free");
            auto [al, ac] = c.loc();
            std::string aname = c.ident("an algebra name");
            const BaseAlgebra& A = want_algebra(ws, aname, al, ac);
            c.expect(',', "between algebra and rank");
            long rank = c.integer("module rank", 1, static_cast<long>(kMaxRank));
            c.expect(')', "after the rank");
            int degree = 0;
            bool saw_degree = false, saw_basis = false;
            std::vector<std::string> basis;
            while (!c.eof()) {
                if (c.consume_word("degree")) {
                    if (saw_degree) c.fail("degree given twice");
                    saw_degree = true;
                    degree = static_cast<int>(c.integer("module degree", -kMaxDegree, kMaxDegree));
                } else if (c.consume_word("basis")) {
                    if (saw_basis) c.fail("basis given twice");
                    saw_basis = true;
                    c.expect('(', "after basis");
                    do {
                        basis.push_back(c.name_token("a basis name"));
                    } while (c.consume(','));
                    c.expect(')', "after the basis list");
                } else {
                    c.fail("expected degree or basis");
                }
            }
            e.refs = {aname};
            if (saw_basis) {
                if (basis.size() != static_cast<size_t>(rank))
                    throw dsl_error(dl, dc, "basis list must have exactly " +
                                                std::to_string(rank) + " names");
                std::set<std::string> uniq(basis.begin(), basis.end());
                if (uniq.size() != basis.size())
                    throw dsl_error(dl, dc, "basis names must be distinct");
                wrap([&] { e.value = FreeGradedModule(A, degree, basis); });
            } else {
                std::string prefix;
                for (char ch : e.name) prefix += static_cast<char>(std::tolower(ch));
                wrap([&] {
                    e.value = FreeGradedModule(A, degree, static_cast<size_t>(rank), prefix);
                });
            }
            break;
        }
        case EntryKind::map: {
            c.expect(':', "in map declaration");
            auto [sl, sc] = c.loc();
            std::string sname = c.ident("a source algebra");
            const BaseAlgebra& S = want_algebra(ws, sname, sl, sc);
            c.expect('-', "in the arrow");
            c.expect('>', "in the arrow");
            auto [tl, tc] = c.loc();
            std::string tname = c.ident("a target algebra");
            const BaseAlgebra& T = want_algebra(ws, tname, tl, tc);
            c.expect('=', "in map declaration");
            auto [bl, bc] = c.loc();
            std::string tuple = c.balanced('(', "for the image tuple");
            c.end("after map declaration");
            std::vector<std::string> imgs = split_top(tuple.substr(1, tuple.size() - 2), ',');
            if (imgs.size() != S.nvars())
                throw dsl_error(bl, bc,
                                "map needs " + std::to_string(S.nvars()) + " images, got " +
                                    std::to_string(imgs.size()));
            std::vector<Poly> images;
            for (const auto& im : imgs) images.push_back(parse_poly_at(trim(im), T.vars, bl, bc));
            e.refs = {sname, tname};
            wrap([&] { e.value = AlgebraMap(S, T, std::move(images)); });
            break;
        }
        case EntryKind::hom: {
            c.expect(':', "in hom declaration");
            auto [sl, sc] = c.loc();
            std::string sname = c.ident("a source module");
            const FreeGradedModule& S = want_module(ws, sname, sl, sc);
            c.expect('-', "in the arrow");
            c.expect('>', "in the arrow");
            auto [tl, tc] = c.loc();
            std::string tname = c.ident("a target module");
            const FreeGradedModule& T = want_module(ws, tname, tl, tc);
            c.expect('=', "in hom declaration");
            auto [ml, mc] = c.loc();
            std::string mtx = c.balanced('[', "for the matrix");
            c.end("after hom declaration");
            PolyMatrix m = parse_matrix_at(mtx, S.base().vars, ml, mc);
            e.refs = {sname, tname};
            wrap([&] { e.value = ModuleHom(S, T, std::move(m)); });
            break;
        }
        case EntryKind::bilinear: {
            c.expect(':', "in bilinear declaration");
            auto [ll, lc] = c.loc();
            std::string lname = c.ident("a left module");
            const FreeGradedModule& Lm = want_module(ws, lname, ll, lc);
            c.expect('*', "between the argument modules");
            auto [rl, rc] = c.loc();
            std::string rname = c.ident("a right module");
            const FreeGradedModule& Rm = want_module(ws, rname, rl, rc);
            c.expect('-', "in the arrow");
            c.expect('>', "in the arrow");
            auto [tl, tc] = c.loc();
            std::string tname = c.ident("a target module");
            const FreeGradedModule& Tm = want_module(ws, tname, tl, tc);
            c.expect('=', "in bilinear declaration");
            auto [bl, bc] = c.loc();
            std::string table = c.balanced('[', "for the value table");
            c.end("after bilinear declaration");
            e.refs = {lname, rname, tname};
            wrap([&] { e.value = parse_bilinear_table(table, Lm, Rm, Tm, bl, bc); });
            break;
        }
        case EntryKind::op: {
            c.expect(':', "in operator declaration");
            auto [sl, sc] = c.loc();
            std::string sname = c.ident("a source");
            FreeGradedModule S = operator_end(ws, sname, sl, sc);
            c.expect('-', "in the arrow");
            c.expect('>', "in the arrow");
            auto [tl, tc] = c.loc();
            std::string tname = c.ident("a target");
            FreeGradedModule T = operator_end(ws, tname, tl, tc);
            c.expect('=', "in operator declaration");
            auto [bl, bc] = c.loc();
            std::string rhs = c.rest_of_line();
            if (S.base() != T.base())
                throw dsl_error(bl, bc, "operator endpoints live over different algebras");
            e.refs = {sname, tname};
            wrap([&] { e.value = parse_operator_rhs(rhs, S, T, bl, bc); });
            break;
        }
        case EntryKind::connection: {
            if (!c.consume_word("on")) c.fail("expected 'on' in connection declaration");
            auto [pl, pc] = c.loc();
            std::string pname = c.ident("a module name");
            const FreeGradedModule& P = want_module(ws, pname, pl, pc);
            c.expect('=', "in connection declaration");
            auto [bl, bc] = c.loc();
            std::string tuple = c.balanced('(', "for the Christoffel tuple");
            c.end("after connection declaration");
            std::vector<std::string> parts = split_top(tuple.substr(1, tuple.size() - 2), ',');
            if (parts.size() != P.base().nvars())
                throw dsl_error(bl, bc,
                                "connection needs one matrix per variable (" +
                                    std::to_string(P.base().nvars()) + "), got " +
                                    std::to_string(parts.size()));
            std::vector<PolyMatrix> gammas;
            for (const auto& part : parts)
                gammas.push_back(parse_matrix_at(trim(part), P.base().vars, bl, bc));
            e.refs = {pname};
            wrap([&] { e.value = make_connection(P, std::move(gammas)); });
            break;
        }
        case EntryKind::inner: {
            c.expect('=', "in inner declaration");
            if (!c.consume_word("bilinear")) c.fail("expected bilinear(name)");
            c.expect('(', "after bilinear");
            auto [gl, gc] = c.loc();
            std::string gname = c.ident("a bilinear map name");
            const BilinearMap& g = want_bilinear(ws, gname, gl, gc);
            c.expect(')', "after the bilinear name");
            c.end("after inner declaration");
            e.refs = {gname};
            wrap([&] { e.value = inner_from_bilinear(g); });
            break;
        }
        case EntryKind::ole: {
            c.expect('=', "in ole declaration");
            bool triole = c.consume_word("triole");
            if (!triole && !c.consume_word("diole")) c.fail("expected triole(...) or diole(...)");
            c.expect('(', "after the ole kind");
            auto [al, ac] = c.loc();
            std::string aname = c.ident("an algebra name");
            const BaseAlgebra& A = want_algebra(ws, aname, al, ac);
            c.expect(',', "in the ole argument list");
            auto [pl, pc] = c.loc();
            std::string pname = c.ident("a module name");
            const FreeGradedModule& P = want_module(ws, pname, pl, pc);
            if (triole) {
                c.expect(',', "in the ole argument list");
                auto [ql, qc] = c.loc();
                std::string qname = c.ident("a module name");
                const FreeGradedModule& Q = want_module(ws, qname, ql, qc);
                c.expect(',', "in the ole argument list");
                auto [gl, gc] = c.loc();
                std::string gname = c.ident("a bilinear map name");
                const BilinearMap& g = want_bilinear(ws, gname, gl, gc);
                c.expect(')', "after the ole arguments");
                c.end("after ole declaration");
                e.refs = {aname, pname, qname, gname};
                wrap([&] {
                    e.value = std::make_shared<const NoleAlgebra>(
                        build_triole(A, P, Q, g, ws.signs()));
                });
            } else {
                c.expect(')', "after the ole arguments");
                c.end("after ole declaration");
                e.refs = {aname, pname};
                wrap([&] {
                    e.value = std::make_shared<const NoleAlgebra>(build_diole(A, P, ws.signs()));
                });
            }
            break;
        }
        case EntryKind::truncated: {
            c.expect('=', "in truncated declaration");
            bool trivial = c.consume_word("trivial");
            if (!trivial && !c.consume_word("over")) c.fail("expected trivial(...) or over(...)");
            auto [bl, bc] = c.loc();
            std::string inner_text = c.balanced('(', "for the truncated arguments");
            c.end("after truncated declaration");
            std::string body = inner_text.substr(1, inner_text.size() - 2);
            if (trivial) {
                std::string wname = trim(body);
                const auto& alg = want_ole(ws, wname, bl, bc);
                e.refs = {wname};
                wrap([&] { e.value = trivial_diole_module(alg); });
            } else {
                std::vector<std::string> sections = split_top(body, ';');
                if (sections.size() != 2 && sections.size() != 3)
                    throw dsl_error(bl, bc,
                                    "over(...) takes ole; components[; actions], got " +
                                        std::to_string(sections.size()) + " sections");
                std::string wname = trim(sections[0]);
                const auto& alg = want_ole(ws, wname, bl, bc);
                e.refs = {wname};
                std::vector<FreeGradedModule> comps;
                for (const auto& part : split_top(sections[1], ',')) {
                    std::string mn = trim(part);
                    comps.push_back(want_module(ws, mn, bl, bc));
                    e.refs.push_back(mn);
                }
                std::map<std::pair<int, int>, BilinearMap> actions;
                if (sections.size() == 3) {
                    std::vector<ActionClause> clauses;
                    for (const auto& part : split_top(sections[2], ','))
                        clauses.push_back(parse_action_clause(trim(part), bl, bc));
                    std::sort(clauses.begin(), clauses.end(),
                              [](const ActionClause& a, const ActionClause& b) {
                                  return std::make_pair(a.k, a.j) < std::make_pair(b.k, b.j);
                              });
                    for (const auto& cl : clauses) {
                        if (actions.count({cl.k, cl.j}))
                            throw dsl_error(bl, bc,
                                            "action(" + std::to_string(cl.k) + "," +
                                                std::to_string(cl.j) + ") given twice");
                        actions.emplace(std::make_pair(cl.k, cl.j),
                                        want_bilinear(ws, cl.name, bl, bc));
                        e.refs.push_back(cl.name);
                        e.action_keys.emplace_back(cl.k, cl.j);
                    }
                }
                wrap([&] { e.value = build_truncated(alg, comps, actions); });
            }
            break;
        }
        case EntryKind::along: {
            c.expect(':', "in along declaration");
            auto [pl, pc] = c.loc();
            std::string pname = c.ident("a source module");
            const FreeGradedModule& P = want_module(ws, pname, pl, pc);
            c.expect('-', "in the arrow");
            c.expect('>', "in the arrow");
            auto [ql, qc] = c.loc();
            std::string qname = c.ident("a target module");
            const FreeGradedModule& Q = want_module(ws, qname, ql, qc);
            if (!c.consume_word("via")) c.fail("expected 'via' and an algebra map");
            auto [fl, fc] = c.loc();
            std::string fname = c.ident("an algebra map name");
            const AlgebraMap& phi = want_map(ws, fname, fl, fc);
            c.expect('=', "in along declaration");
            auto [ml, mc] = c.loc();
            std::string mtx = c.balanced('[', "for the matrix");
            c.end("after along declaration");
            PolyMatrix m = parse_matrix_at(mtx, Q.base().vars, ml, mc);
            e.refs = {pname, qname, fname};
            wrap([&] { e.value = make_along_module(phi, P, Q, std::move(m)); });
            break;
        }
    }
    (void)L;
    return e;
}

std::string bilinear_table_text(const BilinearMap& g) {
    std::string s = "[";
    for (size_t i = 0; i < g.left().rank(); ++i) {
        if (i) s += ",";
        s += "[";
        for (size_t j = 0; j < g.right().rank(); ++j) {
            if (j) s += ",";
            const ModuleElement& v = g.value(i, j);
            if (g.target().rank() == 1) {
                s += v.coords[0].to_string();
            } else {
                s += "(";
                for (size_t t = 0; t < v.coords.size(); ++t) {
                    if (t) s += ",";
                    s += v.coords[t].to_string();
                }
                s += ")";
            }
        }
        s += "]";
    }
    s += "]";
    return s;
}

template <class Seq, class F>
std::string join_map(const Seq& seq, const std::string& sep, F&& f) {
    std::string out;
    bool first = true;
    for (const auto& x : seq) {
        if (!first) out += sep;
        first = false;
        out += f(x);
    }
    return out;
}

std::string entry_text(const Entry& e) {
    switch (e.kind) {
        case EntryKind::algebra: {
            const auto& A = std::get<BaseAlgebra>(e.value);
            return "algebra " + e.name + " = poly(" +
                   join_map(A.vars.names(), ",", [](const std::string& s) { return s; }) + ")";
        }
        case EntryKind::module: {
            const auto& m = std::get<FreeGradedModule>(e.value);
            return "module " + e.name + " = free(" + e.refs[0] + "," +
                   std::to_string(m.rank()) + ") degree " + std::to_string(m.degree()) +
                   " basis (" +
                   join_map(m.basis(), ",", [](const std::string& s) { return s; }) + ")";
        }
        case EntryKind::map: {
            const auto& f = std::get<AlgebraMap>(e.value);
            return "map " + e.name + " : " + e.refs[0] + " -> " + e.refs[1] + " = (" +
                   join_map(f.images, ",", [](const Poly& p) { return p.to_string(); }) + ")";
        }
        case EntryKind::hom: {
            const auto& h = std::get<ModuleHom>(e.value);
            return "hom " + e.name + " : " + e.refs[0] + " -> " + e.refs[1] + " = " +
                   h.matrix.to_string();
        }
        case EntryKind::bilinear: {
            const auto& g = std::get<BilinearMap>(e.value);
            return "bilinear " + e.name + " : " + e.refs[0] + "*" + e.refs[1] + " -> " +
                   e.refs[2] + " = " + bilinear_table_text(g);
        }
        case EntryKind::op: {
            const auto& D = std::get<OperatorExpr>(e.value);
            return "operator " + e.name + " : " + e.refs[0] + " -> " + e.refs[1] + " = " +
                   D.to_string();
        }
        case EntryKind::connection: {
            const auto& n = std::get<Connection>(e.value);
            return "connection " + e.name + " on " + e.refs[0] + " = (" +
                   join_map(n.christoffels, ",",
                            [](const PolyMatrix& m) { return m.to_string(); }) +
                   ")";
        }
        case EntryKind::inner:
            return "inner " + e.name + " = bilinear(" + e.refs[0] + ")";
        case EntryKind::ole: {
            if (e.refs.size() == 2)
                return "ole " + e.name + " = diole(" + e.refs[0] + "," + e.refs[1] + ")";
            return "ole " + e.name + " = triole(" + e.refs[0] + "," + e.refs[1] + "," +
                   e.refs[2] + "," + e.refs[3] + ")";
        }
        case EntryKind::truncated: {
            if (e.refs.size() == 1) return "truncated " + e.name + " = trivial(" + e.refs[0] + ")";
            size_t ncomps = e.refs.size() - 1 - e.action_keys.size();
            std::string s = "truncated " + e.name + " = over(" + e.refs[0] + "; ";
            for (size_t i = 0; i < ncomps; ++i) {
                if (i) s += ",";
                s += e.refs[1 + i];
            }
            if (!e.action_keys.empty()) {
                s += "; ";
                for (size_t i = 0; i < e.action_keys.size(); ++i) {
                    if (i) s += ", ";
                    s += "action(" + std::to_string(e.action_keys[i].first) + "," +
                         std::to_string(e.action_keys[i].second) + ") = " +
                         e.refs[1 + ncomps + i];
                }
            }
            s += ")";
            return s;
        }
        case EntryKind::along: {
            const auto& a = std::get<AlongModule>(e.value);
            return "along " + e.name + " : " + e.refs[0] + " -> " + e.refs[1] + " via " +
                   e.refs[2] + " = " + a.phibar.to_string();
        }
    }
    return "";
}

} // namespace

const Entry* Workspace::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

Workspace parse_workspace(const std::string& text, SignConvention signs) {
    Workspace ws;
    ws.signs_ = signs;
    for (const LogicalLine& L : split_logical(text)) {
        Cur c(L);
        bool is_decl = false;
        EntryKind kind = EntryKind::algebra;
        if (ident_start(L.text[0])) {
            size_t p = 0;
            while (p < L.text.size() && ident_char(L.text[p])) ++p;
            kind = keyword_kind(L.text.substr(0, p), is_decl);
        }
        if (!is_decl) {
            ws.commands_.push_back(Command{tokenize(L.text), L.line});
            ws.order_.emplace_back(true, ws.commands_.size() - 1);
            continue;
        }
        c.ident("keyword");
        Entry e = parse_declaration(kind, c, ws, L);
        ws.index_[e.name] = ws.entries_.size();
        ws.entries_.push_back(std::move(e));
        ws.order_.emplace_back(false, ws.entries_.size() - 1);
    }
    return ws;
}

std::string print_workspace(const Workspace& ws) {
    std::string out;
    for (const auto& [is_command, idx] : ws.order()) {
        if (is_command) {
            const Command& cmd = ws.commands()[idx];
            out += join_map(cmd.tokens, " ", [](const std::string& t) { return t; });
        } else {
            out += entry_text(ws.entries()[idx]);
        }
        out += "\n";
    }
    return out;
}

} // namespace gradcalc
