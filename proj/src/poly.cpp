#include "gradcalc/poly.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <set>
#include <sstream>

namespace gradcalc {

VarList::VarList(std::vector<std::string> names) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw structural_error("empty variable name");
        if (!seen.insert(n).second)
            throw structural_error("duplicate variable name '" + n + "'");
    }
    names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

int VarList::index_of(const std::string& n) const {
    for (size_t i = 0; i < names_->size(); ++i)
        if ((*names_)[i] == n) return static_cast<int>(i);
    return -1;
}

Poly Poly::constant(const VarList& vars, const Rational& c) {
    Poly p(vars);
    if (c != 0) p.terms_[Monomial(vars.size(), 0)] = c;
    return p;
}

Poly Poly::variable(const VarList& vars, size_t index) {
    if (index >= vars.size()) throw structural_error("variable index out of range");
    Monomial m(vars.size(), 0);
    m[index] = 1;
    Poly p(vars);
    p.terms_[m] = 1;
    return p;
}

Poly Poly::variable(const VarList& vars, const std::string& name) {
    int i = vars.index_of(name);
    if (i < 0) throw structural_error("unknown variable '" + name + "'");
    return variable(vars, static_cast<size_t>(i));
}

Poly Poly::monomial(const VarList& vars, const Monomial& m, const Rational& c) {
    if (m.size() != vars.size())
        throw structural_error("monomial length does not match variable list");
    for (int e : m)
        if (e < 0) throw structural_error("negative exponent in monomial");
    Poly p(vars);
    if (c != 0) p.terms_[m] = c;
    return p;
}

bool Poly::is_constant() const {
    if (terms_.empty()) return true;
    return terms_.size() == 1 && mono_degree(terms_.begin()->first) == 0;
}

Rational Poly::constant_value() const {
    auto it = terms_.find(Monomial(vars_.size(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
}

int Poly::total_degree() const {
    if (terms_.empty()) return -1;
    return mono_degree(terms_.rbegin()->first);
}

Rational Poly::coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
    if (m.size() != vars_.size())
        throw structural_error("monomial length does not match variable list");
    if (c == 0) return;
    auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

void Poly::check_same_vars(const Poly& o) const {
    if (vars_ != o.vars_)
        throw structural_error("polynomials over different variable lists");
}

Poly Poly::operator-() const {
    Poly r(vars_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

Poly& Poly::operator+=(const Poly& o) {
    check_same_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    check_same_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    r += o;
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    r -= o;
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    check_same_vars(o);
    Poly r(vars_);
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            Monomial m(ma.size());
            for (size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

Poly& Poly::operator*=(const Poly& o) {
    *this = *this * o;
    return *this;
}

Poly Poly::operator*(const Rational& c) const {
    Poly r(vars_);
    if (c == 0) return r;
    for (const auto& [m, k] : terms_) r.terms_[m] = k * c;
    return r;
}

Poly Poly::pow(int e) const {
    if (e < 0) throw structural_error("negative polynomial power");
    Poly acc = Poly::constant(vars_, 1);
    for (int i = 0; i < e; ++i) acc *= *this;
    return acc;
}

bool Poly::operator==(const Poly& o) const {
    return vars_ == o.vars_ && terms_ == o.terms_;
}

Poly Poly::partial(size_t i) const {
    if (i >= vars_.size()) throw structural_error("partial w.r.t. unknown variable");
    Poly r(vars_);
    for (const auto& [m, c] : terms_) {
        if (m[i] == 0) continue;
        Monomial d = m;
        d[i] -= 1;
        r.add_term(d, c * m[i]);
    }
    return r;
}

Rational Poly::eval(const std::vector<Rational>& point) const {
    if (point.size() != vars_.size())
        throw structural_error("evaluation point has wrong dimension");
    Rational acc = 0;
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] != 0) t *= rat_pow(point[i], m[i]);
        acc += t;
    }
    return acc;
}

Poly Poly::compose(const std::vector<Poly>& images) const {
    if (images.size() != vars_.size())
        throw structural_error("substitution needs one image per variable");
    VarList tvars = images.empty() ? VarList() : images[0].vars();
    for (const auto& im : images)
        if (im.vars() != tvars)
            throw structural_error("substitution images over different variable lists");
    Poly acc(tvars);
    for (const auto& [m, c] : terms_) {
        Poly t = Poly::constant(tvars, c);
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] != 0) t *= images[i].pow(m[i]);
        acc += t;
    }
    return acc;
}

namespace {

std::string mono_to_string(const Monomial& m, const VarList& vars) {
    std::string s;
    for (size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        if (!s.empty()) s += "*";
        s += vars.name(i);
        if (m[i] > 1) s += "^" + std::to_string(m[i]);
    }
    return s;
}

} // namespace

std::string Poly::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const Rational& c = it->second;
        bool neg = c < 0;
        Rational a = neg ? Rational(-c) : c;
        if (out.empty())
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        std::string ms = mono_to_string(it->first, vars_);
        if (ms.empty())
            out += rat_to_string(a);
        else if (a == 1)
            out += ms;
        else
            out += rat_to_string(a) + "*" + ms;
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.to_string(); }

// --- small recursive-descent parser for the canonical text form ---

namespace {

struct PolyLexer {
    const std::string& s;
    size_t pos = 0;

    explicit PolyLexer(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
    std::string number() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) throw structural_error("expected number in polynomial at '" + s.substr(pos) + "'");
        return s.substr(start, pos - start);
    }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
        auto body = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
        if (pos < s.size() && head(s[pos])) {
            ++pos;
            while (pos < s.size() && body(s[pos])) ++pos;
        }
        if (start == pos) throw structural_error("expected name in polynomial at '" + s.substr(pos) + "'");
        return s.substr(start, pos - start);
    }
    bool at_end() {
        skip_ws();
        return pos >= s.size();
    }
};

Poly parse_factor(PolyLexer& lx, const VarList& vars) {
    char c = lx.peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string num = lx.number();
        if (lx.eat('/')) {
            std::string den = lx.number();
            return Poly::constant(vars, rat_parse(num + "/" + den));
        }
        return Poly::constant(vars, rat_parse(num));
    }
    std::string name = lx.ident();
    Poly v = Poly::variable(vars, name);
    if (lx.eat('^')) {
        std::string e = lx.number();
        return v.pow(std::stoi(e));
    }
    return v;
}

Poly parse_term(PolyLexer& lx, const VarList& vars) {
    Poly p = parse_factor(lx, vars);
    while (lx.eat('*')) p *= parse_factor(lx, vars);
    return p;
}

} // namespace

Poly Poly::parse(const std::string& text, const VarList& vars) {
    PolyLexer lx(text);
    bool neg = false;
    if (lx.eat('-'))
        neg = true;
    else
        lx.eat('+');
    Poly acc = parse_term(lx, vars);
    if (neg) acc = -acc;
    while (!lx.at_end()) {
        if (lx.eat('+'))
            acc += parse_term(lx, vars);
        else if (lx.eat('-'))
            acc -= parse_term(lx, vars);
        else
            throw structural_error("unexpected input in polynomial at '" + text.substr(lx.pos) + "'");
    }
    return acc;
}

} // namespace gradcalc
