#pragma once

#include <json.hpp>

#include <sstream>
#include <string>

#include "magintegra/expr.hpp"

namespace magintegra {

// --- s-expression form -------------------------------------------------------
//
// (expr (num term*) (den (factor exp term*)*))
// term   := (t (q num den) (a atom exp)*)
// atom   := (pv x|y|p1|p2) | (par name) | (fn name i j) | (tr lnr2|atanxy) | (pi)

namespace detail {

inline void sexpr_atom(std::ostream& os, const Atom& a) {
    switch (a.kind) {
        case Atom::Kind::Phase: os << "(pv " << phase_var_name(a.pv) << ")"; break;
        case Atom::Kind::Param: os << "(par " << a.name << ")"; break;
        case Atom::Kind::Func: os << "(fn " << a.name << " " << a.dx << " " << a.dy << ")"; break;
        case Atom::Kind::Trans:
            os << "(tr " << (a.trans == TransId::LnR2 ? "lnr2" : "atanxy") << ")";
            break;
        case Atom::Kind::Pi: os << "(pi)"; break;
    }
}

inline void sexpr_poly(std::ostream& os, const Polynomial& p) {
    for (auto& [m, c] : p) {
        os << "(t (q " << boost::multiprecision::numerator(c) << " "
           << boost::multiprecision::denominator(c) << ")";
        for (auto& [a, e] : m) {
            os << " (a ";
            sexpr_atom(os, a);
            os << " " << e << ")";
        }
        os << ")";
    }
}

class SexprReader {
  public:
    explicit SexprReader(const std::string& s) : s_(s) {}

    Expr read_expr() {
        open("expr");
        open("num");
        Polynomial num = read_poly();
        close();
        DenFactors den;
        open("den");
        while (peek_open()) {
            open("factor");
            int e = read_int();
            Polynomial f = read_poly();
            close();
            den[f] += e;
        }
        close();
        close();
        return Expr(num, den);
    }

  private:
    Polynomial read_poly() {
        Polynomial p;
        while (peek_open()) {
            open("t");
            open("q");
            BigInt n = read_bigint();
            BigInt d = read_bigint();
            close();
            Monomial m;
            while (peek_open()) {
                open("a");
                Atom a = read_atom();
                int e = read_int();
                close();
                m.emplace_back(a, e);
            }
            close();
            poly_add_term(p, m, Rational(n, d));
        }
        return p;
    }

    Atom read_atom() {
        skip();
        expect('(');
        std::string tag = read_word();
        Atom a;
        if (tag == "pv") {
            std::string v = read_word();
            PhaseVar pv = v == "x"    ? PhaseVar::X
                          : v == "y"  ? PhaseVar::Y
                          : v == "p1" ? PhaseVar::P1
                                      : PhaseVar::P2;
            a = Atom::phase(pv);
        } else if (tag == "par") {
            a = Atom::param(read_word());
        } else if (tag == "fn") {
            std::string n = read_word();
            int i = read_int(), j = read_int();
            a = Atom::func(n, i, j);
        } else if (tag == "tr") {
            a = Atom::trans_atom(read_word() == "lnr2" ? TransId::LnR2 : TransId::AtanXY);
        } else if (tag == "pi") {
            a = Atom::pi();
        } else {
            throw std::runtime_error("bad atom tag '" + tag + "' in s-expression");
        }
        skip();
        expect(')');
        return a;
    }

    void open(const std::string& tag) {
        skip();
        expect('(');
        std::string w = read_word();
        if (w != tag) throw std::runtime_error("expected (" + tag + "), got (" + w);
    }
    bool peek_open() {
        skip();
        return pos_ < s_.size() && s_[pos_] == '(';
    }
    void close() {
        skip();
        expect(')');
    }
    void expect(char c) {
        if (pos_ >= s_.size() || s_[pos_] != c)
            throw std::runtime_error(std::string("s-expression: expected '") + c + "'");
        ++pos_;
    }
    std::string read_word() {
        skip();
        size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '(' && s_[pos_] != ')') ++pos_;
        return s_.substr(start, pos_ - start);
    }
    int read_int() { return std::stoi(read_word()); }
    BigInt read_bigint() { return BigInt(read_word()); }
    void skip() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n')) ++pos_;
    }

    const std::string& s_;
    size_t pos_ = 0;
};

inline nlohmann::json json_atom(const Atom& a) {
    using nlohmann::json;
    switch (a.kind) {
        case Atom::Kind::Phase: return json{{"k", "pv"}, {"v", phase_var_name(a.pv)}};
        case Atom::Kind::Param: return json{{"k", "par"}, {"v", a.name}};
        case Atom::Kind::Func:
            return json{{"k", "fn"}, {"v", a.name}, {"d", {a.dx, a.dy}}};
        case Atom::Kind::Trans:
            return json{{"k", "tr"}, {"v", a.trans == TransId::LnR2 ? "lnr2" : "atanxy"}};
        case Atom::Kind::Pi: return json{{"k", "pi"}};
    }
    return {};
}

inline Atom atom_from_json(const nlohmann::json& j) {
    std::string k = j.at("k");
    if (k == "pv") {
        std::string v = j.at("v");
        return Atom::phase(v == "x"    ? PhaseVar::X
                           : v == "y"  ? PhaseVar::Y
                           : v == "p1" ? PhaseVar::P1
                                       : PhaseVar::P2);
    }
    if (k == "par") return Atom::param(j.at("v"));
    if (k == "fn") return Atom::func(j.at("v"), j.at("d")[0], j.at("d")[1]);
    if (k == "tr") return Atom::trans_atom(j.at("v") == "lnr2" ? TransId::LnR2 : TransId::AtanXY);
    return Atom::pi();
}

inline nlohmann::json json_poly(const Polynomial& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (auto& [m, c] : p) {
        nlohmann::json atoms = nlohmann::json::array();
        for (auto& [a, e] : m) atoms.push_back({json_atom(a), e});
        terms.push_back({{"c",
                          {boost::multiprecision::numerator(c).str(),
                           boost::multiprecision::denominator(c).str()}},
                         {"atoms", atoms}});
    }
    return terms;
}

inline Polynomial poly_from_json(const nlohmann::json& j) {
    Polynomial p;
    for (auto& t : j) {
        Monomial m;
        for (auto& ae : t.at("atoms")) m.emplace_back(atom_from_json(ae[0]), ae[1].get<int>());
        Rational c(BigInt(t.at("c")[0].get<std::string>()),
                   BigInt(t.at("c")[1].get<std::string>()));
        poly_add_term(p, m, c);
    }
    return p;
}

}  // namespace detail

inline std::string emit_sexpr(const Expr& e) {
    std::ostringstream os;
    os << "(expr (num ";
    detail::sexpr_poly(os, e.num());
    os << ") (den ";
    for (auto& [f, ex] : e.den()) {
        os << "(factor " << ex << " ";
        detail::sexpr_poly(os, f);
        os << ")";
    }
    os << "))";
    return os.str();
}

inline Expr parse_sexpr(const std::string& s) { return detail::SexprReader(s).read_expr(); }

// JSON rendering, schema "magintegra-expr/1": term list with integer pairs
// for rationals.
inline nlohmann::json to_json(const Expr& e) {
    nlohmann::json den = nlohmann::json::array();
    for (auto& [f, ex] : e.den()) den.push_back({{"exp", ex}, {"terms", detail::json_poly(f)}});
    return {{"schema", "magintegra-expr/1"},
            {"num", detail::json_poly(e.num())},
            {"den", den}};
}

inline Expr expr_from_json(const nlohmann::json& j) {
    if (j.at("schema") != "magintegra-expr/1")
        throw std::runtime_error("unsupported expression schema");
    Polynomial num = detail::poly_from_json(j.at("num"));
    DenFactors den;
    for (auto& f : j.at("den")) den[detail::poly_from_json(f.at("terms"))] += f.at("exp").get<int>();
    return Expr(num, den);
}

}  // namespace magintegra
