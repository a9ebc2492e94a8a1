#pragma once

#include <sstream>
#include <string>

#include "magintegra/expr.hpp"

namespace magintegra {

namespace detail {

inline std::string rational_text(const Rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r);
    if (boost::multiprecision::denominator(r) != 1)
        os << "/" << boost::multiprecision::denominator(r);
    return os.str();
}

// one term: |coeff| * atoms^exps (sign handled by caller)
inline std::string term_text(const Monomial& m, const Rational& c) {
    std::ostringstream os;
    Rational a = c < 0 ? Rational(-c) : c;
    bool need_coeff = a != 1 || m.empty();
    if (need_coeff) os << rational_text(a);
    bool first = !need_coeff;
    for (auto& [atom, e] : m) {
        if (!first) os << "*";
        first = false;
        os << atom.display();
        if (e != 1) os << "^" << e;
    }
    return os.str();
}

inline std::string poly_text(const Polynomial& p) {
    if (p.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // descending monomial order, larger terms first
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        if (it->second < 0)
            os << (first ? "-" : " - ");
        else if (!first)
            os << " + ";
        os << term_text(it->first, it->second);
        first = false;
    }
    return os.str();
}

inline std::string atom_latex(const Atom& a) {
    auto greek = [](const std::string& n) {
        // beta12 -> \beta_{12}, k11 -> k_{11}, s1 -> s_1
        size_t i = 0;
        while (i < n.size() && !std::isdigit(static_cast<unsigned char>(n[i]))) ++i;
        std::string head = n.substr(0, i), tail = n.substr(i);
        if (head == "beta") head = "\\beta";
        if (head == "alpha") head = "\\alpha";
        if (head == "lambda") head = "\\lambda";
        if (tail.empty()) return head;
        if (tail.size() == 1) return head + "_" + tail;
        return head + "_{" + tail + "}";
    };
    switch (a.kind) {
        case Atom::Kind::Phase:
            switch (a.pv) {
                case PhaseVar::X: return "x";
                case PhaseVar::Y: return "y";
                case PhaseVar::P1: return "p_1";
                case PhaseVar::P2: return "p_2";
            }
            return "?";
        case Atom::Kind::Param:
            return greek(a.name);
        case Atom::Kind::Func: {
            std::string base = greek(a.name);
            if (a.dx == 0 && a.dy == 0) return base;
            std::string idx(static_cast<size_t>(a.dx), 'x');
            idx += std::string(static_cast<size_t>(a.dy), 'y');
            return "\\partial_{" + idx + "} " + base;
        }
        case Atom::Kind::Trans:
            return a.trans == TransId::LnR2 ? "\\ln\\left(x^2+y^2\\right)"
                                            : "\\arctan\\left(\\frac{x}{y}\\right)";
        case Atom::Kind::Pi:
            return "\\pi";
    }
    return "?";
}

inline std::string term_latex(const Monomial& m, const Rational& c) {
    std::ostringstream os;
    Rational a = c < 0 ? Rational(-c) : c;
    BigInt n = boost::multiprecision::numerator(a), d = boost::multiprecision::denominator(a);
    std::ostringstream body;
    bool first = true;
    for (auto& [atom, e] : m) {
        if (!first) body << " ";
        first = false;
        std::string at = atom_latex(atom);
        bool wrap = atom.kind == Atom::Kind::Func && (atom.dx || atom.dy) && e != 1;
        if (wrap) body << "\\left(" << at << "\\right)";
        else body << at;
        if (e != 1) body << "^{" << e << "}";
    }
    if (d != 1) {
        os << "\\frac{" << (n == 1 && !m.empty() ? "" : n.str());
        if (n == 1 && !m.empty()) os << body.str();
        else if (!m.empty()) os << " " << body.str();
        os << "}{" << d.str() << "}";
        return os.str();
    }
    if (n != 1 || m.empty()) os << n.str() << (m.empty() ? "" : " ");
    os << body.str();
    return os.str();
}

inline std::string poly_latex(const Polynomial& p) {
    if (p.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        if (it->second < 0)
            os << "-";
        else if (!first)
            os << "+";
        os << term_latex(it->first, it->second);
        first = false;
    }
    return os.str();
}

}  // namespace detail

// Deterministic plain-text rendering; parse(emit_text(e)) == e.
inline std::string emit_text(const Expr& e) {
    std::string n = detail::poly_text(e.num());
    if (e.den().empty()) return n;
    std::ostringstream os;
    os << "(" << n << ")/(";
    bool first = true;
    for (auto& [f, ex] : e.den()) {
        if (!first) os << "*";
        first = false;
        os << "(" << detail::poly_text(f) << ")";
        if (ex != 1) os << "^" << ex;
    }
    os << ")";
    return os.str();
}

inline std::string emit_latex(const Expr& e) {
    std::string n = detail::poly_latex(e.num());
    if (e.den().empty()) return n;
    std::ostringstream os;
    os << "\\frac{" << n << "}{";
    bool first = true;
    for (auto& [f, ex] : e.den()) {
        if (!first) os << " ";
        first = false;
        os << "\\left(" << detail::poly_latex(f) << "\\right)";
        if (ex != 1) os << "^{" << ex << "}";
    }
    os << "}";
    return os.str();
}

}  // namespace magintegra
