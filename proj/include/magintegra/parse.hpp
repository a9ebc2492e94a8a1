#pragma once

#include <cctype>
#include <set>
#include <string>

#include "magintegra/ledger.hpp"

namespace magintegra {

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int l, int c)
        : std::runtime_error(msg + " (line " + std::to_string(l) + ", column " +
                             std::to_string(c) + ")"),
          line(l),
          column(c) {}
};

// Recursive-descent parser for the expression language:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' integer)?
//   primary := integer | name | name '(' args ')' | '(' expr ')'
// Names: x y p1 p2 pi, registered functions, declared parameters, ln(...),
// atan(...), D(f,i,j), dx(...), dy(...).
class Parser {
  public:
    Parser(std::string src, std::set<std::string> params)
        : src_(std::move(src)), params_(std::move(params)) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

  private:
    Expr parse_expr() {
        Expr e = parse_term();
        while (true) {
            skip_ws();
            if (accept('+'))
                e = e + parse_term();
            else if (accept('-'))
                e = e - parse_term();
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            skip_ws();
            if (accept('*')) {
                e = e * parse_factor();
            } else if (accept('/')) {
                Expr d = parse_factor();
                if (d.is_zero()) fail("division by zero");
                e = div(e, d, nullptr);
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        skip_ws();
        if (accept('-')) return -parse_factor();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        skip_ws();
        if (accept('^')) {
            skip_ws();
            bool neg = accept('-');
            long n = parse_integer();
            if (neg) {
                Expr out = Expr::one();
                for (long i = 0; i < n; ++i) out = div(out, base, nullptr);
                return out;
            }
            return base.pow(static_cast<int>(n));
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return Expr(Rational(parse_integer()));
        if (accept('(')) {
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(std::string("unexpected character '") + c + "'");
        return Expr();
    }

    Expr parse_name() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        if (name == "x") return Expr::var(PhaseVar::X);
        if (name == "y") return Expr::var(PhaseVar::Y);
        if (name == "p1") return Expr::var(PhaseVar::P1);
        if (name == "p2") return Expr::var(PhaseVar::P2);
        if (name == "pi") return Expr(Atom::pi());
        if (name == "ln") {
            Expr arg = parse_call_arg();
            Expr r2 = Expr::var(PhaseVar::X) * Expr::var(PhaseVar::X) +
                      Expr::var(PhaseVar::Y) * Expr::var(PhaseVar::Y);
            if (!(arg - r2).is_zero())
                fail("ln argument outside the registered family; only ln(x^2+y^2) is supported");
            return Expr(Atom::trans_atom(TransId::LnR2));
        }
        if (name == "atan") {
            Expr arg = parse_call_arg();
            Expr xy = div(Expr::var(PhaseVar::X), Expr::var(PhaseVar::Y), nullptr);
            Expr yx = div(Expr::var(PhaseVar::Y), Expr::var(PhaseVar::X), nullptr);
            if ((arg - xy).is_zero()) return Expr(Atom::trans_atom(TransId::AtanXY));
            if ((arg - yx).is_zero()) {
                // canonicalized at construction: atan(y/x) = pi/2 - atan(x/y)
                return Expr(Atom::pi()) * Rational(1, 2) - Expr(Atom::trans_atom(TransId::AtanXY));
            }
            fail("atan argument outside the registered family; only atan(x/y) and atan(y/x) are "
                 "supported");
        }
        if (name == "D") {
            expect('(');
            skip_ws();
            std::string fname = parse_identifier();
            if (!FunctionRegistry::instance().is_registered(fname))
                fail("unknown function '" + fname + "' in D()");
            expect(',');
            long i = parse_integer();
            expect(',');
            long j = parse_integer();
            expect(')');
            return Expr::func(fname, static_cast<int>(i), static_cast<int>(j));
        }
        if (name == "dx" || name == "dy") {
            Expr arg = parse_call_arg();
            return arg.diff(name == "dx" ? PhaseVar::X : PhaseVar::Y);
        }
        if (params_.count(name)) return Expr::param(name);
        if (FunctionRegistry::instance().is_registered(name)) return Expr::func(name);
        fail("unknown identifier '" + name + "'; declare it as a parameter or register it");
        return Expr();
    }

    Expr parse_call_arg() {
        expect('(');
        Expr e = parse_expr();
        expect(')');
        return e;
    }

    std::string parse_identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected identifier");
        return src_.substr(start, pos_ - start);
    }

    long parse_integer() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer");
        return std::stol(src_.substr(start, pos_ - start));
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_ws();
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    [[noreturn]] void fail(const std::string& msg) {
        int line = 1, col = 1;
        for (size_t i = 0; i < pos_ && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }

    std::string src_;
    std::set<std::string> params_;
    size_t pos_ = 0;
};

inline Expr parse_expr(const std::string& src, const std::set<std::string>& params = {}) {
    return Parser(src, params).parse();
}

}  // namespace magintegra
