#pragma once

#include <string>
#include <vector>

#include "magintegra/expr.hpp"

namespace magintegra {

// Accumulated nonvanishing facts justifying divisions during a derivation.
// The ledger only grows.
class AssumptionLedger {
  public:
    void assert_nonzero(const Expr& e) {
        if (e.is_zero()) throw std::domain_error("cannot assume 0 != 0");
        if (e.is_rational_const()) return;
        // store the numerator polynomial, normalized up to scalar
        Expr fact(e.num());
        for (auto& f : facts_)
            if (equal_up_to_scalar(f, fact)) return;
        facts_.push_back(fact);
    }

    const std::vector<Expr>& facts() const { return facts_; }

    bool covers(const Expr& e) const {
        for (auto& f : facts_)
            if (equal_up_to_scalar(f, e)) return true;
        return false;
    }

    // Conservative nonzero test: nonzero rational constants, monomials in
    // atoms individually asserted nonzero, and expressions proportional to a
    // recorded fact.
    bool is_nonzero(const Expr& e) const {
        if (e.is_zero()) return false;
        if (e.is_rational_const()) return true;
        if (covers(Expr(e.num()))) return true;
        if (e.num().size() == 1) {
            for (auto& [a, p] : e.num().begin()->first)
                if (!covers(Expr(Atom(a)))) return false;
            return true;
        }
        return false;
    }

    size_t size() const { return facts_.size(); }

  private:
    std::vector<Expr> facts_;
};

inline Expr div(const Expr& a, const Expr& b, AssumptionLedger* ledger) {
    if (b.is_zero()) throw std::domain_error("division by zero expression");
    if (a.is_zero()) return Expr();
    if (!b.is_rational_const() && ledger) ledger->assert_nonzero(b);
    // 1/b: numerator becomes the expanded denominator of b, b's numerator
    // moves under the bar (normalization splits it into factors).
    DenFactors den = a.den();
    den[b.num()] += 1;
    return Expr(poly_mul(a.num(), expand_den(b.den())), den);
}

inline Expr Expr::map_atoms(const std::function<std::optional<Expr>(const Atom&)>& fn,
                            AssumptionLedger* ledger) const {
    auto eval_poly = [&](const Polynomial& p) {
        Expr out;
        for (auto& [m, c] : p) {
            Expr term(c);
            for (auto& [a, e] : m) {
                auto repl = fn(a);
                Expr base = repl ? *repl : Expr(a);
                term = term * base.pow(e);
            }
            out = out + term;
        }
        return out;
    };
    Expr out = eval_poly(num_);
    for (auto& [f, e] : den_) {
        Expr fe = eval_poly(f);
        for (int i = 0; i < e; ++i) out = div(out, fe, ledger);
    }
    return out;
}

// Substitute all occurrences of `target` by `replacement`. For a FuncAtom
// target, higher derivatives are rewritten by differentiating the replacement.
inline Expr substitute(const Expr& e, const Atom& target, const Expr& replacement,
                       AssumptionLedger* ledger = nullptr) {
    bool present = false;
    for (const Atom& a : e.atoms()) {
        if (target.kind == Atom::Kind::Func)
            present = a.kind == Atom::Kind::Func && a.name == target.name &&
                      a.dx >= target.dx && a.dy >= target.dy;
        else
            present = a == target;
        if (present) break;
    }
    if (!present) return e;
    if (target.kind == Atom::Kind::Func) {
        FuncDep d = FunctionRegistry::instance().dep(target.name);
        if (d == FuncDep::XOnly && replacement.depends_on(PhaseVar::Y))
            throw std::invalid_argument("replacement for x-only function '" + target.name +
                                        "' depends on y");
        if (d == FuncDep::YOnly && replacement.depends_on(PhaseVar::X))
            throw std::invalid_argument("replacement for y-only function '" + target.name +
                                        "' depends on x");
        std::map<std::pair<int, int>, Expr> cache{{{0, 0}, replacement}};
        auto deriv = [&](int p, int q) -> const Expr& {
            auto it = cache.find({p, q});
            if (it != cache.end()) return it->second;
            // build up incrementally along x first, then y
            const Expr* cur = &cache.at({0, 0});
            for (int i = 1; i <= p; ++i) {
                auto c = cache.find({i, 0});
                if (c == cache.end())
                    c = cache.emplace(std::make_pair(i, 0), cur->diff(PhaseVar::X)).first;
                cur = &c->second;
            }
            for (int j = 1; j <= q; ++j) {
                auto c = cache.find({p, j});
                if (c == cache.end())
                    c = cache.emplace(std::make_pair(p, j), cur->diff(PhaseVar::Y)).first;
                cur = &c->second;
            }
            return *cur;
        };
        return e.map_atoms(
            [&](const Atom& a) -> std::optional<Expr> {
                if (a.kind != Atom::Kind::Func || a.name != target.name) return std::nullopt;
                if (a.dx < target.dx || a.dy < target.dy) return std::nullopt;
                return deriv(a.dx - target.dx, a.dy - target.dy);
            },
            ledger);
    }
    return e.map_atoms(
        [&](const Atom& a) -> std::optional<Expr> {
            if (a == target) return replacement;
            return std::nullopt;
        },
        ledger);
}

// Coefficient extraction: e as a polynomial in the given atoms, with
// coefficients free of them. The denominator must not involve the atoms.
inline std::map<Monomial, Expr, MonoLess> as_polynomial_in(const Expr& e,
                                                           const std::set<Atom>& vars) {
    auto atom_depends = [&](const Atom& a) {
        for (const Atom& v : vars) {
            if (a == v) continue;  // the collected atom itself is fine
            if (v.kind != Atom::Kind::Phase) continue;
            PhaseVar pv = v.pv;
            if (a.kind == Atom::Kind::Trans && (pv == PhaseVar::X || pv == PhaseVar::Y))
                throw std::invalid_argument(
                    "collection variable appears inside a transcendental atom");
            if (a.kind == Atom::Kind::Func) {
                FuncDep d = FunctionRegistry::instance().dep(a.name);
                bool dep = (pv == PhaseVar::X && d != FuncDep::YOnly) ||
                           (pv == PhaseVar::Y && d != FuncDep::XOnly);
                if (dep)
                    throw std::invalid_argument(
                        "collection variable appears inside unknown function '" + a.name + "'");
            }
        }
    };
    for (auto& [f, ex] : e.den())
        for (auto& [m, c] : f)
            for (auto& [a, p] : m)
                if (vars.count(a))
                    throw std::invalid_argument(
                        "denominator depends on a collection variable; clear it first");
    std::map<Monomial, Polynomial, MonoLess> groups;
    for (auto& [m, c] : e.num()) {
        Monomial vm, rest;
        for (auto& [a, p] : m) {
            atom_depends(a);
            if (vars.count(a))
                vm.emplace_back(a, p);
            else
                rest.emplace_back(a, p);
        }
        poly_add_term(groups[vm], rest, c);
    }
    std::map<Monomial, Expr, MonoLess> out;
    for (auto& [m, p] : groups) {
        Expr c(p, e.den());
        if (!c.is_zero()) out.emplace(m, c);
    }
    return out;
}

// Clear the (variable-free) denominator of an equation `e = 0`, recording the
// discarded factors as nonvanishing.
inline Expr clear_denominator(const Expr& e, AssumptionLedger* ledger) {
    if (ledger)
        for (auto& [f, ex] : e.den()) ledger->assert_nonzero(Expr(f));
    return Expr(e.num());
}

}  // namespace magintegra
