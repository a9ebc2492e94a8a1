#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magintegra/detgen.hpp"
#include "magintegra/render.hpp"

namespace magintegra {

// ---------------------------------------------------------------------------
// Elimination primitives shared by every case chain.
// ---------------------------------------------------------------------------

// Solve `eq = 0` for `target` (must enter linearly). The coefficient of the
// target is recorded as nonvanishing.
inline Expr isolate(const Expr& eq, const Atom& target, AssumptionLedger* ledger) {
    Expr cleared = clear_denominator(eq, ledger);
    auto groups = as_polynomial_in(cleared, {target});
    Expr coeff, rest;
    for (auto& [m, c] : groups) {
        int deg = m.empty() ? 0 : m[0].second;
        if (deg == 0)
            rest = c;
        else if (deg == 1)
            coeff = c;
        else
            throw std::invalid_argument("equation is nonlinear in " + target.display());
    }
    if (coeff.is_zero())
        throw std::invalid_argument("target " + target.display() + " absent from equation");
    return -div(rest, coeff, ledger);
}

// Exact integration failure carries the obstruction.
struct IntegrationError : std::runtime_error {
    Expr residual;
    explicit IntegrationError(Expr r)
        : std::runtime_error("no exact antiderivative: residual " + r.key()),
          residual(std::move(r)) {}
};

struct Integration {
    Expr relation;  // G - C = 0 with dG/dv reproducing the input equation
    Atom constant;  // the fresh univariate function C
};

namespace detail {

// Pick a name for a fresh integration "constant" depending only on `dep`.
inline Atom fresh_constant(FuncDep dep, const std::string& requested) {
    auto& reg = FunctionRegistry::instance();
    if (!requested.empty()) {
        reg.register_function(requested, dep);
        return Atom::func(requested);
    }
    // B1(x), B2(y) are the conventional names; fall back to C1, C2, ...
    for (const char* n : {"B1", "B2"}) {
        if (reg.is_registered(n) && reg.dep(n) == dep) return Atom::func(n);
    }
    for (int i = 1;; ++i) {
        std::string n = "C" + std::to_string(i);
        if (!reg.is_registered(n)) {
            reg.register_function(n, dep);
            return Atom::func(n);
        }
        if (reg.dep(n) == dep) return Atom::func(n);
    }
}

}  // namespace detail

// Integrate `eq = 0` with respect to v in {x, y}: find G, linear in the same
// unknown functions, with dG/dv == eq, and return G - C = 0 with a fresh
// function C of the complementary variable. Each derivative chain
// u_j = d^j/dv^j (d^t u) is handled by the descending recurrence
// c_{j-1} = e_j - d(c_j)/dv; a v-free total residual is absorbed as
// residual * v, and for a single length-one chain an integrating factor
// e1^q (rational power detected from e0 / d(e1)/dv) is tried before failing.
inline Integration integrate_in_variable(const Expr& eq, PhaseVar v,
                                         AssumptionLedger* ledger = nullptr,
                                         const std::string& constant_name = "") {
    if (v != PhaseVar::X && v != PhaseVar::Y)
        throw std::invalid_argument("integration variable must be x or y");
    const bool in_y = (v == PhaseVar::Y);

    std::set<Atom> funcs;
    for (const Atom& a : eq.atoms())
        if (a.kind == Atom::Kind::Func) funcs.insert(a);
    auto groups = as_polynomial_in(eq, funcs);

    // chains keyed by (name, transverse order); value maps j -> coefficient
    std::map<std::pair<std::string, int>, std::map<int, Expr>> chains;
    Expr pure;
    for (auto& [m, c] : groups) {
        if (m.empty()) {
            pure = c;
            continue;
        }
        if (m.size() != 1 || m[0].second != 1)
            throw std::invalid_argument("equation is not linear in its unknown functions");
        const Atom& u = m[0].first;
        int t = in_y ? u.dx : u.dy;
        int j = in_y ? u.dy : u.dx;
        chains[{u.name, t}][j] = c;
    }

    auto chain_atom = [&](const std::string& name, int t, int j) {
        return in_y ? Atom::func(name, t, j) : Atom::func(name, j, t);
    };

    auto attempt = [&](const std::map<std::pair<std::string, int>, std::map<int, Expr>>& ch,
                       const Expr& pure_part) -> std::pair<Expr, Expr> {
        Expr G, residual = pure_part;
        for (auto& [key, coeffs] : ch) {
            int jmax = coeffs.rbegin()->first;
            Expr c_next;  // c_{jmax} = 0
            for (int j = jmax; j >= 1; --j) {
                auto it = coeffs.find(j);
                Expr e_j = it == coeffs.end() ? Expr() : it->second;
                Expr c = e_j - c_next.diff(v);
                G = G + c * Expr(chain_atom(key.first, key.second, j - 1));
                c_next = c;
            }
            auto it0 = coeffs.find(0);
            Expr e_0 = it0 == coeffs.end() ? Expr() : it0->second;
            residual = residual + (e_0 - c_next.diff(v)) * Expr(chain_atom(key.first, key.second, 0));
        }
        return {G, residual};
    };

    auto [G, residual] = attempt(chains, pure);
    if (!residual.is_zero() && residual.depends_on(v) && chains.size() == 1 && pure.is_zero()) {
        // single chain e1 * u' + e0 * u: try the integrating factor e1^q with
        // e0 proportional to d(e1)/dv by the rational q + 1
        auto& coeffs = chains.begin()->second;
        if (coeffs.size() == 2 && coeffs.count(0) && coeffs.count(1)) {
            Expr de1 = coeffs.at(1).diff(v);
            Rational rho;
            if (!de1.is_zero() && equal_up_to_scalar(coeffs.at(0), de1, &rho) && rho != 1) {
                Rational q = rho - 1;
                if (boost::multiprecision::denominator(q) == 1 &&
                    boost::multiprecision::numerator(q) > 0) {
                    int qi = boost::multiprecision::numerator(q).convert_to<int>();
                    Expr mu = coeffs.at(1).pow(qi);
                    if (ledger) ledger->assert_nonzero(coeffs.at(1));
                    std::map<std::pair<std::string, int>, std::map<int, Expr>> scaled;
                    for (auto& [j, c] : coeffs) scaled[chains.begin()->first][j] = c * mu;
                    auto [G2, r2] = attempt(scaled, Expr());
                    G = G2;
                    residual = r2;
                }
            }
        }
    }
    if (!residual.is_zero()) {
        if (residual.depends_on(v)) throw IntegrationError(residual);
        G = G + residual * Expr::var(v);
    }

    Atom c = detail::fresh_constant(in_y ? FuncDep::XOnly : FuncDep::YOnly, constant_name);
    return {G - Expr(c), c};
}

// Cross-differentiate solved forms for the two first partials of a function
// and eliminate every remaining derivative of it by re-substitution.
inline Expr mixed_partial_consistency(const Expr& dx_expr, const Expr& dy_expr,
                                      const std::string& fname = "B",
                                      AssumptionLedger* ledger = nullptr) {
    Atom fx = Atom::func(fname, 1, 0), fy = Atom::func(fname, 0, 1);
    for (const Expr* s : {&dx_expr, &dy_expr})
        for (const Atom& a : s->atoms())
            if (a.kind == Atom::Kind::Func && a.name == fname && a.dx + a.dy > 0)
                throw std::invalid_argument("solved form still contains a derivative of " + fname);
    Expr comp = dx_expr.diff(PhaseVar::Y) - dy_expr.diff(PhaseVar::X);
    for (int round = 0; round < 16; ++round) {
        bool derived = false;
        for (const Atom& a : comp.atoms())
            if (a.kind == Atom::Kind::Func && a.name == fname && a.dx + a.dy > 0) derived = true;
        if (!derived) return comp;
        comp = substitute(comp, fx, dx_expr, ledger);
        comp = substitute(comp, fy, dy_expr, ledger);
    }
    throw std::invalid_argument("circular substitution: derivatives of " + fname +
                                " cannot be eliminated");
}

// ---------------------------------------------------------------------------
// Compatibility conditions derived from a determining system.
// ---------------------------------------------------------------------------

enum class CompatFlavor { Parabolic, General };

namespace detail {

// The derived F-atom of the requested multi-index present in eq, if any.
inline std::optional<Atom> derived_func(const Expr& eq, int dx, int dy,
                                        const std::string& skip = "") {
    for (const Atom& a : eq.atoms())
        if (a.kind == Atom::Kind::Func && a.dx == dx && a.dy == dy && dx + dy > 0 &&
            a.name != skip)
            return a;
    return std::nullopt;
}

inline std::string potential_name(const Expr& zeroth) {
    for (const Atom& a : zeroth.atoms())
        if (a.kind == Atom::Kind::Func && a.dx + a.dy == 1) return a.name;
    throw std::invalid_argument("zeroth-order equation has no potential gradient");
}

}  // namespace detail

// Eliminate the auxiliary functions of the second-order block through the
// smoothness of their mixed partials, leaving a PDE for the magnetic field
// alone.
inline Expr magnetic_compatibility(const DeterminingSystem& sys, CompatFlavor flavor) {
    auto fx1 = detail::derived_func(sys.second[0], 1, 0);
    auto fy2 = detail::derived_func(sys.second[1], 0, 1);
    if (!fx1 || !fy2)
        throw std::invalid_argument(
            "second-order equations carry no unknown functions to eliminate");
    const std::string f1 = fx1->name, f2 = fy2->name;
    AssumptionLedger scratch;
    Expr rhs1 = isolate(sys.second[0], Atom::func(f1, 1, 0), &scratch);
    Expr rhs2 = isolate(sys.second[1], Atom::func(f2, 0, 1), &scratch);
    Expr rhs3 = isolate(sys.second[2], Atom::func(f1, 0, 1), &scratch) + Expr::func(f2, 1, 0);
    Expr comp = rhs3.diff(PhaseVar::X).diff(PhaseVar::Y) -
                rhs1.diff(PhaseVar::Y).diff(PhaseVar::Y) -
                rhs2.diff(PhaseVar::X).diff(PhaseVar::X);
    for (const Atom& a : comp.atoms())
        if (a.kind == Atom::Kind::Func && (a.name == f1 || a.name == f2))
            throw std::logic_error("auxiliary function survived the compatibility elimination");
    // fix the overall scale so both flavors read as published
    return flavor == CompatFlavor::Parabolic ? -comp : comp;
}

// Divide an equation by the positional variables common to all its terms,
// recording them as nonvanishing.
inline Expr strip_phase_content(const Expr& e, AssumptionLedger* ledger) {
    if (e.is_zero()) return e;
    std::map<PhaseVar, int> common;
    bool first = true;
    for (auto& [m, c] : e.num()) {
        std::map<PhaseVar, int> here;
        for (auto& [a, p] : m)
            if (a.kind == Atom::Kind::Phase) here[a.pv] = p;
        if (first) {
            common = here;
            first = false;
        } else {
            for (auto it = common.begin(); it != common.end();) {
                auto h = here.find(it->first);
                if (h == here.end()) {
                    it = common.erase(it);
                } else {
                    it->second = std::min(it->second, h->second);
                    ++it;
                }
            }
        }
        if (common.empty()) break;
    }
    Expr out = e;
    for (auto& [v, p] : common) {
        if (ledger) ledger->assert_nonzero(Expr::var(v));
        for (int i = 0; i < p; ++i) out = div(out, Expr::var(v), nullptr);
    }
    return out;
}

// Combine the two magnetic compatibility conditions into the first-order PDE
// used by all case chains (requires at least one of b, c, d nonzero).
inline Expr reduce_compB2(const Expr& compB1, const Expr& compB2, const IntegralAnsatz& az,
                          AssumptionLedger* ledger) {
    if (az.b.is_zero() && az.c.is_zero() && az.d.is_zero())
        throw std::invalid_argument("b = c = d = 0 has no second independent integral to reduce");
    Expr x = Expr::var(PhaseVar::X), y = Expr::var(PhaseVar::Y);
    Expr g = az.b + az.d * x - az.c * x * y * Rational(2);
    // the relative normalization of the published conditions makes this a
    // subtraction; the second derivatives of B cancel identically
    Expr red = (compB2 - div(g * compB1, y, ledger)) * y * Rational(1, 2);
    return strip_phase_content(red, ledger);
}

// Commuting mixed partials of the first-order auxiliary function m_j give the
// compatibility condition on the electrostatic potential, one per integral.
inline Expr potential_compatibility_one(const DeterminingSystem& sys) {
    std::string w = detail::potential_name(sys.zeroth);
    auto mx = detail::derived_func(sys.first[0], 1, 0, w);
    if (!mx) throw std::invalid_argument("first-order equations carry no auxiliary function");
    const std::string m = mx->name;
    AssumptionLedger scratch;
    Expr rhs_x = isolate(sys.first[0], Atom::func(m, 1, 0), &scratch);
    Expr rhs_y = isolate(sys.first[1], Atom::func(m, 0, 1), &scratch);
    Expr comp = rhs_x.diff(PhaseVar::Y) - rhs_y.diff(PhaseVar::X);
    for (const Atom& a : comp.atoms())
        if (a.kind == Atom::Kind::Func && a.name == m)
            throw std::logic_error("auxiliary function survived the compatibility elimination");
    return comp;
}

inline std::pair<Expr, Expr> potential_compatibility(const DeterminingSystem& sys1,
                                                     const DeterminingSystem& sys2) {
    return {potential_compatibility_one(sys1), potential_compatibility_one(sys2)};
}

namespace detail {

// Split k1 * dW/dx + k2 * dW/dy into (k1, k2) given the potential's name.
inline std::pair<Expr, Expr> zeroth_coefficients(const Expr& zeroth, const std::string& wname) {
    auto groups =
        as_polynomial_in(zeroth, {Atom::func(wname, 1, 0), Atom::func(wname, 0, 1)});
    Expr k1, k2;
    for (auto& [m, c] : groups) {
        if (m.size() != 1 || m[0].second != 1)
            throw std::invalid_argument("zeroth-order equation is not linear in the potential");
        if (m[0].first.dx == 1)
            k1 = c;
        else
            k2 = c;
    }
    return {k1, k2};
}

}  // namespace detail

// The two zeroth-order equations force proportional gradients; eliminating
// dW/dy yields the condition coupling both integrals.
inline std::pair<Expr, Expr> zeroth_compatibility(const DeterminingSystem& sys1,
                                                  const DeterminingSystem& sys2,
                                                  AssumptionLedger* ledger) {
    std::string w = detail::potential_name(sys1.zeroth);
    auto [k1, k2] = detail::zeroth_coefficients(sys1.zeroth, w);
    auto [s1, s2] = detail::zeroth_coefficients(sys2.zeroth, w);
    Expr eqksw = (div(s1, s2, ledger) - div(k1, k2, ledger)) * Expr::func(w, 1, 0);
    Expr compks = k2 * s1 - k1 * s2;
    return {eqksw, compks};
}

// ---------------------------------------------------------------------------
// Parameter constraints and their forced elimination.
// ---------------------------------------------------------------------------

struct Constraint {
    Expr value;       // parameter-only expression required to vanish
    Monomial origin;  // the monomial in the collection variables it came from
};

struct ConstraintSet {
    std::vector<Constraint> items;
};

inline ConstraintSet polynomial_coefficient_constraints(const Expr& e, const std::set<Atom>& vars,
                                                        AssumptionLedger* ledger = nullptr) {
    Expr cleared = clear_denominator(e, ledger);
    auto groups = as_polynomial_in(cleared, vars);
    ConstraintSet cs;
    for (auto& [m, c] : groups) {
        for (const Atom& a : c.atoms())
            if (a.kind != Atom::Kind::Param && a.kind != Atom::Kind::Pi)
                throw std::invalid_argument("coefficient of " + (m.empty() ? std::string("1") :
                                            m[0].first.display()) + " is not parameter-only");
        cs.items.push_back({c, m});
    }
    return cs;
}

struct EliminationResult {
    std::map<Atom, Expr> assignment;
    std::vector<Constraint> residual;
    std::vector<std::string> trace;
    bool stuck = false;
};

namespace detail {

inline int constraint_degree(const Expr& e) {
    int d = 0;
    for (auto& [m, c] : e.num()) {
        int t = 0;
        for (auto& [a, p] : m) t += p;
        d = std::max(d, t);
    }
    return d;
}

// A real-parameter polynomial is certifiably nonzero when, after stripping the
// monomial gcd (whose atoms must all be nonzero), every exponent is even, all
// coefficients share one sign, and some monomial is itself certified: the sum
// is then bounded below by a positive term.
inline bool definite_nonzero(const Polynomial& p, const AssumptionLedger& nz) {
    if (p.empty()) return false;
    auto atom_ok = [&](const Atom& a) {
        return (a.kind == Atom::Kind::Param || a.kind == Atom::Kind::Pi) &&
               nz.is_nonzero(Expr(Atom(a)));
    };
    auto power_of = [](const Monomial& m, const Atom& a) {
        for (auto& [b, e] : m)
            if (b == a) return e;
        return 0;
    };
    Monomial gcd = p.begin()->first;
    for (auto& [m, c] : p) {
        Monomial g;
        for (auto& [a, e] : gcd) {
            int f = std::min(e, power_of(m, a));
            if (f > 0) g.emplace_back(a, f);
        }
        gcd = g;
    }
    for (auto& [a, e] : gcd)
        if (!atom_ok(a)) return false;
    int sign = 0;
    bool witness = false;
    for (auto& [m, c] : p) {
        int s = c > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign) return false;
        bool certified = true;
        for (auto& [a, e] : m) {
            int r = e - power_of(gcd, a);
            if (r % 2 != 0) return false;
            if (r > 0 && !atom_ok(a)) certified = false;
        }
        witness = witness || certified;
    }
    return witness;
}

}  // namespace detail

// Repeatedly pivot on a constraint linear in some parameter whose coefficient
// is certifiably nonzero (lowest total degree first, then lexicographic), and
// on single monomials with exactly one non-certified parameter factor. Stops,
// flagged stuck, when no pivot remains; never guesses.
inline EliminationResult forced_elimination(const ConstraintSet& cs,
                                            const AssumptionLedger& nonzero) {
    EliminationResult res;
    std::vector<Constraint> work = cs.items;

    auto certified = [&](const Expr& e) {
        return !e.is_zero() && (e.is_rational_const() || nonzero.is_nonzero(e) ||
                                detail::definite_nonzero(e.num(), nonzero));
    };

    auto find_pivot = [&]() -> std::optional<std::pair<Atom, Expr>> {
        std::vector<const Constraint*> order;
        for (auto& c : work)
            if (!c.value.is_zero()) order.push_back(&c);
        std::stable_sort(order.begin(), order.end(), [](const Constraint* a, const Constraint* b) {
            int da = detail::constraint_degree(a->value), db = detail::constraint_degree(b->value);
            if (da != db) return da < db;
            return a->value.key() < b->value.key();
        });
        for (const Constraint* c : order) {
            std::set<Atom> params;
            for (const Atom& a : c->value.atoms())
                if (a.kind == Atom::Kind::Param) params.insert(a);
            std::set<Atom> den_atoms;
            for (auto& [f, ex] : c->value.den())
                for (auto& [m, cf] : f)
                    for (auto& [a, pw] : m) den_atoms.insert(a);
            for (const Atom& p : params) {
                // a parameter under the bar cannot be collected; try another
                if (den_atoms.count(p)) continue;
                auto groups = as_polynomial_in(c->value, {p});
                bool linear = true;
                Expr coeff, rest;
                for (auto& [m, cf] : groups) {
                    int deg = m.empty() ? 0 : m[0].second;
                    if (deg == 0)
                        rest = cf;
                    else if (deg == 1)
                        coeff = cf;
                    else
                        linear = false;
                }
                if (linear && certified(coeff)) return std::make_pair(p, -div(rest, coeff, nullptr));
            }
            // single monomial c * prod p_i^k: one uncertified parameter factor
            if (c->value.num().size() == 1 && c->value.den().empty()) {
                const Monomial& m = c->value.num().begin()->first;
                std::optional<Atom> lone;
                bool ok = true;
                for (auto& [a, p] : m) {
                    if (nonzero.is_nonzero(Expr(Atom(a)))) continue;
                    if (a.kind != Atom::Kind::Param || lone) {
                        ok = false;
                        break;
                    }
                    lone = a;
                }
                if (ok && lone) return std::make_pair(*lone, Expr::zero());
            }
        }
        return std::nullopt;
    };

    while (auto pivot = find_pivot()) {
        auto& [p, val] = *pivot;
        res.trace.push_back(p.display() + " = " + emit_text(val));
        for (auto& c : work) c.value = substitute(c.value, p, val);
        for (auto& [q, v] : res.assignment) v = substitute(v, p, val);
        res.assignment[p] = val;
    }
    for (auto& c : work)
        if (!c.value.is_zero()) res.residual.push_back(c);
    res.stuck = !res.residual.empty();
    if (!res.stuck) {
        for (auto& c : cs.items) {
            Expr check = c.value;
            for (auto& [p, v] : res.assignment) check = substitute(check, p, v);
            if (!check.is_zero())
                throw std::logic_error("forced elimination failed its forward check");
        }
    }
    return res;
}

}  // namespace magintegra
