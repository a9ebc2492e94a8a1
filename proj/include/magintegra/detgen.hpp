#pragma once

#include <array>
#include <optional>

#include "magintegra/model.hpp"

namespace magintegra {

// Quadratic integral ansatz. The parabolic form is L3 P2 + k1 P1 + k2 P2 + m1;
// the general form carries the constant leading matrix (a, b, c, d) and
// s1, s2, m2. Leading constants may be parameters or explicit rationals, and
// the lower-order functions default to generic unknown functions.
struct IntegralAnsatz {
    enum class Leading { ParabolicX1, GeneralX2 };
    Leading leading = Leading::ParabolicX1;
    Expr a = Expr::param("a"), b = Expr::param("b"), c = Expr::param("c"), d = Expr::param("d");
    Expr f1 = Expr::func("k1"), f2 = Expr::func("k2"), f0 = Expr::func("m1");

    static IntegralAnsatz parabolic() { return IntegralAnsatz{}; }
    static IntegralAnsatz general() {
        IntegralAnsatz az;
        az.leading = Leading::GeneralX2;
        az.f1 = Expr::func("s1");
        az.f2 = Expr::func("s2");
        az.f0 = Expr::func("m2");
        return az;
    }

    // The integral over covariant momenta (P1, P2) supplied by the caller.
    Expr build(const Expr& P1, const Expr& P2) const {
        Expr L3 = Expr::var(PhaseVar::X) * P2 - Expr::var(PhaseVar::Y) * P1;
        Expr lead;
        if (leading == Leading::ParabolicX1)
            lead = L3 * P2;
        else
            lead = a * (P1 * P1 - P2 * P2) + b * P1 * P2 + c * L3 * L3 + d * L3 * P1;
        return lead + f1 * P1 + f2 * P2 + f0;
    }
};

// The six determining equations of one integral, grouped by momentum degree,
// stored with the published signs.
struct DeterminingSystem {
    std::array<Expr, 3> second;  // coefficients of p1^2, p2^2, p1 p2
    std::array<Expr, 2> first;   // coefficients of p1, p2
    Expr zeroth;
    AssumptionLedger ledger;

    std::array<const Expr*, 6> all() const {
        return {&second[0], &second[1], &second[2], &first[0], &first[1], &zeroth};
    }
};

// Coefficient collection of {H, X} = 0 over the covariant momenta, with
// H = (P1^2 + P2^2)/2 + W and the magnetic field entering through the bracket.
inline DeterminingSystem generate_determining_system(const IntegralAnsatz& ansatz,
                                                     const Expr& B = Expr::func("B"),
                                                     const Expr& W = Expr::func("W")) {
    for (const Expr* lc : {&ansatz.a, &ansatz.b, &ansatz.c, &ansatz.d})
        if (lc->depends_on(PhaseVar::X) || lc->depends_on(PhaseVar::Y) ||
            lc->depends_on(PhaseVar::P1) || lc->depends_on(PhaseVar::P2))
            throw std::invalid_argument("ansatz leading coefficients must be constant");

    Expr p1 = Expr::var(PhaseVar::P1), p2 = Expr::var(PhaseVar::P2);
    Expr H = (p1 * p1 + p2 * p2) * Rational(1, 2) + W;
    Expr X = ansatz.build(p1, p2);
    Expr bracket = covariant_poisson_bracket(H, X, B);

    auto groups = as_polynomial_in(bracket, {Atom::phase(PhaseVar::P1), Atom::phase(PhaseVar::P2)});
    auto pick = [&](int e1, int e2) -> Expr {
        Monomial m;
        if (e1) m.emplace_back(Atom::phase(PhaseVar::P1), e1);
        if (e2) m.emplace_back(Atom::phase(PhaseVar::P2), e2);
        auto it = groups.find(m);
        Expr out = it == groups.end() ? Expr() : it->second;
        if (it != groups.end()) groups.erase(it);
        return out;
    };

    DeterminingSystem sys;
    // Fixed per-slot signs so the stored equations read exactly as published.
    if (ansatz.leading == IntegralAnsatz::Leading::ParabolicX1) {
        sys.second = {pick(2, 0), pick(0, 2), -pick(1, 1)};
        sys.first = {-pick(1, 0), pick(0, 1)};
    } else {
        sys.second = {-pick(2, 0), pick(0, 2), pick(1, 1)};
        sys.first = {pick(1, 0), pick(0, 1)};
    }
    sys.zeroth = pick(0, 0);
    for (auto& [m, c] : groups)
        if (!c.is_zero())
            throw std::logic_error("unexpected momentum monomial in {H,X}; collection is broken");
    return sys;
}

// Recombine the grouped equations into the bracket (with the slot signs
// undone); used by the sum-reconstruction invariant test.
inline Expr reassemble_bracket(const DeterminingSystem& sys, IntegralAnsatz::Leading leading) {
    Expr p1 = Expr::var(PhaseVar::P1), p2 = Expr::var(PhaseVar::P2);
    bool parab = leading == IntegralAnsatz::Leading::ParabolicX1;
    Rational s2sign[3] = {parab ? 1 : -1, 1, parab ? -1 : 1};
    Rational f1sign = parab ? -1 : 1;
    return sys.second[0] * s2sign[0] * p1 * p1 + sys.second[1] * s2sign[1] * p2 * p2 +
           sys.second[2] * s2sign[2] * p1 * p2 + sys.first[0] * f1sign * p1 + sys.first[1] * p2 +
           sys.zeroth;
}

struct IntegralCheck {
    bool conserved;
    Expr residual;
};

// Exact conservation test on explicit phase-space data: {H, X} with the full
// Hamiltonian (vector potential written out).
inline IntegralCheck check_integral(const HamiltonianSpec& spec, const Expr& X) {
    auto groups = as_polynomial_in(X, {Atom::phase(PhaseVar::P1), Atom::phase(PhaseVar::P2)});
    for (auto& [m, c] : groups) {
        long deg = 0;
        for (auto& [a, e] : m) deg += e;
        if (deg > 2) throw std::invalid_argument("X must be quadratic in the momenta");
    }
    Expr residual = poisson_bracket(spec.hamiltonian(), X);
    return IntegralCheck{residual.is_zero(), residual};
}

}  // namespace magintegra
