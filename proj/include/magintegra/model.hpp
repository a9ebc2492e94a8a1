#pragma once

#include "magintegra/ledger.hpp"

namespace magintegra {

// Planar charged particle, mass 1, charge -1. A system is given either by the
// scalar potential V or the electrostatic potential W = V - (A1^2+A2^2)/2;
// W-primary is the default and V converts on construction.
struct HamiltonianSpec {
    Expr A1, A2;
    Expr W;

    static HamiltonianSpec from_W(Expr a1, Expr a2, Expr w) {
        return HamiltonianSpec{std::move(a1), std::move(a2), std::move(w)};
    }
    static HamiltonianSpec from_V(Expr a1, Expr a2, const Expr& v) {
        Expr w = v - (a1 * a1 + a2 * a2) * Rational(1, 2);
        return HamiltonianSpec{std::move(a1), std::move(a2), std::move(w)};
    }

    // H = (p1^2+p2^2)/2 + A1 p1 + A2 p2 + V, written over p1,p2 explicitly.
    Expr hamiltonian() const {
        Expr p1 = Expr::var(PhaseVar::P1), p2 = Expr::var(PhaseVar::P2);
        Expr v = W + (A1 * A1 + A2 * A2) * Rational(1, 2);
        return (p1 * p1 + p2 * p2) * Rational(1, 2) + A1 * p1 + A2 * p2 + v;
    }
};

inline Expr magnetic_field(const HamiltonianSpec& spec) {
    return spec.A2.diff(PhaseVar::X) - spec.A1.diff(PhaseVar::Y);
}

inline HamiltonianSpec gauge_transform(const HamiltonianSpec& spec, const Expr& chi) {
    if (chi.depends_on(PhaseVar::P1) || chi.depends_on(PhaseVar::P2))
        throw std::invalid_argument("gauge function must depend on x, y only");
    return HamiltonianSpec{spec.A1 + chi.diff(PhaseVar::X), spec.A2 + chi.diff(PhaseVar::Y),
                           spec.W};
}

// {f,g} = f_x g_p1 + f_y g_p2 - f_p1 g_x - f_p2 g_y
inline Expr poisson_bracket(const Expr& f, const Expr& g) {
    return f.diff(PhaseVar::X) * g.diff(PhaseVar::P1) + f.diff(PhaseVar::Y) * g.diff(PhaseVar::P2) -
           f.diff(PhaseVar::P1) * g.diff(PhaseVar::X) - f.diff(PhaseVar::P2) * g.diff(PhaseVar::Y);
}

// Covariant momenta and angular momentum: P_i = p_i + A_i, L3 = x P2 - y P1.
struct CovariantFrame {
    Expr P1, P2, L3;
};

inline CovariantFrame covariant(const HamiltonianSpec& spec) {
    Expr P1 = Expr::var(PhaseVar::P1) + spec.A1;
    Expr P2 = Expr::var(PhaseVar::P2) + spec.A2;
    Expr L3 = Expr::var(PhaseVar::X) * P2 - Expr::var(PhaseVar::Y) * P1;
    return CovariantFrame{P1, P2, L3};
}

// Bracket on functions of (x, y, P1, P2) with the covariant momenta treated as
// coordinates; {P1,P2} = -B closes the algebra. Here the p1,p2 atoms stand for
// the covariant momenta. With this convention the p1^2 coefficient of {H,X1}
// comes out as yB - dx(k1), the sign of the published system.
inline Expr covariant_poisson_bracket(const Expr& f, const Expr& g, const Expr& B) {
    Expr fx = f.diff(PhaseVar::X), fy = f.diff(PhaseVar::Y);
    Expr f1 = f.diff(PhaseVar::P1), f2 = f.diff(PhaseVar::P2);
    Expr gx = g.diff(PhaseVar::X), gy = g.diff(PhaseVar::Y);
    Expr g1 = g.diff(PhaseVar::P1), g2 = g.diff(PhaseVar::P2);
    return fx * g1 + fy * g2 - f1 * gx - f2 * gy - B * (f1 * g2 - f2 * g1);
}

}  // namespace magintegra
