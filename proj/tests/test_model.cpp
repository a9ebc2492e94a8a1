#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "magintegra/model.hpp"
#include "magintegra/parse.hpp"

using namespace magintegra;

namespace {

Expr P(const std::string& s) { return parse_expr(s, {"a", "b", "beta"}); }

Expr random_poly(std::mt19937& rng) {
    std::uniform_int_distribution<int> coin(0, 4), expo(1, 2), coef(-5, 5);
    Expr atoms[] = {Expr::var(PhaseVar::X), Expr::var(PhaseVar::Y), Expr::var(PhaseVar::P1),
                    Expr::var(PhaseVar::P2), Expr::param("a")};
    Expr out;
    for (int t = 0, n = 1 + coin(rng); t < n; ++t) {
        Expr term(Rational(coef(rng)));
        for (int f = 0, m = coin(rng); f < m; ++f) term = term * atoms[coin(rng)].pow(expo(rng));
        out = out + term;
    }
    return out;
}

}  // namespace

TEST_CASE("hamiltonian expands over explicit momenta") {
    auto spec = HamiltonianSpec::from_W(P("-beta*y/2"), P("beta*x/2"), Expr());
    Expr want = P("(p1^2 + p2^2)/2 - beta*y*p1/2 + beta*x*p2/2 + beta^2*(x^2+y^2)/8");
    CHECK((spec.hamiltonian() - want).is_zero());
}

TEST_CASE("from_V and from_W agree on the same potential") {
    Expr a1 = P("-beta*y/2"), a2 = P("beta*x/2");
    Expr w = P("x*y");
    auto sw = HamiltonianSpec::from_W(a1, a2, w);
    auto sv = HamiltonianSpec::from_V(a1, a2, w + (a1 * a1 + a2 * a2) * Rational(1, 2));
    CHECK((sw.hamiltonian() - sv.hamiltonian()).is_zero());
    CHECK((sw.W - sv.W).is_zero());
}

TEST_CASE("magnetic field of the symmetric gauge is the constant") {
    auto spec = HamiltonianSpec::from_W(P("-beta*y/2"), P("beta*x/2"), Expr());
    CHECK((magnetic_field(spec) - Expr::param("beta")).is_zero());
}

TEST_CASE("gauge transform preserves the magnetic field and W") {
    auto spec = HamiltonianSpec::from_W(P("-beta*y/2"), P("beta*x/2"), P("x*y"));
    auto moved = gauge_transform(spec, P("beta*x*y/2 + x^3"));
    CHECK((magnetic_field(moved) - magnetic_field(spec)).is_zero());
    CHECK((moved.W - spec.W).is_zero());
    CHECK_FALSE((moved.A1 - spec.A1).is_zero());
}

TEST_CASE("gauge function may not depend on momenta") {
    auto spec = HamiltonianSpec::from_W(Expr(), Expr(), Expr());
    CHECK_THROWS_AS(gauge_transform(spec, P("p1*x")), std::invalid_argument);
}

TEST_CASE("canonical bracket: axioms on randomized triples") {
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        Expr f = random_poly(rng), g = random_poly(rng), h = random_poly(rng);
        CHECK((poisson_bracket(f, g) + poisson_bracket(g, f)).is_zero());
        CHECK((poisson_bracket(f, g * h) - poisson_bracket(f, g) * h - g * poisson_bracket(f, h))
                  .is_zero());
        CHECK((poisson_bracket(f, poisson_bracket(g, h)) +
               poisson_bracket(g, poisson_bracket(h, f)) +
               poisson_bracket(h, poisson_bracket(f, g)))
                  .is_zero());
    }
}

TEST_CASE("canonical pairs") {
    Expr x = Expr::var(PhaseVar::X), y = Expr::var(PhaseVar::Y);
    Expr p1 = Expr::var(PhaseVar::P1), p2 = Expr::var(PhaseVar::P2);
    CHECK((poisson_bracket(x, p1) - Expr(Rational(1))).is_zero());
    CHECK((poisson_bracket(y, p2) - Expr(Rational(1))).is_zero());
    CHECK(poisson_bracket(x, p2).is_zero());
    CHECK(poisson_bracket(p1, p2).is_zero());
}

TEST_CASE("covariant bracket closes on the momenta with the field") {
    Expr B = Expr::func("B");
    Expr p1 = Expr::var(PhaseVar::P1), p2 = Expr::var(PhaseVar::P2);
    CHECK((covariant_poisson_bracket(p1, p2, B) + B).is_zero());
    CHECK((covariant_poisson_bracket(Expr::var(PhaseVar::X), p1, B) - Expr(Rational(1))).is_zero());
}

TEST_CASE("covariant bracket: axioms hold for an arbitrary planar field") {
    Expr B = Expr::func("B");
    std::mt19937 rng(11);
    for (int i = 0; i < 30; ++i) {
        Expr f = random_poly(rng), g = random_poly(rng), h = random_poly(rng);
        CHECK((covariant_poisson_bracket(f, g, B) + covariant_poisson_bracket(g, f, B)).is_zero());
        CHECK((covariant_poisson_bracket(f, covariant_poisson_bracket(g, h, B), B) +
               covariant_poisson_bracket(g, covariant_poisson_bracket(h, f, B), B) +
               covariant_poisson_bracket(h, covariant_poisson_bracket(f, g, B), B))
                  .is_zero());
    }
}

TEST_CASE("covariant bracket matches the canonical one on covariant data") {
    // {f(x,y,P1,P2), g(x,y,P1,P2)} computed canonically over (x,y,p1,p2) equals
    // the covariant bracket with B = curl A, after writing P_i = p_i + A_i.
    auto spec = HamiltonianSpec::from_W(P("-beta*y/2"), P("beta*x/2"), Expr());
    CovariantFrame fr = covariant(spec);
    Expr lhs = poisson_bracket(fr.P1, fr.L3);
    // covariantly: {P1, L3} = -P2 - x B with our sign conventions
    Expr p1 = Expr::var(PhaseVar::P1), p2 = Expr::var(PhaseVar::P2);
    Expr x = Expr::var(PhaseVar::X), y = Expr::var(PhaseVar::Y);
    Expr rhs = covariant_poisson_bracket(p1, x * p2 - y * p1, magnetic_field(spec));
    Expr rhs_cov = substitute(substitute(rhs, Atom::phase(PhaseVar::P1), fr.P1, nullptr),
                              Atom::phase(PhaseVar::P2), fr.P2, nullptr);
    CHECK((lhs - rhs_cov).is_zero());
}
