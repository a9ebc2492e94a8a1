// End-to-end acceptance gate: one line per criterion, nonzero exit on any
// failure. Each criterion carries its wall-clock budget.
#include <chrono>
#include <cstdio>
#include <random>

#include "magintegra/cases.hpp"
#include "magintegra/detgen.hpp"
#include "magintegra/numlab.hpp"
#include "magintegra/parse.hpp"
#include "magintegra/render.hpp"
#include "magintegra/transcriptions.hpp"

using namespace magintegra;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int n, const char* what, bool pass, double seconds, double budget) {
    bool ok = pass && seconds < budget;
    if (!ok) ++failures;
    std::printf("%s  criterion %d: %s (%.1fs, budget %.0fs)\n", ok ? "PASS" : "FAIL", n, what,
                seconds, budget);
    std::fflush(stdout);
}

bool case_green(const CaseReport& r, const std::string& conclusion) {
    return r.ok && r.conclusion == conclusion;
}

Expr random_expr(std::mt19937& rng, bool with_funcs) {
    std::uniform_int_distribution<int> coin(0, 6), expo(1, 3), coef(-9, 9);
    std::vector<Expr> atoms = {Expr::var(PhaseVar::X),  Expr::var(PhaseVar::Y),
                               Expr::var(PhaseVar::P1), Expr::var(PhaseVar::P2),
                               Expr::param("a"),        Expr::param("b"),
                               Expr(Rational(1, 3))};
    if (with_funcs) {
        atoms.push_back(Expr::func("B"));
        atoms.push_back(Expr::func("W", 1, 0));
    }
    Expr out;
    for (int t = 0, n = 1 + coin(rng) % 4; t < n; ++t) {
        Expr term(Rational(coef(rng), 1 + coin(rng) % 3));
        for (int f = 0, m = coin(rng) % 4; f < m; ++f)
            term = term * atoms[rng() % atoms.size()].pow(expo(rng));
        out = out + term;
    }
    return out;
}

}  // namespace

int main() {
    // 1: both determining systems regenerate their published displays
    {
        Timer t;
        bool ok = true;
        DeterminingSystem s1 = generate_determining_system(IntegralAnsatz::parabolic());
        DeterminingSystem s2 = generate_determining_system(IntegralAnsatz::general());
        const char* n1[] = {"eqk11", "eqk12", "eqk13", "X1first1", "X1first2", "X10order"};
        const char* n2[] = {"eqs11", "eqs12", "eqs13", "X2first1", "X2first2", "X20order"};
        for (size_t i = 0; i < 6; ++i) {
            ok = ok && equal_up_to_scalar(*s1.all()[i], load_transcription(n1[i]));
            ok = ok && equal_up_to_scalar(*s2.all()[i], load_transcription(n2[i]));
        }
        report(1, "determining-equation regeneration", ok, t.s(), 5);
    }

    // 2: compatibility conditions golden-match
    {
        Timer t;
        ScriptResult r = run_script_file(scripts_dir() / "derive.mg");
        report(2, "compatibility regeneration", r.ok(), t.s(), 10);
    }

    // 3: elliptic case
    {
        Timer t;
        CaseReport r = run_case("elliptic");
        report(3, "elliptic case chain", case_green(r, "vanishing-B"), t.s(), 30);
    }

    // 4: parabolic case
    {
        Timer t;
        CaseReport r = run_case("parabolic");
        report(4, "parabolic case chain", case_green(r, "constant-B"), t.s(), 30);
    }

    // 5 and 6 share the long c = 0 chain through the appendix report
    {
        Timer t5;
        CaseReport rac = run_case("ac0");
        CaseReport rbc = run_case("bc0");
        Timer t6;
        AppendixReport app = appendix_consistency();
        double c0s = t6.s();
        bool five = case_green(rac, "constant-B") && case_green(rbc, "constant-B") &&
                    case_green(app.chain, "constant-B") &&
                    rac.field_family.find("beta0/(2*b)") != std::string::npos &&
                    app.chain.field_family.find("beta12/(2*b)") != std::string::npos;
        report(5, "non-standard case chains", five, t5.s(), 300);
        report(6, "appendix consistency", app.ok, c0s, 600);
    }

    // 7: constant-field endgame
    {
        Timer t;
        CaseReport r = run_case("constant-b");
        report(7, "constant-field endgame", case_green(r, "W-constant"), t.s(), 30);
    }

    // 8: property suites
    {
        Timer t;
        bool ok = true;
        std::mt19937 rng(2026);
        for (int i = 0; i < 1000 && ok; ++i) {
            Expr f = random_expr(rng, true), g = random_expr(rng, true), h = random_expr(rng, true);
            ok = ok && (poisson_bracket(f, g) + poisson_bracket(g, f)).is_zero();
            ok = ok && (poisson_bracket(f, g * h) - poisson_bracket(f, g) * h -
                        g * poisson_bracket(f, h))
                           .is_zero();
            ok = ok && (poisson_bracket(f, poisson_bracket(g, h)) +
                        poisson_bracket(g, poisson_bracket(h, f)) +
                        poisson_bracket(h, poisson_bracket(f, g)))
                           .is_zero();
        }
        for (int i = 0; i < 10000 && ok; ++i) {
            Expr e = random_expr(rng, true);
            Expr back = parse_expr(emit_text(e), {"a", "b"});
            ok = ok && (back - e).is_zero() && emit_text(back) == emit_text(e);
        }
        // integration right-inverse on equations shaped like the case scripts
        AssumptionLedger led;
        for (int i = 0; i < 50 && ok; ++i) {
            for (PhaseVar v : {PhaseVar::X, PhaseVar::Y}) {
                Expr G = random_expr(rng, false) * Expr::func("k1") +
                         random_expr(rng, false) * Expr::func("k2", 1, 1);
                const char* cname = v == PhaseVar::X ? "B2" : "B1";
                Integration got = integrate_in_variable(G.diff(v), v, &led, cname);
                ok = ok && (got.relation.diff(v) - G.diff(v)).is_zero();
            }
        }
        report(8, "property suites", ok, t.s(), 60);
    }

    // 9: numerical lab
    {
        Timer t;
        TrajectoryConfig cfg;
        cfg.spec = cmf_spec();
        cfg.bindings = {{"beta", 1.0}};
        cfg.start = {0.3, -0.2, 1.0, 0.4};  // generic: origin start blinds the witness
        cfg.T = 100.0;
        cfg.observables = {{"H", cfg.spec.hamiltonian()}, {"X1", cmf_parabolic_integral()}};
        Trajectory traj = integrate_trajectory(cfg);
        bool ok = !traj.aborted && conservation_drift(traj, "H").drift < 1e-6 &&
                  conservation_drift(traj, "X1").drift < 1e-6;

        TrajectoryConfig bad = cfg;
        bad.spec.W = parse_expr("x/10");
        bad.observables[0].second = bad.spec.hamiltonian();
        Trajectory tb = integrate_trajectory(bad);
        ok = ok && conservation_drift(tb, "X1").drift > 1e-2;

        auto err = [&](double h) {
            TrajectoryConfig c = cfg;
            c.start = {0, 0, 1, 0};  // exact solution x = sin t, y = 1 - cos t
            c.h = h;
            c.T = 1.0;
            Trajectory tr = integrate_trajectory(c);
            const PhaseState& s = tr.samples.back().s;
            double ex = std::sin(1.0), ey = 1.0 - std::cos(1.0);
            return std::hypot(s.x - ex, s.y - ey);
        };
        double ratio = err(2e-3) / err(1e-3);
        ok = ok && ratio > 13.0 && ratio < 19.0;
        report(9, "numerical lab", ok, t.s(), 60);
    }

    return failures == 0 ? 0 : 1;
}
