#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magintegra/model.hpp"

namespace magintegra {

struct PhaseState {
    double x = 0, y = 0, p1 = 0, p2 = 0;

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(p1) && std::isfinite(p2);
    }
};

// Compiled numeric view of a closed-form expression. Samples where the
// expression is undefined (vanishing denominator, y = 0 under arctan(x/y))
// evaluate to NaN and are flagged by the caller.
using Evaluator = std::function<double(const PhaseState&)>;

inline Evaluator compile_evaluator(const Expr& e, const std::map<std::string, double>& bindings) {
    for (const Atom& a : e.atoms()) {
        if (a.kind == Atom::Kind::Func)
            throw std::invalid_argument("cannot compile unknown function '" + a.name + "'");
        if (a.kind == Atom::Kind::Param && !bindings.count(a.name))
            throw std::invalid_argument("unbound parameter '" + a.name + "'");
    }
    auto atom_value = [bindings](const Atom& a, const PhaseState& s) -> double {
        switch (a.kind) {
            case Atom::Kind::Phase:
                switch (a.pv) {
                    case PhaseVar::X: return s.x;
                    case PhaseVar::Y: return s.y;
                    case PhaseVar::P1: return s.p1;
                    default: return s.p2;
                }
            case Atom::Kind::Param: return bindings.at(a.name);
            case Atom::Kind::Trans:
                return a.trans == TransId::LnR2 ? std::log(s.x * s.x + s.y * s.y)
                                                : std::atan(s.x / s.y);
            case Atom::Kind::Pi: return M_PI;
            default: return std::nan("");
        }
    };
    auto poly_value = [atom_value](const Polynomial& p, const PhaseState& s) {
        double out = 0;
        for (auto& [m, c] : p) {
            double term = c.convert_to<double>();
            for (auto& [a, e] : m) term *= std::pow(atom_value(a, s), e);
            out += term;
        }
        return out;
    };
    Polynomial num = e.num();
    DenFactors den = e.den();
    return [poly_value, num, den](const PhaseState& s) -> double {
        double out = poly_value(num, s);
        for (auto& [f, e] : den) {
            double fv = poly_value(f, s);
            if (fv == 0) return std::nan("");
            out /= std::pow(fv, e);
        }
        return out;
    };
}

struct TrajectoryConfig {
    double h = 1e-3;
    double T = 1.0;
    std::map<std::string, double> bindings;
    HamiltonianSpec spec;
    std::vector<std::pair<std::string, Expr>> observables;
    PhaseState start;
};

struct Sample {
    double t;
    PhaseState s;
    std::vector<double> obs;
    bool flagged = false;  // some observable undefined at this point
};

struct Trajectory {
    std::vector<std::string> names;  // observable column names
    std::vector<Sample> samples;
    bool aborted = false;  // state left the finite domain; last good sample kept
};

// Classical RK4 over Hamilton's equations, with the vector field obtained by
// differentiating H symbolically before compilation.
inline Trajectory integrate_trajectory(const TrajectoryConfig& cfg) {
    if (!(cfg.h > 0) || !(cfg.T > 0) || cfg.h > cfg.T)
        throw std::invalid_argument("need 0 < h <= T");
    Expr H = cfg.spec.hamiltonian();
    Evaluator dx = compile_evaluator(H.diff(PhaseVar::P1), cfg.bindings);
    Evaluator dy = compile_evaluator(H.diff(PhaseVar::P2), cfg.bindings);
    Evaluator dp1 = compile_evaluator(-H.diff(PhaseVar::X), cfg.bindings);
    Evaluator dp2 = compile_evaluator(-H.diff(PhaseVar::Y), cfg.bindings);
    auto field = [&](const PhaseState& s) {
        return PhaseState{dx(s), dy(s), dp1(s), dp2(s)};
    };
    auto axpy = [](const PhaseState& s, double h, const PhaseState& k) {
        return PhaseState{s.x + h * k.x, s.y + h * k.y, s.p1 + h * k.p1, s.p2 + h * k.p2};
    };

    Trajectory traj;
    std::vector<Evaluator> obs;
    for (auto& [name, e] : cfg.observables) {
        traj.names.push_back(name);
        obs.push_back(compile_evaluator(e, cfg.bindings));
    }
    auto record = [&](double t, const PhaseState& s) {
        Sample smp{t, s, {}, false};
        for (auto& f : obs) {
            double v = f(s);
            if (!std::isfinite(v)) smp.flagged = true;
            smp.obs.push_back(v);
        }
        traj.samples.push_back(std::move(smp));
    };

    PhaseState s = cfg.start;
    record(0.0, s);
    long steps = std::lround(cfg.T / cfg.h);
    for (long i = 1; i <= steps; ++i) {
        PhaseState k1 = field(s);
        PhaseState k2 = field(axpy(s, cfg.h / 2, k1));
        PhaseState k3 = field(axpy(s, cfg.h / 2, k2));
        PhaseState k4 = field(axpy(s, cfg.h, k3));
        PhaseState n{s.x + cfg.h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                     s.y + cfg.h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                     s.p1 + cfg.h / 6 * (k1.p1 + 2 * k2.p1 + 2 * k3.p1 + k4.p1),
                     s.p2 + cfg.h / 6 * (k1.p2 + 2 * k2.p2 + 2 * k3.p2 + k4.p2)};
        if (!n.finite()) {
            traj.aborted = true;
            break;
        }
        s = n;
        record(i * cfg.h, s);
    }
    return traj;
}

struct DriftSummary {
    double drift = 0;      // max over samples of |F(t)-F(0)| / max(1, |F(0)|)
    long flagged = 0;      // excluded samples
    double reference = 0;  // F(0)
};

inline DriftSummary conservation_drift(const Trajectory& traj, const std::string& name) {
    size_t col = 0;
    while (col < traj.names.size() && traj.names[col] != name) ++col;
    if (col == traj.names.size()) throw std::invalid_argument("unknown observable '" + name + "'");
    DriftSummary out;
    if (traj.samples.empty()) return out;
    out.reference = traj.samples.front().obs[col];
    double denom = std::max(1.0, std::fabs(out.reference));
    for (auto& smp : traj.samples) {
        if (smp.flagged || !std::isfinite(smp.obs[col])) {
            ++out.flagged;
            continue;
        }
        out.drift = std::max(out.drift, std::fabs(smp.obs[col] - out.reference) / denom);
    }
    return out;
}

// Constant magnetic field B = beta in the symmetric gauge, W = 0: the CMF
// endpoint every classified case terminates in.
inline HamiltonianSpec cmf_spec() {
    Expr x = Expr::var(PhaseVar::X), y = Expr::var(PhaseVar::Y);
    Expr beta = Expr::param("beta");
    return HamiltonianSpec::from_W(-beta * y * Rational(1, 2), beta * x * Rational(1, 2), Expr());
}

// The parabolic-type integral of the CMF system with the free linear and
// constant pieces set to zero: X1 = L3 P2 + beta x y P1 - beta(3x^2+y^2)/2 P2
// + beta^2 x (x^2+y^2)/2, conserved exactly.
inline Expr cmf_parabolic_integral() {
    HamiltonianSpec spec = cmf_spec();
    CovariantFrame f = covariant(spec);
    Expr x = Expr::var(PhaseVar::X), y = Expr::var(PhaseVar::Y);
    Expr beta = Expr::param("beta");
    Expr k1 = beta * x * y;
    Expr k2 = -beta * (x * x * Rational(3) + y * y) * Rational(1, 2);
    Expr m1 = beta * beta * x * (x * x + y * y) * Rational(1, 2);
    return f.L3 * f.P2 + k1 * f.P1 + k2 * f.P2 + m1;
}

inline void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,y,p1,p2";
    for (auto& n : traj.names) os << "," << n;
    os << "\n";
    os.precision(15);
    for (auto& s : traj.samples) {
        os << s.t << "," << s.s.x << "," << s.s.y << "," << s.s.p1 << "," << s.s.p2;
        for (double v : s.obs) os << "," << v;
        os << "\n";
    }
}

inline nlohmann::json drift_json(const Trajectory& traj) {
    nlohmann::json obs = nlohmann::json::object();
    for (auto& n : traj.names) {
        DriftSummary d = conservation_drift(traj, n);
        obs[n] = {{"drift", d.drift}, {"reference", d.reference}, {"flagged", d.flagged}};
    }
    return {{"schema", "magintegra-report/1"},
            {"kind", "drift-summary"},
            {"samples", traj.samples.size()},
            {"aborted", traj.aborted},
            {"observables", obs}};
}

}  // namespace magintegra
