#pragma once

#include <array>
#include <compare>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace magintegra {

enum class PhaseVar : int { X = 0, Y = 1, P1 = 2, P2 = 3 };

inline const char* phase_var_name(PhaseVar v) {
    static constexpr std::array<const char*, 4> names{"x", "y", "p1", "p2"};
    return names[static_cast<int>(v)];
}

// Registered transcendental atoms. Their partial derivatives are rational
// expressions in x, y and are wired into Expr::diff.
enum class TransId : int {
    LnR2 = 0,   // ln(x^2 + y^2)
    AtanXY = 1  // arctan(x / y)
};

inline const char* trans_name(TransId t) {
    return t == TransId::LnR2 ? "ln(x^2+y^2)" : "atan(x/y)";
}

// Dependency signature of an unknown function.
enum class FuncDep : int { XOnly, YOnly, XY };

// Registry of unknown-function names with their dependency signatures.
// Writes are serialized; reads after setup are lock-free in practice but we
// keep the mutex for correctness.
class FunctionRegistry {
  public:
    static FunctionRegistry& instance() {
        static FunctionRegistry reg;
        return reg;
    }

    void register_function(const std::string& name, FuncDep dep) {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = table_.find(name);
        if (it != table_.end() && it->second != dep)
            throw std::invalid_argument("function '" + name +
                                        "' already registered with a different signature");
        table_[name] = dep;
    }

    bool is_registered(const std::string& name) const {
        std::lock_guard<std::mutex> lk(mu_);
        return table_.count(name) != 0;
    }

    FuncDep dep(const std::string& name) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = table_.find(name);
        if (it == table_.end())
            throw std::invalid_argument("unknown function '" + name + "'");
        return it->second;
    }

  private:
    FunctionRegistry() {
        // The unknown functions of the derivation pipeline.
        table_ = {
            {"B", FuncDep::XY},  {"W", FuncDep::XY},  {"k1", FuncDep::XY},
            {"k2", FuncDep::XY}, {"m1", FuncDep::XY}, {"s1", FuncDep::XY},
            {"s2", FuncDep::XY}, {"m2", FuncDep::XY}, {"K1", FuncDep::XY},
            {"S2", FuncDep::XY}, {"B1", FuncDep::XOnly}, {"B2", FuncDep::YOnly},
        };
    }
    mutable std::mutex mu_;
    std::map<std::string, FuncDep> table_;
};

// A single symbol of the expression alphabet.
struct Atom {
    enum class Kind : int { Phase = 0, Param = 1, Func = 2, Trans = 3, Pi = 4 };

    Kind kind{Kind::Phase};
    PhaseVar pv{PhaseVar::X};
    std::string name;  // Param and Func
    int dx = 0, dy = 0;  // Func derivative multi-index
    TransId trans{TransId::LnR2};

    static Atom phase(PhaseVar v) {
        Atom a;
        a.kind = Kind::Phase;
        a.pv = v;
        return a;
    }
    static Atom param(std::string n) {
        Atom a;
        a.kind = Kind::Param;
        a.name = std::move(n);
        return a;
    }
    static Atom func(std::string n, int i = 0, int j = 0) {
        Atom a;
        a.kind = Kind::Func;
        a.name = std::move(n);
        a.dx = i;
        a.dy = j;
        FuncDep d = FunctionRegistry::instance().dep(a.name);
        if ((d == FuncDep::XOnly && j > 0) || (d == FuncDep::YOnly && i > 0))
            throw std::invalid_argument("derivative multi-index violates dependency signature of '" +
                                        a.name + "'");
        return a;
    }
    static Atom trans_atom(TransId t) {
        Atom a;
        a.kind = Kind::Trans;
        a.trans = t;
        return a;
    }
    static Atom pi() {
        Atom a;
        a.kind = Kind::Pi;
        return a;
    }

    // Canonical atom order: PhaseVar < Parameter < FuncAtom < Transcendental < pi.
    friend auto operator<=>(const Atom& a, const Atom& b) {
        if (auto c = static_cast<int>(a.kind) <=> static_cast<int>(b.kind); c != 0) return c;
        switch (a.kind) {
            case Kind::Phase:
                return static_cast<int>(a.pv) <=> static_cast<int>(b.pv);
            case Kind::Param:
                return a.name <=> b.name;
            case Kind::Func:
                if (auto c = a.name <=> b.name; c != 0) return c;
                if (auto c = a.dx <=> b.dx; c != 0) return c;
                return a.dy <=> b.dy;
            case Kind::Trans:
                return static_cast<int>(a.trans) <=> static_cast<int>(b.trans);
            case Kind::Pi:
                return std::strong_ordering::equal;
        }
        return std::strong_ordering::equal;
    }
    friend bool operator==(const Atom& a, const Atom& b) { return (a <=> b) == 0; }

    bool is_phase(PhaseVar v) const { return kind == Kind::Phase && pv == v; }

    std::string display() const {
        switch (kind) {
            case Kind::Phase: return phase_var_name(pv);
            case Kind::Param: return name;
            case Kind::Func:
                if (dx == 0 && dy == 0) return name;
                return "D(" + name + "," + std::to_string(dx) + "," + std::to_string(dy) + ")";
            case Kind::Trans: return trans_name(trans);
            case Kind::Pi: return "pi";
        }
        return "?";
    }
};

}  // namespace magintegra
