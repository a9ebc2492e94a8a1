#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "magintegra/atom.hpp"

namespace magintegra {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// A monomial is a sorted multiset of atom powers. Exponents are positive.
using Monomial = std::vector<std::pair<Atom, int>>;

// Graded lexicographic order on monomials; the atom order is the canonical one.
struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        long da = 0, db = 0;
        for (auto& [at, e] : a) da += e;
        for (auto& [at, e] : b) db += e;
        if (da != db) return da < db;
        // graded lex, most significant atom first; the tie-break must be a
        // multiplicative order or exact division by leading-term reduction
        // breaks on true multiples
        auto ia = a.rbegin(), ib = b.rbegin();
        for (; ia != a.rend() && ib != b.rend(); ++ia, ++ib) {
            if (ia->first != ib->first) return ia->first < ib->first;
            if (ia->second != ib->second) return ia->second < ib->second;
        }
        return false;  // equal degrees and equal suffixes: identical monomials
    }
};

using Polynomial = std::map<Monomial, Rational, MonoLess>;

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
            out.push_back(a[i++]);
        else if (i == a.size() || b[j].first < a[i].first)
            out.push_back(b[j++]);
        else {
            out.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i, ++j;
        }
    }
    return out;
}

// a / b, or nullopt when some exponent would go negative.
inline std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
    Monomial out;
    size_t i = 0;
    for (auto& [at, e] : b) {
        while (i < a.size() && a[i].first < at) out.push_back(a[i++]);
        if (i == a.size() || !(a[i].first == at) || a[i].second < e) return std::nullopt;
        if (a[i].second > e) out.emplace_back(at, a[i].second - e);
        ++i;
    }
    while (i < a.size()) out.push_back(a[i++]);
    return out;
}

inline void poly_add_term(Polynomial& p, const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

inline Polynomial poly_add(const Polynomial& a, const Polynomial& b) {
    Polynomial out = a;
    for (auto& [m, c] : b) poly_add_term(out, m, c);
    return out;
}

inline Polynomial poly_neg(const Polynomial& a) {
    Polynomial out = a;
    for (auto& [m, c] : out) c = -c;
    return out;
}

inline Polynomial poly_mul(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (auto& [ma, ca] : a)
        for (auto& [mb, cb] : b) poly_add_term(out, mono_mul(ma, mb), ca * cb);
    return out;
}

inline Polynomial poly_scale(const Polynomial& a, const Rational& c) {
    Polynomial out;
    if (c == 0) return out;
    for (auto& [m, k] : a) out.emplace(m, k * c);
    return out;
}

inline Polynomial poly_pow(const Polynomial& a, int n) {
    Polynomial out{{Monomial{}, Rational(1)}};
    for (int i = 0; i < n; ++i) out = poly_mul(out, a);
    return out;
}

inline Polynomial poly_one() { return Polynomial{{Monomial{}, Rational(1)}}; }

inline Polynomial poly_const(const Rational& c) {
    Polynomial p;
    if (c != 0) p.emplace(Monomial{}, c);
    return p;
}

inline Polynomial poly_atom(const Atom& a, int e = 1) {
    return Polynomial{{Monomial{{a, e}}, Rational(1)}};
}

inline bool poly_is_const(const Polynomial& p) {
    return p.empty() || (p.size() == 1 && p.begin()->first.empty());
}

// Exact multivariate division by leading-term reduction in the grlex order.
inline std::optional<Polynomial> poly_exact_div(const Polynomial& p, const Polynomial& f) {
    if (f.empty()) return std::nullopt;
    Polynomial q, r = p;
    auto flt = f.rbegin();  // leading term (largest monomial)
    while (!r.empty()) {
        auto rlt = r.rbegin();
        auto m = mono_div(rlt->first, flt->first);
        if (!m) return std::nullopt;
        Rational c = rlt->second / flt->second;
        poly_add_term(q, *m, c);
        for (auto& [mf, cf] : f) poly_add_term(r, mono_mul(*m, mf), -c * cf);
    }
    return q;
}

// Common factor of coefficients; the result is positive.
inline Rational poly_content(const Polynomial& p) {
    BigInt g = 0, l = 1;
    for (auto& [m, c] : p) {
        g = boost::multiprecision::gcd(g, boost::multiprecision::numerator(c));
        l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(c));
    }
    if (g == 0) return Rational(1);
    return Rational(g, l);
}

struct PolyLess {
    bool operator()(const Polynomial& a, const Polynomial& b) const {
        return std::lexicographical_compare(
            a.begin(), a.end(), b.begin(), b.end(), [](const auto& x, const auto& y) {
                MonoLess ml;
                if (ml(x.first, y.first)) return true;
                if (ml(y.first, x.first)) return false;
                return x.second < y.second;
            });
    }
};

using DenFactors = std::map<Polynomial, int, PolyLess>;

class AssumptionLedger;  // fwd

// Exact symbolic expression: canonical polynomial numerator over a factored
// polynomial denominator. Immutable in use; all operations return new values.
class Expr {
  public:
    Expr() = default;
    explicit Expr(const Rational& c) : num_(poly_const(c)) {}
    explicit Expr(long v) : num_(poly_const(Rational(v))) {}
    explicit Expr(const Atom& a) : num_(poly_atom(a)) {}
    Expr(Polynomial num, DenFactors den) : num_(std::move(num)), den_(std::move(den)) {
        normalize_inplace();
    }
    explicit Expr(Polynomial num) : num_(std::move(num)) { normalize_inplace(); }

    static Expr zero() { return Expr(); }
    static Expr one() { return Expr(Rational(1)); }
    static Expr var(PhaseVar v) { return Expr(Atom::phase(v)); }
    static Expr param(const std::string& n) { return Expr(Atom::param(n)); }
    static Expr func(const std::string& n, int i = 0, int j = 0) { return Expr(Atom::func(n, i, j)); }

    const Polynomial& num() const { return num_; }
    const DenFactors& den() const { return den_; }

    bool is_zero() const { return num_.empty(); }

    bool is_rational_const() const { return poly_is_const(num_) && den_.empty(); }

    Rational rational_value() const {
        if (!is_rational_const()) throw std::logic_error("expression is not a rational constant");
        return num_.empty() ? Rational(0) : num_.begin()->second;
    }

    friend Expr operator-(const Expr& a) {
        Expr out;
        out.num_ = poly_neg(a.num_);
        out.den_ = a.den_;
        return out;
    }

    friend Expr operator+(const Expr& a, const Expr& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        // Common denominator: per-factor max exponent.
        DenFactors den = a.den_;
        for (auto& [f, e] : b.den_) {
            auto it = den.find(f);
            if (it == den.end())
                den.emplace(f, e);
            else
                it->second = std::max(it->second, e);
        }
        Polynomial na = a.num_, nb = b.num_;
        for (auto& [f, e] : den) {
            auto ia = a.den_.find(f);
            int ea = ia == a.den_.end() ? 0 : ia->second;
            auto ib = b.den_.find(f);
            int eb = ib == b.den_.end() ? 0 : ib->second;
            if (e > ea) na = poly_mul(na, poly_pow(f, e - ea));
            if (e > eb) nb = poly_mul(nb, poly_pow(f, e - eb));
        }
        return Expr(poly_add(na, nb), den);
    }

    friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

    friend Expr operator*(const Expr& a, const Expr& b) {
        if (a.is_zero() || b.is_zero()) return Expr();
        DenFactors den = a.den_;
        for (auto& [f, e] : b.den_) den[f] += e;
        return Expr(poly_mul(a.num_, b.num_), den);
    }

    Expr pow(int n) const {
        if (n < 0) throw std::invalid_argument("Expr::pow expects a nonnegative exponent");
        Expr out = one();
        for (int i = 0; i < n; ++i) out = out * *this;
        return out;
    }

    // Division appends non-constant divisors to the ledger (declared below,
    // defined after AssumptionLedger).
    friend Expr div(const Expr& a, const Expr& b, AssumptionLedger* ledger);

    // Scalar division is always safe.
    friend Expr operator*(const Expr& a, const Rational& c) {
        Expr out;
        out.num_ = poly_scale(a.num_, c);
        if (!out.num_.empty()) out.den_ = a.den_;
        return out;
    }

    // All atoms occurring in numerator or denominator.
    std::set<Atom> atoms() const {
        std::set<Atom> out;
        auto scan = [&](const Polynomial& p) {
            for (auto& [m, c] : p)
                for (auto& [a, e] : m) out.insert(a);
        };
        scan(num_);
        for (auto& [f, e] : den_) scan(f);
        return out;
    }

    bool has_atom(const Atom& a) const {
        auto as = atoms();
        return as.count(a) != 0;
    }

    // True if the expression depends (structurally) on the given phase variable.
    bool depends_on(PhaseVar v) const {
        for (const Atom& a : atoms()) {
            switch (a.kind) {
                case Atom::Kind::Phase:
                    if (a.pv == v) return true;
                    break;
                case Atom::Kind::Func: {
                    FuncDep d = FunctionRegistry::instance().dep(a.name);
                    if (v == PhaseVar::X && d != FuncDep::YOnly) return true;
                    if (v == PhaseVar::Y && d != FuncDep::XOnly) return true;
                    break;
                }
                case Atom::Kind::Trans:
                    if (v == PhaseVar::X || v == PhaseVar::Y) return true;
                    break;
                default:
                    break;
            }
        }
        return false;
    }

    // Derivative of a single atom; zero, one, a shifted FuncAtom, or the
    // registered rational derivative of a transcendental.
    static Expr atom_derivative(const Atom& a, PhaseVar v) {
        switch (a.kind) {
            case Atom::Kind::Phase:
                return a.pv == v ? one() : zero();
            case Atom::Kind::Param:
            case Atom::Kind::Pi:
                return zero();
            case Atom::Kind::Func: {
                if (v == PhaseVar::P1 || v == PhaseVar::P2) return zero();
                FuncDep d = FunctionRegistry::instance().dep(a.name);
                if (v == PhaseVar::X) {
                    if (d == FuncDep::YOnly) return zero();
                    return func(a.name, a.dx + 1, a.dy);
                }
                if (d == FuncDep::XOnly) return zero();
                return func(a.name, a.dx, a.dy + 1);
            }
            case Atom::Kind::Trans: {
                if (v == PhaseVar::P1 || v == PhaseVar::P2) return zero();
                Polynomial r2 = poly_add(poly_atom(Atom::phase(PhaseVar::X), 2),
                                         poly_atom(Atom::phase(PhaseVar::Y), 2));
                DenFactors den{{r2, 1}};
                if (a.trans == TransId::LnR2) {
                    Polynomial n = poly_scale(
                        poly_atom(Atom::phase(v == PhaseVar::X ? PhaseVar::X : PhaseVar::Y)),
                        Rational(2));
                    return Expr(n, den);
                }
                // atan(x/y)
                if (v == PhaseVar::X) return Expr(poly_atom(Atom::phase(PhaseVar::Y)), den);
                return Expr(poly_scale(poly_atom(Atom::phase(PhaseVar::X)), Rational(-1)), den);
            }
        }
        return zero();
    }

    Expr diff(PhaseVar v) const {
        // d(n / prod f_i^e_i) = dn/den - n/den * sum e_i df_i/f_i
        Expr out = diff_poly(num_, v) * Expr(poly_one(), den_);
        if (!out.is_zero() || !num_.empty()) {
            for (auto& [f, e] : den_) {
                Expr dfi = diff_poly(f, v);
                if (dfi.is_zero()) continue;
                DenFactors d = den_;
                d[f] += 1;
                out = out - (Expr(num_).over_raw(d) * dfi * Rational(e));
            }
        }
        return out;
    }

    // Evaluate with atoms mapped through fn (identity when fn returns nullopt).
    Expr map_atoms(const std::function<std::optional<Expr>(const Atom&)>& fn,
                   AssumptionLedger* ledger = nullptr) const;

    std::string key() const {  // deterministic identity string (for dedup/caches)
        std::ostringstream os;
        auto poly = [&](const Polynomial& p) {
            for (auto& [m, c] : p) {
                os << c << "[";
                for (auto& [a, e] : m) os << a.display() << "^" << e << " ";
                os << "]";
            }
        };
        poly(num_);
        os << "//";
        for (auto& [f, e] : den_) {
            os << "(";
            poly(f);
            os << ")^" << e;
        }
        return os.str();
    }

  private:
    // num over the given denominator, applying normalization.
    Expr over_raw(const DenFactors& d) const { return Expr(num_, d); }

    static Expr diff_poly(const Polynomial& p, PhaseVar v) {
        Expr out;
        for (auto& [m, c] : p) {
            for (size_t i = 0; i < m.size(); ++i) {
                Expr da = atom_derivative(m[i].first, v);
                if (da.is_zero()) continue;
                Monomial rest;
                for (size_t j = 0; j < m.size(); ++j) {
                    if (j == i) {
                        if (m[j].second > 1) rest.emplace_back(m[j].first, m[j].second - 1);
                    } else {
                        rest.push_back(m[j]);
                    }
                }
                Polynomial term{{rest, c * m[i].second}};
                out = out + Expr(term) * da;
            }
        }
        return out;
    }

    void normalize_inplace() {
        if (num_.empty()) {
            den_.clear();
            return;
        }
        // Split every denominator factor into rational content, atom powers and
        // a primitive multi-term core; cancel against the numerator by exact
        // division.
        DenFactors work = std::move(den_);
        den_.clear();
        Rational scale(1);
        for (auto& [f, e] : work) {
            if (f.empty()) throw std::domain_error("zero denominator factor");
            Polynomial g = f;
            Rational c = poly_content(g);
            // sign: make the leading coefficient positive
            if (g.rbegin()->second < 0) c = -c;
            if (c != 1) g = poly_scale(g, Rational(1) / c);
            for (int i = 0; i < e; ++i) scale /= c;
            if (poly_is_const(g)) continue;
            // factor out common monomial
            Monomial common = g.begin()->first;
            for (auto& [m, k] : g) {
                Monomial nc;
                size_t i = 0;
                for (auto& [a, p] : common) {
                    while (i < m.size() && m[i].first < a) ++i;
                    if (i < m.size() && m[i].first == a)
                        nc.emplace_back(a, std::min(p, m[i].second));
                }
                common = nc;
                if (common.empty()) break;
            }
            if (!common.empty()) {
                Polynomial rest;
                for (auto& [m, k] : g) rest.emplace(*mono_div(m, common), k);
                for (auto& [a, p] : common) den_[poly_atom(a)] += p * e;
                if (!poly_is_const(rest)) {
                    // dropping the common monomial can change the leading term,
                    // so the sign convention must be re-established
                    if (rest.rbegin()->second < 0) {
                        rest = poly_neg(rest);
                        if (e % 2) scale = -scale;
                    }
                    den_[rest] += e;
                }
            } else {
                den_[g] += e;
            }
        }
        if (scale != 1) num_ = poly_scale(num_, scale);
        // Cancel factors dividing the numerator exactly.
        for (auto it = den_.begin(); it != den_.end();) {
            bool erased = false;
            while (it->second > 0) {
                auto q = poly_exact_div(num_, it->first);
                if (!q) break;
                num_ = std::move(*q);
                if (--it->second == 0) {
                    it = den_.erase(it);
                    erased = true;
                    break;
                }
            }
            if (!erased) ++it;
        }
        if (num_.empty()) den_.clear();
    }

    Polynomial num_;
    DenFactors den_;
};

inline Polynomial expand_den(const DenFactors& d) {
    Polynomial out = poly_one();
    for (auto& [f, e] : d) out = poly_mul(out, poly_pow(f, e));
    return out;
}

inline bool poly_proportional(const Polynomial& a, const Polynomial& b, Rational* ratio = nullptr) {
    if (a.empty() || b.empty()) return a.empty() && b.empty();
    if (a.size() != b.size()) return false;
    Rational r = a.rbegin()->second / b.rbegin()->second;
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) {
        MonoLess ml;
        if (ml(ia->first, ib->first) || ml(ib->first, ia->first)) return false;
        if (ia->second != r * ib->second) return false;
    }
    if (ratio) *ratio = r;
    return true;
}

// Equality up to a nonzero rational scalar; determining equations are defined
// only up to such multiples.
inline bool equal_up_to_scalar(const Expr& a, const Expr& b, Rational* ratio = nullptr) {
    if (a.is_zero() || b.is_zero()) return a.is_zero() == b.is_zero();
    Polynomial ca = poly_mul(a.num(), expand_den(b.den()));
    Polynomial cb = poly_mul(b.num(), expand_den(a.den()));
    return poly_proportional(ca, cb, ratio);
}

inline bool equal_exact(const Expr& a, const Expr& b) { return (a - b).is_zero(); }

}  // namespace magintegra
