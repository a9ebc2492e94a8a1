#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "magintegra/compat.hpp"
#include "magintegra/detgen.hpp"
#include "magintegra/render.hpp"
#include "magintegra/transcriptions.hpp"

namespace magintegra {

// One `expect*` line of a derivation script, with its verdict.
struct ScriptCheck {
    std::string label;
    bool pass;
    std::string detail;  // empty on pass
};

struct ScriptError : std::runtime_error {
    int line;
    ScriptError(const std::string& msg, int l)
        : std::runtime_error(msg + " (script line " + std::to_string(l) + ")"), line(l) {}
};

struct ScriptResult {
    std::vector<ScriptCheck> checks;
    std::vector<std::string> notes;
    std::string conclusion;
    std::map<std::string, Expr> env;
    AssumptionLedger ledger;
    bool aborted = false;

    bool ok() const {
        if (aborted) return false;
        for (auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Line-oriented interpreter for the derivation scripts under scripts/.
//
//   param <name>...                 declare parameters
//   nonzero <expr>                  record a nonvanishing assumption
//   system <id> parabolic           generate the determining equations;
//   system <id> general [a b c d]   binds <id>s1 <id>s2 <id>s3 <id>f1 <id>f2 <id>z
//   compb <var> <id>                second-order magnetic compatibility
//   compw <var> <id>                first-order potential compatibility
//   zeroth <var> <var> <id> <id>    zeroth-order pair (ratio form, polynomial form)
//   reduce <var> <cb1> <cb2> <id>   combine the two magnetic conditions
//   let <var> <expr>                evaluate; $name splices a bound expression
//   golden <var> <name>             load a transcription file
//   subst <var> <src> <atom> <expr> substitute (derivatives follow along)
//   isolate <var> <src> <atom>      solve a linear equation for one atom
//   integrate <var> <src> x|y [nm]  exact antiderivative; binds <var> and <var>.const
//   mixed <var> <dx> <dy> [f]       mixed-partial consistency of solved gradients
//   strip <var> <src>               divide out a common x/y monomial factor
//   coeffs <set> <src> <atom>...    coefficient constraints of a polynomial identity
//   eliminate <res> <set>           forced parameter elimination; binds <res>.<param>
//   expect <var> <name>             golden comparison up to a constant factor
//   expect_factor <var> <name>      golden divides the derived equation; binds <var>.cofactor
//   expect_exact <var> <name>       golden comparison, exact
//   expect_zero <var>...            vanishing check
//   expect_forced <res> <p> <expr>  elimination pinned <p> to the given value
//   expect_clean <res>              elimination finished with nothing left over
//   note <text>      conclude <tag>
class ScriptEngine {
  public:
    std::ostream* trace = nullptr;  // per-command timing, for long derivations

    ScriptResult run(std::istream& in) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::vector<std::string> tok;
            for (std::string t; ls >> t;) tok.push_back(t);
            if (tok.empty()) continue;
            auto t0 = std::chrono::steady_clock::now();
            try {
                exec(tok, line);
                if (trace)
                    *trace << std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count()
                           << " ms  " << trim(line) << std::endl;
            } catch (const std::exception& ex) {
                // a failed derivation step invalidates the rest of the script
                checks_.push_back({trim(line), false,
                                   std::string(ex.what()) + " (line " + std::to_string(lineno) + ")"});
                aborted_ = true;
                break;
            }
        }
        ScriptResult out;
        out.aborted = aborted_;
        out.checks = std::move(checks_);
        out.notes = std::move(notes_);
        out.conclusion = std::move(conclusion_);
        out.env = std::move(env_);
        out.ledger = std::move(led_);
        return out;
    }

    ScriptResult run_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open script: " + path.string());
        return run(in);
    }

  private:
    struct SysEntry {
        IntegralAnsatz az;
        DeterminingSystem sys;
    };

    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t");
        size_t e = s.find_last_not_of(" \t");
        return b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }

    // join tokens [from, end) back into one expression string
    static std::string rest(const std::vector<std::string>& tok, size_t from) {
        std::string s;
        for (size_t i = from; i < tok.size(); ++i) {
            if (!s.empty()) s += " ";
            s += tok[i];
        }
        return s;
    }

    // splice $name references as parenthesized renderings
    std::string expand(const std::string& text) const {
        std::string out;
        for (size_t i = 0; i < text.size();) {
            if (text[i] != '$') {
                out += text[i++];
                continue;
            }
            size_t j = ++i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                    text[j] == '.'))
                ++j;
            std::string name = text.substr(i, j - i);
            out += "(" + emit_text(lookup(name)) + ")";
            i = j;
        }
        return out;
    }

    Expr parse(const std::string& text) const { return parse_expr(expand(text), params_); }

    const Expr& lookup(const std::string& name) const {
        auto it = env_.find(name);
        if (it == env_.end()) throw std::runtime_error("unbound variable '" + name + "'");
        return it->second;
    }

    Atom atom_of(const std::string& token) const {
        Expr e = parse(token);
        const auto& n = e.num();
        if (e.den().empty() && n.size() == 1 && n.begin()->second == 1 &&
            n.begin()->first.size() == 1 && n.begin()->first[0].second == 1)
            return n.begin()->first[0].first;
        throw std::runtime_error("'" + token + "' does not name a single atom");
    }

    SysEntry& system_of(const std::string& id) {
        auto it = systems_.find(id);
        if (it == systems_.end()) throw std::runtime_error("unknown system '" + id + "'");
        return it->second;
    }

    void need(const std::vector<std::string>& tok, size_t n) {
        if (tok.size() < n) throw std::runtime_error("missing arguments for '" + tok[0] + "'");
    }

    void check(const std::string& label, bool pass, std::string detail = "") {
        checks_.push_back({label, pass, pass ? "" : std::move(detail)});
    }

    void exec(const std::vector<std::string>& tok, const std::string& line) {
        const std::string& cmd = tok[0];
        if (cmd == "param") {
            for (size_t i = 1; i < tok.size(); ++i) params_.insert(tok[i]);
        } else if (cmd == "nonzero") {
            need(tok, 2);
            led_.assert_nonzero(parse(rest(tok, 1)));
        } else if (cmd == "system") {
            need(tok, 3);
            SysEntry e;
            if (tok[2] == "parabolic")
                e.az = IntegralAnsatz::parabolic();
            else if (tok[2] == "general")
                e.az = IntegralAnsatz::general();
            else
                throw std::runtime_error("system kind must be parabolic or general");
            if (tok.size() > 3) {
                need(tok, 7);
                e.az.a = parse(tok[3]);
                e.az.b = parse(tok[4]);
                e.az.c = parse(tok[5]);
                e.az.d = parse(tok[6]);
            }
            e.sys = generate_determining_system(e.az);
            const std::string& id = tok[1];
            env_[id + "s1"] = e.sys.second[0];
            env_[id + "s2"] = e.sys.second[1];
            env_[id + "s3"] = e.sys.second[2];
            env_[id + "f1"] = e.sys.first[0];
            env_[id + "f2"] = e.sys.first[1];
            env_[id + "z"] = e.sys.zeroth;
            systems_[id] = std::move(e);
        } else if (cmd == "compb") {
            need(tok, 3);
            SysEntry& e = system_of(tok[2]);
            CompatFlavor fl = e.az.leading == IntegralAnsatz::Leading::ParabolicX1
                                  ? CompatFlavor::Parabolic
                                  : CompatFlavor::General;
            env_[tok[1]] = magnetic_compatibility(e.sys, fl);
        } else if (cmd == "compw") {
            need(tok, 3);
            env_[tok[1]] = potential_compatibility_one(system_of(tok[2]).sys);
        } else if (cmd == "zeroth") {
            need(tok, 5);
            auto [ksw, ks] =
                zeroth_compatibility(system_of(tok[3]).sys, system_of(tok[4]).sys, &led_);
            env_[tok[1]] = ksw;
            env_[tok[2]] = ks;
        } else if (cmd == "reduce") {
            need(tok, 5);
            env_[tok[1]] = reduce_compB2(lookup(tok[2]), lookup(tok[3]), system_of(tok[4]).az, &led_);
        } else if (cmd == "let") {
            need(tok, 3);
            env_[tok[1]] = parse(rest(tok, 2));
        } else if (cmd == "golden") {
            need(tok, 3);
            env_[tok[1]] = load_transcription(tok[2]);
        } else if (cmd == "subst") {
            need(tok, 5);
            Atom target = atom_of(tok[3]);
            Expr repl = parse(rest(tok, 4));
            // derivatives of a solved gradient reintroduce lower derivatives of
            // the same function; re-substitute until they are gone, unless the
            // replacement mentions the target itself (a pure relabeling)
            bool self = false;
            for (const Atom& a : repl.atoms())
                if (a.kind == target.kind && a.name == target.name &&
                    (target.kind != Atom::Kind::Func ||
                     (a.dx >= target.dx && a.dy >= target.dy)))
                    self = true;
            Expr e = substitute(lookup(tok[2]), target, repl, &led_);
            for (int i = 0; i < 16 && !self; ++i) {
                Expr n = substitute(e, target, repl, &led_);
                if ((n - e).is_zero()) break;
                e = std::move(n);
            }
            env_[tok[1]] = e;
        } else if (cmd == "isolate") {
            need(tok, 4);
            env_[tok[1]] = isolate(lookup(tok[2]), atom_of(tok[3]), &led_);
        } else if (cmd == "integrate") {
            need(tok, 4);
            PhaseVar v = var_token(tok[3]);
            Integration g = integrate_in_variable(lookup(tok[2]), v, &led_,
                                                  tok.size() > 4 ? tok[4] : "");
            env_[tok[1]] = g.relation;
            env_[tok[1] + ".const"] = Expr(g.constant);
            notes_.push_back("integration in " + tok[3] + " introduced " + g.constant.display());
        } else if (cmd == "mixed") {
            need(tok, 4);
            env_[tok[1]] = mixed_partial_consistency(lookup(tok[2]), lookup(tok[3]),
                                                     tok.size() > 4 ? tok[4] : "B", &led_);
        } else if (cmd == "strip") {
            need(tok, 3);
            env_[tok[1]] = strip_phase_content(lookup(tok[2]), &led_);
        } else if (cmd == "coeff") {
            // coeff <var> <src> <monomial> <collect-atom>...
            need(tok, 5);
            std::set<Atom> vars;
            for (size_t i = 4; i < tok.size(); ++i) vars.insert(atom_of(tok[i]));
            Expr cleared = clear_denominator(lookup(tok[2]), &led_);
            auto groups = as_polynomial_in(cleared, vars);
            Expr key = parse(tok[3]);
            if (key.num().size() != 1 || !key.den().empty())
                throw std::runtime_error("'" + tok[3] + "' is not a monomial");
            auto it = groups.find(key.num().begin()->first);
            env_[tok[1]] = it == groups.end() ? Expr() : it->second;
        } else if (cmd == "apply") {
            // apply <var> <src> <elimination>: substitute forced assignments to fixpoint
            need(tok, 4);
            auto it = elims_.find(tok[3]);
            if (it == elims_.end()) throw std::runtime_error("unknown elimination '" + tok[3] + "'");
            Expr e = lookup(tok[2]);
            for (int round = 0; round < 8; ++round) {
                Expr prev = e;
                for (auto& [a, v] : it->second.assignment) e = substitute(e, a, v, &led_);
                if ((e - prev).is_zero()) break;
            }
            env_[tok[1]] = e;
        } else if (cmd == "coeffs") {
            need(tok, 4);
            std::set<Atom> vars;
            for (size_t i = 3; i < tok.size(); ++i) vars.insert(atom_of(tok[i]));
            sets_[tok[1]] = polynomial_coefficient_constraints(
                clear_denominator(lookup(tok[2]), &led_), vars, &led_);
            notes_.push_back(tok[1] + ": " + std::to_string(sets_[tok[1]].items.size()) +
                             " coefficient constraints");
        } else if (cmd == "eliminate") {
            need(tok, 3);
            auto it = sets_.find(tok[2]);
            if (it == sets_.end()) throw std::runtime_error("unknown constraint set '" + tok[2] + "'");
            EliminationResult r = forced_elimination(it->second, led_);
            for (auto& [a, v] : r.assignment) env_[tok[1] + "." + a.name] = v;
            for (auto& t : r.trace) notes_.push_back(tok[1] + ": " + t);
            if (r.stuck)
                notes_.push_back(tok[1] + ": stuck with " + std::to_string(r.residual.size()) +
                                 " unresolved constraints");
            elims_[tok[1]] = std::move(r);
        } else if (cmd == "expect") {
            need(tok, 3);
            Expr want = load_transcription(tok[2]);
            bool pass = equal_up_to_scalar(lookup(tok[1]), want);
            check(trim(line), pass,
                  pass ? "" : "got " + emit_text(lookup(tok[1])));
        } else if (cmd == "expect_factor") {
            // the derived equation may carry a spurious nonvanishing cofactor
            // picked up while clearing denominators; require that it divides
            // exactly by the transcription and bind the quotient
            need(tok, 3);
            Expr want = load_transcription(tok[2]);
            auto q = poly_exact_div(lookup(tok[1]).num(), want.num());
            bool pass = q.has_value() && !q->empty();
            if (pass) env_[tok[1] + ".cofactor"] = Expr(*q);
            check(trim(line), pass,
                  pass ? "" : "transcription does not divide the derived equation");
        } else if (cmd == "expect_exact") {
            need(tok, 3);
            Expr want = load_transcription(tok[2]);
            bool pass = (lookup(tok[1]) - want).is_zero();
            check(trim(line), pass,
                  pass ? "" : "difference " + emit_text(lookup(tok[1]) - want));
        } else if (cmd == "expect_zero") {
            need(tok, 2);
            for (size_t i = 1; i < tok.size(); ++i) {
                bool pass = lookup(tok[i]).is_zero();
                check("expect_zero " + tok[i], pass,
                      pass ? "" : "got " + emit_text(lookup(tok[i])));
            }
        } else if (cmd == "expect_forced") {
            need(tok, 4);
            auto it = elims_.find(tok[1]);
            if (it == elims_.end()) throw std::runtime_error("unknown elimination '" + tok[1] + "'");
            auto a = it->second.assignment.find(Atom::param(tok[2]));
            bool pass = a != it->second.assignment.end() && (a->second - parse(rest(tok, 3))).is_zero();
            check(trim(line), pass,
                  a == it->second.assignment.end() ? "parameter not eliminated"
                                                   : "got " + emit_text(a->second));
        } else if (cmd == "expect_clean") {
            need(tok, 2);
            auto it = elims_.find(tok[1]);
            if (it == elims_.end()) throw std::runtime_error("unknown elimination '" + tok[1] + "'");
            bool pass = !it->second.stuck && it->second.residual.empty();
            check(trim(line), pass,
                  "stuck=" + std::to_string(it->second.stuck) + " residual=" +
                      std::to_string(it->second.residual.size()));
        } else if (cmd == "note") {
            notes_.push_back(rest(tok, 1));
        } else if (cmd == "conclude") {
            conclusion_ = rest(tok, 1);
        } else {
            throw std::runtime_error("unknown command '" + cmd + "'");
        }
    }

    static PhaseVar var_token(const std::string& t) {
        if (t == "x") return PhaseVar::X;
        if (t == "y") return PhaseVar::Y;
        throw std::runtime_error("expected x or y, got '" + t + "'");
    }

    std::set<std::string> params_ = transcription_params();
    std::map<std::string, Expr> env_;
    std::map<std::string, SysEntry> systems_;
    std::map<std::string, ConstraintSet> sets_;
    std::map<std::string, EliminationResult> elims_;
    AssumptionLedger led_;
    std::vector<ScriptCheck> checks_;
    std::vector<std::string> notes_;
    std::string conclusion_;
    bool aborted_ = false;
};

inline ScriptResult run_script_file(const std::filesystem::path& path) {
    ScriptEngine eng;
    return eng.run_file(path);
}

}  // namespace magintegra
