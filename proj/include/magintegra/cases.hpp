#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "magintegra/render.hpp"
#include "magintegra/script.hpp"

namespace magintegra {

inline std::filesystem::path scripts_dir() {
    if (const char* env = std::getenv("MAGINTEGRA_SCRIPTS")) return env;
    return "scripts";
}

// One classified parameter regime, replayed end to end. `steps` carries the
// golden-diff status of every checkpoint in the derivation script.
struct CaseReport {
    std::string id;
    std::string regime;
    std::string field_family;
    std::vector<std::string> profile_families;
    std::vector<std::string> forced;
    std::string conclusion;
    std::vector<ScriptCheck> steps;
    std::vector<std::string> notes;
    std::vector<std::string> assumptions;
    bool ok = false;
};

namespace detail {

struct CaseDef {
    const char* id;
    const char* script;
    const char* regime;
    const char* field_family;
    std::vector<const char*> profiles;
    std::vector<const char*> forced;
};

inline const std::vector<CaseDef>& case_table() {
    static const std::vector<CaseDef> defs = {
        {"elliptic", "case_elliptic.mg", "b = d = 0, c = 1, a != 0",
         "B = beta1 - beta2/(3*y^3), forced to zero",
         {"Solk1Ell", "Solk2Ell", "Sols1Ell", "Sols2Ell"},
         {"beta1 = 0", "beta2 = 0"}},
        {"parabolic", "case_parabolic.mg", "a = b = c = 0, d = 1",
         "B = beta0/2 + (beta11 + beta12*x + beta22*y)/(x^2 + y^2), reduced to beta0/2",
         {"Solk1Par", "Solk2Par", "Sols1Par", "Sols2Par"},
         {"beta11 = 0", "beta12 = 0", "beta22 = 0"}},
        {"ac0", "case_ac0.mg", "a = c = 0, b != 0, d != 0",
         "B = beta0/(2*b)",
         {"SolB1a0"},
         {"B1 = beta0*d*x/b + beta0"}},
        {"bc0", "case_bc0.mg", "b = c = 0, a != 0, d != 0",
         "B = beta0",
         {},
         {"B2 = 2*d*beta0*y"}},
        {"c0", "case_c0.mg", "c = 0, a != 0, b != 0, d != 0",
         "B = beta12/(2*b)",
         {"SolB1c0", "SolB2c0"},
         {"beta22 = 0", "b*beta13 - d*beta12 = 0"}},
        {"constant-b", "case_constb.mg", "B = beta != 0",
         "B = beta",
         {"Solk1Const", "Solk2Const", "Sols1Const", "Sols2Const"},
         {"a = b = c = d = 0", "s12 = s22 = 0", "s1 = s2 = 0"}},
    };
    return defs;
}

inline const CaseDef& case_def(const std::string& id) {
    for (const auto& d : case_table())
        if (id == d.id) return d;
    throw std::invalid_argument("unknown case id: " + id);
}

}  // namespace detail

inline CaseReport run_case(const std::string& id, ScriptResult* raw = nullptr) {
    const auto& def = detail::case_def(id);
    ScriptEngine eng;
    ScriptResult r = eng.run_file(scripts_dir() / def.script);
    CaseReport rep;
    rep.id = def.id;
    rep.regime = def.regime;
    rep.field_family = def.field_family;
    for (auto* p : def.profiles) rep.profile_families.push_back(p);
    for (auto* f : def.forced) rep.forced.push_back(f);
    rep.conclusion = r.conclusion;
    rep.steps = r.checks;
    rep.notes = r.notes;
    for (const Expr& f : r.ledger.facts()) rep.assumptions.push_back(emit_text(f));
    rep.ok = r.ok();
    if (raw) *raw = std::move(r);
    return rep;
}

inline CaseReport case_elliptic() { return run_case("elliptic"); }
inline CaseReport case_parabolic() { return run_case("parabolic"); }
inline CaseReport case_nonstandard_ac0() { return run_case("ac0"); }
inline CaseReport case_nonstandard_bc0() { return run_case("bc0"); }
inline CaseReport case_nonstandard_c0() { return run_case("c0"); }
inline CaseReport case_constant_b() { return run_case("constant-b"); }

// Term-level difference after matching the leading coefficients: `only_a` and
// `only_b` list monomials whose coefficients disagree once b is rescaled.
struct TermDiff {
    bool scalar_match = false;
    Rational scale;        // b * scale has a's leading coefficient
    std::string cofactor;  // nonvanishing polynomial factor a = cofactor * b
    std::vector<std::string> mismatched;
};

inline TermDiff term_diff(const Expr& ea, const Expr& eb) {
    TermDiff d;
    if (equal_up_to_scalar(ea, eb)) {
        d.scalar_match = true;
        return d;
    }
    if (auto q = poly_exact_div(ea.num(), eb.num()); q && !q->empty()) {
        d.scalar_match = true;
        d.cofactor = emit_text(Expr(*q));
        return d;
    }
    Polynomial a = ea.num(), b = eb.num();
    if (a.empty() || b.empty()) {
        d.mismatched.push_back("one side is identically zero");
        return d;
    }
    d.scale = a.rbegin()->second / b.rbegin()->second;
    for (auto& [m, c] : b) {
        auto it = a.find(m);
        Rational scaled = c * d.scale;
        if (it == a.end() || it->second != scaled)
            d.mismatched.push_back(detail::term_text(m, scaled) + " (transcribed, rescaled)");
    }
    for (auto& [m, c] : a)
        if (!b.count(m)) d.mismatched.push_back(detail::term_text(m, c) + " (regenerated only)");
    return d;
}

// Compare the two appendix-sized equations regenerated by the c=0 chain with
// their transcriptions. The regenerated form is authoritative; a mismatch is
// reported term by term, never asserted away.
struct AppendixReport {
    CaseReport chain;
    TermDiff diff_a;
    TermDiff diff_b;
    bool solutions_annihilate = false;  // stated closed forms kill both equations
    bool ok = false;
};

inline AppendixReport appendix_consistency() {
    AppendixReport rep;
    ScriptResult raw;
    rep.chain = run_case("c0", &raw);
    if (raw.env.count("t8")) rep.diff_a = term_diff(raw.env.at("t8"), load_transcription("AppendixA"));
    if (raw.env.count("t9")) rep.diff_b = term_diff(raw.env.at("t9"), load_transcription("AppendixB"));
    // substitute the stated profiles and the forced relations directly into
    // the regenerated equation; it must vanish identically
    if (raw.env.count("t9")) {
        Expr t = raw.env.at("t9");
        t = substitute(t, Atom::func("B1", 0, 0), load_transcription("SolB1c0"), &raw.ledger);
        t = substitute(t, Atom::func("B2", 0, 0), load_transcription("SolB2c0"), &raw.ledger);
        t = substitute(t, Atom::param("beta22"), Expr::zero(), &raw.ledger);
        t = substitute(t, Atom::param("beta12"),
                       parse_expr("b*beta13/d", {"b", "beta13", "d"}), &raw.ledger);
        rep.solutions_annihilate = t.is_zero();
    }
    rep.ok = rep.chain.ok && rep.diff_a.scalar_match && rep.diff_b.scalar_match;
    return rep;
}

// --- report emission -------------------------------------------------------

inline std::string report_text(const CaseReport& r) {
    std::string out;
    out += "case " + r.id + "  [" + r.regime + "]\n";
    for (auto& s : r.steps)
        out += "  " + std::string(s.pass ? "ok   " : "FAIL ") + s.label +
               (s.pass ? "" : "\n       " + s.detail) + "\n";
    for (auto& n : r.notes) out += "  note: " + n + "\n";
    out += "  magnetic field: " + r.field_family + "\n";
    for (auto& f : r.forced) out += "  forced: " + f + "\n";
    if (!r.assumptions.empty()) {
        out += "  assumed nonzero:";
        for (auto& a : r.assumptions) out += " " + a + ";";
        out += "\n";
    }
    out += "  conclusion: " + r.conclusion + (r.ok ? "" : "  (CHECKS FAILED)") + "\n";
    if (r.id == "constant-b" && r.ok) out += "  X2 trivial\n";
    return out;
}

inline std::string report_latex(const CaseReport& r) {
    std::string out;
    out += "\\subsection*{Case " + r.id + ": $" + r.regime + "$}\n";
    out += "\\begin{itemize}\n";
    for (auto& s : r.steps)
        out += "  \\item " + std::string(s.pass ? "\\checkmark~" : "\\textbf{failed}~") +
               "\\verb|" + s.label + "|\n";
    out += "\\end{itemize}\n";
    out += "Conclusion: \\emph{" + r.conclusion + "}.\n";
    return out;
}

inline nlohmann::json report_json(const CaseReport& r) {
    nlohmann::json steps = nlohmann::json::array();
    for (auto& s : r.steps)
        steps.push_back({{"label", s.label}, {"pass", s.pass}, {"detail", s.detail}});
    return {{"schema", "magintegra-report/1"},
            {"case", r.id},
            {"regime", r.regime},
            {"field", r.field_family},
            {"profiles", r.profile_families},
            {"forced", r.forced},
            {"steps", steps},
            {"notes", r.notes},
            {"assumed_nonzero", r.assumptions},
            {"conclusion", r.conclusion},
            {"ok", r.ok}};
}

inline nlohmann::json appendix_json(const AppendixReport& r) {
    auto diff = [](const TermDiff& d) {
        return nlohmann::json{{"scalar_match", d.scalar_match},
                              {"cofactor", d.cofactor},
                              {"mismatched", d.mismatched}};
    };
    return {{"schema", "magintegra-report/1"},
            {"case", "appendix"},
            {"chain", report_json(r.chain)},
            {"appendix_a", diff(r.diff_a)},
            {"appendix_b", diff(r.diff_b)},
            {"solutions_annihilate", r.solutions_annihilate},
            {"ok", r.ok}};
}

inline std::string appendix_text(const AppendixReport& r) {
    auto diff = [](const char* name, const TermDiff& d) {
        std::string out = std::string(name) + ": " +
                          (d.scalar_match ? (d.cofactor.empty() ? "scalar match\n"
                                                                : "match with cofactor " + d.cofactor + "\n")
                                          : "TERM DIFF\n");
        for (auto& m : d.mismatched) out += "    " + m + "\n";
        return out;
    };
    return diff("appendix A", r.diff_a) + diff("appendix B", r.diff_b) +
           "stated solutions annihilate: " + (r.solutions_annihilate ? "yes" : "NO") + "\n" +
           report_text(r.chain);
}

}  // namespace magintegra
