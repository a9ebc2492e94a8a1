#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "magintegra/cases.hpp"

using namespace magintegra;

namespace {

bool has_forced(const CaseReport& r, const std::string& needle) {
    return std::any_of(r.forced.begin(), r.forced.end(), [&](const std::string& f) {
        return f.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("compatibility chain replays green") {
    ScriptResult r = run_script_file(scripts_dir() / "derive.mg");
    for (auto& c : r.checks) {
        CAPTURE(c.label);
        CHECK(c.pass);
    }
}

TEST_CASE("elliptic case forces the trigonometric field family") {
    CaseReport r = case_elliptic();
    CHECK(r.ok);
    CHECK(has_forced(r, "beta1 = 0"));
    CHECK(has_forced(r, "beta2 = 0"));
    CHECK(r.conclusion == "vanishing-B");
}

TEST_CASE("parabolic case terminates in constant field") {
    CaseReport r = case_parabolic();
    CHECK(r.ok);
    CHECK(r.conclusion == "constant-B");
}

TEST_CASE("a=c=0 case ends in B = beta0/(2b)") {
    CaseReport r = case_nonstandard_ac0();
    CHECK(r.ok);
    CHECK(r.conclusion == "constant-B");
}

TEST_CASE("b=c=0 case ends in constant field") {
    CaseReport r = case_nonstandard_bc0();
    CHECK(r.ok);
    CHECK(r.conclusion == "constant-B");
}

TEST_CASE("c=0 chain replays through the appendix equations") {
    CaseReport r = case_nonstandard_c0();
    CHECK(r.ok);
    CHECK(has_forced(r, "beta22 = 0"));
    CHECK(r.conclusion == "constant-B");
}

TEST_CASE("constant-field endgame trivializes the second integral") {
    CaseReport r = case_constant_b();
    CHECK(r.ok);
    CHECK(has_forced(r, "a = b = c = d = 0"));
    CHECK(has_forced(r, "s12 = s22 = 0"));
    CHECK(r.conclusion == "W-constant");
    CHECK(report_text(r).find("X2 trivial") != std::string::npos);
}

TEST_CASE("unknown case ids are rejected") {
    CHECK_THROWS_AS(run_case("nope"), std::invalid_argument);
}

TEST_CASE("case replay is deterministic") {
    nlohmann::json a = report_json(run_case("elliptic"));
    nlohmann::json b = report_json(run_case("elliptic"));
    CHECK(a == b);
}

TEST_CASE("appendix equations match their transcriptions up to a cofactor") {
    AppendixReport rep = appendix_consistency();
    CHECK(rep.chain.ok);
    CHECK(rep.diff_a.scalar_match);
    CHECK(rep.diff_b.scalar_match);
    CHECK(rep.solutions_annihilate);
    CHECK(rep.ok);
    nlohmann::json j = appendix_json(rep);
    CHECK(j["appendix_a"]["mismatched"].empty());
    CHECK(j["appendix_b"]["mismatched"].empty());
}
