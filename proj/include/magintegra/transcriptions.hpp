#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "magintegra/parse.hpp"

namespace magintegra {

// Root of the golden transcription corpus. Overridable so tests and the CLI
// can point at an alternate copy.
inline std::filesystem::path transcriptions_dir() {
    if (const char* p = std::getenv("MAGINTEGRA_TRANSCRIPTIONS")) return p;
    return "paper-transcriptions";
}

// Every constant name appearing in a transcription file.
inline const std::set<std::string>& transcription_params() {
    static const std::set<std::string> ps = {
        "a",      "b",      "c",      "d",      "beta",   "beta0",  "beta1",
        "beta2",  "beta11", "beta12", "beta13", "beta21", "beta22", "k11",
        "k12",    "k21",    "k22",    "s11",    "s12",    "s13",    "s22",
    };
    return ps;
}

inline bool transcription_exists(const std::string& name) {
    return std::filesystem::exists(transcriptions_dir() / (name + ".txt"));
}

// Load <name>.txt (one expression, possibly split over several lines, each
// continuation line starting with a sign).
inline Expr load_transcription(const std::string& name) {
    auto path = transcriptions_dir() / (name + ".txt");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing transcription file: " + path.string());
    std::string all, line;
    while (std::getline(in, line)) {
        all += line;
        all += ' ';
    }
    return parse_expr(all, transcription_params());
}

}  // namespace magintegra
