// SMT-LIB-style input parsing, the top-level solving strategy, the
// benchmark generator and the brute-force oracle used throughout testing.

#pragma once

#include "kepler/lengths.hpp"
#include "kepler/normalize.hpp"
#include "kepler/presburger.hpp"
#include "kepler/widen.hpp"

namespace kepler {

struct ParseError : Error {
    int line = 0, col = 0;
    ParseError(const std::string& msg, int l, int c)
        : Error(msg + " at " + std::to_string(l) + ":" + std::to_string(c)), line(l), col(c) {}
};

struct UnsupportedConstruct : Error {
    using Error::Error;
};

struct ParsedScript {
    RawFormula formula;                  // conjunction of the asserts
    std::vector<Symbol> declared_strings;
    std::vector<AVar> declared_ints;
    bool check_sat = false;
    bool get_model = false;
    std::string logic;
};

ParsedScript parse_smtlib(Session& s, const std::string& text);

enum class Verdict : std::uint8_t { Sat, Unsat, Unknown };

struct SolveConfig {
    Budget tree_budget;
    WidenLimits widen;
    PresburgerBudget presburger;
    bool want_model = false;
    bool export_only = false;            // skip the internal backend
    std::string dump_tree, dump_cfg, dump_chc, dump_lia;
};

struct SolveResult {
    Verdict verdict = Verdict::Unknown;
    std::string reason;                  // set when verdict == Unknown
    std::map<Symbol, StringTerm> model;  // string model on Sat
    WidenResult widen;                   // leaf-evaluation log when Υ ≠ ∅
    Arith lengths;                       // inferred length constraint
    std::string route;                   // "tree", "chc", "parikh"
};

SolveResult solve(Session& s, const NormalizedFormula& f, const SolveConfig& cfg = {});

// quad-NNN-P-{sat,unsat}.smt2 files composing the phased templates with
// fresh variables per phase, balanced sat/unsat, phase counts cycling 1..phases.
std::vector<std::string> gen_bench(const std::string& out_dir, int phases, int count);

enum class OracleVerdict : std::uint8_t { Sat, UnsatWithinBound };

// Exhaustive assignment search over the alphabet up to max_len per variable;
// equations checked by concatenation, memberships by DFA, arithmetic by the
// Presburger backend with the lengths fixed.
OracleVerdict oracle(Session& s, const NormalizedFormula& f, int max_len);

std::string model_to_smtlib(const Session& s, const std::map<Symbol, StringTerm>& model);

}  // namespace kepler
