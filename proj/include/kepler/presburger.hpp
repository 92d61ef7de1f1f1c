// Satisfiability with model extraction for existential linear integer
// arithmetic, plus a textual LIA script export for external cross-checking.

#pragma once

#include "kepler/ast.hpp"

namespace kepler {

enum class SatVerdict : std::uint8_t { Sat, Unsat, Unknown };

struct PresburgerBudget {
    std::uint64_t max_nodes = 100000;
};

struct PresburgerResult {
    SatVerdict verdict = SatVerdict::Unknown;
    std::map<AVar, std::int64_t> model;   // covers every variable of f on Sat
};

// Decides a predicate-free formula whose quantifiers are all existential.
// Existential prefixes are dropped (bound variables are globally unique by
// construction), the formula is explored as a lazy DNF and each conjunct is
// decided by integer equality elimination plus bound-tightening branch and
// bound; a small box is searched first for the natural-number-ish inputs.
PresburgerResult presburger_sat(const Arith& f, PresburgerBudget budget = {});

// Ground evaluation under a full model (existentials looked up directly).
bool arith_eval(const Arith& f, const std::map<AVar, std::int64_t>& model);

// SMT-LIB LIA script: declarations, one assert, check-sat.  Byte-stable.
std::string export_lia(const Session& s, const Arith& f);

// Parses the export format back; names resolve through the session tables.
Arith parse_lia(Session& s, const std::string& text);

}  // namespace kepler
