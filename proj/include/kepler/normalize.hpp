// Rewrites arbitrary input formulas into the normal form (E, Υ, A):
// disequality elimination, disjunction merging, regex negation pushing,
// membership splitting over concatenations and ground evaluation.

#pragma once

#include "kepler/ast.hpp"

namespace kepler {

enum class RawKind : std::uint8_t { Eq, Diseq, Member, NotMember, ArithF, And, Or, Not };

struct RawNode;
using RawFormula = std::shared_ptr<const RawNode>;

struct RawNode {
    RawKind kind;
    StringTerm lhs, rhs;           // Eq / Diseq
    StringTerm term;               // Member / NotMember
    Regex re;                      // Member / NotMember
    Arith arith;                   // ArithF
    std::vector<RawFormula> kids;  // And / Or / Not
};

RawFormula raw_eq(StringTerm l, StringTerm r);
RawFormula raw_diseq(StringTerm l, StringTerm r);
RawFormula raw_member(StringTerm t, Regex re);
RawFormula raw_not_member(StringTerm t, Regex re);
RawFormula raw_arith(Arith a);
RawFormula raw_and(std::vector<RawFormula> kids);
RawFormula raw_or(std::vector<RawFormula> kids);
RawFormula raw_not(RawFormula f);

struct Unsupported : Error {
    using Error::Error;
};

// ⋁_{a∈Σ}(s1 = s2·a·x ∨ s2 = s1·a·x) ∨ ⋁_{a≠b}(s1 = x·a·y ∧ s2 = x·b·z)
// with fresh x, y, z.  Requires at least two letters.
RawFormula eliminate_disequality(Session& s, const StringTerm& s1, const StringTerm& s2);

// Single equation over FV(e1) ∪ FV(e2) plus fresh variables, equisatisfiable
// with e1 ∨ e2.  Trivial disjuncts simplify exactly; the general template is
// validated against the bounded oracle in the test suite.
WordEquation merge_disjunction(Session& s, const WordEquation& e1, const WordEquation& e2);

// Conjunction pairing: one equation equivalent to e1 ∧ e2 (no new unknowns);
// used by the disjunction merge to fold systems into single equations.
WordEquation pair_conjunction(Session& s, const WordEquation& e1, const WordEquation& e2);

// Pushes negation down to atoms: ¬(s ∈ R) becomes s ∈ R^C, double negation
// cancels, ground memberships evaluate to true/false.
RawFormula push_regex_negation(Session& s, const RawFormula& f);

// (s1·s2 ∈ R) as a disjunction over the intermediate states of R's DFA.
RawFormula split_membership(Session& s, const StringTerm& s1, const StringTerm& s2,
                            const Regex& re);

NormalizedFormula normalize(Session& s, const RawFormula& f);

// Letters mentioned anywhere in the formula (equations, regexes).
std::vector<Symbol> collect_letters(const RawFormula& f);

}  // namespace kepler
