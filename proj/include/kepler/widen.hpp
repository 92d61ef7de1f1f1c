// widentree: refine a closed reduction tree against membership constraints
// by unrolling every cycle m+M times (m = live state count of the product
// DFA, M = m!) and discharging the straight-line leaves, re-linking each
// final bud so that iterations beyond m recur with period M.

#pragma once

#include "kepler/automata.hpp"
#include "kepler/reduce.hpp"

namespace kepler {

struct LeafEval {
    NodeId leaf = kNoNode;
    std::string path;      // "(n0,n4)"
    std::string formula;   // straight-line definitions plus memberships
    bool sat = false;
};

struct WidenResult {
    bool cap_exceeded = false;
    std::string reason;
    std::uint32_t m = 0;
    std::uint64_t M = 0;
    std::vector<LeafEval> log;   // filled by evaluate_leaves
};

struct WidenLimits {
    std::uint64_t unroll_cap = 5040;     // reject when m + M exceeds this
    std::size_t max_nodes = 200000;
    std::size_t max_operations = 256;
};

// Per-variable DFA: product of the variable's membership regexes, minimized.
std::map<Symbol, Dfa> membership_dfas(Session& s, const std::vector<Membership>& memberships);

// Unrolls every back-link of the (closed, trimmed) tree.  The membership
// set must only mention variables that the tree actually reduces; free-mode
// variables are discharged arithmetically by the caller.
WidenResult widen_tree(Session& s, ReductionTree& t, const std::vector<Membership>& memberships,
                       const WidenLimits& limits = {});

// Straight-line evaluation of one satisfiable leaf: composes the path's
// definitions and runs every membership; returns the outcome and appends the
// formula text.  vars_to_check selects the memberships that apply.
bool evaluate_leaf(Session& s, const ReductionTree& t, NodeId leaf,
                   const std::map<Symbol, Dfa>& var_dfas, std::string* formula_text);

// Evaluates every satisfiable leaf, marks failures unsatisfiable, and logs
// one entry per leaf in path order.
void evaluate_leaves(Session& s, ReductionTree& t, const std::map<Symbol, Dfa>& var_dfas,
                     WidenResult& result);

std::uint64_t factorial(std::uint32_t n);

}  // namespace kepler
