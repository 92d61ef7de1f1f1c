// Solution-set grammars extracted from closed reduction trees: finite-index
// EDT0L systems (one table per root->leaf/bud path) and Parikh-oriented CFGs
// with staged variables per solution trace, plus bounded enumeration used as
// the test oracle throughout.

#pragma once

#include "kepler/reduce.hpp"

#include <set>

namespace kepler {

// Nonterminals are Var-kind symbols, terminals Letter-kind.
struct Production {
    Symbol lhs;
    StringTerm rhs;
    bool operator==(const Production&) const = default;
};

struct Cfg {
    std::vector<Symbol> nonterminals;
    std::vector<Symbol> alphabet;
    std::vector<Production> prods;
    Symbol start{};
};

// Deterministic tables: at most one production per nonterminal mentioned;
// unmentioned nonterminals rewrite to themselves.
struct Edt0l {
    std::vector<Symbol> nonterminals;
    std::vector<Symbol> alphabet;
    std::vector<std::vector<Production>> tables;
    Symbol start{};
};

// One table per root->(SatLeaf or bud) path; back-link renames contribute
// x' -> x productions.  S -> concatenated left-hand sides of the root.
Edt0l extract_edtl(Session& s, const ReductionTree& t);

struct NotFlat : Error {
    using Error::Error;
};

// Staged-variable CFG, one sub-grammar per satisfiable leaf, unioned under a
// fresh start.  Throws NotFlat when cycles nest (staging preconditions).
Cfg extract_cfg(Session& s, const ReductionTree& t);
// The per-leaf sub-grammar before namespacing (the worked-example shape).
Cfg extract_cfg_for_leaf(Session& s, const ReductionTree& t, NodeId leaf);

// Plain table-union CFG; Parikh-faithfulness is gated by enumeration tests.
Cfg edt0l_to_cfg(const Edt0l& g);

Cfg restart_at(const Cfg& g, Symbol nonterminal, bool prune_unreachable);

// All words of length <= max_len derivable from the start (breadth-first
// with shortest-yield pruning).  max_len <= 16.
std::set<StringTerm> enumerate_words(const Cfg& g, int max_len);
std::set<StringTerm> enumerate_words(const Edt0l& g, int max_len);
// Largest nonterminal count over all sentential forms explored (index bound).
std::set<StringTerm> enumerate_words(const Edt0l& g, int max_len, std::size_t* max_index);

std::string dump_grammar(const Session& s, const Cfg& g);
std::string dump_grammar(const Session& s, const Edt0l& g);

}  // namespace kepler
