// Regex compilation to complete DFAs, boolean operations, minimization and
// conversion back to regexes (state elimination).  All automata are total
// over their declared alphabet; a sink state is added where needed.

#pragma once

#include "kepler/ast.hpp"

namespace kepler {

struct Dfa {
    std::vector<Symbol> alphabet;    // sorted by symbol id
    std::uint32_t num_states = 0;
    std::vector<std::uint32_t> delta;  // num_states x alphabet.size()
    std::uint32_t initial = 0;
    std::vector<bool> accepting;

    std::uint32_t step(std::uint32_t state, std::size_t letter_idx) const {
        return delta[state * alphabet.size() + letter_idx];
    }
    std::size_t letter_index(Symbol c) const;   // throws if c not in alphabet
};

// Thompson construction -> subset construction -> Hopcroft minimization.
// Complement flips accepting states of the completed DFA; Intersect goes
// through the product.  The result is always minimized.
Dfa regex_to_dfa(const Regex& r, const std::vector<Symbol>& alphabet);

Dfa product_intersection(const Dfa& d1, const Dfa& d2);
Dfa complement(const Dfa& d);
Dfa minimize(const Dfa& d);
Dfa universal_dfa(const std::vector<Symbol>& alphabet);
Dfa empty_dfa(const std::vector<Symbol>& alphabet);

Regex dfa_to_regex(const Dfa& d);

bool is_empty(const Dfa& d);
bool accepts(const Dfa& d, const StringTerm& word);
bool language_equal(const Dfa& d1, const Dfa& d2);

// Number of productive states: reachable from the initial state and able to
// reach an accepting state.  This is the m that drives widentree's unroll
// count, so keeping it minimal matters (M = m!).
std::uint32_t live_state_count(const Dfa& d);

// Shortest accepted word of exactly the given length, if any.
std::optional<StringTerm> find_word_of_length(const Dfa& d, std::size_t len);

// DFA with initial/accepting states overridden (used by split_membership).
Dfa with_initial_accepting(const Dfa& d, std::uint32_t initial, const std::vector<bool>& accepting);

}  // namespace kepler
