// Parikh image of a CFG as an existential Presburger formula via the
// communication-free Petri net construction.

#pragma once

#include "kepler/grammar.hpp"

namespace kepler {

struct PetriNet {
    // Places are the grammar symbols V ∪ Σ; one transition per production:
    // it consumes one token from the production's left-hand side and emits
    // tokens per right-hand-side occurrence.
    std::vector<Symbol> places;
    struct Transition {
        std::uint32_t input_place;                                // weight 1
        std::vector<std::pair<std::uint32_t, std::uint32_t>> outputs;  // place -> weight
    };
    std::vector<Transition> transitions;
    std::uint32_t start_place = 0;   // marking: 1 token here, 0 elsewhere

    bool communication_free() const { return true; }
    std::size_t place_index(Symbol s) const;
};

PetriNet cfg_to_net(const Cfg& g);

struct ParikhFormula {
    Arith formula;                          // free letter-count variables
    std::map<Symbol, AVar> letter_counts;   // x_c per letter
    std::vector<AVar> rule_vars;            // y_p per production
    std::vector<AVar> dist_vars;            // z_s per symbol
};

// The four conjunct families over counters x_c, rule variables y_p and
// spanning-tree distance variables z_s; linear in the grammar size.
ParikhFormula net_to_presburger(Session& s, const PetriNet& net, const Cfg& g);

// Conjunction over vars of the Parikh image of the grammar restarted at that
// variable, with |var| tied to the letter-count sum; everything else is
// existentially quantified.
Arith length_constraint(Session& s, const Cfg& g, const std::vector<Symbol>& vars);

std::size_t arith_atom_count(const Arith& f);

}  // namespace kepler
