// Length inference over reduction trees: constrained Horn clauses over one
// predicate per node, solved bottom-up in closed form when the tree is flat
// (cycle labels all letter-cons), plus the phased-regular syntactic check.

#pragma once

#include "kepler/reduce.hpp"

namespace kepler {

struct ChcPredicate {
    NodeId node = kNoNode;
    std::string name;
    std::vector<AVar> args;   // length variables of the node's free vars
};

struct ChcClause {
    std::vector<AVar> locals;             // implicitly existential in the body
    Arith body_arith;                     // conjunction of gen(σ) constraints
    std::optional<std::uint32_t> body_pred;
    std::uint32_t head_pred = 0;
};

struct ChcSystem {
    std::vector<ChcPredicate> preds;
    std::vector<ChcClause> clauses;
    Arith query_arith;                     // the input arithmetic
    std::optional<std::uint32_t> query_pred;
};

// gen(σ): n_x = 0 for [ε/x]; n_x = n_y + 1 for [cy/x]; n_x = n_y + n_z for
// [yz/x].  Rename labels are handled by cycle clauses, not here.
Arith gen_sigma(Session& s, const Substitution& sub);

ChcSystem extract_chc(Session& s, const ReductionTree& t, Arith input_arith);

struct FlatnessWitness {
    struct CycleCheck {
        NodeId bud = kNoNode;
        bool all_letter_cons = true;   // renames from unrolling are tolerated
        bool has_eps = false;
        bool has_var_cons = false;
    };
    std::vector<CycleCheck> cycles;
    bool flat() const {
        for (const auto& c : cycles)
            if (c.has_eps || c.has_var_cons) return false;
        return true;
    }
};

FlatnessWitness flatness(const ReductionTree& t);

struct DpiResult {
    bool ok = false;
    std::string reason;
    std::map<std::uint32_t, Arith> defs;   // predicate index -> closed form
    Arith solved_query;                    // query with definitions inlined
};

// Bottom-up solving: non-recursive predicates are inlined; each loop (after
// mutual-recursion elimination along its cycle chain) must shift its
// arguments by a constant vector per iteration and collapses to
// ∃i >= 0. base(v̄ - i·δ).  Anything else reports NotDpi via ok=false.
DpiResult solve_dpi(Session& s, const ChcSystem& chc);

// Greedy-with-backtracking split into phases, each acyclic, X·w1 = w2·X, or
// the twisted two-variable shape X·w1·Y = Y·w2·X (the benchmark family).
bool is_phased_regular(const EquationSystem& es);

std::string dump_chc(const Session& s, const ChcSystem& chc);

}  // namespace kepler
