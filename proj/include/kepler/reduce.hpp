// The cyclic reduction engine: builds a reduction tree for an equation
// system via match / complete / link_back, classifies leaves, enforces the
// progressing-trace soundness condition, grafts free-variable subtrees and
// extracts solution traces and models.

#pragma once

#include "kepler/ast.hpp"

namespace kepler {

enum class NodeStatus : std::uint8_t { Open, SatLeaf, UnsatLeaf, Bud, Interior };

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct TreeEdge {
    std::vector<Substitution> labels;
    NodeId child = kNoNode;
};

struct BackLink {
    NodeId companion = kNoNode;
    std::vector<Substitution> renames;   // sigma_cyc, Rename-shaped
    bool from_widening = false;          // final re-link created by widen_tree
};

struct TreeNode {
    EquationSystem system;               // match-normalized, trivial eqs dropped
    std::vector<Symbol> carried;         // live variables absent from the system
    NodeStatus status = NodeStatus::Open;
    NodeId parent = kNoNode;
    std::vector<Substitution> in_labels; // labels on the edge from parent
    int depth = 0;
    std::vector<TreeEdge> children;
    std::optional<BackLink> backlink;
    std::uint32_t var_watermark = 0;     // var-table size when the node was made
    bool synthetic = false;              // created by postpro/widen, not by reduce
};

struct ReductionTree {
    std::vector<TreeNode> nodes;
    NodeId root = 0;

    TreeNode& at(NodeId id) { return nodes[id]; }
    const TreeNode& at(NodeId id) const { return nodes[id]; }
    bool has_sat_leaf() const;
    std::vector<NodeId> sat_leaves() const;
    std::vector<NodeId> buds() const;
    std::vector<NodeId> path_from_root(NodeId id) const;   // root .. id
};

// node variables = FV(system) plus carried free variables
std::vector<Symbol> node_vars(const TreeNode& n);

// ── Single-equation operations ───────────────────────────────────────────

// Strips equal head symbols until the heads differ or a side empties.
WordEquation match(WordEquation e);

// Per-equation normalization of a system: match every equation and drop the
// trivial ones (identical sides).
EquationSystem normalize_system(EquationSystem es);

NodeStatus classify(const EquationSystem& es);   // SatLeaf / UnsatLeaf / Open

// Complete case split on the head variable(s) of a match-normalized,
// non-leaf equation.  Children come back match-normalized, in the fixed
// order the figures use.  Throws on leaf forms.
std::vector<std::pair<WordEquation, Substitution>> complete(Session& s, const WordEquation& e);

// ── Tree construction ────────────────────────────────────────────────────

struct Budget {
    int max_depth = 512;
    std::size_t max_nodes = 100000;
    double wall_time_s = 30.0;
};

struct BuildResult {
    ReductionTree tree;
    bool budget_exhausted = false;
    std::string reason;
};

BuildResult build_tree(Session& s, const EquationSystem& es,
                       const std::vector<Symbol>& relevant_vars, const Budget& budget = {});

// Nearest strict ancestor equal to the node under a bijective renaming of
// variables created after it; requires a progressing substitution on the
// cycle.  Exposed for tests; build_tree calls it internally.
std::optional<BackLink> link_back(const Session& s, const ReductionTree& t, NodeId node);

// Removes subtrees that cannot reach a satisfiable leaf (buds inherit their
// companion's productivity).  Ids are compacted.
void trim(ReductionTree& t);

// Grafts the free-variable subtree onto every satisfiable leaf whose path
// has unreduced variables: a base [ε/x] edge plus one single-edge cycle per
// alphabet letter, chained across multiple free variables.
void postpro(Session& s, ReductionTree& t);

// ── Traces and models ────────────────────────────────────────────────────

struct TraceCycle {
    NodeId companion = kNoNode;
    NodeId bud = kNoNode;
    std::vector<Substitution> labels;   // companion -> bud edge labels + renames
};

struct SolutionTrace {
    std::vector<std::vector<Substitution>> path_labels;   // one entry per edge, root -> leaf
    std::vector<NodeId> path_nodes;                        // root .. leaf
    std::vector<TraceCycle> cycles;                        // in path order (companion depth)
};

SolutionTrace solution_trace(const ReductionTree& t, NodeId leaf);

// Composes the trace with each cycle repeated its count; verifies the
// resulting assignment against the root system before returning.
std::map<Symbol, StringTerm> extract_model(Session& s, const ReductionTree& t, NodeId leaf,
                                           const std::vector<std::uint64_t>& cycle_counts);

// ── Diagnostics & invariant checks ───────────────────────────────────────

std::string to_dot(const Session& s, const ReductionTree& t);

// Re-derives every non-synthetic edge: child == normalize(parent[labels]).
bool check_edges(const Session& s, const ReductionTree& t, std::string* why = nullptr);
// Applying sigma_cyc to each bud must reproduce its companion verbatim.
bool check_backlinks(const Session& s, const ReductionTree& t, std::string* why = nullptr);
// Cycle length (edge count companion -> bud) < N of the companion equation;
// applies to reduce-built back-links only.
bool check_cycle_lengths(const ReductionTree& t, std::string* why = nullptr);

}  // namespace kepler
