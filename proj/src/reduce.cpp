#include "kepler/reduce.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <set>
#include <sstream>

namespace kepler {

// ── Tree helpers ─────────────────────────────────────────────────────────

bool ReductionTree::has_sat_leaf() const {
    for (const auto& n : nodes)
        if (n.status == NodeStatus::SatLeaf) return true;
    return false;
}

std::vector<NodeId> ReductionTree::sat_leaves() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < nodes.size(); ++i)
        if (nodes[i].status == NodeStatus::SatLeaf) out.push_back(i);
    return out;
}

std::vector<NodeId> ReductionTree::buds() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < nodes.size(); ++i)
        if (nodes[i].status == NodeStatus::Bud) out.push_back(i);
    return out;
}

std::vector<NodeId> ReductionTree::path_from_root(NodeId id) const {
    std::vector<NodeId> path;
    for (NodeId cur = id; cur != kNoNode; cur = nodes[cur].parent) path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Symbol> node_vars(const TreeNode& n) {
    std::vector<Symbol> vars = free_vars(n.system);
    for (Symbol v : n.carried)
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    return vars;
}

// ── match / classify / complete ──────────────────────────────────────────

WordEquation match(WordEquation e) {
    std::size_t i = 0;
    while (i < e.lhs.size() && i < e.rhs.size() && e.lhs[i] == e.rhs[i]) ++i;
    if (i > 0) {
        e.lhs.erase(e.lhs.begin(), e.lhs.begin() + static_cast<long>(i));
        e.rhs.erase(e.rhs.begin(), e.rhs.begin() + static_cast<long>(i));
    }
    return e;
}

EquationSystem normalize_system(EquationSystem es) {
    EquationSystem out;
    for (auto& e : es.eqs) {
        WordEquation m = match(std::move(e));
        if (!m.trivial()) out.eqs.push_back(std::move(m));
    }
    return out;
}

namespace {

bool equation_unsat(const WordEquation& e) {
    // distinct letter heads, or one side empty with a letter head opposite
    if (!e.lhs.empty() && !e.rhs.empty()) {
        if (e.lhs[0].is_letter() && e.rhs[0].is_letter() && !(e.lhs[0] == e.rhs[0])) return true;
        return false;
    }
    const StringTerm& nonempty = e.lhs.empty() ? e.rhs : e.lhs;
    if (nonempty.empty()) return false;
    return nonempty[0].is_letter();
}

}  // namespace

NodeStatus classify(const EquationSystem& es) {
    if (es.eqs.empty()) return NodeStatus::SatLeaf;
    bool all_trivial = true;
    for (const auto& e : es.eqs) {
        if (equation_unsat(e)) return NodeStatus::UnsatLeaf;
        if (!e.trivial()) all_trivial = false;
    }
    return all_trivial ? NodeStatus::SatLeaf : NodeStatus::Open;
}

std::vector<std::pair<WordEquation, Substitution>> complete(Session& s, const WordEquation& e0) {
    WordEquation e = match(e0);
    if (e.trivial() || equation_unsat(e)) throw Error("complete: equation is a leaf form");

    auto child = [&e](const Substitution& sub) { return match(apply_subst(e, sub)); };
    std::vector<std::pair<WordEquation, Substitution>> out;

    // One side empty, the other variable-headed: the variable must vanish.
    if (e.lhs.empty() || e.rhs.empty()) {
        const StringTerm& nonempty = e.lhs.empty() ? e.rhs : e.lhs;
        Substitution sub = Substitution::eps(nonempty[0]);
        out.emplace_back(child(sub), sub);
        return out;
    }

    Symbol hl = e.lhs[0], hr = e.rhs[0];
    if (hl.is_var() && hr.is_var()) {
        // x t1 = y t2, x != y: [ε/x], [y x'/x], [ε/y], [x y'/y]
        Symbol x = hl, y = hr;
        Substitution s1 = Substitution::eps(x);
        Substitution s2 = Substitution::var_cons(x, y, s.syms.fresh_var(x));
        Substitution s3 = Substitution::eps(y);
        Substitution s4 = Substitution::var_cons(y, x, s.syms.fresh_var(y));
        for (const auto& sub : {s1, s2, s3, s4}) out.emplace_back(child(sub), sub);
        return out;
    }
    // Variable head against a letter head: [ε/x], [c x'/x]
    Symbol x = hl.is_var() ? hl : hr;
    Symbol c = hl.is_var() ? hr : hl;
    Substitution s1 = Substitution::eps(x);
    Substitution s2 = Substitution::letter_cons(x, c, s.syms.fresh_var(x));
    out.emplace_back(child(s1), s1);
    out.emplace_back(child(s2), s2);
    return out;
}

// ── link_back ────────────────────────────────────────────────────────────

namespace {

// Tries to exhibit node == ancestor under a bijective renaming of variables
// created after the ancestor; user variables and older fresh variables must
// match exactly.
std::optional<std::vector<Substitution>> rename_match(const TreeNode& node, const TreeNode& anc) {
    if (node.system.eqs.size() != anc.system.eqs.size()) return std::nullopt;
    std::map<Symbol, Symbol> fwd, rev;
    auto match_sym = [&](Symbol b, Symbol a) -> bool {
        if (b.is_letter() || a.is_letter()) return b == a;
        auto it = fwd.find(b);
        if (it != fwd.end()) return it->second == a;
        if (b == a) {
            if (rev.count(a)) return false;
            fwd[b] = a;
            rev[a] = b;
            return true;
        }
        if (b.id < anc.var_watermark) return false;   // created before the ancestor
        if (rev.count(a)) return false;
        fwd[b] = a;
        rev[a] = b;
        return true;
    };
    for (std::size_t i = 0; i < node.system.eqs.size(); ++i) {
        const auto& eb = node.system.eqs[i];
        const auto& ea = anc.system.eqs[i];
        if (eb.lhs.size() != ea.lhs.size() || eb.rhs.size() != ea.rhs.size()) return std::nullopt;
        for (std::size_t k = 0; k < eb.lhs.size(); ++k)
            if (!match_sym(eb.lhs[k], ea.lhs[k])) return std::nullopt;
        for (std::size_t k = 0; k < eb.rhs.size(); ++k)
            if (!match_sym(eb.rhs[k], ea.rhs[k])) return std::nullopt;
    }
    // Carried free variables must correspond under the same map.
    if (node.carried.size() != anc.carried.size()) return std::nullopt;
    std::set<Symbol> anc_carried(anc.carried.begin(), anc.carried.end());
    for (Symbol b : node.carried) {
        auto it = fwd.find(b);
        Symbol mapped = it != fwd.end() ? it->second : b;
        if (!anc_carried.count(mapped)) return std::nullopt;
    }
    std::vector<Substitution> renames;
    for (const auto& e : node.system.eqs) {
        for (const auto& side : {e.lhs, e.rhs}) {
            for (Symbol b : side) {
                if (!b.is_var()) continue;
                Symbol a = fwd.at(b);
                if (a == b) continue;
                Substitution r = Substitution::rename(b, a);
                if (std::find(renames.begin(), renames.end(), r) == renames.end())
                    renames.push_back(r);
            }
        }
    }
    return renames;
}

bool has_progressing_label(const ReductionTree& t, NodeId companion, NodeId bud) {
    for (NodeId cur = bud; cur != companion; cur = t.at(cur).parent) {
        for (const auto& sub : t.at(cur).in_labels)
            if (sub.shape == SubstShape::LetterCons || sub.shape == SubstShape::VarCons)
                return true;
        if (t.at(cur).parent == kNoNode) return false;
    }
    return false;
}

}  // namespace

std::optional<BackLink> link_back(const Session&, const ReductionTree& t, NodeId node) {
    const TreeNode& n = t.at(node);
    for (NodeId anc = n.parent; anc != kNoNode; anc = t.at(anc).parent) {
        auto renames = rename_match(n, t.at(anc));
        if (!renames) continue;
        if (!has_progressing_label(t, anc, node)) continue;
        return BackLink{anc, std::move(*renames), false};
    }
    return std::nullopt;
}

// ── build_tree ───────────────────────────────────────────────────────────

namespace {

std::vector<Symbol> carried_after(const TreeNode& parent, const std::vector<Substitution>& labels,
                                  const EquationSystem& child_sys) {
    std::set<Symbol> live(parent.carried.begin(), parent.carried.end());
    for (Symbol v : free_vars(parent.system)) live.insert(v);
    for (const auto& sub : labels) {
        for (Symbol v : sub.replacement)
            if (v.is_var()) live.insert(v);
        live.erase(sub.target);
    }
    for (Symbol v : free_vars(child_sys)) live.erase(v);
    return {live.begin(), live.end()};
}

}  // namespace

BuildResult build_tree(Session& s, const EquationSystem& es,
                       const std::vector<Symbol>& relevant_vars, const Budget& budget) {
    BuildResult result;
    ReductionTree& t = result.tree;
    auto start_time = std::chrono::steady_clock::now();

    TreeNode root;
    root.system = normalize_system(es);
    {
        std::set<Symbol> carried(relevant_vars.begin(), relevant_vars.end());
        for (Symbol v : free_vars(root.system)) carried.erase(v);
        root.carried.assign(carried.begin(), carried.end());
    }
    root.var_watermark = s.syms.var_count();
    t.nodes.push_back(std::move(root));

    std::deque<NodeId> work{0};
    while (!work.empty()) {
        if (t.nodes.size() > budget.max_nodes) {
            result.budget_exhausted = true;
            result.reason = "node budget exhausted";
            return result;
        }
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time);
        if (elapsed.count() > budget.wall_time_s) {
            result.budget_exhausted = true;
            result.reason = "wall time exhausted";
            return result;
        }
        NodeId id = work.front();
        work.pop_front();

        NodeStatus st = classify(t.at(id).system);
        if (st != NodeStatus::Open) {
            t.at(id).status = st;
            continue;
        }
        if (auto bl = link_back(s, t, id)) {
            t.at(id).status = NodeStatus::Bud;
            t.at(id).backlink = std::move(*bl);
            continue;
        }
        if (t.at(id).depth >= budget.max_depth) {
            result.budget_exhausted = true;
            result.reason = "depth budget exhausted";
            return result;
        }

        // Leftmost equation with symbols remaining drives the case split.
        std::size_t eq_idx = 0;
        while (eq_idx < t.at(id).system.eqs.size() && t.at(id).system.eqs[eq_idx].trivial()) ++eq_idx;
        const WordEquation eq = t.at(id).system.eqs.at(eq_idx);
        auto splits = complete(s, eq);

        std::vector<EquationSystem> seen;
        for (const auto& [child_eq, sub] : splits) {
            (void)child_eq;
            EquationSystem child_sys = normalize_system(apply_subst(t.at(id).system, sub));
            std::vector<Symbol> carried = carried_after(t.at(id), {sub}, child_sys);
            bool dup = false;
            for (std::size_t k = 0; k < seen.size(); ++k) {
                if (seen[k] == child_sys && t.at(t.at(id).children[k].child).carried == carried) {
                    dup = true;
                    break;
                }
            }
            if (dup) continue;
            seen.push_back(child_sys);

            TreeNode child;
            child.system = std::move(child_sys);
            child.carried = std::move(carried);
            child.parent = id;
            child.in_labels = {sub};
            child.depth = t.at(id).depth + 1;
            child.var_watermark = s.syms.var_count();
            NodeId cid = static_cast<NodeId>(t.nodes.size());
            t.nodes.push_back(std::move(child));
            t.at(id).children.push_back(TreeEdge{{sub}, cid});
            work.push_back(cid);
        }
        t.at(id).status = NodeStatus::Interior;
    }
    return result;
}

// ── trim ─────────────────────────────────────────────────────────────────

void trim(ReductionTree& t) {
    std::size_t n = t.nodes.size();
    std::vector<bool> productive(n, false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (productive[i]) continue;
            const TreeNode& node = t.nodes[i];
            bool p = node.status == NodeStatus::SatLeaf;
            if (node.status == NodeStatus::Bud && node.backlink)
                p = productive[node.backlink->companion];
            for (const auto& e : node.children)
                if (productive[e.child]) p = true;
            if (p) {
                productive[i] = true;
                changed = true;
            }
        }
    }
    if (!productive[t.root]) {
        // Keep the root so callers can still inspect the verdict.
        TreeNode root = t.nodes[t.root];
        root.children.clear();
        root.backlink.reset();
        root.parent = kNoNode;
        t.nodes = {std::move(root)};
        t.root = 0;
        return;
    }
    std::vector<NodeId> remap(n, kNoNode);
    std::vector<TreeNode> kept;
    std::vector<NodeId> order = {t.root};
    for (std::size_t i = 0; i < order.size(); ++i) {
        NodeId id = order[i];
        remap[id] = static_cast<NodeId>(kept.size());
        kept.push_back(t.nodes[id]);
        for (const auto& e : t.nodes[id].children)
            if (productive[e.child]) order.push_back(e.child);
    }
    for (auto& node : kept) {
        if (node.parent != kNoNode) node.parent = remap[node.parent];
        std::vector<TreeEdge> edges;
        for (auto& e : node.children)
            if (remap[e.child] != kNoNode) edges.push_back(TreeEdge{e.labels, remap[e.child]});
        node.children = std::move(edges);
        if (node.backlink) node.backlink->companion = remap[node.backlink->companion];
    }
    t.nodes = std::move(kept);
    t.root = 0;
}

// ── postpro ──────────────────────────────────────────────────────────────

void postpro(Session& s, ReductionTree& t) {
    std::vector<NodeId> leaves = t.sat_leaves();
    for (NodeId leaf : leaves) {
        std::vector<Symbol> free = t.at(leaf).carried;
        if (free.empty()) continue;
        std::sort(free.begin(), free.end());

        // Chain of base nodes, one per free variable, each with |Σ| cycles.
        NodeId cur = leaf;
        t.at(cur).status = NodeStatus::Interior;
        t.at(cur).synthetic = true;
        for (std::size_t i = 0; i < free.size(); ++i) {
            Symbol x = free[i];
            std::vector<Symbol> rest(free.begin() + static_cast<long>(i) + 1, free.end());
            // Cycle children: [c_j x'/x] with back-link [x/x'].
            for (Symbol c : s.alphabet) {
                Symbol xp = s.syms.fresh_var(x);
                TreeNode bud;
                bud.carried = t.at(cur).carried;
                std::replace(bud.carried.begin(), bud.carried.end(), x, xp);
                std::sort(bud.carried.begin(), bud.carried.end());
                bud.status = NodeStatus::Bud;
                bud.parent = cur;
                bud.in_labels = {Substitution::letter_cons(x, c, xp)};
                bud.depth = t.at(cur).depth + 1;
                bud.var_watermark = s.syms.var_count();
                bud.synthetic = true;
                bud.backlink = BackLink{cur, {Substitution::rename(xp, x)}, false};
                NodeId bid = static_cast<NodeId>(t.nodes.size());
                t.nodes.push_back(std::move(bud));
                t.at(cur).children.push_back(TreeEdge{{Substitution::letter_cons(x, c, xp)}, bid});
            }
            // Base child: [ε/x]; last one is the satisfiable leaf.
            TreeNode base;
            base.carried = rest;
            base.status = rest.empty() ? NodeStatus::SatLeaf : NodeStatus::Interior;
            base.parent = cur;
            base.in_labels = {Substitution::eps(x)};
            base.depth = t.at(cur).depth + 1;
            base.var_watermark = s.syms.var_count();
            base.synthetic = true;
            NodeId bid = static_cast<NodeId>(t.nodes.size());
            t.nodes.push_back(std::move(base));
            t.at(cur).children.push_back(TreeEdge{{Substitution::eps(x)}, bid});
            cur = bid;
        }
    }
}

// ── traces & models ──────────────────────────────────────────────────────

namespace {

std::vector<Substitution> cycle_labels(const ReductionTree& t, NodeId companion, NodeId bud) {
    std::vector<Substitution> labels;
    std::vector<NodeId> chain;
    for (NodeId cur = bud; cur != companion; cur = t.at(cur).parent) chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    for (NodeId id : chain)
        labels.insert(labels.end(), t.at(id).in_labels.begin(), t.at(id).in_labels.end());
    if (t.at(bud).backlink)
        labels.insert(labels.end(), t.at(bud).backlink->renames.begin(),
                      t.at(bud).backlink->renames.end());
    return labels;
}

}  // namespace

SolutionTrace solution_trace(const ReductionTree& t, NodeId leaf) {
    SolutionTrace trace;
    trace.path_nodes = t.path_from_root(leaf);
    for (std::size_t i = 1; i < trace.path_nodes.size(); ++i)
        trace.path_labels.push_back(t.at(trace.path_nodes[i]).in_labels);
    // Cycles whose companion lies on the path, in path order.
    for (NodeId on_path : trace.path_nodes) {
        std::vector<NodeId> bud_ids;
        for (NodeId i = 0; i < t.nodes.size(); ++i)
            if (t.at(i).status == NodeStatus::Bud && t.at(i).backlink &&
                t.at(i).backlink->companion == on_path)
                bud_ids.push_back(i);
        std::sort(bud_ids.begin(), bud_ids.end());
        for (NodeId bud : bud_ids)
            trace.cycles.push_back(TraceCycle{on_path, bud, cycle_labels(t, on_path, bud)});
    }
    return trace;
}

namespace {

// Expands the trace into a straight-line label sequence with per-iteration
// alpha-renaming so reverse resolution sees unique targets.
struct TraceExpander {
    Session& s;
    std::map<Symbol, Symbol> current;   // original var -> current instance
    std::vector<Substitution> out;
    std::uint32_t instance_counter = 0;

    Symbol resolve(Symbol v) {
        auto it = current.find(v);
        return it == current.end() ? v : it->second;
    }

    Symbol instantiate(Symbol v) {
        Symbol inst = s.syms.fresh_var(v);
        current[v] = inst;
        return inst;
    }

    void emit(const Substitution& sub) {
        if (sub.shape == SubstShape::Rename) {
            // [y/x]: later labels targeting y actually bind the current x.
            current[sub.replacement[0]] = resolve(sub.target);
            return;
        }
        Symbol target = resolve(sub.target);
        StringTerm repl;
        switch (sub.shape) {
            case SubstShape::Eps:
                break;
            case SubstShape::LetterCons:
                // [c x'/x]: x' is fresh here, new instance per emission.
                repl.push_back(sub.replacement[0]);
                repl.push_back(instantiate(sub.replacement[1]));
                break;
            case SubstShape::VarCons:
                // [y x'/x]: y is a prior variable, x' is fresh.
                repl.push_back(resolve(sub.replacement[0]));
                repl.push_back(instantiate(sub.replacement[1]));
                break;
            case SubstShape::Rename:
                break;
        }
        out.push_back(Substitution{target, std::move(repl), sub.shape});
    }
};

}  // namespace

std::map<Symbol, StringTerm> extract_model(Session& s, const ReductionTree& t, NodeId leaf,
                                           const std::vector<std::uint64_t>& cycle_counts) {
    if (t.at(leaf).status != NodeStatus::SatLeaf) throw Error("extract_model: not a SatLeaf");
    SolutionTrace trace = solution_trace(t, leaf);
    if (cycle_counts.size() != trace.cycles.size())
        throw Error("extract_model: need one count per crossed cycle");

    // Expand: walk the path; at each node apply its cycles count times.
    TraceExpander ex{s, {}, {}, 0};
    std::size_t path_pos = 0;
    for (std::size_t ni = 0; ni < trace.path_nodes.size(); ++ni) {
        for (std::size_t ci = 0; ci < trace.cycles.size(); ++ci) {
            if (trace.cycles[ci].companion != trace.path_nodes[ni]) continue;
            for (std::uint64_t k = 0; k < cycle_counts[ci]; ++k)
                for (const auto& sub : trace.cycles[ci].labels) ex.emit(sub);
        }
        if (ni + 1 < trace.path_nodes.size()) {
            for (const auto& sub : trace.path_labels[path_pos]) ex.emit(sub);
            ++path_pos;
        }
    }

    // Reverse resolution: every target is unique in the expanded sequence.
    std::map<Symbol, StringTerm> words;
    for (auto it = ex.out.rbegin(); it != ex.out.rend(); ++it) {
        StringTerm w;
        for (Symbol sym : it->replacement) {
            if (sym.is_letter()) {
                w.push_back(sym);
            } else {
                auto found = words.find(sym);
                if (found != words.end())
                    w.insert(w.end(), found->second.begin(), found->second.end());
                // Unassigned variables resolve to ε.
            }
        }
        words[it->target] = std::move(w);
    }

    // Restrict to the root's variables and verify by substitution.
    std::map<Symbol, StringTerm> model;
    std::vector<Symbol> roots = node_vars(t.at(t.root));
    for (Symbol v : roots) {
        auto it = words.find(v);
        model[v] = it == words.end() ? StringTerm{} : it->second;
    }
    for (const auto& e : t.at(t.root).system.eqs) {
        StringTerm l, r;
        for (Symbol sym : e.lhs) {
            if (sym.is_letter()) l.push_back(sym);
            else l = concat(l, model.count(sym) ? model[sym] : StringTerm{});
        }
        for (Symbol sym : e.rhs) {
            if (sym.is_letter()) r.push_back(sym);
            else r = concat(r, model.count(sym) ? model[sym] : StringTerm{});
        }
        if (l != r)
            throw Error("extract_model: internal unsoundness, model fails the root system");
    }
    return model;
}

// ── diagnostics ──────────────────────────────────────────────────────────

std::string to_dot(const Session& s, const ReductionTree& t) {
    std::ostringstream os;
    os << "digraph reduction_tree {\n  node [shape=box,fontname=\"monospace\"];\n";
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        const TreeNode& n = t.at(i);
        std::string label = to_string(s, n.system);
        for (Symbol v : n.carried) label += " ∧ " + s.syms.name(v) + "=" + s.syms.name(v);
        const char* color = "black";
        switch (n.status) {
            case NodeStatus::SatLeaf: color = "green"; break;
            case NodeStatus::UnsatLeaf: color = "red"; break;
            case NodeStatus::Bud: color = "blue"; break;
            case NodeStatus::Open: color = "orange"; break;
            default: break;
        }
        os << "  n" << i << " [label=\"e" << i << ": " << label << "\",color=" << color << "];\n";
    }
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        for (const auto& e : t.at(i).children) {
            os << "  n" << i << " -> n" << e.child << " [label=\"";
            for (std::size_t k = 0; k < e.labels.size(); ++k) {
                if (k) os << ",";
                os << to_string(s, e.labels[k]);
            }
            os << "\"];\n";
        }
        if (t.at(i).backlink) {
            os << "  n" << i << " -> n" << t.at(i).backlink->companion << " [style=dashed,label=\"";
            for (std::size_t k = 0; k < t.at(i).backlink->renames.size(); ++k) {
                if (k) os << ",";
                os << to_string(s, t.at(i).backlink->renames[k]);
            }
            os << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

bool check_edges(const Session& s, const ReductionTree& t, std::string* why) {
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        for (const auto& e : t.at(i).children) {
            const TreeNode& child = t.at(e.child);
            EquationSystem sys = t.at(i).system;
            for (const auto& sub : e.labels) sys = apply_subst(sys, sub);
            sys = normalize_system(std::move(sys));
            if (!(sys == child.system)) {
                if (why)
                    *why = "edge " + std::to_string(i) + " -> " + std::to_string(e.child) +
                           ": got " + to_string(s, sys) + " expected " + to_string(s, child.system);
                return false;
            }
            // Carried bookkeeping must be re-derivable as well.
            auto carried = carried_after(t.at(i), e.labels, child.system);
            if (carried != child.carried) {
                if (why) *why = "carried mismatch on edge to " + std::to_string(e.child);
                return false;
            }
        }
    }
    return true;
}

bool check_backlinks(const Session& s, const ReductionTree& t, std::string* why) {
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        const TreeNode& n = t.at(i);
        if (!n.backlink) continue;
        const TreeNode& comp = t.at(n.backlink->companion);
        // Companion must be a strict ancestor.
        bool ancestor = false;
        for (NodeId cur = n.parent; cur != kNoNode; cur = t.at(cur).parent)
            if (cur == n.backlink->companion) {
                ancestor = true;
                break;
            }
        if (!ancestor) {
            if (why) *why = "companion of " + std::to_string(i) + " is not a strict ancestor";
            return false;
        }
        EquationSystem sys = n.system;
        for (const auto& r : n.backlink->renames) sys = apply_subst(sys, r);
        if (!(sys == comp.system)) {
            if (why)
                *why = "backlink " + std::to_string(i) + ": renamed bud " + to_string(s, sys) +
                       " != companion " + to_string(s, comp.system);
            return false;
        }
        std::set<Symbol> carried(n.carried.begin(), n.carried.end());
        for (const auto& r : n.backlink->renames) {
            if (carried.erase(r.target)) carried.insert(r.replacement[0]);
        }
        std::set<Symbol> comp_carried(comp.carried.begin(), comp.carried.end());
        if (carried != comp_carried) {
            if (why) *why = "backlink " + std::to_string(i) + ": carried sets differ";
            return false;
        }
        if (!has_progressing_label(t, n.backlink->companion, i)) {
            if (why) *why = "cycle at " + std::to_string(i) + " has no progressing substitution";
            return false;
        }
    }
    return true;
}

bool check_cycle_lengths(const ReductionTree& t, std::string* why) {
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        const TreeNode& n = t.at(i);
        if (!n.backlink || n.synthetic || n.backlink->from_widening) continue;
        int len = 0;
        for (NodeId cur = i; cur != n.backlink->companion; cur = t.at(cur).parent) ++len;
        int comp_n = t.at(n.backlink->companion).system.max_equation_length();
        if (len >= comp_n) {
            if (why)
                *why = "cycle at " + std::to_string(i) + " has length " + std::to_string(len) +
                       " >= N = " + std::to_string(comp_n);
            return false;
        }
    }
    return true;
}

}  // namespace kepler
