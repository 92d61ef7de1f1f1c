#include "kepler/widen.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace kepler {

std::uint64_t factorial(std::uint32_t n) {
    std::uint64_t f = 1;
    for (std::uint32_t i = 2; i <= n; ++i) f *= i;
    return f;
}

std::map<Symbol, Dfa> membership_dfas(Session& s, const std::vector<Membership>& memberships) {
    std::map<Symbol, Dfa> out;
    for (const auto& m : memberships) {
        Dfa d = regex_to_dfa(m.re, s.alphabet);
        auto it = out.find(m.var);
        if (it == out.end()) out.emplace(m.var, std::move(d));
        else it->second = product_intersection(it->second, d);
    }
    return out;
}

namespace {

Symbol copy_name(Session& s, Symbol v, std::size_t op, std::size_t k) {
    std::string base =
        s.syms.name(v) + "@" + std::to_string(op) + "_" + std::to_string(k);
    std::string name = base;
    int bump = 0;
    while (s.syms.has_var(name)) name = base + "'" + std::to_string(++bump);
    return s.syms.intern_internal_var(name);
}

struct Unroller {
    Session& s;
    ReductionTree& t;
    std::size_t op_counter = 0;

    std::vector<NodeId> segment_nodes(NodeId companion) const {
        std::vector<NodeId> out{companion};
        for (std::size_t i = 0; i < out.size(); ++i)
            for (const auto& e : t.at(out[i]).children) out.push_back(e.child);
        return out;
    }

    // One cycle: K = m+M copies, final bud re-linked to copy m+1 so the tail
    // loop has length exactly M.
    void unroll(NodeId bud, std::uint32_t m, std::uint64_t M) {
        ++op_counter;
        const BackLink link = *t.at(bud).backlink;
        NodeId companion = link.companion;
        const std::uint64_t K = m + M;

        std::vector<NodeId> segment = segment_nodes(companion);
        std::set<NodeId> in_segment(segment.begin(), segment.end());

        // Variables private to one traversal of the segment: everything
        // created after the companion, plus the rolled variables themselves.
        std::set<Symbol> to_rename;
        for (const auto& r : link.renames) to_rename.insert(r.replacement[0]);
        std::uint32_t watermark = t.at(companion).var_watermark;
        auto note = [&](Symbol v) {
            if (v.is_var() && v.id >= watermark) to_rename.insert(v);
        };
        for (NodeId id : segment) {
            for (const auto& e : t.at(id).system.eqs)
                for (const auto& side : {e.lhs, e.rhs})
                    for (Symbol v : side) note(v);
            for (Symbol v : t.at(id).carried) note(v);
            for (const auto& sub : t.at(id).in_labels) {
                note(sub.target);
                for (Symbol v : sub.replacement) note(v);
            }
        }

        // Build the K copies.
        std::vector<std::map<Symbol, Symbol>> rho(K + 1);   // rho[1..K]
        std::vector<std::map<NodeId, NodeId>> node_map(K + 1);
        for (std::uint64_t k = 1; k <= K; ++k) {
            for (Symbol v : to_rename) rho[k][v] = copy_name(s, v, op_counter, k);
            auto map_sym = [&](Symbol v) {
                auto it = rho[k].find(v);
                return it == rho[k].end() ? v : it->second;
            };
            auto map_term = [&](const StringTerm& w) {
                StringTerm out;
                for (Symbol v : w) out.push_back(v.is_var() ? map_sym(v) : v);
                return out;
            };
            auto map_subst = [&](const Substitution& sub) {
                return Substitution{map_sym(sub.target), map_term(sub.replacement), sub.shape};
            };
            for (NodeId id : segment) {
                const TreeNode src = t.at(id);
                TreeNode copy;
                for (const auto& e : src.system.eqs)
                    copy.system.eqs.push_back(WordEquation{map_term(e.lhs), map_term(e.rhs)});
                for (Symbol v : src.carried) copy.carried.push_back(map_sym(v));
                std::sort(copy.carried.begin(), copy.carried.end());
                copy.status = src.status;
                copy.synthetic = src.synthetic;
                copy.var_watermark = s.syms.var_count();
                for (const auto& sub : src.in_labels) copy.in_labels.push_back(map_subst(sub));
                NodeId cid = static_cast<NodeId>(t.nodes.size());
                node_map[k][id] = cid;
                t.nodes.push_back(std::move(copy));
            }
            // Wire parents, children and inner back-links of the copy.
            for (NodeId id : segment) {
                NodeId cid = node_map[k][id];
                const TreeNode& src = t.at(id);
                TreeNode& dst = t.at(cid);
                dst.parent = id == companion ? kNoNode : node_map[k][src.parent];
                for (const auto& e : src.children)
                    dst.children.push_back(TreeEdge{t.at(node_map[k][e.child]).in_labels,
                                                    node_map[k][e.child]});
                if (src.backlink && !(id == bud)) {
                    BackLink bl = *src.backlink;
                    bool inner = in_segment.count(bl.companion) != 0;
                    std::vector<Substitution> renames;
                    for (const auto& r : bl.renames) {
                        Symbol target = map_sym(r.target);
                        Symbol repl = inner ? map_sym(r.replacement[0]) : r.replacement[0];
                        renames.push_back(Substitution::rename(target, repl));
                    }
                    bl.renames = std::move(renames);
                    if (inner) bl.companion = node_map[k][bl.companion];
                    dst.backlink = std::move(bl);
                } else {
                    dst.backlink.reset();
                }
            }
        }

        // Chain the copies: each bud instance becomes an interior node with a
        // rename edge into the next copy's companion.
        auto chain_renames = [&](std::uint64_t from, std::uint64_t to) {
            // from: 0 = original bud vars; to: copy index of the companion.
            std::vector<Substitution> renames;
            for (const auto& r : link.renames) {
                Symbol b = r.target;
                Symbol c = r.replacement[0];
                Symbol from_sym = from == 0 ? b : rho[from].count(b) ? rho[from][b] : b;
                Symbol to_sym = rho[to].count(c) ? rho[to][c] : c;
                renames.push_back(Substitution::rename(from_sym, to_sym));
            }
            return renames;
        };

        {
            TreeNode& orig_bud = t.at(bud);
            orig_bud.status = NodeStatus::Interior;
            orig_bud.backlink.reset();
            auto renames = chain_renames(0, 1);
            NodeId head = node_map[1][companion];
            t.at(head).parent = bud;
            t.at(head).in_labels = renames;
            orig_bud.children.push_back(TreeEdge{renames, head});
        }
        for (std::uint64_t k = 1; k < K; ++k) {
            NodeId bk = node_map[k][bud];
            TreeNode& bud_k = t.at(bk);
            bud_k.status = NodeStatus::Interior;
            bud_k.backlink.reset();
            auto renames = chain_renames(k, k + 1);
            NodeId head = node_map[k + 1][companion];
            t.at(head).parent = bk;
            t.at(head).in_labels = renames;
            bud_k.children.push_back(TreeEdge{renames, head});
        }
        {
            // Final bud: closed, re-linked to the copy at position m (the
            // companion instance C_{m+1}), giving the loop length M.
            NodeId bK = node_map[K][bud];
            TreeNode& final_bud = t.at(bK);
            final_bud.status = NodeStatus::Bud;
            final_bud.backlink =
                BackLink{node_map[m + 1][companion], chain_renames(K, m + 1), true};
        }

        // Depths need recomputation below the original bud.
        fix_depths();
    }

    void fix_depths() {
        std::vector<NodeId> order{t.root};
        t.at(t.root).depth = 0;
        for (std::size_t i = 0; i < order.size(); ++i)
            for (const auto& e : t.at(order[i]).children) {
                t.at(e.child).depth = t.at(order[i]).depth + 1;
                order.push_back(e.child);
            }
    }
};

}  // namespace

WidenResult widen_tree(Session& s, ReductionTree& t, const std::vector<Membership>& memberships,
                       const WidenLimits& limits) {
    WidenResult res;
    auto dfas = membership_dfas(s, memberships);
    Dfa product = universal_dfa(s.alphabet);
    for (auto& [v, d] : dfas) {
        (void)v;
        product = product_intersection(product, d);
    }
    std::uint32_t m = live_state_count(product);
    if (m == 0) m = 1;   // empty product: evaluation will refute every leaf
    std::uint64_t M = factorial(m);
    res.m = m;
    res.M = M;
    if (m + M > limits.unroll_cap) {
        res.cap_exceeded = true;
        res.reason = "m+M exceeds the unroll cap";
        return res;
    }

    Unroller unroller{s, t, 0};
    for (;;) {
        // Shallowest companion first; ties by bud id.
        NodeId pick = kNoNode;
        for (NodeId i = 0; i < t.nodes.size(); ++i) {
            const TreeNode& n = t.at(i);
            if (n.status != NodeStatus::Bud || !n.backlink || n.backlink->from_widening) continue;
            if (pick == kNoNode ||
                t.at(n.backlink->companion).depth < t.at(t.at(pick).backlink->companion).depth)
                pick = i;
        }
        if (pick == kNoNode) break;
        if (unroller.op_counter >= limits.max_operations || t.nodes.size() > limits.max_nodes) {
            res.cap_exceeded = true;
            res.reason = "widening blow-up (nested or same-companion cycles)";
            return res;
        }
        unroller.unroll(pick, m, M);
    }
    return res;
}

bool evaluate_leaf(Session& s, const ReductionTree& t, NodeId leaf,
                   const std::map<Symbol, Dfa>& var_dfas, std::string* formula_text) {
    // Straight-line definitions along the path, resolved back to front.
    std::vector<NodeId> path = t.path_from_root(leaf);
    std::vector<Substitution> labels;
    for (NodeId id : path)
        labels.insert(labels.end(), t.at(id).in_labels.begin(), t.at(id).in_labels.end());

    std::string text;
    for (const auto& sub : labels) {
        if (!text.empty()) text += " ∧ ";
        std::string rhs;
        for (Symbol sym : sub.replacement) rhs += s.syms.name(sym);
        if (rhs.empty()) rhs = "ε";
        text += s.syms.name(sub.target) + "=" + rhs;
    }

    std::map<Symbol, StringTerm> words;
    for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
        StringTerm w;
        for (Symbol sym : it->replacement) {
            if (sym.is_letter()) {
                w.push_back(sym);
            } else {
                auto found = words.find(sym);
                if (found != words.end()) w.insert(w.end(), found->second.begin(), found->second.end());
            }
        }
        words[it->target] = std::move(w);
    }

    bool ok = true;
    for (const auto& [v, d] : var_dfas) {
        if (!text.empty()) text += " ∧ ";
        text += s.syms.name(v) + "∈R(" + s.syms.name(v) + ")";
        StringTerm w = words.count(v) ? words[v] : StringTerm{};
        if (!accepts(d, w)) ok = false;
    }
    if (formula_text) *formula_text = text;
    return ok;
}

void evaluate_leaves(Session& s, ReductionTree& t, const std::map<Symbol, Dfa>& var_dfas,
                     WidenResult& result) {
    for (NodeId leaf : t.sat_leaves()) {
        LeafEval entry;
        entry.leaf = leaf;
        entry.path = "(n" + std::to_string(t.root) + ",n" + std::to_string(leaf) + ")";
        entry.sat = evaluate_leaf(s, t, leaf, var_dfas, &entry.formula);
        if (!entry.sat) t.at(leaf).status = NodeStatus::UnsatLeaf;
        result.log.push_back(std::move(entry));
    }
}

}  // namespace kepler
