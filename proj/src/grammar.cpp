#include "kepler/grammar.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace kepler {

namespace {

StringTerm root_word(const ReductionTree& t) {
    StringTerm w;
    for (const auto& e : t.at(t.root).system.eqs) w = concat(w, e.lhs);
    return w;
}

std::vector<Symbol> collect_nonterminals(const std::vector<Production>& prods, Symbol start) {
    std::vector<Symbol> nts{start};
    auto push = [&nts](Symbol v) {
        if (v.is_var() && std::find(nts.begin(), nts.end(), v) == nts.end()) nts.push_back(v);
    };
    for (const auto& p : prods) {
        push(p.lhs);
        for (Symbol sym : p.rhs) push(sym);
    }
    return nts;
}

std::vector<Symbol> collect_terminals(const std::vector<Production>& prods) {
    std::vector<Symbol> ts;
    for (const auto& p : prods)
        for (Symbol sym : p.rhs)
            if (sym.is_letter() && std::find(ts.begin(), ts.end(), sym) == ts.end())
                ts.push_back(sym);
    std::sort(ts.begin(), ts.end());
    return ts;
}

}  // namespace

// ── EDT0L extraction ─────────────────────────────────────────────────────

Edt0l extract_edtl(Session& s, const ReductionTree& t) {
    Edt0l g;
    g.start = s.syms.fresh_var(s.syms.intern_internal_var("S"));
    StringTerm axiom = root_word(t);

    std::vector<NodeId> targets;
    for (NodeId i = 0; i < t.nodes.size(); ++i)
        if (t.at(i).status == NodeStatus::SatLeaf || t.at(i).status == NodeStatus::Bud)
            targets.push_back(i);

    for (NodeId leaf : targets) {
        std::vector<Production> table;
        table.push_back(Production{g.start, axiom});
        for (NodeId id : t.path_from_root(leaf)) {
            for (const auto& sub : t.at(id).in_labels)
                table.push_back(Production{sub.target, sub.replacement});
        }
        if (t.at(leaf).backlink)
            for (const auto& r : t.at(leaf).backlink->renames)
                table.push_back(Production{r.target, r.replacement});
        g.tables.push_back(std::move(table));
    }
    std::vector<Production> all;
    for (const auto& tab : g.tables) all.insert(all.end(), tab.begin(), tab.end());
    g.nonterminals = collect_nonterminals(all, g.start);
    g.alphabet = collect_terminals(all);
    return g;
}

Cfg edt0l_to_cfg(const Edt0l& g) {
    Cfg c;
    c.start = g.start;
    for (const auto& tab : g.tables)
        for (const auto& p : tab)
            if (std::find(c.prods.begin(), c.prods.end(), p) == c.prods.end()) c.prods.push_back(p);
    c.nonterminals = collect_nonterminals(c.prods, c.start);
    c.alphabet = collect_terminals(c.prods);
    return c;
}

// ── Staged CFG extraction ────────────────────────────────────────────────

namespace {

struct PathCycle {
    NodeId companion;
    NodeId bud;
    std::vector<Substitution> labels;    // companion -> bud edge labels
    std::vector<Substitution> renames;   // sigma_cyc
};

std::vector<Substitution> labels_between(const ReductionTree& t, NodeId top, NodeId bottom) {
    std::vector<NodeId> chain;
    for (NodeId cur = bottom; cur != top; cur = t.at(cur).parent) chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    std::vector<Substitution> out;
    for (NodeId id : chain)
        out.insert(out.end(), t.at(id).in_labels.begin(), t.at(id).in_labels.end());
    return out;
}

bool on_path(const std::vector<NodeId>& path, NodeId id) {
    return std::find(path.begin(), path.end(), id) != path.end();
}

}  // namespace

Cfg extract_cfg_for_leaf(Session& s, const ReductionTree& t, NodeId leaf) {
    std::vector<NodeId> path = t.path_from_root(leaf);

    // Cycles whose companion lies on the path, sorted top-down by depth.
    std::vector<PathCycle> cycles;
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        const TreeNode& n = t.at(i);
        if (n.status != NodeStatus::Bud || !n.backlink) continue;
        if (!on_path(path, n.backlink->companion)) continue;
        cycles.push_back(PathCycle{n.backlink->companion, i,
                                   labels_between(t, n.backlink->companion, i),
                                   n.backlink->renames});
    }
    std::stable_sort(cycles.begin(), cycles.end(), [&t](const PathCycle& a, const PathCycle& b) {
        if (t.at(a.companion).depth != t.at(b.companion).depth)
            return t.at(a.companion).depth < t.at(b.companion).depth;
        return a.bud < b.bud;
    });

    // Nested cycles break the staging scheme.
    for (const auto& c1 : cycles)
        for (const auto& c2 : cycles) {
            if (c1.bud == c2.bud) continue;
            for (NodeId cur = c2.bud; cur != c2.companion; cur = t.at(cur).parent)
                if (cur == c1.companion && c1.companion != c2.companion)
                    throw NotFlat("extract_cfg: nested cycles");
        }

    Cfg g;
    g.start = s.syms.fresh_var(s.syms.intern_internal_var("S"));
    g.prods.push_back(Production{g.start, root_word(t)});

    std::map<Symbol, Symbol> stage;   // extensible var -> current staged name
    auto staged = [&stage](Symbol v) {
        auto it = stage.find(v);
        return it == stage.end() ? v : it->second;
    };
    auto apply_stage = [&](const StringTerm& term) {
        StringTerm out;
        for (Symbol sym : term) out.push_back(sym.is_var() ? staged(sym) : sym);
        return out;
    };

    // Walk the path top-down; at each node emit its cycles' rules, stage the
    // extensible variables, then emit the path edge's own rules.
    std::size_t cycle_idx = 0;
    for (std::size_t pi = 0; pi < path.size(); ++pi) {
        while (cycle_idx < cycles.size() && cycles[cycle_idx].companion == path[pi]) {
            const PathCycle& c = cycles[cycle_idx];
            for (const auto& sub : c.labels)
                g.prods.push_back(Production{staged(sub.target), apply_stage(sub.replacement)});
            for (const auto& r : c.renames)
                g.prods.push_back(Production{staged(r.target), {staged(r.replacement[0])}});
            // Connect each extensible variable to its next stage.
            for (const auto& r : c.renames) {
                Symbol x = r.replacement[0];
                Symbol next = s.syms.fresh_var(x);
                g.prods.push_back(Production{staged(x), {next}});
                stage[x] = next;
            }
            ++cycle_idx;
        }
        if (pi + 1 < path.size()) {
            for (const auto& sub : t.at(path[pi + 1]).in_labels) {
                if (sub.shape == SubstShape::Rename) {
                    g.prods.push_back(Production{staged(sub.target), {staged(sub.replacement[0])}});
                } else {
                    g.prods.push_back(
                        Production{staged(sub.target), apply_stage(sub.replacement)});
                }
            }
        }
    }
    g.nonterminals = collect_nonterminals(g.prods, g.start);
    g.alphabet = collect_terminals(g.prods);
    return g;
}

Cfg extract_cfg(Session& s, const ReductionTree& t) {
    std::vector<NodeId> leaves = t.sat_leaves();
    Cfg g;
    g.start = s.syms.fresh_var(s.syms.intern_internal_var("S"));
    for (NodeId leaf : leaves) {
        Cfg sub = extract_cfg_for_leaf(s, t, leaf);
        // Namespace the sub-grammar's nonterminals to avoid capture.
        std::map<Symbol, Symbol> ns;
        for (Symbol v : sub.nonterminals) ns[v] = s.syms.fresh_var(v);
        auto mapped = [&ns](const StringTerm& term) {
            StringTerm out;
            for (Symbol sym : term) out.push_back(sym.is_var() ? ns.at(sym) : sym);
            return out;
        };
        for (const auto& p : sub.prods) g.prods.push_back(Production{ns.at(p.lhs), mapped(p.rhs)});
        g.prods.push_back(Production{g.start, {ns.at(sub.start)}});
    }
    g.nonterminals = collect_nonterminals(g.prods, g.start);
    g.alphabet = collect_terminals(g.prods);
    return g;
}

Cfg restart_at(const Cfg& g, Symbol nonterminal, bool prune_unreachable) {
    Cfg out = g;
    out.start = nonterminal;
    if (!prune_unreachable) return out;
    std::set<Symbol> reach{nonterminal};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : g.prods) {
            if (!reach.count(p.lhs)) continue;
            for (Symbol sym : p.rhs)
                if (sym.is_var() && reach.insert(sym).second) changed = true;
        }
    }
    out.prods.clear();
    for (const auto& p : g.prods)
        if (reach.count(p.lhs)) out.prods.push_back(p);
    out.nonterminals = collect_nonterminals(out.prods, out.start);
    out.alphabet = g.alphabet;
    return out;
}

// ── Enumeration ──────────────────────────────────────────────────────────

namespace {

// Shortest terminal yield per nonterminal (INT_MAX/2 when none).
std::map<Symbol, int> min_yields(const std::vector<Production>& prods,
                                 const std::vector<Symbol>& nts) {
    constexpr int kInf = 1 << 20;
    std::map<Symbol, int> y;
    for (Symbol v : nts) y[v] = kInf;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : prods) {
            long total = 0;
            for (Symbol sym : p.rhs) total += sym.is_letter() ? 1 : y.count(sym) ? y[sym] : kInf;
            if (total < y[p.lhs]) {
                y[p.lhs] = static_cast<int>(std::min<long>(total, kInf));
                changed = true;
            }
        }
    }
    return y;
}

int form_min_len(const StringTerm& form, const std::map<Symbol, int>& yields) {
    long total = 0;
    for (Symbol sym : form) {
        if (sym.is_letter()) ++total;
        else {
            auto it = yields.find(sym);
            total += it == yields.end() ? (1 << 20) : it->second;
        }
    }
    return static_cast<int>(std::min<long>(total, 1 << 20));
}

}  // namespace

std::set<StringTerm> enumerate_words(const Cfg& g, int max_len) {
    if (max_len > 16) throw Error("enumerate_words: max_len too large");
    auto yields = min_yields(g.prods, g.nonterminals);
    const std::size_t form_cap = static_cast<std::size_t>(max_len) + 16;

    std::set<StringTerm> words, visited;
    std::deque<StringTerm> work;
    StringTerm start{g.start};
    work.push_back(start);
    visited.insert(start);
    while (!work.empty()) {
        StringTerm form = work.front();
        work.pop_front();
        // Leftmost nonterminal.
        std::size_t nt = form.size();
        for (std::size_t i = 0; i < form.size(); ++i)
            if (form[i].is_var()) {
                nt = i;
                break;
            }
        if (nt == form.size()) {
            if (static_cast<int>(form.size()) <= max_len) words.insert(form);
            continue;
        }
        for (const auto& p : g.prods) {
            if (!(p.lhs == form[nt])) continue;
            StringTerm next;
            next.reserve(form.size() + p.rhs.size());
            next.insert(next.end(), form.begin(), form.begin() + static_cast<long>(nt));
            next.insert(next.end(), p.rhs.begin(), p.rhs.end());
            next.insert(next.end(), form.begin() + static_cast<long>(nt) + 1, form.end());
            if (next.size() > form_cap) continue;
            if (form_min_len(next, yields) > max_len) continue;
            if (visited.insert(next).second) work.push_back(next);
        }
    }
    return words;
}

std::set<StringTerm> enumerate_words(const Edt0l& g, int max_len) {
    return enumerate_words(g, max_len, nullptr);
}

std::set<StringTerm> enumerate_words(const Edt0l& g, int max_len, std::size_t* max_index) {
    if (max_len > 16) throw Error("enumerate_words: max_len too large");
    std::vector<Production> all;
    for (const auto& tab : g.tables) all.insert(all.end(), tab.begin(), tab.end());
    auto yields = min_yields(all, g.nonterminals);
    const std::size_t form_cap = static_cast<std::size_t>(max_len) + 16;

    std::set<StringTerm> words, visited;
    std::deque<StringTerm> work;
    StringTerm start{g.start};
    work.push_back(start);
    visited.insert(start);
    if (max_index) *max_index = 1;
    while (!work.empty()) {
        StringTerm form = work.front();
        work.pop_front();
        bool ground = true;
        std::size_t nt_count = 0;
        for (Symbol sym : form)
            if (sym.is_var()) {
                ground = false;
                ++nt_count;
            }
        if (max_index && nt_count > *max_index) *max_index = nt_count;
        if (ground) {
            if (static_cast<int>(form.size()) <= max_len) words.insert(form);
            continue;
        }
        for (const auto& tab : g.tables) {
            // Deterministic: one production per nonterminal, identity elsewhere.
            StringTerm next;
            for (Symbol sym : form) {
                if (sym.is_letter()) {
                    next.push_back(sym);
                    continue;
                }
                const Production* found = nullptr;
                for (const auto& p : tab)
                    if (p.lhs == sym) {
                        found = &p;
                        break;
                    }
                if (found) next.insert(next.end(), found->rhs.begin(), found->rhs.end());
                else next.push_back(sym);
            }
            if (next == form) continue;
            if (next.size() > form_cap) continue;
            if (form_min_len(next, yields) > max_len) continue;
            if (visited.insert(next).second) work.push_back(next);
        }
    }
    return words;
}

// ── Dumps ────────────────────────────────────────────────────────────────

namespace {

std::string prod_line(const Session& s, const Production& p) {
    std::string rhs;
    for (Symbol sym : p.rhs) rhs += s.syms.name(sym);
    if (rhs.empty()) rhs = "<eps>";
    return s.syms.name(p.lhs) + " -> " + rhs;
}

}  // namespace

std::string dump_grammar(const Session& s, const Cfg& g) {
    std::string out;
    for (const auto& p : g.prods) out += prod_line(s, p) + "\n";
    return out;
}

std::string dump_grammar(const Session& s, const Edt0l& g) {
    std::string out;
    for (std::size_t i = 0; i < g.tables.size(); ++i) {
        out += "-- table " + std::to_string(i + 1) + "\n";
        for (const auto& p : g.tables[i]) out += prod_line(s, p) + "\n";
    }
    return out;
}

}  // namespace kepler
