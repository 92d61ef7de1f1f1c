#include "kepler/lengths.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace kepler {

// ── gen(σ) and CHC extraction ────────────────────────────────────────────

Arith gen_sigma(Session& s, const Substitution& sub) {
    AVar nx = s.avars.length_of(sub.target, s.syms);
    switch (sub.shape) {
        case SubstShape::Eps:
            return a_eq(LinTerm::of_var(nx), LinTerm::of_const(0));
        case SubstShape::LetterCons: {
            AVar ny = s.avars.length_of(sub.replacement[1], s.syms);
            LinTerm rhs = LinTerm::of_var(ny);
            rhs.constant += 1;
            return a_eq(LinTerm::of_var(nx), std::move(rhs));
        }
        case SubstShape::VarCons: {
            AVar ny = s.avars.length_of(sub.replacement[0], s.syms);
            AVar nz = s.avars.length_of(sub.replacement[1], s.syms);
            LinTerm rhs = LinTerm::of_var(ny);
            rhs.add(LinTerm::of_var(nz));
            return a_eq(LinTerm::of_var(nx), std::move(rhs));
        }
        case SubstShape::Rename:
            throw Error("gen: rename labels are handled by cycle clauses");
    }
    throw Error("gen: bad substitution shape");
}

namespace {

// Internal variant that also covers the rename edges produced by unrolling.
Arith gen_label(Session& s, const Substitution& sub) {
    if (sub.shape == SubstShape::Rename) {
        AVar nx = s.avars.length_of(sub.target, s.syms);
        AVar ny = s.avars.length_of(sub.replacement[0], s.syms);
        return a_eq(LinTerm::of_var(nx), LinTerm::of_var(ny));
    }
    return gen_sigma(s, sub);
}

}  // namespace

ChcSystem extract_chc(Session& s, const ReductionTree& t, Arith input_arith) {
    ChcSystem chc;
    chc.query_arith = input_arith ? input_arith : a_true();

    std::map<NodeId, std::uint32_t> pred_of;
    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        std::vector<Symbol> vars = node_vars(t.at(i));
        if (vars.empty()) continue;
        if (t.at(i).status == NodeStatus::UnsatLeaf) continue;
        ChcPredicate p;
        p.node = i;
        p.name = "P" + std::to_string(i);
        for (Symbol v : vars) p.args.push_back(s.avars.length_of(v, s.syms));
        pred_of[i] = static_cast<std::uint32_t>(chc.preds.size());
        chc.preds.push_back(std::move(p));
    }

    for (NodeId i = 0; i < t.nodes.size(); ++i) {
        if (!pred_of.count(i)) continue;
        for (const auto& e : t.at(i).children) {
            const TreeNode& child = t.at(e.child);
            if (child.status == NodeStatus::UnsatLeaf) continue;
            ChcClause cl;
            cl.head_pred = pred_of.at(i);
            std::vector<Arith> body;
            for (const auto& sub : e.labels) body.push_back(gen_label(s, sub));
            cl.body_arith = a_and(std::move(body));
            if (pred_of.count(e.child)) cl.body_pred = pred_of.at(e.child);
            // Locals: body variables that are not head arguments.
            std::set<AVar> head_args(chc.preds[cl.head_pred].args.begin(),
                                     chc.preds[cl.head_pred].args.end());
            std::vector<AVar> body_vars;
            collect_arith_vars(cl.body_arith, body_vars);
            if (cl.body_pred)
                for (AVar v : chc.preds[*cl.body_pred].args) body_vars.push_back(v);
            std::set<AVar> locals;
            for (AVar v : body_vars)
                if (!head_args.count(v)) locals.insert(v);
            cl.locals.assign(locals.begin(), locals.end());
            chc.clauses.push_back(std::move(cl));
        }
    }

    // Cycle clauses: one per back-link.
    for (NodeId b = 0; b < t.nodes.size(); ++b) {
        const TreeNode& bud = t.at(b);
        if (!bud.backlink || !pred_of.count(b)) continue;
        NodeId c = bud.backlink->companion;
        if (!pred_of.count(c)) continue;
        ChcClause cl;
        cl.head_pred = pred_of.at(b);
        std::vector<Arith> body;
        for (const auto& r : bud.backlink->renames) {
            AVar nb = s.avars.length_of(r.target, s.syms);
            AVar nc = s.avars.length_of(r.replacement[0], s.syms);
            body.push_back(a_eq(LinTerm::of_var(nb), LinTerm::of_var(nc)));
        }
        cl.body_arith = a_and(std::move(body));
        cl.body_pred = pred_of.at(c);
        std::set<AVar> head_args(chc.preds[cl.head_pred].args.begin(),
                                 chc.preds[cl.head_pred].args.end());
        std::set<AVar> locals;
        std::vector<AVar> body_vars;
        collect_arith_vars(cl.body_arith, body_vars);
        for (AVar v : chc.preds[*cl.body_pred].args) body_vars.push_back(v);
        for (AVar v : body_vars)
            if (!head_args.count(v)) locals.insert(v);
        cl.locals.assign(locals.begin(), locals.end());
        chc.clauses.push_back(std::move(cl));
    }

    if (pred_of.count(t.root)) chc.query_pred = pred_of.at(t.root);
    return chc;
}

// ── Flatness ─────────────────────────────────────────────────────────────

FlatnessWitness flatness(const ReductionTree& t) {
    FlatnessWitness w;
    for (NodeId b = 0; b < t.nodes.size(); ++b) {
        const TreeNode& bud = t.at(b);
        if (!bud.backlink) continue;
        FlatnessWitness::CycleCheck check;
        check.bud = b;
        for (NodeId cur = b; cur != bud.backlink->companion; cur = t.at(cur).parent) {
            for (const auto& sub : t.at(cur).in_labels) {
                switch (sub.shape) {
                    case SubstShape::LetterCons: break;
                    case SubstShape::Rename: check.all_letter_cons = false; break;
                    case SubstShape::Eps:
                        check.all_letter_cons = false;
                        check.has_eps = true;
                        break;
                    case SubstShape::VarCons:
                        check.all_letter_cons = false;
                        check.has_var_cons = true;
                        break;
                }
            }
        }
        w.cycles.push_back(check);
    }
    return w;
}

// ── DPI solving ──────────────────────────────────────────────────────────

namespace {

Arith instantiate(Session& s, const Arith& def, const std::vector<AVar>& formals,
                  const std::vector<AVar>& actuals) {
    Arith out = def;
    // Two-phase substitution through temporaries avoids clashes when an
    // actual coincides with another formal.
    std::vector<AVar> temps;
    for (std::size_t i = 0; i < formals.size(); ++i) {
        if (formals[i] == actuals[i]) {
            temps.push_back(formals[i]);
            continue;
        }
        AVar tmp = s.avars.fresh_int("t");
        out = arith_subst(out, formals[i], LinTerm::of_var(tmp));
        temps.push_back(tmp);
    }
    for (std::size_t i = 0; i < formals.size(); ++i)
        if (!(temps[i] == actuals[i]))
            out = arith_subst(out, temps[i], LinTerm::of_var(actuals[i]));
    return out;
}

struct LinearEq {
    LinTerm t;   // t = 0
};

// Collects the conjunction as linear equalities; fails on anything else.
bool collect_equalities(const Arith& a, std::vector<LinearEq>& out) {
    switch (a->kind) {
        case ArithKind::True: return true;
        case ArithKind::Atom:
            if (a->op != CmpOp::Eq) return false;
            out.push_back(LinearEq{a->lin});
            return true;
        case ArithKind::And:
            for (const auto& k : a->kids)
                if (!collect_equalities(k, out)) return false;
            return true;
        case ArithKind::Exists:
            return collect_equalities(a->body, out);
        default: return false;
    }
}

}  // namespace

DpiResult solve_dpi(Session& s, const ChcSystem& chc) {
    DpiResult res;
    const std::size_t n = chc.preds.size();

    // clauses_of[p]: clause indices with head p.
    std::vector<std::vector<std::size_t>> clauses_of(n);
    for (std::size_t ci = 0; ci < chc.clauses.size(); ++ci)
        clauses_of[chc.clauses[ci].head_pred].push_back(ci);

    // Dependency SCCs via iterative Tarjan-lite (Kosaraju on small graphs).
    std::vector<std::vector<std::uint32_t>> deps(n);
    for (const auto& cl : chc.clauses)
        if (cl.body_pred) deps[cl.head_pred].push_back(*cl.body_pred);

    std::vector<int> scc_id(n, -1);
    std::vector<std::vector<std::uint32_t>> sccs;
    {
        // Order by finish time.
        std::vector<std::uint32_t> order;
        std::vector<bool> seen(n, false);
        std::vector<std::pair<std::uint32_t, std::size_t>> stack;
        for (std::uint32_t start = 0; start < n; ++start) {
            if (seen[start]) continue;
            stack.push_back({start, 0});
            seen[start] = true;
            while (!stack.empty()) {
                auto& [v, k] = stack.back();
                if (k < deps[v].size()) {
                    std::uint32_t w = deps[v][k++];
                    if (!seen[w]) {
                        seen[w] = true;
                        stack.push_back({w, 0});
                    }
                } else {
                    order.push_back(v);
                    stack.pop_back();
                }
            }
        }
        std::vector<std::vector<std::uint32_t>> rdeps(n);
        for (std::uint32_t v = 0; v < n; ++v)
            for (std::uint32_t w : deps[v]) rdeps[w].push_back(v);
        std::vector<bool> seen2(n, false);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if (seen2[*it]) continue;
            std::vector<std::uint32_t> scc, work{*it};
            seen2[*it] = true;
            while (!work.empty()) {
                std::uint32_t v = work.back();
                work.pop_back();
                scc.push_back(v);
                for (std::uint32_t w : rdeps[v])
                    if (!seen2[w]) {
                        seen2[w] = true;
                        work.push_back(w);
                    }
            }
            int id = static_cast<int>(sccs.size());
            for (std::uint32_t v : scc) scc_id[v] = id;
            sccs.push_back(std::move(scc));
        }
    }

    std::map<std::uint32_t, Arith> defs;
    auto plug = [&](const ChcClause& cl, const Arith& body_def) -> Arith {
        Arith body = cl.body_pred ? a_and({cl.body_arith, body_def}) : cl.body_arith;
        return a_exists(cl.locals, body);
    };

    // Kosaraju emits SCCs in reverse topological order of the condensation
    // (sources first); dependencies must be solved first, so walk backwards.
    for (auto scc_it = sccs.rbegin(); scc_it != sccs.rend(); ++scc_it) {
        const auto& scc = *scc_it;
        bool recursive = false;
        for (std::uint32_t p : scc)
            for (std::uint32_t q : deps[p])
                if (scc_id[q] == scc_id[p]) recursive = true;

        if (!recursive) {
            std::uint32_t p = scc[0];
            std::vector<Arith> cases;
            for (std::size_t ci : clauses_of[p]) {
                const ChcClause& cl = chc.clauses[ci];
                Arith body_def = a_true();
                if (cl.body_pred) body_def = defs.at(*cl.body_pred);
                cases.push_back(plug(cl, body_def));
            }
            defs[p] = cases.empty() ? a_false() : a_or(std::move(cases));
            continue;
        }

        // Representative: smallest tree depth (the companion node).
        std::uint32_t rep = scc[0];
        for (std::uint32_t p : scc) {
            // Hmm: compare by node id (BFS order == depth order).
            if (chc.preds[p].node < chc.preds[rep].node) rep = p;
        }

        // Expand rep's clauses through the SCC until hitting rep again.
        struct RecClause {
            Arith arith;                  // conjunction with locals freshened
            std::vector<AVar> locals;
            std::vector<AVar> inner_args; // args of the inner rep call
        };
        std::vector<RecClause> recs;
        std::vector<Arith> bases;
        bool failed = false;
        std::string fail_reason;

        struct Frame {
            std::uint32_t pred;
            std::vector<AVar> actuals;
            Arith acc;
            std::vector<AVar> locals;
            std::set<std::uint32_t> visited;
        };
        std::vector<Frame> work;
        work.push_back(Frame{rep, chc.preds[rep].args, a_true(), {}, {rep}});
        while (!work.empty() && !failed) {
            Frame f = std::move(work.back());
            work.pop_back();
            for (std::size_t ci : clauses_of[f.pred]) {
                const ChcClause& cl = chc.clauses[ci];
                // Freshen clause locals.
                std::map<AVar, AVar> freshen;
                for (AVar v : cl.locals) freshen[v] = s.avars.fresh_int("w");
                Arith body = cl.body_arith;
                for (auto [from, to] : freshen) body = arith_subst(body, from, LinTerm::of_var(to));
                // Formals of this clause's head map to the call-site actuals.
                body = instantiate(s, body, chc.preds[cl.head_pred].args, f.actuals);
                std::vector<AVar> call_args;
                if (cl.body_pred) {
                    for (AVar v : chc.preds[*cl.body_pred].args) {
                        AVar mapped = v;
                        if (freshen.count(v)) mapped = freshen[v];
                        else {
                            // Head formal position -> actual.
                            const auto& formals = chc.preds[cl.head_pred].args;
                            for (std::size_t k = 0; k < formals.size(); ++k)
                                if (formals[k] == v) {
                                    mapped = f.actuals[k];
                                    break;
                                }
                        }
                        call_args.push_back(mapped);
                    }
                }
                Arith acc = a_and({f.acc, body});
                std::vector<AVar> locals = f.locals;
                for (auto [from, to] : freshen) {
                    (void)from;
                    locals.push_back(to);
                }
                if (!cl.body_pred) {
                    bases.push_back(a_exists(locals, acc));
                } else if (*cl.body_pred == rep) {
                    recs.push_back(RecClause{acc, locals, call_args});
                } else if (scc_id[*cl.body_pred] == scc_id[rep]) {
                    if (f.visited.count(*cl.body_pred)) {
                        failed = true;
                        fail_reason = "mutual recursion is not a simple chain";
                        break;
                    }
                    Frame g;
                    g.pred = *cl.body_pred;
                    g.actuals = call_args;
                    g.acc = acc;
                    g.locals = locals;
                    g.visited = f.visited;
                    g.visited.insert(*cl.body_pred);
                    work.push_back(std::move(g));
                } else {
                    // Outside the SCC: already solved.
                    Arith inner = instantiate(s, defs.at(*cl.body_pred),
                                              chc.preds[*cl.body_pred].args, call_args);
                    bases.push_back(a_exists(locals, a_and({acc, inner})));
                }
            }
        }
        if (failed) {
            res.reason = fail_reason;
            return res;
        }

        // Each rec clause must reduce to head_k = inner_k + delta_k.
        const std::vector<AVar>& formals = chc.preds[rep].args;
        std::vector<std::vector<std::int64_t>> deltas;
        for (const auto& rc : recs) {
            std::vector<LinearEq> eqs;
            if (!collect_equalities(rc.arith, eqs)) {
                res.reason = "cycle constraints are not pure equalities";
                return res;
            }
            // Eliminate locals by unit-coefficient substitution.
            std::set<AVar> keep(formals.begin(), formals.end());
            for (AVar v : rc.inner_args) keep.insert(v);
            bool progress = true;
            while (progress) {
                progress = false;
                for (std::size_t i = 0; i < eqs.size() && !progress; ++i) {
                    for (auto [v, c] : eqs[i].t.coeffs) {
                        if (keep.count(v) || (c != 1 && c != -1)) continue;
                        LinTerm expr = eqs[i].t;
                        expr.add(LinTerm::of_var(v, c), -1);
                        expr = expr.scaled(-c);
                        eqs.erase(eqs.begin() + static_cast<long>(i));
                        for (auto& e : eqs) {
                            std::int64_t k = e.t.coeff_of(v);
                            if (k != 0) {
                                e.t.add(LinTerm::of_var(v, k), -1);
                                e.t.add(expr, k);
                            }
                        }
                        progress = true;
                        break;
                    }
                }
            }
            // Expect head_k - inner_k - delta_k = 0 for positions with
            // distinct head/inner variables, nothing else.
            std::vector<std::int64_t> delta(formals.size(), 0);
            std::vector<bool> seen_pos(formals.size(), false);
            for (const auto& e : eqs) {
                if (e.t.coeffs.empty()) {
                    if (e.t.constant != 0) {
                        res.reason = "inconsistent cycle constraints";
                        return res;
                    }
                    continue;
                }
                bool matched = false;
                for (std::size_t k = 0; k < formals.size(); ++k) {
                    if (formals[k] == rc.inner_args[k]) continue;
                    std::int64_t ch = e.t.coeff_of(formals[k]);
                    std::int64_t ci = e.t.coeff_of(rc.inner_args[k]);
                    if (ch == 0 && ci == 0) continue;
                    if (e.t.coeffs.size() != 2 || ch * ci != -1 || seen_pos[k]) {
                        res.reason = "cycle does not shift arguments by constants";
                        return res;
                    }
                    // ch*head + ci*inner + const = 0  =>  head = inner - const/ch
                    delta[k] = ch == 1 ? -e.t.constant : e.t.constant;
                    if (delta[k] < 0) {
                        res.reason = "cycle decreases a length";
                        return res;
                    }
                    seen_pos[k] = true;
                    matched = true;
                    break;
                }
                if (!matched) {
                    res.reason = "cycle constraints relate unexpected variables";
                    return res;
                }
            }
            bool any = false;
            for (std::int64_t d : delta) any = any || d != 0;
            if (!any) {
                res.reason = "cycle has no progressing length increment";
                return res;
            }
            deltas.push_back(std::move(delta));
        }

        // Closed form: ∃ i_l >= 0. base(v - Σ_l i_l * delta_l).
        Arith base = bases.empty() ? a_false() : a_or(std::move(bases));
        std::vector<AVar> counters;
        std::vector<Arith> side;
        for (std::size_t l = 0; l < deltas.size(); ++l) {
            AVar i = s.avars.fresh_int("i");
            counters.push_back(i);
            side.push_back(a_ge(LinTerm::of_var(i), LinTerm::of_const(0)));
        }
        Arith shifted = base;
        for (std::size_t k = 0; k < formals.size(); ++k) {
            LinTerm repl = LinTerm::of_var(formals[k]);
            bool nonzero = false;
            for (std::size_t l = 0; l < deltas.size(); ++l)
                if (deltas[l][k] != 0) {
                    repl.add(LinTerm::of_var(counters[l], -deltas[l][k]));
                    nonzero = true;
                }
            if (nonzero) shifted = arith_subst(shifted, formals[k], repl);
        }
        side.push_back(shifted);
        defs[rep] = a_exists(std::move(counters), a_and(std::move(side)));

        // Remaining SCC members form a chain ending at rep: fixpoint pass.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::uint32_t p : scc) {
                if (defs.count(p)) continue;
                std::vector<Arith> cases;
                bool all_ready = true;
                for (std::size_t ci : clauses_of[p]) {
                    const ChcClause& cl = chc.clauses[ci];
                    if (cl.body_pred && !defs.count(*cl.body_pred)) {
                        all_ready = false;
                        break;
                    }
                    cases.push_back(plug(cl, cl.body_pred ? defs.at(*cl.body_pred) : a_true()));
                }
                if (all_ready) {
                    defs[p] = cases.empty() ? a_false() : a_or(std::move(cases));
                    changed = true;
                }
            }
        }
    }

    res.ok = true;
    res.defs = defs;
    Arith q = chc.query_arith;
    if (chc.query_pred) q = a_and({defs.at(*chc.query_pred), q});
    res.solved_query = q;
    return res;
}

// ── Phased-regular check ─────────────────────────────────────────────────

namespace {

bool regular_phase(const StringTerm& s1, const StringTerm& t1) {
    // Acyclic: every variable occurs at most once across the phase.
    std::map<Symbol, int> occ;
    for (const auto& side : {s1, t1})
        for (Symbol sym : side)
            if (sym.is_var()) ++occ[sym];
    bool acyclic = true;
    for (auto [v, k] : occ) {
        (void)v;
        if (k > 1) acyclic = false;
    }
    if (acyclic) return true;

    auto ground = [](const StringTerm& w, std::size_t from, std::size_t to) {
        for (std::size_t i = from; i < to; ++i)
            if (w[i].is_var()) return false;
        return true;
    };
    // X w1 = w2 X
    if (!s1.empty() && !t1.empty() && s1.front().is_var() && t1.back() == s1.front() &&
        ground(s1, 1, s1.size()) && ground(t1, 0, t1.size() - 1))
        return true;
    // X w1 Y = Y w2 X (twisted)
    if (s1.size() >= 2 && t1.size() >= 2 && s1.front().is_var() && s1.back().is_var() &&
        !(s1.front() == s1.back()) && t1.front() == s1.back() && t1.back() == s1.front() &&
        ground(s1, 1, s1.size() - 1) && ground(t1, 1, t1.size() - 1))
        return true;
    return false;
}

bool phased_split(const StringTerm& lhs, const StringTerm& rhs, std::size_t li, std::size_t ri) {
    if (li == lhs.size() && ri == rhs.size()) return true;
    for (std::size_t le = li + 1; le <= lhs.size(); ++le) {
        for (std::size_t re = ri + 1; re <= rhs.size(); ++re) {
            StringTerm s1(lhs.begin() + static_cast<long>(li), lhs.begin() + static_cast<long>(le));
            StringTerm t1(rhs.begin() + static_cast<long>(ri), rhs.begin() + static_cast<long>(re));
            if (!regular_phase(s1, t1)) continue;
            // Phase variables must not leak into the remainder.
            std::set<Symbol> phase_vars;
            for (const auto& side : {s1, t1})
                for (Symbol sym : side)
                    if (sym.is_var()) phase_vars.insert(sym);
            bool leak = false;
            for (std::size_t i = le; i < lhs.size() && !leak; ++i)
                if (lhs[i].is_var() && phase_vars.count(lhs[i])) leak = true;
            for (std::size_t i = re; i < rhs.size() && !leak; ++i)
                if (rhs[i].is_var() && phase_vars.count(rhs[i])) leak = true;
            if (leak) continue;
            if (phased_split(lhs, rhs, le, re)) return true;
        }
    }
    return false;
}

}  // namespace

bool is_phased_regular(const EquationSystem& es) {
    for (const auto& e : es.eqs) {
        if (e.lhs.empty() && e.rhs.empty()) continue;
        if (e.lhs.empty() || e.rhs.empty()) return false;
        if (!phased_split(e.lhs, e.rhs, 0, 0)) return false;
    }
    return true;
}

// ── Dump ─────────────────────────────────────────────────────────────────

std::string dump_chc(const Session& s, const ChcSystem& chc) {
    std::string out;
    auto pred_app = [&](std::uint32_t p) {
        std::string t = chc.preds[p].name + "(";
        for (std::size_t i = 0; i < chc.preds[p].args.size(); ++i) {
            if (i) t += ",";
            t += s.avars.name(chc.preds[p].args[i]);
        }
        return t + ")";
    };
    for (const auto& cl : chc.clauses) {
        std::string body;
        if (!cl.locals.empty()) {
            body += "∃";
            for (std::size_t i = 0; i < cl.locals.size(); ++i) {
                if (i) body += ",";
                body += s.avars.name(cl.locals[i]);
            }
            body += ". ";
        }
        body += to_string(s, cl.body_arith);
        if (cl.body_pred) body += " ∧ " + pred_app(*cl.body_pred);
        out += body + " => " + pred_app(cl.head_pred) + "\n";
    }
    std::string q = to_string(s, chc.query_arith);
    if (chc.query_pred) q = pred_app(*chc.query_pred) + " ∧ " + q;
    out += "? " + q + "\n";
    return out;
}

}  // namespace kepler
