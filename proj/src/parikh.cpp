#include "kepler/parikh.hpp"

#include <algorithm>
#include <map>

namespace kepler {

std::size_t PetriNet::place_index(Symbol s) const {
    auto it = std::find(places.begin(), places.end(), s);
    if (it == places.end()) throw Error("symbol is not a place");
    return static_cast<std::size_t>(it - places.begin());
}

PetriNet cfg_to_net(const Cfg& g) {
    PetriNet net;
    net.places = g.nonterminals;
    for (Symbol c : g.alphabet) net.places.push_back(c);
    net.start_place = static_cast<std::uint32_t>(net.place_index(g.start));
    for (const auto& p : g.prods) {
        PetriNet::Transition t;
        t.input_place = static_cast<std::uint32_t>(net.place_index(p.lhs));
        std::map<std::uint32_t, std::uint32_t> w;
        for (Symbol sym : p.rhs) ++w[static_cast<std::uint32_t>(net.place_index(sym))];
        t.outputs.assign(w.begin(), w.end());
        net.transitions.push_back(std::move(t));
    }
    return net;
}

ParikhFormula net_to_presburger(Session& s, const PetriNet& net, const Cfg& g) {
    ParikhFormula out;
    const std::size_t num_places = net.places.size();
    const std::size_t num_trans = net.transitions.size();

    for (std::size_t p = 0; p < num_trans; ++p)
        out.rule_vars.push_back(s.avars.fresh_int("y"));
    for (std::size_t i = 0; i < num_places; ++i)
        out.dist_vars.push_back(s.avars.fresh_int("z"));
    for (Symbol c : g.alphabet)
        out.letter_counts.emplace(c, s.avars.fresh_int("xc"));

    auto weight_out = [&net](std::size_t place, std::size_t trans) -> std::int64_t {
        for (auto [pl, w] : net.transitions[trans].outputs)
            if (pl == place) return w;
        return 0;
    };

    std::vector<Arith> conj;

    // 1. x_c >= 0 for all letters.
    for (Symbol c : g.alphabet)
        conj.push_back(a_ge(LinTerm::of_var(out.letter_counts.at(c)), LinTerm::of_const(0)));

    // 2. Token flow per nonterminal: M(X) + sum W(X,p)·y_p - sum_{lhs(p)=X} y_p = 0.
    for (Symbol x : g.nonterminals) {
        std::size_t place = net.place_index(x);
        LinTerm flow = LinTerm::of_const(place == net.start_place ? 1 : 0);
        for (std::size_t p = 0; p < num_trans; ++p) {
            std::int64_t w = weight_out(place, p);
            if (w != 0) flow.add(LinTerm::of_var(out.rule_vars[p], w));
            if (net.transitions[p].input_place == place)
                flow.add(LinTerm::of_var(out.rule_vars[p], -1));
        }
        conj.push_back(a_atom(std::move(flow), CmpOp::Eq));
    }

    // 3. Letter counts: x_c = sum W(c,p)·y_p and (x_c = 0 or z_c > 0).
    for (Symbol c : g.alphabet) {
        std::size_t place = net.place_index(c);
        LinTerm sum;
        for (std::size_t p = 0; p < num_trans; ++p) {
            std::int64_t w = weight_out(place, p);
            if (w != 0) sum.add(LinTerm::of_var(out.rule_vars[p], w));
        }
        AVar xc = out.letter_counts.at(c);
        conj.push_back(a_eq(LinTerm::of_var(xc), std::move(sum)));
        AVar zc = out.dist_vars[place];
        conj.push_back(a_or({a_eq(LinTerm::of_var(xc), LinTerm::of_const(0)),
                             a_gt(LinTerm::of_var(zc), LinTerm::of_const(0))}));
    }

    // 4. Spanning-tree distances: z_s = 0, or z_s = z_X + 1 with y_p > 0 and
    //    z_X > 0 for some production p = (X, ...s...); the disjunct becomes
    //    z_s = 1 ∧ y_p > 0 when X is the start symbol.
    for (std::size_t place = 0; place < num_places; ++place) {
        AVar zs = out.dist_vars[place];
        std::vector<Arith> disj{a_eq(LinTerm::of_var(zs), LinTerm::of_const(0))};
        for (std::size_t p = 0; p < num_trans; ++p) {
            if (weight_out(place, p) == 0) continue;
            std::size_t lhs_place = net.transitions[p].input_place;
            AVar yp = out.rule_vars[p];
            if (lhs_place == net.start_place) {
                disj.push_back(a_and({a_eq(LinTerm::of_var(zs), LinTerm::of_const(1)),
                                      a_gt(LinTerm::of_var(yp), LinTerm::of_const(0))}));
            } else {
                AVar zx = out.dist_vars[lhs_place];
                LinTerm step = LinTerm::of_var(zx);
                step.constant += 1;
                disj.push_back(a_and({a_eq(LinTerm::of_var(zs), std::move(step)),
                                      a_gt(LinTerm::of_var(yp), LinTerm::of_const(0)),
                                      a_gt(LinTerm::of_var(zx), LinTerm::of_const(0))}));
            }
        }
        conj.push_back(a_or(std::move(disj)));
    }

    out.formula = a_and(std::move(conj));
    return out;
}

Arith length_constraint(Session& s, const Cfg& g, const std::vector<Symbol>& vars) {
    std::vector<Arith> conj;
    for (Symbol v : vars) {
        if (std::find(g.nonterminals.begin(), g.nonterminals.end(), v) == g.nonterminals.end())
            throw Error("length_constraint: unknown variable " + s.syms.name(v));
        Cfg gx = restart_at(g, v, /*prune_unreachable=*/true);
        // Keep the full symbol set so z-variables for pruned symbols appear
        // pinned to zero rather than vanishing.
        gx.nonterminals = g.nonterminals;
        gx.alphabet = g.alphabet;
        PetriNet net = cfg_to_net(gx);
        ParikhFormula pf = net_to_presburger(s, net, gx);
        // |v| = sum of letter counts.
        LinTerm sum;
        for (auto [c, xc] : pf.letter_counts) {
            (void)c;
            sum.add(LinTerm::of_var(xc));
        }
        AVar len = s.avars.length_of(v, s.syms);
        Arith tie = a_eq(LinTerm::of_var(len), std::move(sum));
        std::vector<AVar> bound;
        for (auto [c, xc] : pf.letter_counts) {
            (void)c;
            bound.push_back(xc);
        }
        bound.insert(bound.end(), pf.rule_vars.begin(), pf.rule_vars.end());
        bound.insert(bound.end(), pf.dist_vars.begin(), pf.dist_vars.end());
        conj.push_back(a_exists(std::move(bound), a_and({tie, pf.formula})));
    }
    return a_and(std::move(conj));
}

std::size_t arith_atom_count(const Arith& f) {
    if (!f) return 0;
    switch (f->kind) {
        case ArithKind::Atom: return 1;
        case ArithKind::And:
        case ArithKind::Or: {
            std::size_t n = 0;
            for (const auto& k : f->kids) n += arith_atom_count(k);
            return n;
        }
        case ArithKind::Exists: return arith_atom_count(f->body);
        default: return 0;
    }
}

}  // namespace kepler
