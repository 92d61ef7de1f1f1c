#include "kepler/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace kepler {

std::size_t Dfa::letter_index(Symbol c) const {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), c);
    if (it == alphabet.end() || !(*it == c)) throw Error("letter not in DFA alphabet");
    return static_cast<std::size_t>(it - alphabet.begin());
}

// ── NFA scaffolding for the Thompson construction ────────────────────────

namespace {

struct Nfa {
    // eps[s] = epsilon successors; trans[s][letter] = successors
    std::size_t num_letters = 0;
    std::vector<std::vector<std::uint32_t>> eps;
    std::vector<std::vector<std::vector<std::uint32_t>>> trans;
    std::uint32_t initial = 0, accept = 0;   // single accept state

    std::uint32_t add_state() {
        eps.emplace_back();
        trans.emplace_back(num_letters);
        return static_cast<std::uint32_t>(eps.size() - 1);
    }
};

void eps_closure(const Nfa& n, std::set<std::uint32_t>& states) {
    std::deque<std::uint32_t> work(states.begin(), states.end());
    while (!work.empty()) {
        std::uint32_t s = work.front();
        work.pop_front();
        for (std::uint32_t t : n.eps[s])
            if (states.insert(t).second) work.push_back(t);
    }
}

Dfa determinize(const Nfa& n, const std::vector<Symbol>& alphabet, bool accept_all_final) {
    Dfa d;
    d.alphabet = alphabet;
    std::map<std::set<std::uint32_t>, std::uint32_t> ids;
    std::vector<std::set<std::uint32_t>> sets;
    auto get_id = [&](std::set<std::uint32_t> s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(sets.size());
        ids.emplace(s, id);
        sets.push_back(std::move(s));
        return id;
    };
    std::set<std::uint32_t> start{n.initial};
    eps_closure(n, start);
    get_id(start);
    for (std::uint32_t cur = 0; cur < sets.size(); ++cur) {
        for (std::size_t li = 0; li < alphabet.size(); ++li) {
            std::set<std::uint32_t> next;
            for (std::uint32_t s : sets[cur])
                for (std::uint32_t t : n.trans[s][li]) next.insert(t);
            eps_closure(n, next);
            std::uint32_t id = get_id(std::move(next));
            d.delta.resize(sets.size() * alphabet.size());
            d.delta[cur * alphabet.size() + li] = id;
        }
    }
    d.num_states = static_cast<std::uint32_t>(sets.size());
    d.delta.resize(d.num_states * alphabet.size());
    d.accepting.assign(d.num_states, false);
    for (std::uint32_t i = 0; i < d.num_states; ++i) {
        (void)accept_all_final;
        d.accepting[i] = sets[i].count(n.accept) != 0;
    }
    d.initial = 0;
    return d;
}

// Glue a DFA into an NFA under construction as a sub-automaton.
std::pair<std::uint32_t, std::uint32_t> embed_dfa(Nfa& n, const Dfa& d) {
    std::uint32_t base = static_cast<std::uint32_t>(n.eps.size());
    for (std::uint32_t i = 0; i < d.num_states; ++i) n.add_state();
    std::uint32_t out = n.add_state();
    for (std::uint32_t s = 0; s < d.num_states; ++s) {
        for (std::size_t li = 0; li < d.alphabet.size(); ++li)
            n.trans[base + s][li].push_back(base + d.step(s, li));
        if (d.accepting[s]) n.eps[base + s].push_back(out);
    }
    return {base + d.initial, out};
}

}  // namespace

Dfa minimize(const Dfa& d0) {
    // Drop unreachable states first.
    std::vector<std::uint32_t> remap(d0.num_states, UINT32_MAX);
    std::vector<std::uint32_t> order;
    remap[d0.initial] = 0;
    order.push_back(d0.initial);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t li = 0; li < d0.alphabet.size(); ++li) {
            std::uint32_t t = d0.step(order[i], li);
            if (remap[t] == UINT32_MAX) {
                remap[t] = static_cast<std::uint32_t>(order.size());
                order.push_back(t);
            }
        }
    Dfa d;
    d.alphabet = d0.alphabet;
    d.num_states = static_cast<std::uint32_t>(order.size());
    d.initial = 0;
    d.delta.resize(d.num_states * d.alphabet.size());
    d.accepting.assign(d.num_states, false);
    for (std::uint32_t i = 0; i < d.num_states; ++i) {
        d.accepting[i] = d0.accepting[order[i]];
        for (std::size_t li = 0; li < d.alphabet.size(); ++li)
            d.delta[i * d.alphabet.size() + li] = remap[d0.step(order[i], li)];
    }

    // Hopcroft partition refinement.
    std::vector<std::uint32_t> part(d.num_states);   // state -> block
    for (std::uint32_t i = 0; i < d.num_states; ++i) part[i] = d.accepting[i] ? 1 : 0;
    std::uint32_t num_blocks = 2;
    bool has0 = false, has1 = false;
    for (std::uint32_t i = 0; i < d.num_states; ++i) (part[i] ? has1 : has0) = true;
    if (!has0 || !has1) {
        for (auto& p : part) p = 0;
        num_blocks = 1;
    }
    for (;;) {
        // Signature: (block, successor blocks)
        std::map<std::vector<std::uint32_t>, std::uint32_t> sig_ids;
        std::vector<std::uint32_t> next(d.num_states);
        for (std::uint32_t s = 0; s < d.num_states; ++s) {
            std::vector<std::uint32_t> sig{part[s]};
            for (std::size_t li = 0; li < d.alphabet.size(); ++li)
                sig.push_back(part[d.step(s, li)]);
            auto [it, fresh] = sig_ids.emplace(std::move(sig), static_cast<std::uint32_t>(sig_ids.size()));
            (void)fresh;
            next[s] = it->second;
        }
        std::uint32_t n = static_cast<std::uint32_t>(sig_ids.size());
        if (n == num_blocks) break;
        part = std::move(next);
        num_blocks = n;
    }

    Dfa m;
    m.alphabet = d.alphabet;
    m.num_states = num_blocks;
    m.delta.resize(num_blocks * d.alphabet.size());
    m.accepting.assign(num_blocks, false);
    m.initial = part[d.initial];
    for (std::uint32_t s = 0; s < d.num_states; ++s) {
        if (d.accepting[s]) m.accepting[part[s]] = true;
        for (std::size_t li = 0; li < d.alphabet.size(); ++li)
            m.delta[part[s] * d.alphabet.size() + li] = part[d.step(s, li)];
    }
    return m;
}

Dfa complement(const Dfa& d) {
    Dfa c = d;
    for (std::uint32_t i = 0; i < c.num_states; ++i) c.accepting[i] = !c.accepting[i];
    return minimize(c);
}

Dfa product_intersection(const Dfa& d1, const Dfa& d2) {
    if (d1.alphabet != d2.alphabet) throw Error("product over different alphabets");
    Dfa p;
    p.alphabet = d1.alphabet;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ids;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> states;
    auto get_id = [&](std::uint32_t a, std::uint32_t b) {
        auto key = std::make_pair(a, b);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(states.size());
        ids.emplace(key, id);
        states.push_back(key);
        return id;
    };
    get_id(d1.initial, d2.initial);
    for (std::uint32_t cur = 0; cur < states.size(); ++cur) {
        auto [a, b] = states[cur];
        for (std::size_t li = 0; li < p.alphabet.size(); ++li) {
            std::uint32_t id = get_id(d1.step(a, li), d2.step(b, li));
            p.delta.resize(states.size() * p.alphabet.size());
            p.delta[cur * p.alphabet.size() + li] = id;
        }
    }
    p.num_states = static_cast<std::uint32_t>(states.size());
    p.delta.resize(p.num_states * p.alphabet.size());
    p.accepting.assign(p.num_states, false);
    for (std::uint32_t i = 0; i < p.num_states; ++i)
        p.accepting[i] = d1.accepting[states[i].first] && d2.accepting[states[i].second];
    p.initial = 0;
    return minimize(p);
}

Dfa universal_dfa(const std::vector<Symbol>& alphabet) {
    Dfa d;
    d.alphabet = alphabet;
    d.num_states = 1;
    d.delta.assign(alphabet.size(), 0);
    d.initial = 0;
    d.accepting = {true};
    return d;
}

Dfa empty_dfa(const std::vector<Symbol>& alphabet) {
    Dfa d = universal_dfa(alphabet);
    d.accepting = {false};
    return d;
}

Dfa regex_to_dfa(const Regex& r, const std::vector<Symbol>& alphabet) {
    if (!r) return empty_dfa(alphabet);
    switch (r->kind) {
        case RegexKind::Complement:
            return complement(regex_to_dfa(r->a, alphabet));
        case RegexKind::Intersect:
            return product_intersection(regex_to_dfa(r->a, alphabet), regex_to_dfa(r->b, alphabet));
        default: break;
    }

    // Thompson over the remaining constructors; nested complement/intersect
    // subtrees are compiled recursively and embedded as sub-automata.
    Nfa n;
    n.num_letters = alphabet.size();
    auto letter_idx = [&alphabet](Symbol c) {
        auto it = std::lower_bound(alphabet.begin(), alphabet.end(), c);
        if (it == alphabet.end() || !(*it == c)) throw Error("regex letter outside alphabet");
        return static_cast<std::size_t>(it - alphabet.begin());
    };

    struct Frag { std::uint32_t in, out; };
    auto build = [&](auto&& self, const Regex& re) -> Frag {
        switch (re->kind) {
            case RegexKind::Empty: {
                Frag f{n.add_state(), n.add_state()};
                return f;
            }
            case RegexKind::Epsilon: {
                Frag f{n.add_state(), n.add_state()};
                n.eps[f.in].push_back(f.out);
                return f;
            }
            case RegexKind::Letter: {
                Frag f{n.add_state(), n.add_state()};
                n.trans[f.in][letter_idx(re->letter)].push_back(f.out);
                return f;
            }
            case RegexKind::AllChar: {
                Frag f{n.add_state(), n.add_state()};
                for (std::size_t li = 0; li < alphabet.size(); ++li)
                    n.trans[f.in][li].push_back(f.out);
                return f;
            }
            case RegexKind::Word: {
                std::uint32_t in = n.add_state(), cur = in;
                for (Symbol c : re->word) {
                    std::uint32_t next = n.add_state();
                    n.trans[cur][letter_idx(c)].push_back(next);
                    cur = next;
                }
                return Frag{in, cur};
            }
            case RegexKind::Concat: {
                Frag fa = self(self, re->a), fb = self(self, re->b);
                n.eps[fa.out].push_back(fb.in);
                return Frag{fa.in, fb.out};
            }
            case RegexKind::Union: {
                Frag fa = self(self, re->a), fb = self(self, re->b);
                Frag f{n.add_state(), n.add_state()};
                n.eps[f.in].push_back(fa.in);
                n.eps[f.in].push_back(fb.in);
                n.eps[fa.out].push_back(f.out);
                n.eps[fb.out].push_back(f.out);
                return f;
            }
            case RegexKind::Star: {
                Frag fa = self(self, re->a);
                Frag f{n.add_state(), n.add_state()};
                n.eps[f.in].push_back(fa.in);
                n.eps[f.in].push_back(f.out);
                n.eps[fa.out].push_back(fa.in);
                n.eps[fa.out].push_back(f.out);
                return f;
            }
            case RegexKind::Complement:
            case RegexKind::Intersect: {
                auto [in, out] = embed_dfa(n, regex_to_dfa(re, alphabet));
                return Frag{in, out};
            }
        }
        throw Error("regex_to_dfa: bad node");
    };
    Frag f = build(build, r);
    n.initial = f.in;
    n.accept = f.out;
    return minimize(determinize(n, alphabet, false));
}

bool accepts(const Dfa& d, const StringTerm& word) {
    std::uint32_t s = d.initial;
    for (Symbol c : word) s = d.step(s, d.letter_index(c));
    return d.accepting[s];
}

bool is_empty(const Dfa& d) {
    std::vector<bool> seen(d.num_states, false);
    std::deque<std::uint32_t> work{d.initial};
    seen[d.initial] = true;
    while (!work.empty()) {
        std::uint32_t s = work.front();
        work.pop_front();
        if (d.accepting[s]) return false;
        for (std::size_t li = 0; li < d.alphabet.size(); ++li) {
            std::uint32_t t = d.step(s, li);
            if (!seen[t]) {
                seen[t] = true;
                work.push_back(t);
            }
        }
    }
    return true;
}

bool language_equal(const Dfa& d1, const Dfa& d2) {
    // Symmetric difference emptiness via the product.
    if (d1.alphabet != d2.alphabet) return false;
    Dfa a = product_intersection(d1, complement(d2));
    Dfa b = product_intersection(d2, complement(d1));
    return is_empty(a) && is_empty(b);
}

std::uint32_t live_state_count(const Dfa& d) {
    std::vector<bool> reach(d.num_states, false);
    std::deque<std::uint32_t> work{d.initial};
    reach[d.initial] = true;
    while (!work.empty()) {
        std::uint32_t s = work.front();
        work.pop_front();
        for (std::size_t li = 0; li < d.alphabet.size(); ++li) {
            std::uint32_t t = d.step(s, li);
            if (!reach[t]) {
                reach[t] = true;
                work.push_back(t);
            }
        }
    }
    // Co-reachable: reverse fixpoint from accepting states.
    std::vector<bool> co(d.num_states, false);
    for (std::uint32_t i = 0; i < d.num_states; ++i) co[i] = d.accepting[i];
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::uint32_t s = 0; s < d.num_states; ++s) {
            if (co[s]) continue;
            for (std::size_t li = 0; li < d.alphabet.size(); ++li)
                if (co[d.step(s, li)]) {
                    co[s] = true;
                    changed = true;
                    break;
                }
        }
    }
    std::uint32_t n = 0;
    for (std::uint32_t i = 0; i < d.num_states; ++i)
        if (reach[i] && co[i]) ++n;
    return n;
}

std::optional<StringTerm> find_word_of_length(const Dfa& d, std::size_t len) {
    // BFS over (state, position) choosing the lexicographically first word.
    std::vector<std::vector<bool>> can(len + 1, std::vector<bool>(d.num_states, false));
    for (std::uint32_t s = 0; s < d.num_states; ++s) can[len][s] = d.accepting[s];
    for (std::size_t i = len; i-- > 0;)
        for (std::uint32_t s = 0; s < d.num_states; ++s)
            for (std::size_t li = 0; li < d.alphabet.size() && !can[i][s]; ++li)
                if (can[i + 1][d.step(s, li)]) can[i][s] = true;
    if (!can[0][d.initial]) return std::nullopt;
    StringTerm word;
    std::uint32_t s = d.initial;
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t li = 0; li < d.alphabet.size(); ++li) {
            if (can[i + 1][d.step(s, li)]) {
                word.push_back(d.alphabet[li]);
                s = d.step(s, li);
                break;
            }
        }
    }
    return word;
}

Dfa with_initial_accepting(const Dfa& d, std::uint32_t initial, const std::vector<bool>& accepting) {
    Dfa out = d;
    out.initial = initial;
    out.accepting = accepting;
    return out;
}

// ── DFA -> regex (state elimination) ─────────────────────────────────────

Regex dfa_to_regex(const Dfa& d) {
    // GNFA with regex-labeled edges; fresh initial and final states.
    std::uint32_t n = d.num_states;
    std::uint32_t start = n, finish = n + 1, total = n + 2;
    std::vector<Regex> edge(total * total, nullptr);
    auto at = [&](std::uint32_t i, std::uint32_t j) -> Regex& { return edge[i * total + j]; };
    auto join = [](Regex& slot, Regex r) {
        if (!slot) slot = std::move(r);
        else slot = re_union(slot, std::move(r));
    };
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::size_t li = 0; li < d.alphabet.size(); ++li)
            join(at(s, d.step(s, li)), re_letter(d.alphabet[li]));
    at(start, d.initial) = re_epsilon();
    for (std::uint32_t s = 0; s < n; ++s)
        if (d.accepting[s]) at(s, finish) = re_epsilon();

    auto cat = [](const Regex& a, const Regex& b) -> Regex {
        if (a->kind == RegexKind::Epsilon) return b;
        if (b->kind == RegexKind::Epsilon) return a;
        return re_concat(a, b);
    };
    for (std::uint32_t k = 0; k < n; ++k) {
        Regex self = at(k, k);
        for (std::uint32_t i = 0; i < total; ++i) {
            if (i == k || !at(i, k)) continue;
            for (std::uint32_t j = 0; j < total; ++j) {
                if (j == k || !at(k, j)) continue;
                Regex path = at(i, k);
                if (self) path = cat(path, re_star(self));
                path = cat(path, at(k, j));
                join(at(i, j), std::move(path));
            }
        }
        for (std::uint32_t i = 0; i < total; ++i) {
            at(i, k) = nullptr;
            at(k, i) = nullptr;
        }
    }
    Regex result = at(start, finish);
    return result ? result : re_empty();
}

}  // namespace kepler
