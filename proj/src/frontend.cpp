#include "kepler/frontend.hpp"

#include "kepler/automata.hpp"
#include "kepler/grammar.hpp"
#include "kepler/parikh.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace kepler {

// ── Tokenizer / reader ───────────────────────────────────────────────────

namespace {

struct Token {
    enum Kind { LParen, RParen, Sym, Str, Num, End } kind;
    std::string text;
    int line, col;
};

struct Lexer {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    void advance(char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    Token next() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') {
                while (pos < text.size() && text[pos] != '\n') advance(text[pos]);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance(c);
            } else {
                break;
            }
        }
        if (pos >= text.size()) return {Token::End, "", line, col};
        int l = line, c0 = col;
        char c = text[pos];
        if (c == '(') {
            advance(c);
            return {Token::LParen, "(", l, c0};
        }
        if (c == ')') {
            advance(c);
            return {Token::RParen, ")", l, c0};
        }
        if (c == '"') {
            advance(c);
            std::string out;
            while (pos < text.size()) {
                char d = text[pos];
                if (d == '"') {
                    advance(d);
                    if (pos < text.size() && text[pos] == '"') {   // escaped quote
                        out += '"';
                        advance('"');
                        continue;
                    }
                    return {Token::Str, out, l, c0};
                }
                out += d;
                advance(d);
            }
            throw ParseError("unterminated string literal", l, c0);
        }
        std::string out;
        while (pos < text.size()) {
            char d = text[pos];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';')
                break;
            out += d;
            advance(d);
        }
        bool numeric = !out.empty() && (std::isdigit(static_cast<unsigned char>(out[0])) ||
                                        (out[0] == '-' && out.size() > 1));
        return {numeric ? Token::Num : Token::Sym, out, l, c0};
    }
};

struct Sx {
    Token tok;                 // atom when kids empty and tok.kind != LParen
    std::vector<Sx> kids;
    bool is_atom() const { return kids.empty() && tok.kind != Token::LParen; }
    const std::string& atom() const { return tok.text; }
    int line() const { return tok.line; }
    int col() const { return tok.col; }
};

Sx read_sexpr(Lexer& lex, Token first) {
    if (first.kind != Token::LParen) return Sx{first, {}};
    Sx s;
    s.tok = first;
    for (;;) {
        Token t = lex.next();
        if (t.kind == Token::End) throw ParseError("unbalanced parenthesis", first.line, first.col);
        if (t.kind == Token::RParen) return s;
        s.kids.push_back(read_sexpr(lex, t));
    }
}

// ── Term translation ─────────────────────────────────────────────────────

enum class Sort { String, Int, Bool, Re };

struct Translator {
    Session& s;
    std::map<std::string, Symbol> string_vars;
    std::map<std::string, AVar> int_vars;
    std::vector<std::map<std::string, AVar>> scopes;   // exists binders

    ParseError err(const Sx& e, const std::string& msg) const {
        return ParseError(msg, e.line(), e.col());
    }

    std::optional<AVar> lookup_int(const std::string& name) const {
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return found->second;
        }
        auto found = int_vars.find(name);
        if (found == int_vars.end()) return std::nullopt;
        return found->second;
    }

    Sort sort_of(const Sx& e) const {
        if (e.is_atom()) {
            if (e.tok.kind == Token::Str) return Sort::String;
            if (e.tok.kind == Token::Num) return Sort::Int;
            if (string_vars.count(e.atom())) return Sort::String;
            if (lookup_int(e.atom())) return Sort::Int;
            if (e.atom() == "re.none" || e.atom() == "re.allchar" || e.atom() == "re.all")
                return Sort::Re;
            if (e.atom() == "true" || e.atom() == "false") return Sort::Bool;
            throw err(e, "unknown symbol '" + e.atom() + "'");
        }
        const std::string& op = e.kids.at(0).atom();
        if (op == "str.++") return Sort::String;
        if (op == "str.len") return Sort::Int;
        if (op.rfind("re.", 0) == 0 || op == "str.to_re" || op == "str.to.re") return Sort::Re;
        if (op == "+" || op == "-" || op == "*") return Sort::Int;
        return Sort::Bool;
    }

    StringTerm to_term(const Sx& e) {
        if (e.is_atom()) {
            if (e.tok.kind == Token::Str) {
                StringTerm t;
                for (char c : e.atom()) t.push_back(s.syms.intern_letter(std::string(1, c)));
                return t;
            }
            auto it = string_vars.find(e.atom());
            if (it == string_vars.end()) throw err(e, "undeclared string symbol '" + e.atom() + "'");
            return {it->second};
        }
        if (e.kids.at(0).atom() == "str.++") {
            StringTerm t;
            for (std::size_t i = 1; i < e.kids.size(); ++i) t = concat(t, to_term(e.kids[i]));
            return t;
        }
        throw UnsupportedConstruct("unsupported string operator '" + e.kids.at(0).atom() + "'");
    }

    Regex to_regex(const Sx& e) {
        if (e.is_atom()) {
            if (e.atom() == "re.none") return re_empty();
            if (e.atom() == "re.allchar") return re_allchar();
            if (e.atom() == "re.all") return re_star(re_allchar());
            throw err(e, "unknown regex symbol '" + e.atom() + "'");
        }
        const std::string& op = e.kids.at(0).atom();
        auto nary = [&](auto combine, Regex unit) {
            if (e.kids.size() == 1) return unit;
            Regex r = to_regex(e.kids[1]);
            for (std::size_t i = 2; i < e.kids.size(); ++i) r = combine(r, to_regex(e.kids[i]));
            return r;
        };
        if (op == "str.to_re" || op == "str.to.re") {
            StringTerm t = to_term(e.kids.at(1));
            for (Symbol sym : t)
                if (sym.is_var()) throw UnsupportedConstruct("str.to_re of a non-constant term");
            return re_word(t);
        }
        if (op == "re.++") return nary([](Regex a, Regex b) { return re_concat(a, b); }, re_epsilon());
        if (op == "re.union") return nary([](Regex a, Regex b) { return re_union(a, b); }, re_empty());
        if (op == "re.inter")
            return nary([](Regex a, Regex b) { return re_intersect(a, b); }, re_star(re_allchar()));
        if (op == "re.comp") return re_complement(to_regex(e.kids.at(1)));
        if (op == "re.*") return re_star(to_regex(e.kids.at(1)));
        if (op == "re.+") {
            Regex r = to_regex(e.kids.at(1));
            return re_concat(r, re_star(r));
        }
        if (op == "re.opt") return re_union(re_epsilon(), to_regex(e.kids.at(1)));
        throw UnsupportedConstruct("unsupported regex operator '" + op + "'");
    }

    LinTerm to_lin(const Sx& e) {
        if (e.is_atom()) {
            if (e.tok.kind == Token::Num) return LinTerm::of_const(std::stoll(e.atom()));
            auto v = lookup_int(e.atom());
            if (!v) throw err(e, "undeclared integer symbol '" + e.atom() + "'");
            return LinTerm::of_var(*v);
        }
        const std::string& op = e.kids.at(0).atom();
        if (op == "str.len") {
            StringTerm t = to_term(e.kids.at(1));
            LinTerm sum;
            for (Symbol sym : t) {
                if (sym.is_letter()) sum.constant += 1;
                else sum.add(LinTerm::of_var(s.avars.length_of(sym, s.syms)));
            }
            return sum;
        }
        if (op == "+") {
            LinTerm t;
            for (std::size_t i = 1; i < e.kids.size(); ++i) t.add(to_lin(e.kids[i]));
            return t;
        }
        if (op == "-") {
            if (e.kids.size() == 2) return to_lin(e.kids[1]).scaled(-1);
            LinTerm t = to_lin(e.kids.at(1));
            for (std::size_t i = 2; i < e.kids.size(); ++i) t.add(to_lin(e.kids[i]), -1);
            return t;
        }
        if (op == "*") {
            LinTerm a = to_lin(e.kids.at(1));
            LinTerm b = to_lin(e.kids.at(2));
            if (a.is_const()) return b.scaled(a.constant);
            if (b.is_const()) return a.scaled(b.constant);
            throw UnsupportedConstruct("nonlinear arithmetic");
        }
        throw UnsupportedConstruct("unsupported arithmetic operator '" + op + "'");
    }

    Arith to_arith(const Sx& e, bool positive) {
        if (e.is_atom()) {
            if (e.atom() == "true") return positive ? a_true() : a_false();
            if (e.atom() == "false") return positive ? a_false() : a_true();
            throw err(e, "expected arithmetic formula");
        }
        const std::string& op = e.kids.at(0).atom();
        if (op == "not") return to_arith(e.kids.at(1), !positive);
        if (op == "and" || op == "or") {
            std::vector<Arith> kids;
            for (std::size_t i = 1; i < e.kids.size(); ++i)
                kids.push_back(to_arith(e.kids[i], positive));
            bool conj = (op == "and") == positive;
            return conj ? a_and(std::move(kids)) : a_or(std::move(kids));
        }
        if (op == "exists") {
            if (!positive) throw UnsupportedConstruct("negated quantifier");
            scopes.emplace_back();
            std::vector<AVar> bound;
            for (const auto& b : e.kids.at(1).kids) {
                const std::string& name = b.kids.at(0).atom();
                if (b.kids.at(1).atom() != "Int")
                    throw UnsupportedConstruct("exists over non-Int sort");
                AVar v = s.avars.find(name) ? s.avars.fresh_int(name) : s.avars.intern_int(name);
                scopes.back()[name] = v;
                bound.push_back(v);
            }
            Arith body = to_arith(e.kids.at(2), true);
            scopes.pop_back();
            return a_exists(std::move(bound), std::move(body));
        }
        LinTerm l = to_lin(e.kids.at(1));
        LinTerm r = to_lin(e.kids.at(2));
        if (op == "=") {
            if (positive) return a_eq(std::move(l), std::move(r));
            // l != r  <=>  l > r or l < r
            LinTerm l2 = l, r2 = r;
            return a_or({a_gt(std::move(l), std::move(r)), a_lt(std::move(l2), std::move(r2))});
        }
        if (op == "<=") return positive ? a_le(std::move(l), std::move(r)) : a_gt(std::move(l), std::move(r));
        if (op == "<") return positive ? a_lt(std::move(l), std::move(r)) : a_ge(std::move(l), std::move(r));
        if (op == ">=") return positive ? a_ge(std::move(l), std::move(r)) : a_lt(std::move(l), std::move(r));
        if (op == ">") return positive ? a_gt(std::move(l), std::move(r)) : a_le(std::move(l), std::move(r));
        throw UnsupportedConstruct("unsupported operator '" + op + "'");
    }

    RawFormula to_formula(const Sx& e) {
        if (e.is_atom()) {
            if (e.atom() == "true") return raw_arith(a_true());
            if (e.atom() == "false") return raw_arith(a_false());
            throw err(e, "expected formula, got '" + e.atom() + "'");
        }
        const std::string& op = e.kids.at(0).atom();
        if (op == "and" || op == "or") {
            std::vector<RawFormula> kids;
            for (std::size_t i = 1; i < e.kids.size(); ++i) kids.push_back(to_formula(e.kids[i]));
            return op == "and" ? raw_and(std::move(kids)) : raw_or(std::move(kids));
        }
        if (op == "not") return raw_not(to_formula(e.kids.at(1)));
        if (op == "str.in_re" || op == "str.in.re")
            return raw_member(to_term(e.kids.at(1)), to_regex(e.kids.at(2)));
        if (op == "=") {
            Sort sort = sort_of(e.kids.at(1));
            if (sort == Sort::String) return raw_eq(to_term(e.kids.at(1)), to_term(e.kids.at(2)));
            return raw_arith(to_arith(e, true));
        }
        if (op == "distinct") {
            Sort sort = sort_of(e.kids.at(1));
            if (sort == Sort::String)
                return raw_diseq(to_term(e.kids.at(1)), to_term(e.kids.at(2)));
            return raw_not(raw_arith(to_arith(
                Sx{e.tok, {Sx{Token{Token::Sym, "=", e.line(), e.col()}, {}}, e.kids.at(1),
                           e.kids.at(2)}},
                true)));
        }
        if (op == "exists" || op == "<=" || op == "<" || op == ">=" || op == ">")
            return raw_arith(to_arith(e, true));
        if (op == "str.replace" || op == "str.replace_all" || op == "str.at" ||
            op == "str.substr" || op == "str.contains" || op == "str.prefixof" ||
            op == "str.suffixof")
            throw UnsupportedConstruct("unsupported string construct '" + op + "'");
        throw UnsupportedConstruct("unsupported construct '" + op + "'");
    }
};

}  // namespace

ParsedScript parse_smtlib(Session& s, const std::string& text) {
    ParsedScript out;
    Lexer lex{text, 0};
    Translator tr{s, {}, {}, {}};
    std::vector<RawFormula> asserts;
    for (;;) {
        Token t = lex.next();
        if (t.kind == Token::End) break;
        Sx e = read_sexpr(lex, t);
        if (e.is_atom()) throw ParseError("expected command", e.line(), e.col());
        const std::string& cmd = e.kids.at(0).atom();
        if (cmd == "set-logic") {
            out.logic = e.kids.at(1).atom();
        } else if (cmd == "set-info" || cmd == "set-option") {
            // ignored
        } else if (cmd == "declare-fun" || cmd == "declare-const") {
            const std::string& name = e.kids.at(1).atom();
            const Sx& sort_sx = e.kids.back();
            if (cmd == "declare-fun" && !e.kids.at(2).kids.empty())
                throw UnsupportedConstruct("declare-fun with arguments");
            const std::string& sort = sort_sx.atom();
            if (sort == "String") {
                Symbol v = s.syms.intern_var(name);
                tr.string_vars[name] = v;
                out.declared_strings.push_back(v);
            } else if (sort == "Int") {
                AVar v = s.avars.intern_int(name);
                tr.int_vars[name] = v;
                out.declared_ints.push_back(v);
            } else {
                throw UnsupportedConstruct("unsupported sort '" + sort + "'");
            }
        } else if (cmd == "assert") {
            asserts.push_back(tr.to_formula(e.kids.at(1)));
        } else if (cmd == "check-sat") {
            out.check_sat = true;
        } else if (cmd == "get-model") {
            out.get_model = true;
        } else if (cmd == "exit") {
            break;
        } else {
            throw UnsupportedConstruct("unsupported command '" + cmd + "'");
        }
    }
    out.formula = asserts.empty() ? raw_arith(a_true()) : raw_and(std::move(asserts));
    return out;
}

// ── Solve pipeline ───────────────────────────────────────────────────────

namespace {

// Right-linear grammar of a DFA language, with the string variable itself as
// the start nonterminal (so length_constraint ties |var| to it directly).
Cfg dfa_to_cfg(Session& s, const Dfa& d, Symbol var) {
    Cfg g;
    g.start = var;
    std::vector<Symbol> state_nt(d.num_states);
    for (std::uint32_t q = 0; q < d.num_states; ++q)
        state_nt[q] = q == d.initial ? var : s.syms.fresh_var(var);
    for (std::uint32_t q = 0; q < d.num_states; ++q) {
        for (std::size_t li = 0; li < d.alphabet.size(); ++li)
            g.prods.push_back(Production{state_nt[q], {d.alphabet[li], state_nt[d.step(q, li)]}});
        if (d.accepting[q]) g.prods.push_back(Production{state_nt[q], {}});
    }
    g.nonterminals = state_nt;
    g.alphabet = d.alphabet;
    return g;
}

std::vector<Symbol> arith_string_vars(const Session& s, const Arith& a) {
    std::vector<AVar> avars;
    collect_arith_vars(a, avars);
    std::vector<Symbol> out;
    for (AVar v : avars)
        if (auto sv = s.avars.string_var(v))
            if (std::find(out.begin(), out.end(), *sv) == out.end()) out.push_back(*sv);
    return out;
}

bool side_condition_one_length(const Session& s, const Arith& a) {
    // Every top-level conjunct mentions at most one string length.
    std::vector<Arith> conjuncts;
    if (a->kind == ArithKind::And) conjuncts = a->kids;
    else conjuncts = {a};
    for (const auto& c : conjuncts)
        if (arith_string_vars(s, c).size() > 1) return false;
    return true;
}

struct ModelSearch {
    Session& s;
    const ReductionTree& tree;
    const std::map<Symbol, Dfa>& all_dfas;       // every membership, by var
    const std::set<Symbol>& free_mode;
    const Arith& input_arith;
    const std::map<AVar, std::int64_t>& witness;
    PresburgerBudget budget;

    bool arith_ok(const std::map<Symbol, StringTerm>& model) const {
        Arith residual = input_arith;
        for (const auto& [v, w] : model) {
            AVar len = const_cast<Session&>(s).avars.length_of(v, s.syms);
            residual = arith_subst(residual, len, LinTerm::of_const(static_cast<std::int64_t>(w.size())));
        }
        return presburger_sat(residual, budget).verdict == SatVerdict::Sat;
    }

    bool memberships_ok(const std::map<Symbol, StringTerm>& model) const {
        for (const auto& [v, d] : all_dfas) {
            auto it = model.find(v);
            StringTerm w = it == model.end() ? StringTerm{} : it->second;
            if (!accepts(d, w)) return false;
        }
        return true;
    }

    // Free-mode variables get DFA-guided words of the witness length.
    bool fix_free_vars(std::map<Symbol, StringTerm>& model) const {
        for (Symbol v : free_mode) {
            std::size_t want = 0;
            AVar len = const_cast<Session&>(s).avars.length_of(v, s.syms);
            auto it = witness.find(len);
            if (it != witness.end() && it->second > 0)
                want = static_cast<std::size_t>(it->second);
            auto dfa_it = all_dfas.find(v);
            if (dfa_it == all_dfas.end()) {
                model[v] = StringTerm(want, s.alphabet[0]);
                continue;
            }
            std::optional<StringTerm> w;
            for (std::size_t len_try = want; len_try < want + 64; ++len_try) {
                w = find_word_of_length(dfa_it->second, len_try);
                if (w) break;
            }
            if (!w) return false;
            model[v] = *w;
        }
        return true;
    }

    std::optional<std::map<Symbol, StringTerm>> run(std::uint64_t count_bound) {
        for (NodeId leaf : tree.sat_leaves()) {
            SolutionTrace trace = solution_trace(tree, leaf);
            std::size_t k = trace.cycles.size();
            if (k > 10) k = 10;   // search the first cycles only
            std::vector<std::uint64_t> counts(trace.cycles.size(), 0);
            // Increasing total order over the first k cycle counts.
            for (std::uint64_t total = 0; total <= count_bound; ++total) {
                std::vector<std::uint64_t> vec(k, 0);
                bool done = false;
                while (!done) {
                    std::uint64_t sum = 0;
                    for (auto c : vec) sum += c;
                    if (sum == total) {
                        for (std::size_t i = 0; i < k; ++i) counts[i] = vec[i];
                        try {
                            auto model = extract_model(s, tree, leaf, counts);
                            if (fix_free_vars(model) && memberships_ok(model) && arith_ok(model))
                                return model;
                        } catch (const Error&) {
                            // internal verification failure: skip this vector
                        }
                    }
                    // odometer
                    std::size_t pos = 0;
                    for (;;) {
                        if (pos >= vec.size()) {
                            done = true;
                            break;
                        }
                        if (++vec[pos] > total) {
                            vec[pos] = 0;
                            ++pos;
                        } else {
                            break;
                        }
                    }
                    if (k == 0) break;
                }
                if (k == 0) break;
            }
        }
        return std::nullopt;
    }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

SolveResult solve(Session& s, const NormalizedFormula& f, const SolveConfig& cfg) {
    SolveResult r;
    Arith input_arith = f.arith ? f.arith : a_true();
    if (s.alphabet.size() < 2) {
        std::vector<Symbol> letters;
        for (const auto& e : f.eqs.eqs)
            for (const auto& side : {e.lhs, e.rhs})
                for (Symbol sym : side)
                    if (sym.is_letter()) letters.push_back(sym);
        for (const auto& m : f.memberships) collect_regex_letters(m.re, letters);
        fix_alphabet(s, std::move(letters));
    }

    // Relevant variables: everything whose value or length matters.
    std::vector<Symbol> relevant = free_vars(f.eqs);
    for (const auto& m : f.memberships)
        if (std::find(relevant.begin(), relevant.end(), m.var) == relevant.end())
            relevant.push_back(m.var);
    for (Symbol v : arith_string_vars(s, input_arith))
        if (std::find(relevant.begin(), relevant.end(), v) == relevant.end()) relevant.push_back(v);

    BuildResult build = build_tree(s, f.eqs, relevant, cfg.tree_budget);
    ReductionTree& tree = build.tree;
    auto dump_all = [&]() {
        if (!cfg.dump_tree.empty()) write_file(cfg.dump_tree, to_dot(s, tree));
    };
    if (build.budget_exhausted) {
        r.verdict = Verdict::Unknown;
        r.reason = "tree-budget: " + build.reason;
        dump_all();
        return r;
    }
    if (!tree.has_sat_leaf()) {
        // Closed cyclic proof with no satisfiable leaf.
        r.verdict = Verdict::Unsat;
        r.route = "tree";
        dump_all();
        return r;
    }
    trim(tree);
    postpro(s, tree);

    // Split memberships: variables the tree never reduces are discharged
    // arithmetically through their DFA's length set; reduced variables go
    // through widening.
    std::set<Symbol> targeted;
    for (const auto& n : tree.nodes) {
        if (n.synthetic) continue;
        for (const auto& sub : n.in_labels) targeted.insert(sub.target);
    }
    std::set<Symbol> grafted;
    for (const auto& n : tree.nodes)
        if (!n.carried.empty() && n.status != NodeStatus::Interior)
            grafted.insert(n.carried.begin(), n.carried.end());
    for (NodeId leaf : tree.sat_leaves())
        for (Symbol v : tree.at(leaf).carried) grafted.insert(v);

    std::vector<Membership> reduced_memberships;
    std::set<Symbol> free_mode, mixed;
    auto all_dfas = membership_dfas(s, f.memberships);
    Arith arith = input_arith;
    for (const auto& m : f.memberships) {
        if (!targeted.count(m.var)) {
            free_mode.insert(m.var);
        } else {
            reduced_memberships.push_back(m);
            if (grafted.count(m.var)) mixed.insert(m.var);
        }
    }
    for (Symbol v : free_mode) {
        const Dfa& d = all_dfas.at(v);
        if (is_empty(d)) {
            r.verdict = Verdict::Unsat;
            r.route = "tree";
            dump_all();
            return r;
        }
        arith = a_and({arith, length_constraint(s, dfa_to_cfg(s, d, v), {v})});
    }

    if (!reduced_memberships.empty()) {
        r.widen = widen_tree(s, tree, reduced_memberships, cfg.widen);
        if (r.widen.cap_exceeded) {
            r.verdict = Verdict::Unknown;
            r.reason = "unroll-cap: " + r.widen.reason;
            dump_all();
            return r;
        }
        auto reduced_dfas = membership_dfas(s, reduced_memberships);
        evaluate_leaves(s, tree, reduced_dfas, r.widen);
        trim(tree);
        if (!tree.has_sat_leaf()) {
            if (!mixed.empty()) {
                r.verdict = Verdict::Unknown;
                r.reason = "membership coverage for variables both reduced and free";
            } else {
                r.verdict = Verdict::Unsat;
                r.route = "tree";
            }
            dump_all();
            return r;
        }
    }

    // Length route selection.
    Arith final_formula = arith;
    FlatnessWitness fw = flatness(tree);
    bool solved_lengths = false;
    if (fw.flat()) {
        ChcSystem chc = extract_chc(s, tree, arith);
        if (!cfg.dump_chc.empty()) write_file(cfg.dump_chc, dump_chc(s, chc));
        DpiResult dpi = solve_dpi(s, chc);
        if (dpi.ok) {
            final_formula = dpi.solved_query;
            if (chc.query_pred) r.lengths = dpi.defs.at(*chc.query_pred);
            else r.lengths = a_true();
            r.route = "chc";
            solved_lengths = true;
        }
    }
    if (!solved_lengths) {
        Cfg cfg_grammar;
        try {
            cfg_grammar = extract_cfg(s, tree);
        } catch (const NotFlat&) {
            cfg_grammar = edt0l_to_cfg(extract_edtl(s, tree));
        }
        if (!cfg.dump_cfg.empty()) write_file(cfg.dump_cfg, dump_grammar(s, cfg_grammar));
        // One grammar nonterminal per root variable, through the per-leaf
        // sub-grammars' namespacing: use the union grammar restarted at each
        // namespaced alias is not meaningful, so constrain through the
        // original variables, which the union grammar keeps per leaf.
        std::vector<Symbol> vars = node_vars(tree.at(tree.root));
        std::vector<Symbol> present;
        for (Symbol v : vars)
            if (std::find(cfg_grammar.nonterminals.begin(), cfg_grammar.nonterminals.end(), v) !=
                cfg_grammar.nonterminals.end())
                present.push_back(v);
        r.lengths = length_constraint(s, cfg_grammar, present);
        final_formula = a_and({r.lengths, arith});
        r.route = "parikh";
        (void)side_condition_one_length;
    }

    if (!cfg.dump_lia.empty()) write_file(cfg.dump_lia, export_lia(s, final_formula));
    dump_all();
    if (cfg.export_only) {
        r.verdict = Verdict::Unknown;
        r.reason = "export-only backend";
        return r;
    }

    PresburgerResult pres = presburger_sat(final_formula, cfg.presburger);
    if (pres.verdict == SatVerdict::Unsat) {
        r.verdict = Verdict::Unsat;
        return r;
    }
    if (pres.verdict == SatVerdict::Unknown) {
        r.verdict = Verdict::Unknown;
        r.reason = "presburger-budget";
        return r;
    }

    // Sat: find a verified string model consistent with the witness.
    std::uint64_t bound = 64;
    for (auto [v, val] : pres.model) {
        (void)v;
        if (val > 0 && static_cast<std::uint64_t>(val) > bound)
            bound = std::min<std::uint64_t>(static_cast<std::uint64_t>(val), 512);
    }
    ModelSearch search{s, tree, all_dfas, free_mode, input_arith, pres.model, cfg.presburger};
    auto model = search.run(bound);
    if (!model) {
        r.verdict = Verdict::Unknown;
        r.reason = "model-search-exhausted";
        return r;
    }
    r.verdict = Verdict::Sat;
    r.model = *model;
    return r;
}

// ── Benchmark generator ──────────────────────────────────────────────────

namespace {

struct PhaseTemplate {
    const char* lhs;
    const char* rhs;
    int vars;   // 1 or 2
};

// x a b y = y b a x / x a b = b a x (satisfiable);
// x a a y = y b a x / x a a = b a x (unsatisfiable).
const PhaseTemplate kSatTemplates[] = {{"Xab", "baX", 1}, {"XabY", "YbaX", 2}};
const PhaseTemplate kUnsatTemplates[] = {{"Xaa", "baX", 1}, {"XaaY", "YbaX", 2}};

std::string render_side(const char* pattern, int phase_idx) {
    std::string out = "(str.++";
    for (const char* c = pattern; *c; ++c) {
        if (*c == 'X') out += " x" + std::to_string(phase_idx);
        else if (*c == 'Y') out += " y" + std::to_string(phase_idx);
        else out += std::string(" \"") + *c + "\"";
    }
    return out + ")";
}

}  // namespace

std::vector<std::string> gen_bench(const std::string& out_dir, int phases, int count) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> files;
    for (int i = 0; i < count; ++i) {
        bool sat = i % 2 == 0;
        int num_phases = 1 + (i / 2) % phases;
        std::ostringstream body;
        body << "(set-logic QF_S)\n";
        std::string lhs = "(str.++", rhs = "(str.++";
        std::vector<std::string> decls;
        for (int j = 0; j < num_phases; ++j) {
            const PhaseTemplate& t =
                sat ? kSatTemplates[(i / 2 + j) % 2] : kUnsatTemplates[(i / 2 + j) % 2];
            decls.push_back("x" + std::to_string(j + 1));
            if (t.vars == 2) decls.push_back("y" + std::to_string(j + 1));
            lhs += " " + render_side(t.lhs, j + 1);
            rhs += " " + render_side(t.rhs, j + 1);
        }
        lhs += ")";
        rhs += ")";
        for (const auto& d : decls) body << "(declare-fun " << d << " () String)\n";
        body << "(assert (= " << lhs << " " << rhs << "))\n(check-sat)\n";
        char name[64];
        std::snprintf(name, sizeof name, "quad-%03d-%d-%s.smt2", i + 1, num_phases,
                      sat ? "sat" : "unsat");
        std::string path = (fs::path(out_dir) / name).string();
        write_file(path, body.str());
        files.push_back(path);
    }
    return files;
}

// ── Brute-force oracle ───────────────────────────────────────────────────

OracleVerdict oracle(Session& s, const NormalizedFormula& f, int max_len) {
    if (s.alphabet.size() < 2) {
        std::vector<Symbol> letters;
        for (const auto& e : f.eqs.eqs)
            for (const auto& side : {e.lhs, e.rhs})
                for (Symbol sym : side)
                    if (sym.is_letter()) letters.push_back(sym);
        fix_alphabet(s, std::move(letters));
    }
    std::vector<Symbol> vars = free_vars(f.eqs);
    for (const auto& m : f.memberships)
        if (std::find(vars.begin(), vars.end(), m.var) == vars.end()) vars.push_back(m.var);
    Arith arith = f.arith ? f.arith : a_true();
    for (Symbol v : arith_string_vars(s, arith))
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    if (vars.size() > 6) throw Error("oracle: too many variables");

    auto dfas = membership_dfas(s, f.memberships);

    // Words ordered by length.
    std::vector<StringTerm> words{{}};
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (static_cast<int>(words[i].size()) >= max_len) continue;
        for (Symbol c : s.alphabet) {
            StringTerm w = words[i];
            w.push_back(c);
            words.push_back(std::move(w));
        }
    }
    std::stable_sort(words.begin(), words.end(),
                     [](const StringTerm& a, const StringTerm& b) { return a.size() < b.size(); });

    std::vector<std::size_t> idx(vars.size(), 0);
    auto check = [&]() -> bool {
        std::map<Symbol, StringTerm> env;
        for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = words[idx[i]];
        for (const auto& e : f.eqs.eqs) {
            StringTerm l, r;
            for (Symbol sym : e.lhs)
                sym.is_letter() ? l.push_back(sym) : (void)(l = concat(l, env[sym]));
            for (Symbol sym : e.rhs)
                sym.is_letter() ? r.push_back(sym) : (void)(r = concat(r, env[sym]));
            if (l != r) return false;
        }
        for (const auto& [v, d] : dfas)
            if (!accepts(d, env.count(v) ? env[v] : StringTerm{})) return false;
        Arith residual = arith;
        for (const auto& [v, w] : env) {
            AVar len = s.avars.length_of(v, s.syms);
            residual = arith_subst(residual, len, LinTerm::of_const(static_cast<std::int64_t>(w.size())));
        }
        return presburger_sat(residual).verdict == SatVerdict::Sat;
    };
    if (vars.empty()) return check() ? OracleVerdict::Sat : OracleVerdict::UnsatWithinBound;
    for (;;) {
        if (check()) return OracleVerdict::Sat;
        std::size_t pos = 0;
        for (;;) {
            if (pos >= idx.size()) return OracleVerdict::UnsatWithinBound;
            if (++idx[pos] >= words.size()) {
                idx[pos] = 0;
                ++pos;
            } else {
                break;
            }
        }
    }
}

std::string model_to_smtlib(const Session& s, const std::map<Symbol, StringTerm>& model) {
    std::ostringstream os;
    os << "(\n";
    for (const auto& [v, w] : model) {
        if (!s.syms.is_user_var(v)) continue;
        os << "  (define-fun " << s.syms.name(v) << " () String \"";
        for (Symbol c : w) os << s.syms.name(c);
        os << "\")\n";
    }
    os << ")\n";
    return os.str();
}

}  // namespace kepler
