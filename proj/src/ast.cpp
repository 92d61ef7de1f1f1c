#include "kepler/ast.hpp"

#include <algorithm>
#include <sstream>

namespace kepler {

// ── SymbolTable ──────────────────────────────────────────────────────────

Symbol SymbolTable::intern_letter(std::string_view name) {
    auto it = letter_ids_.find(std::string(name));
    if (it != letter_ids_.end()) return Symbol{SymKind::Letter, it->second};
    std::uint32_t id = static_cast<std::uint32_t>(letter_names_.size());
    letter_names_.emplace_back(name);
    letter_ids_.emplace(std::string(name), id);
    return Symbol{SymKind::Letter, id};
}

Symbol SymbolTable::intern_var(std::string_view name) {
    auto it = var_ids_.find(std::string(name));
    if (it != var_ids_.end()) return Symbol{SymKind::Var, it->second};
    std::uint32_t id = static_cast<std::uint32_t>(var_names_.size());
    var_names_.emplace_back(name);
    user_.push_back(true);
    var_ids_.emplace(std::string(name), id);
    return Symbol{SymKind::Var, id};
}

Symbol SymbolTable::intern_internal_var(std::string_view name) {
    auto it = var_ids_.find(std::string(name));
    if (it != var_ids_.end()) return Symbol{SymKind::Var, it->second};
    std::uint32_t id = static_cast<std::uint32_t>(var_names_.size());
    var_names_.emplace_back(name);
    user_.push_back(false);
    var_ids_.emplace(std::string(name), id);
    return Symbol{SymKind::Var, id};
}

Symbol SymbolTable::fresh_var(Symbol base) {
    if (!base.is_var()) throw Error("fresh_var: base must be a variable");
    auto& counter = fresh_counter_[base.id];
    const std::string& base_name = var_names_.at(base.id);
    for (;;) {
        ++counter;
        std::string candidate = base_name + "_" + std::to_string(counter);
        if (!var_ids_.count(candidate)) return intern_internal_var(candidate);
    }
}

const std::string& SymbolTable::name(Symbol s) const {
    return s.is_var() ? var_names_.at(s.id) : letter_names_.at(s.id);
}

bool SymbolTable::is_user_var(Symbol v) const {
    return v.is_var() && user_.at(v.id);
}

bool SymbolTable::has_var(std::string_view name) const {
    return var_ids_.count(std::string(name)) != 0;
}

std::optional<Symbol> SymbolTable::find_var(std::string_view name) const {
    auto it = var_ids_.find(std::string(name));
    if (it == var_ids_.end()) return std::nullopt;
    return Symbol{SymKind::Var, it->second};
}

std::optional<Symbol> SymbolTable::find_letter(std::string_view name) const {
    auto it = letter_ids_.find(std::string(name));
    if (it == letter_ids_.end()) return std::nullopt;
    return Symbol{SymKind::Letter, it->second};
}

// ── Terms / equations ────────────────────────────────────────────────────

StringTerm concat(const StringTerm& a, const StringTerm& b) {
    StringTerm r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

bool EquationSystem::is_quadratic() const {
    std::unordered_map<std::uint32_t, int> occ;
    for (const auto& e : eqs) {
        for (const auto& side : {e.lhs, e.rhs})
            for (Symbol s : side)
                if (s.is_var() && ++occ[s.id] > 2) return false;
    }
    return true;
}

int EquationSystem::max_equation_length() const {
    int m = 0;
    for (const auto& e : eqs) m = std::max(m, e.notational_length());
    return m;
}

std::vector<Symbol> free_vars(const StringTerm& t) {
    std::vector<Symbol> out;
    for (Symbol s : t)
        if (s.is_var() && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    return out;
}

std::vector<Symbol> free_vars(const EquationSystem& es) {
    std::vector<Symbol> out;
    for (const auto& e : es.eqs)
        for (const auto& side : {e.lhs, e.rhs})
            for (Symbol s : side)
                if (s.is_var() && std::find(out.begin(), out.end(), s) == out.end())
                    out.push_back(s);
    return out;
}

// ── Regexes ──────────────────────────────────────────────────────────────

static Regex mk_re(RegexNode n) { return std::make_shared<const RegexNode>(std::move(n)); }

Regex re_empty() { return mk_re({RegexKind::Empty, {}, {}, nullptr, nullptr}); }
Regex re_epsilon() { return mk_re({RegexKind::Epsilon, {}, {}, nullptr, nullptr}); }
Regex re_letter(Symbol c) { return mk_re({RegexKind::Letter, c, {}, nullptr, nullptr}); }
Regex re_word(StringTerm w) { return mk_re({RegexKind::Word, {}, std::move(w), nullptr, nullptr}); }
Regex re_concat(Regex a, Regex b) { return mk_re({RegexKind::Concat, {}, {}, std::move(a), std::move(b)}); }
Regex re_union(Regex a, Regex b) { return mk_re({RegexKind::Union, {}, {}, std::move(a), std::move(b)}); }
Regex re_intersect(Regex a, Regex b) { return mk_re({RegexKind::Intersect, {}, {}, std::move(a), std::move(b)}); }
Regex re_complement(Regex a) { return mk_re({RegexKind::Complement, {}, {}, std::move(a), nullptr}); }
Regex re_star(Regex a) { return mk_re({RegexKind::Star, {}, {}, std::move(a), nullptr}); }
Regex re_allchar() { return mk_re({RegexKind::AllChar, {}, {}, nullptr, nullptr}); }

void collect_regex_letters(const Regex& r, std::vector<Symbol>& out) {
    if (!r) return;
    if (r->kind == RegexKind::Letter) out.push_back(r->letter);
    for (Symbol s : r->word) out.push_back(s);
    collect_regex_letters(r->a, out);
    collect_regex_letters(r->b, out);
}

// ── Linear arithmetic ────────────────────────────────────────────────────

AVar ArithVarTable::intern_int(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    AVar v = static_cast<AVar>(names_.size());
    names_.emplace_back(name);
    kinds_.push_back(AVarKind::Int);
    strvars_.push_back(Symbol{});
    ids_.emplace(std::string(name), v);
    return v;
}

AVar ArithVarTable::fresh_int(std::string_view base) {
    auto& counter = fresh_counter_[std::string(base)];
    for (;;) {
        ++counter;
        std::string candidate = std::string(base) + std::to_string(counter);
        if (!ids_.count(candidate)) return intern_int(candidate);
    }
}

AVar ArithVarTable::length_of(Symbol string_var, const SymbolTable& syms) {
    auto it = length_vars_.find(string_var.id);
    if (it != length_vars_.end()) return it->second;
    std::string name = "n_" + syms.name(string_var);
    while (ids_.count(name)) name += "'";
    AVar v = static_cast<AVar>(names_.size());
    names_.push_back(name);
    kinds_.push_back(AVarKind::Length);
    strvars_.push_back(string_var);
    ids_.emplace(name, v);
    length_vars_.emplace(string_var.id, v);
    return v;
}

std::optional<Symbol> ArithVarTable::string_var(AVar v) const {
    if (kinds_.at(v) != AVarKind::Length) return std::nullopt;
    return strvars_.at(v);
}

std::optional<AVar> ArithVarTable::find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

LinTerm LinTerm::of_const(std::int64_t k) {
    LinTerm t;
    t.constant = k;
    return t;
}

LinTerm LinTerm::of_var(AVar v, std::int64_t c) {
    LinTerm t;
    if (c != 0) t.coeffs.emplace_back(v, c);
    return t;
}

LinTerm& LinTerm::add(const LinTerm& o, std::int64_t scale) {
    if (scale == 0) return *this;
    std::map<AVar, std::int64_t> acc;
    for (auto [v, c] : coeffs) acc[v] += c;
    for (auto [v, c] : o.coeffs) acc[v] += c * scale;
    coeffs.clear();
    for (auto [v, c] : acc)
        if (c != 0) coeffs.emplace_back(v, c);
    constant += o.constant * scale;
    return *this;
}

LinTerm LinTerm::scaled(std::int64_t k) const {
    LinTerm t;
    if (k == 0) return t;
    for (auto [v, c] : coeffs) t.coeffs.emplace_back(v, c * k);
    t.constant = constant * k;
    return t;
}

std::int64_t LinTerm::coeff_of(AVar v) const {
    for (auto [w, c] : coeffs)
        if (w == v) return c;
    return 0;
}

static Arith mk_arith(ArithNode n) { return std::make_shared<const ArithNode>(std::move(n)); }

Arith a_true() { return mk_arith({ArithKind::True, {}, CmpOp::Eq, {}, {}, nullptr, 0, {}}); }
Arith a_false() { return mk_arith({ArithKind::False, {}, CmpOp::Eq, {}, {}, nullptr, 0, {}}); }

Arith a_atom(LinTerm t, CmpOp op) {
    if (t.is_const()) {
        bool holds = op == CmpOp::Eq ? t.constant == 0 : t.constant >= 0;
        return holds ? a_true() : a_false();
    }
    return mk_arith({ArithKind::Atom, std::move(t), op, {}, {}, nullptr, 0, {}});
}

Arith a_eq(LinTerm l, LinTerm r) { return a_atom(l.add(r, -1), CmpOp::Eq); }
Arith a_ge(LinTerm l, LinTerm r) { return a_atom(l.add(r, -1), CmpOp::Ge); }
Arith a_gt(LinTerm l, LinTerm r) {
    LinTerm t = l.add(r, -1);
    t.constant -= 1;   // integer semantics: l > r  <=>  l - r - 1 >= 0
    return a_atom(std::move(t), CmpOp::Ge);
}
Arith a_le(LinTerm l, LinTerm r) { return a_ge(std::move(r), std::move(l)); }
Arith a_lt(LinTerm l, LinTerm r) { return a_gt(std::move(r), std::move(l)); }

Arith a_and(std::vector<Arith> kids) {
    std::vector<Arith> flat;
    for (auto& k : kids) {
        if (!k || k->kind == ArithKind::True) continue;
        if (k->kind == ArithKind::False) return a_false();
        if (k->kind == ArithKind::And) {
            flat.insert(flat.end(), k->kids.begin(), k->kids.end());
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (flat.empty()) return a_true();
    if (flat.size() == 1) return flat[0];
    return mk_arith({ArithKind::And, {}, CmpOp::Eq, std::move(flat), {}, nullptr, 0, {}});
}

Arith a_or(std::vector<Arith> kids) {
    std::vector<Arith> flat;
    for (auto& k : kids) {
        if (!k || k->kind == ArithKind::False) continue;
        if (k->kind == ArithKind::True) return a_true();
        if (k->kind == ArithKind::Or) {
            flat.insert(flat.end(), k->kids.begin(), k->kids.end());
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (flat.empty()) return a_false();
    if (flat.size() == 1) return flat[0];
    return mk_arith({ArithKind::Or, {}, CmpOp::Eq, std::move(flat), {}, nullptr, 0, {}});
}

Arith a_exists(std::vector<AVar> vars, Arith body) {
    if (vars.empty()) return body;
    if (body->kind == ArithKind::True || body->kind == ArithKind::False) return body;
    if (body->kind == ArithKind::Exists) {
        std::vector<AVar> merged = std::move(vars);
        merged.insert(merged.end(), body->bound.begin(), body->bound.end());
        return mk_arith({ArithKind::Exists, {}, CmpOp::Eq, {}, std::move(merged), body->body, 0, {}});
    }
    return mk_arith({ArithKind::Exists, {}, CmpOp::Eq, {}, std::move(vars), std::move(body), 0, {}});
}

Arith a_pred(std::uint32_t pred, std::vector<AVar> args) {
    return mk_arith({ArithKind::Pred, {}, CmpOp::Eq, {}, {}, nullptr, pred, std::move(args)});
}

bool arith_equal(const Arith& a, const Arith& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case ArithKind::True:
        case ArithKind::False: return true;
        case ArithKind::Atom: return a->op == b->op && a->lin == b->lin;
        case ArithKind::And:
        case ArithKind::Or: {
            if (a->kids.size() != b->kids.size()) return false;
            for (std::size_t i = 0; i < a->kids.size(); ++i)
                if (!arith_equal(a->kids[i], b->kids[i])) return false;
            return true;
        }
        case ArithKind::Exists:
            return a->bound == b->bound && arith_equal(a->body, b->body);
        case ArithKind::Pred:
            return a->pred == b->pred && a->args == b->args;
    }
    return false;
}

bool arith_has_pred(const Arith& a) {
    if (!a) return false;
    if (a->kind == ArithKind::Pred) return true;
    for (const auto& k : a->kids)
        if (arith_has_pred(k)) return true;
    return a->kind == ArithKind::Exists && arith_has_pred(a->body);
}

void collect_arith_vars(const Arith& a, std::vector<AVar>& out) {
    if (!a) return;
    auto push = [&out](AVar v) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    switch (a->kind) {
        case ArithKind::Atom:
            for (auto [v, c] : a->lin.coeffs) push(v);
            break;
        case ArithKind::And:
        case ArithKind::Or:
            for (const auto& k : a->kids) collect_arith_vars(k, out);
            break;
        case ArithKind::Exists:
            for (AVar v : a->bound) push(v);
            collect_arith_vars(a->body, out);
            break;
        case ArithKind::Pred:
            for (AVar v : a->args) push(v);
            break;
        default: break;
    }
}

Arith arith_subst(const Arith& a, AVar v, const LinTerm& t) {
    if (!a) return a;
    switch (a->kind) {
        case ArithKind::True:
        case ArithKind::False: return a;
        case ArithKind::Atom: {
            std::int64_t c = a->lin.coeff_of(v);
            if (c == 0) return a;
            LinTerm lin = a->lin;
            lin.add(LinTerm::of_var(v, c), -1);
            lin.add(t, c);
            return a_atom(std::move(lin), a->op);
        }
        case ArithKind::And:
        case ArithKind::Or: {
            std::vector<Arith> kids;
            kids.reserve(a->kids.size());
            for (const auto& k : a->kids) kids.push_back(arith_subst(k, v, t));
            return a->kind == ArithKind::And ? a_and(std::move(kids)) : a_or(std::move(kids));
        }
        case ArithKind::Exists: {
            for (AVar b : a->bound)
                if (b == v) return a;   // shadowed (bound vars are unique by construction)
            return a_exists(a->bound, arith_subst(a->body, v, t));
        }
        case ArithKind::Pred:
            return a;   // predicate args are plain variables; callers inline first
    }
    return a;
}

// ── Substitutions ────────────────────────────────────────────────────────

Substitution Substitution::eps(Symbol x) {
    return Substitution{x, {}, SubstShape::Eps};
}

Substitution Substitution::letter_cons(Symbol x, Symbol c, Symbol xp) {
    return Substitution{x, {c, xp}, SubstShape::LetterCons};
}

Substitution Substitution::var_cons(Symbol x, Symbol y, Symbol xp) {
    return Substitution{x, {y, xp}, SubstShape::VarCons};
}

Substitution Substitution::rename(Symbol x, Symbol y) {
    return Substitution{x, {y}, SubstShape::Rename};
}

StringTerm apply_subst(const StringTerm& t, const Substitution& s) {
    StringTerm out;
    out.reserve(t.size());
    for (Symbol sym : t) {
        if (sym == s.target) {
            out.insert(out.end(), s.replacement.begin(), s.replacement.end());
        } else {
            out.push_back(sym);
        }
    }
    return out;
}

WordEquation apply_subst(const WordEquation& e, const Substitution& s) {
    return WordEquation{apply_subst(e.lhs, s), apply_subst(e.rhs, s)};
}

EquationSystem apply_subst(const EquationSystem& es, const Substitution& s) {
    EquationSystem out;
    out.eqs.reserve(es.eqs.size());
    for (const auto& e : es.eqs) out.eqs.push_back(apply_subst(e, s));
    return out;
}

// ── Session / printing ───────────────────────────────────────────────────

void fix_alphabet(Session& s, std::vector<Symbol> letters) {
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
    const char* reserved[] = {"a", "b", "c", "d"};
    for (const char* name : reserved) {
        if (letters.size() >= 2) break;
        Symbol c = s.syms.intern_letter(name);
        if (std::find(letters.begin(), letters.end(), c) == letters.end()) letters.push_back(c);
    }
    std::sort(letters.begin(), letters.end());
    s.alphabet = std::move(letters);
}

std::string to_string(const Session& s, Symbol sym) { return s.syms.name(sym); }

std::string to_string(const Session& s, const StringTerm& t) {
    if (t.empty()) return "ε";
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += "·";
        out += s.syms.name(t[i]);
    }
    return out;
}

std::string to_string(const Session& s, const WordEquation& e) {
    return to_string(s, e.lhs) + " = " + to_string(s, e.rhs);
}

std::string to_string(const Session& s, const EquationSystem& es) {
    if (es.eqs.empty()) return "ε = ε";
    std::string out;
    for (std::size_t i = 0; i < es.eqs.size(); ++i) {
        if (i) out += " ∧ ";
        out += to_string(s, es.eqs[i]);
    }
    return out;
}

std::string to_string(const Session& s, const Substitution& sub) {
    std::string repl;
    for (Symbol sym : sub.replacement) repl += s.syms.name(sym);
    if (repl.empty()) repl = "ε";
    return "[" + repl + "/" + s.syms.name(sub.target) + "]";
}

std::string to_string(const Session& s, const Regex& r) {
    if (!r) return "?";
    switch (r->kind) {
        case RegexKind::Empty: return "∅";
        case RegexKind::Epsilon: return "ε";
        case RegexKind::Letter: return s.syms.name(r->letter);
        case RegexKind::Word: {
            std::string w;
            for (Symbol c : r->word) w += s.syms.name(c);
            return w.empty() ? "ε" : w;
        }
        case RegexKind::Concat: return "(" + to_string(s, r->a) + "·" + to_string(s, r->b) + ")";
        case RegexKind::Union: return "(" + to_string(s, r->a) + "+" + to_string(s, r->b) + ")";
        case RegexKind::Intersect: return "(" + to_string(s, r->a) + "∩" + to_string(s, r->b) + ")";
        case RegexKind::Complement: return "(" + to_string(s, r->a) + ")^C";
        case RegexKind::Star: return "(" + to_string(s, r->a) + ")*";
        case RegexKind::AllChar: return "Σ";
    }
    return "?";
}

static std::string lin_to_string(const Session& s, const LinTerm& t) {
    std::ostringstream os;
    bool first = true;
    for (auto [v, c] : t.coeffs) {
        if (!first) os << (c >= 0 ? " + " : " - ");
        else if (c < 0) os << "-";
        first = false;
        std::int64_t m = c >= 0 ? c : -c;
        if (m != 1) os << m << "*";
        os << s.avars.name(v);
    }
    if (first) {
        os << t.constant;
    } else if (t.constant > 0) {
        os << " + " << t.constant;
    } else if (t.constant < 0) {
        os << " - " << -t.constant;
    }
    return os.str();
}

std::string to_string(const Session& s, const Arith& a) {
    if (!a) return "true";
    switch (a->kind) {
        case ArithKind::True: return "true";
        case ArithKind::False: return "false";
        case ArithKind::Atom:
            return lin_to_string(s, a->lin) + (a->op == CmpOp::Eq ? " = 0" : " >= 0");
        case ArithKind::And:
        case ArithKind::Or: {
            std::string sep = a->kind == ArithKind::And ? " ∧ " : " ∨ ";
            std::string out = "(";
            for (std::size_t i = 0; i < a->kids.size(); ++i) {
                if (i) out += sep;
                out += to_string(s, a->kids[i]);
            }
            return out + ")";
        }
        case ArithKind::Exists: {
            std::string out = "∃";
            for (std::size_t i = 0; i < a->bound.size(); ++i) {
                if (i) out += ",";
                out += s.avars.name(a->bound[i]);
            }
            return out + ". " + to_string(s, a->body);
        }
        case ArithKind::Pred: {
            std::string out = "P" + std::to_string(a->pred) + "(";
            for (std::size_t i = 0; i < a->args.size(); ++i) {
                if (i) out += ",";
                out += s.avars.name(a->args[i]);
            }
            return out + ")";
        }
    }
    return "?";
}

}  // namespace kepler
