// Core domain types: interned symbols, flattened string terms, word
// equations, regexes, linear arithmetic and substitutions.  Everything here
// is a value type; the only mutable state is the per-session interning
// tables in Session.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kepler {

// ── Symbols ──────────────────────────────────────────────────────────────

enum class SymKind : std::uint8_t { Letter, Var };

struct Symbol {
    SymKind kind{SymKind::Letter};
    std::uint32_t id{0};

    bool is_var() const { return kind == SymKind::Var; }
    bool is_letter() const { return kind == SymKind::Letter; }
    bool operator==(const Symbol&) const = default;
    bool operator<(const Symbol& o) const {
        return kind != o.kind ? kind < o.kind : id < o.id;
    }
};

struct SymbolHash {
    std::size_t operator()(Symbol s) const {
        return (static_cast<std::size_t>(s.kind) << 32) ^ s.id;
    }
};

// Interning table for letters and variables.  Variable ids grow in creation
// order, which doubles as the creation serial used by link_back to decide
// which variables may be renamed against an ancestor.
class SymbolTable {
public:
    Symbol intern_letter(std::string_view name);
    Symbol intern_var(std::string_view name);        // user-declared
    Symbol intern_internal_var(std::string_view name);

    // Counter-suffix freshness: x -> x_1 -> x_2 ...; skips names that are
    // already taken so fresh variables never collide with user variables.
    Symbol fresh_var(Symbol base);

    const std::string& name(Symbol s) const;
    bool is_user_var(Symbol v) const;
    bool has_var(std::string_view name) const;
    std::optional<Symbol> find_var(std::string_view name) const;
    std::optional<Symbol> find_letter(std::string_view name) const;
    std::uint32_t var_count() const { return static_cast<std::uint32_t>(var_names_.size()); }

private:
    std::vector<std::string> letter_names_, var_names_;
    std::vector<bool> user_;
    std::unordered_map<std::string, std::uint32_t> letter_ids_, var_ids_;
    std::unordered_map<std::uint32_t, std::uint32_t> fresh_counter_;
};

// ── String terms and equations ───────────────────────────────────────────

// A flattened symbol sequence; the empty vector is the empty word.
using StringTerm = std::vector<Symbol>;

StringTerm concat(const StringTerm& a, const StringTerm& b);

struct WordEquation {
    StringTerm lhs, rhs;

    // Notational length N: symbol count of both sides, '=' excluded.
    int notational_length() const { return static_cast<int>(lhs.size() + rhs.size()); }
    bool trivial() const { return lhs == rhs; }
    bool operator==(const WordEquation&) const = default;
};

struct EquationSystem {
    std::vector<WordEquation> eqs;

    bool empty() const { return eqs.empty(); }
    bool is_quadratic() const;   // every variable occurs at most twice
    int max_equation_length() const;
    bool operator==(const EquationSystem&) const = default;
};

std::vector<Symbol> free_vars(const StringTerm& t);
std::vector<Symbol> free_vars(const EquationSystem& es);

// ── Regexes ──────────────────────────────────────────────────────────────

enum class RegexKind : std::uint8_t {
    Empty, Epsilon, Letter, Word, Concat, Union, Intersect, Complement, Star, AllChar
};

struct RegexNode;
using Regex = std::shared_ptr<const RegexNode>;

struct RegexNode {
    RegexKind kind;
    Symbol letter{};       // Letter
    StringTerm word;       // Word (letters only)
    Regex a, b;            // children
};

Regex re_empty();
Regex re_epsilon();
Regex re_letter(Symbol c);
Regex re_word(StringTerm w);
Regex re_concat(Regex a, Regex b);
Regex re_union(Regex a, Regex b);
Regex re_intersect(Regex a, Regex b);
Regex re_complement(Regex a);
Regex re_star(Regex a);
Regex re_allchar();

void collect_regex_letters(const Regex& r, std::vector<Symbol>& out);

// ── Linear integer arithmetic ────────────────────────────────────────────

using AVar = std::uint32_t;

enum class AVarKind : std::uint8_t { Int, Length };

// Arithmetic variable table: plain integer variables plus one length
// variable per string variable (|x| <-> n_x).
class ArithVarTable {
public:
    AVar intern_int(std::string_view name);
    AVar fresh_int(std::string_view base);
    AVar length_of(Symbol string_var, const SymbolTable& syms);

    const std::string& name(AVar v) const { return names_.at(v); }
    AVarKind kind(AVar v) const { return kinds_.at(v); }
    std::optional<Symbol> string_var(AVar v) const;
    std::optional<AVar> find(std::string_view name) const;
    std::uint32_t count() const { return static_cast<std::uint32_t>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::vector<AVarKind> kinds_;
    std::vector<Symbol> strvars_;   // valid when kind == Length
    std::unordered_map<std::string, AVar> ids_;
    std::unordered_map<std::uint32_t, AVar> length_vars_;  // string var id -> AVar
    std::unordered_map<std::string, std::uint32_t> fresh_counter_;
};

// Sum of coeff*var plus a constant; coeffs sorted by var, all nonzero.
struct LinTerm {
    std::vector<std::pair<AVar, std::int64_t>> coeffs;
    std::int64_t constant = 0;

    static LinTerm of_const(std::int64_t k);
    static LinTerm of_var(AVar v, std::int64_t c = 1);
    LinTerm& add(const LinTerm& o, std::int64_t scale = 1);
    LinTerm scaled(std::int64_t k) const;
    bool is_const() const { return coeffs.empty(); }
    std::int64_t coeff_of(AVar v) const;
    bool operator==(const LinTerm&) const = default;
};

enum class CmpOp : std::uint8_t { Eq, Ge };   // lin = 0  |  lin >= 0

enum class ArithKind : std::uint8_t { True, False, Atom, And, Or, Exists, Pred };

struct ArithNode;
using Arith = std::shared_ptr<const ArithNode>;

struct ArithNode {
    ArithKind kind;
    LinTerm lin;                  // Atom
    CmpOp op{CmpOp::Eq};          // Atom
    std::vector<Arith> kids;      // And / Or
    std::vector<AVar> bound;      // Exists
    Arith body;                   // Exists
    std::uint32_t pred{0};        // Pred
    std::vector<AVar> args;       // Pred
};

Arith a_true();
Arith a_false();
Arith a_atom(LinTerm t, CmpOp op);
Arith a_eq(LinTerm l, LinTerm r);
Arith a_ge(LinTerm l, LinTerm r);    // l >= r
Arith a_gt(LinTerm l, LinTerm r);    // l >  r
Arith a_le(LinTerm l, LinTerm r);
Arith a_lt(LinTerm l, LinTerm r);
Arith a_and(std::vector<Arith> kids);
Arith a_or(std::vector<Arith> kids);
Arith a_exists(std::vector<AVar> vars, Arith body);
Arith a_pred(std::uint32_t pred, std::vector<AVar> args);

bool arith_equal(const Arith& a, const Arith& b);
bool arith_has_pred(const Arith& a);
void collect_arith_vars(const Arith& a, std::vector<AVar>& out);
// Substitute a variable by a linear term throughout a formula.
Arith arith_subst(const Arith& a, AVar v, const LinTerm& t);

// ── Substitutions ────────────────────────────────────────────────────────

enum class SubstShape : std::uint8_t { Eps, LetterCons, VarCons, Rename };

// One binding target -> replacement.  The shape tag mirrors the four label
// forms produced by the reduction engine.
struct Substitution {
    Symbol target{};            // a variable
    StringTerm replacement;
    SubstShape shape{SubstShape::Eps};

    static Substitution eps(Symbol x);
    static Substitution letter_cons(Symbol x, Symbol c, Symbol xp); // [c x'/x]
    static Substitution var_cons(Symbol x, Symbol y, Symbol xp);    // [y x'/x]
    static Substitution rename(Symbol x, Symbol y);                 // [y/x]
    bool operator==(const Substitution&) const = default;
};

StringTerm apply_subst(const StringTerm& t, const Substitution& s);
WordEquation apply_subst(const WordEquation& e, const Substitution& s);
EquationSystem apply_subst(const EquationSystem& es, const Substitution& s);

// ── Normalized formulas and sessions ─────────────────────────────────────

struct Membership {
    Symbol var;
    Regex re;
};

struct NormalizedFormula {
    EquationSystem eqs;
    std::vector<Membership> memberships;
    Arith arith;   // never null; a_true() when absent
};

// One solve session: interning tables plus the session alphabet.  Sessions
// are independent; nothing is shared between them.
struct Session {
    SymbolTable syms;
    ArithVarTable avars;
    std::vector<Symbol> alphabet;   // sorted by id, >= 2 letters once fixed

    Symbol letter(std::string_view name) { return syms.intern_letter(name); }
    Symbol var(std::string_view name) { return syms.intern_var(name); }
};

// Ensure the alphabet has at least two letters, extending with reserved
// names (a, b, c, ...) that do not collide with existing letters.
void fix_alphabet(Session& s, std::vector<Symbol> letters);

std::string to_string(const Session& s, Symbol sym);
std::string to_string(const Session& s, const StringTerm& t);       // "ε" when empty
std::string to_string(const Session& s, const WordEquation& e);
std::string to_string(const Session& s, const EquationSystem& es);
std::string to_string(const Session& s, const Substitution& sub);   // "[ax1/x]"
std::string to_string(const Session& s, const Regex& r);
std::string to_string(const Session& s, const Arith& a);

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kepler
