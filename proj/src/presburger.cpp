#include "kepler/presburger.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace kepler {

namespace {

constexpr std::int64_t kInfinity = INT64_MAX / 4;

struct Constraint {
    LinTerm t;
    bool is_eq;   // t = 0, otherwise t >= 0
};

// Records x := lin-expr-of-later-vars, for model reconstruction.
struct Elim {
    AVar var;
    LinTerm expr;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    return -floor_div(-a, b);
}

struct ConjunctSolver {
    std::uint64_t* budget;
    std::vector<Elim> elims;

    // Returns Unknown only on budget exhaustion.
    SatVerdict solve(std::vector<Constraint> cs, std::map<AVar, std::int64_t>& model) {
        elims.clear();
        SatVerdict v = decide(std::move(cs), model);
        if (v == SatVerdict::Sat) {
            for (auto it = elims.rbegin(); it != elims.rend(); ++it) {
                std::int64_t val = it->expr.constant;
                for (auto [w, c] : it->expr.coeffs) val += c * model[w];
                model[it->var] = val;
            }
        }
        return v;
    }

private:
    static bool propagate_equalities(std::vector<Constraint>& cs, std::vector<Elim>& elims,
                                     bool& infeasible) {
        infeasible = false;
        for (;;) {
            int best = -1;
            for (std::size_t i = 0; i < cs.size(); ++i) {
                if (!cs[i].is_eq) continue;
                if (cs[i].t.is_const()) {
                    if (cs[i].t.constant != 0) {
                        infeasible = true;
                        return true;
                    }
                    cs.erase(cs.begin() + static_cast<long>(i));
                    --i;
                    continue;
                }
                if (best < 0 || cs[i].t.coeffs.size() < cs[best].t.coeffs.size())
                    best = static_cast<int>(i);
            }
            if (best < 0) return true;
            Constraint eq = cs[best];
            // gcd test
            std::int64_t g = 0;
            for (auto [v, c] : eq.t.coeffs) g = std::gcd(g, c < 0 ? -c : c);
            if (g > 1) {
                if (eq.t.constant % g != 0) {
                    infeasible = true;
                    return true;
                }
                for (auto& [v, c] : eq.t.coeffs) c /= g;
                eq.t.constant /= g;
            }
            AVar pivot = 0;
            std::int64_t pc = 0;
            for (auto [v, c] : eq.t.coeffs) {
                if (c == 1 || c == -1) {
                    pivot = v;
                    pc = c;
                    break;
                }
            }
            if (pc == 0) return false;   // no unit coefficient; caller falls back
            // pivot = -(rest)/pc
            LinTerm expr = eq.t;
            expr.add(LinTerm::of_var(pivot, pc), -1);
            expr = expr.scaled(-pc);   // pc in {1,-1} so this stays integral
            cs.erase(cs.begin() + best);
            for (auto& c : cs) {
                std::int64_t k = c.t.coeff_of(pivot);
                if (k != 0) {
                    c.t.add(LinTerm::of_var(pivot, k), -1);
                    c.t.add(expr, k);
                }
            }
            elims.push_back(Elim{pivot, std::move(expr)});
        }
    }

    // Interval tightening; returns false when some constraint is infeasible.
    static bool tighten(const std::vector<Constraint>& cs,
                        std::map<AVar, std::pair<std::int64_t, std::int64_t>>& box) {
        auto lo = [&](AVar v) { return box.count(v) ? box[v].first : -kInfinity; };
        auto hi = [&](AVar v) { return box.count(v) ? box[v].second : kInfinity; };
        for (int round = 0; round < 64; ++round) {
            bool changed = false;
            for (const auto& c : cs) {
                // For each var: c_j x_j >= -k - sum_{i != j} c_i x_i; use the
                // max of the other side obtained from current bounds.
                for (auto [vj, cj] : c.t.coeffs) {
                    std::int64_t rest_max = c.t.constant, rest_min = c.t.constant;
                    bool unbounded_max = false, unbounded_min = false;
                    for (auto [vi, ci] : c.t.coeffs) {
                        if (vi == vj) continue;
                        std::int64_t l = lo(vi), h = hi(vi);
                        std::int64_t up = ci >= 0 ? h : l;
                        std::int64_t dn = ci >= 0 ? l : h;
                        if (up >= kInfinity || up <= -kInfinity) unbounded_max = true;
                        else rest_max += ci * up;
                        if (dn >= kInfinity || dn <= -kInfinity) unbounded_min = true;
                        else rest_min += ci * dn;
                    }
                    auto sane = [](std::int64_t b) { return b > -kInfinity / 2 && b < kInfinity / 2; };
                    // c.t >= 0 (or = 0): cj*xj >= -rest_max  => bound on xj
                    if (!unbounded_max) {
                        if (cj > 0) {
                            std::int64_t b = ceil_div(-rest_max, cj);
                            if (sane(b) && b > lo(vj)) { box[vj] = {b, hi(vj)}; changed = true; }
                        } else {
                            std::int64_t b = floor_div(rest_max, -cj);
                            if (sane(b) && b < hi(vj)) { box[vj] = {lo(vj), b}; changed = true; }
                        }
                    }
                    if (c.is_eq && !unbounded_min) {
                        // also cj*xj <= -rest_min
                        if (cj > 0) {
                            std::int64_t b = floor_div(-rest_min, cj);
                            if (sane(b) && b < hi(vj)) { box[vj] = {lo(vj), b}; changed = true; }
                        } else {
                            std::int64_t b = ceil_div(rest_min, -cj);
                            if (sane(b) && b > lo(vj)) { box[vj] = {b, hi(vj)}; changed = true; }
                        }
                    }
                    if (box.count(vj) && box[vj].first > box[vj].second) return false;
                }
                // Pure constant check.
                if (c.t.coeffs.empty()) {
                    if (c.is_eq ? c.t.constant != 0 : c.t.constant < 0) return false;
                }
            }
            if (!changed) break;
        }
        return true;
    }

    // Rational feasibility by Fourier-Motzkin elimination (exact, smallish).
    static bool rationally_feasible(std::vector<Constraint> cs) {
        // Treat equalities as two inequalities.
        std::vector<LinTerm> ineqs;
        for (auto& c : cs) {
            ineqs.push_back(c.t);
            if (c.is_eq) ineqs.push_back(c.t.scaled(-1));
        }
        std::vector<AVar> vars;
        for (const auto& t : ineqs)
            for (auto [v, c] : t.coeffs)
                if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
        for (AVar v : vars) {
            if (ineqs.size() > 4000) return true;   // give up => "feasible" (sound)
            std::vector<LinTerm> pos, neg, rest;
            for (auto& t : ineqs) {
                std::int64_t c = t.coeff_of(v);
                if (c > 0) pos.push_back(t);
                else if (c < 0) neg.push_back(t);
                else rest.push_back(t);
            }
            for (const auto& p : pos)
                for (const auto& n : neg) {
                    std::int64_t cp = p.coeff_of(v), cn = -n.coeff_of(v);
                    LinTerm combo = p.scaled(cn);
                    combo.add(n.scaled(cp));
                    rest.push_back(std::move(combo));
                }
            ineqs = std::move(rest);
        }
        for (const auto& t : ineqs)
            if (t.constant < 0) return false;
        return true;
    }

    SatVerdict decide(std::vector<Constraint> cs, std::map<AVar, std::int64_t>& model) {
        if (*budget == 0) return SatVerdict::Unknown;
        --*budget;
        bool infeasible = false;
        if (!propagate_equalities(cs, elims, infeasible)) {
            // Equalities without unit coefficients left: keep them as
            // inequality pairs and let branching take over.
            std::vector<Constraint> expanded;
            for (auto& c : cs) {
                if (c.is_eq) {
                    expanded.push_back({c.t, false});
                    expanded.push_back({c.t.scaled(-1), false});
                } else {
                    expanded.push_back(c);
                }
            }
            cs = std::move(expanded);
        }
        if (infeasible) return SatVerdict::Unsat;

        // Promote inequality pairs t>=0, -t>=0 back to equalities when they
        // appear (may re-enable elimination with new unit coefficients).
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (cs[i].is_eq) continue;
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                if (cs[j].is_eq) continue;
                LinTerm sum = cs[i].t;
                sum.add(cs[j].t);
                if (sum.coeffs.empty() && sum.constant == 0) {
                    cs[i].is_eq = true;
                    cs.erase(cs.begin() + static_cast<long>(j));
                    bool inf2 = false;
                    if (propagate_equalities(cs, elims, inf2)) {
                        if (inf2) return SatVerdict::Unsat;
                    }
                    break;
                }
            }
        }

        std::vector<AVar> vars;
        for (const auto& c : cs)
            for (auto [v, k] : c.t.coeffs)
                if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
        if (vars.empty()) {
            for (const auto& c : cs)
                if (c.is_eq ? c.t.constant != 0 : c.t.constant < 0) return SatVerdict::Unsat;
            return SatVerdict::Sat;
        }

        std::map<AVar, std::pair<std::int64_t, std::int64_t>> box;
        if (!tighten(cs, box)) return SatVerdict::Unsat;

        bool all_bounded = true;
        for (AVar v : vars) {
            if (!box.count(v) || box[v].first <= -kInfinity || box[v].second >= kInfinity) {
                all_bounded = false;
                break;
            }
        }
        if (!all_bounded && !rationally_feasible(cs)) return SatVerdict::Unsat;

        // Branch: small boxes first for unbounded variables.
        const std::int64_t kBoxes[] = {16, 256};
        for (std::int64_t b : kBoxes) {
            auto trial = box;
            for (AVar v : vars) {
                std::int64_t lo = trial.count(v) ? trial[v].first : -kInfinity;
                std::int64_t hi = trial.count(v) ? trial[v].second : kInfinity;
                trial[v] = {std::max(lo, -b), std::min(hi, b)};
                if (trial[v].first > trial[v].second) trial[v] = {1, 0};   // empty
            }
            SatVerdict v = branch(cs, trial, vars, model);
            if (v == SatVerdict::Sat) return v;
            if (v == SatVerdict::Unknown) return v;
            if (all_bounded) {
                bool covered = true;
                for (AVar var : vars)
                    if (box[var].first < -b || box[var].second > b) covered = false;
                if (covered) return SatVerdict::Unsat;
            }
        }
        if (all_bounded) return branch(cs, box, vars, model);
        return SatVerdict::Unknown;   // unbounded, rationally feasible, no small witness
    }

    SatVerdict branch(const std::vector<Constraint>& cs,
                      std::map<AVar, std::pair<std::int64_t, std::int64_t>> box,
                      std::vector<AVar> vars, std::map<AVar, std::int64_t>& model) {
        if (*budget == 0) return SatVerdict::Unknown;
        --*budget;
        if (!tighten(cs, box)) return SatVerdict::Unsat;
        // Pick narrowest unfixed var.
        AVar pick = 0;
        std::int64_t width = -1;
        for (AVar v : vars) {
            if (!box.count(v)) box[v] = {-kInfinity, kInfinity};
            std::int64_t w = box[v].second - box[v].first;
            if (w < 0) return SatVerdict::Unsat;
            if (width < 0 || w < width) {
                width = w;
                pick = v;
            }
        }
        if (width < 0) width = 0;
        if (vars.empty()) {
            for (const auto& c : cs)
                if (c.is_eq ? c.t.constant != 0 : c.t.constant < 0) return SatVerdict::Unsat;
            return SatVerdict::Sat;
        }
        std::vector<AVar> rest;
        for (AVar v : vars)
            if (v != pick) rest.push_back(v);
        for (std::int64_t val = box[pick].first; val <= box[pick].second; ++val) {
            if (*budget == 0) return SatVerdict::Unknown;
            std::vector<Constraint> sub;
            sub.reserve(cs.size());
            bool bad = false;
            for (const auto& c : cs) {
                Constraint nc = c;
                std::int64_t k = nc.t.coeff_of(pick);
                if (k != 0) {
                    nc.t.add(LinTerm::of_var(pick, k), -1);
                    nc.t.constant += k * val;
                }
                if (nc.t.coeffs.empty()) {
                    if (nc.is_eq ? nc.t.constant != 0 : nc.t.constant < 0) {
                        bad = true;
                        break;
                    }
                } else {
                    sub.push_back(std::move(nc));
                }
            }
            if (bad) continue;
            auto sub_box = box;
            sub_box.erase(pick);
            SatVerdict v = rest.empty() && sub.empty()
                               ? SatVerdict::Sat
                               : branch(sub, std::move(sub_box), rest, model);
            if (v == SatVerdict::Sat) {
                model[pick] = val;
                return v;
            }
            if (v == SatVerdict::Unknown) return v;
        }
        return SatVerdict::Unsat;
    }
};

// Lazy DNF exploration: descend through And/Or/Exists accumulating atoms.
struct DnfExplorer {
    std::uint64_t budget;
    bool saw_unknown = false;

    SatVerdict explore(const Arith& f, std::map<AVar, std::int64_t>& model) {
        std::vector<Constraint> atoms;
        SatVerdict v = walk({f}, 0, atoms, model);
        if (v == SatVerdict::Sat) return v;
        return saw_unknown || budget == 0 ? SatVerdict::Unknown : SatVerdict::Unsat;
    }

private:
    // conj[i..] remain to be expanded; atoms collected so far.
    SatVerdict walk(std::vector<Arith> conj, std::size_t idx, std::vector<Constraint>& atoms,
                    std::map<AVar, std::int64_t>& model) {
        if (budget == 0) {
            saw_unknown = true;
            return SatVerdict::Unsat;
        }
        for (; idx < conj.size(); ++idx) {
            const Arith& f = conj[idx];
            switch (f->kind) {
                case ArithKind::True: continue;
                case ArithKind::False: return SatVerdict::Unsat;
                case ArithKind::Atom:
                    atoms.push_back({f->lin, f->op == CmpOp::Eq});
                    continue;
                case ArithKind::And: {
                    std::vector<Arith> next = conj;
                    next.erase(next.begin() + static_cast<long>(idx));
                    next.insert(next.begin() + static_cast<long>(idx), f->kids.begin(), f->kids.end());
                    std::size_t mark = atoms.size();
                    SatVerdict v = walk(std::move(next), idx, atoms, model);
                    if (v != SatVerdict::Sat) atoms.resize(mark);
                    return v;
                }
                case ArithKind::Or: {
                    for (const auto& kid : f->kids) {
                        std::vector<Arith> next = conj;
                        next[idx] = kid;
                        std::size_t mark = atoms.size();
                        SatVerdict v = walk(next, idx, atoms, model);
                        if (v == SatVerdict::Sat) return v;
                        atoms.resize(mark);
                        if (budget == 0) {
                            saw_unknown = true;
                            return SatVerdict::Unsat;
                        }
                    }
                    return SatVerdict::Unsat;
                }
                case ArithKind::Exists: {
                    // Bound variables are globally unique: drop the binder.
                    std::vector<Arith> next = conj;
                    next[idx] = f->body;
                    std::size_t mark = atoms.size();
                    SatVerdict v = walk(std::move(next), idx, atoms, model);
                    if (v != SatVerdict::Sat) atoms.resize(mark);
                    return v;
                }
                case ArithKind::Pred:
                    throw Error("presburger_sat: predicate application not inlined");
            }
        }
        ConjunctSolver solver{&budget, {}};
        std::map<AVar, std::int64_t> m;
        SatVerdict v = solver.solve(atoms, m);
        if (v == SatVerdict::Unknown) {
            saw_unknown = true;
            return SatVerdict::Unsat;
        }
        if (v == SatVerdict::Sat) model = std::move(m);
        return v;
    }
};

}  // namespace

PresburgerResult presburger_sat(const Arith& f, PresburgerBudget budget) {
    PresburgerResult res;
    DnfExplorer ex{budget.max_nodes, false};
    std::map<AVar, std::int64_t> model;
    res.verdict = ex.explore(f, model);
    if (res.verdict == SatVerdict::Sat) {
        std::vector<AVar> vars;
        collect_arith_vars(f, vars);
        for (AVar v : vars)
            if (!model.count(v)) model[v] = 0;
        res.model = std::move(model);
    }
    return res;
}

bool arith_eval(const Arith& f, const std::map<AVar, std::int64_t>& model) {
    switch (f->kind) {
        case ArithKind::True: return true;
        case ArithKind::False: return false;
        case ArithKind::Atom: {
            std::int64_t v = f->lin.constant;
            for (auto [var, c] : f->lin.coeffs) {
                auto it = model.find(var);
                v += c * (it == model.end() ? 0 : it->second);
            }
            return f->op == CmpOp::Eq ? v == 0 : v >= 0;
        }
        case ArithKind::And:
            for (const auto& k : f->kids)
                if (!arith_eval(k, model)) return false;
            return true;
        case ArithKind::Or:
            for (const auto& k : f->kids)
                if (arith_eval(k, model)) return true;
            return false;
        case ArithKind::Exists:
            return arith_eval(f->body, model);
        case ArithKind::Pred:
            throw Error("arith_eval: predicate application");
    }
    return false;
}

// ── LIA script export / parse-back ───────────────────────────────────────

namespace {

void lin_sexpr(const Session& s, const LinTerm& t, std::ostream& os) {
    std::vector<std::string> parts;
    for (auto [v, c] : t.coeffs) {
        if (c == 1) parts.push_back(s.avars.name(v));
        else if (c < 0) parts.push_back("(* (- " + std::to_string(-c) + ") " + s.avars.name(v) + ")");
        else parts.push_back("(* " + std::to_string(c) + " " + s.avars.name(v) + ")");
    }
    if (t.constant != 0 || parts.empty()) {
        parts.push_back(t.constant < 0 ? "(- " + std::to_string(-t.constant) + ")"
                                       : std::to_string(t.constant));
    }
    if (parts.size() == 1) {
        os << parts[0];
    } else {
        os << "(+";
        for (const auto& p : parts) os << " " << p;
        os << ")";
    }
}

void arith_sexpr(const Session& s, const Arith& f, std::ostream& os) {
    switch (f->kind) {
        case ArithKind::True: os << "true"; return;
        case ArithKind::False: os << "false"; return;
        case ArithKind::Atom:
            os << (f->op == CmpOp::Eq ? "(= " : "(>= ");
            lin_sexpr(s, f->lin, os);
            os << " 0)";
            return;
        case ArithKind::And:
        case ArithKind::Or:
            os << (f->kind == ArithKind::And ? "(and" : "(or");
            for (const auto& k : f->kids) {
                os << " ";
                arith_sexpr(s, k, os);
            }
            os << ")";
            return;
        case ArithKind::Exists:
            os << "(exists (";
            for (std::size_t i = 0; i < f->bound.size(); ++i) {
                if (i) os << " ";
                os << "(" << s.avars.name(f->bound[i]) << " Int)";
            }
            os << ") ";
            arith_sexpr(s, f->body, os);
            os << ")";
            return;
        case ArithKind::Pred:
            throw Error("export_lia: predicate application not inlined");
    }
}

}  // namespace

std::string export_lia(const Session& s, const Arith& f) {
    std::vector<AVar> vars;
    collect_arith_vars(f, vars);
    std::vector<AVar> bound;
    std::function<void(const Arith&)> collect_bound = [&](const Arith& a) {
        if (!a) return;
        if (a->kind == ArithKind::Exists)
            bound.insert(bound.end(), a->bound.begin(), a->bound.end());
        for (const auto& k : a->kids) collect_bound(k);
        if (a->body) collect_bound(a->body);
    };
    collect_bound(f);
    std::vector<std::string> decls;
    for (AVar v : vars)
        if (std::find(bound.begin(), bound.end(), v) == bound.end())
            decls.push_back(s.avars.name(v));
    std::sort(decls.begin(), decls.end());
    std::ostringstream os;
    os << "(set-logic LIA)\n";
    for (const auto& d : decls) os << "(declare-const " << d << " Int)\n";
    os << "(assert ";
    arith_sexpr(s, f, os);
    os << ")\n(check-sat)\n";
    return os.str();
}

// Minimal s-expression reader shared with nothing else; the frontend has its
// own SMT-LIB reader with positions.
namespace {

struct Sexpr {
    std::string atom;
    std::vector<Sexpr> kids;
    bool is_atom() const { return kids.empty() && !atom.empty(); }
};

struct SexprReader {
    const std::string& text;
    std::size_t pos = 0;

    void skip() {
        while (pos < text.size()) {
            if (std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
            else if (text[pos] == ';') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else break;
        }
    }
    bool done() {
        skip();
        return pos >= text.size();
    }
    Sexpr next() {
        skip();
        if (pos >= text.size()) throw Error("unexpected end of LIA script");
        if (text[pos] == '(') {
            ++pos;
            Sexpr s;
            s.atom = "()";
            for (;;) {
                skip();
                if (pos >= text.size()) throw Error("unbalanced parenthesis");
                if (text[pos] == ')') {
                    ++pos;
                    break;
                }
                s.kids.push_back(next());
            }
            s.atom.clear();
            return s;
        }
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        Sexpr s;
        s.atom = text.substr(start, pos - start);
        return s;
    }
};

LinTerm parse_lin(Session& s, const Sexpr& e);

LinTerm parse_lin_atom(Session& s, const Sexpr& e) {
    if (e.is_atom()) {
        const std::string& a = e.atom;
        if (!a.empty() && (std::isdigit(static_cast<unsigned char>(a[0])) || a[0] == '-'))
            return LinTerm::of_const(std::stoll(a));
        return LinTerm::of_var(s.avars.intern_int(a));
    }
    return parse_lin(s, e);
}

LinTerm parse_lin(Session& s, const Sexpr& e) {
    if (e.is_atom()) return parse_lin_atom(s, e);
    const std::string& op = e.kids.at(0).atom;
    if (op == "+") {
        LinTerm t;
        for (std::size_t i = 1; i < e.kids.size(); ++i) t.add(parse_lin_atom(s, e.kids[i]));
        return t;
    }
    if (op == "-") {
        if (e.kids.size() == 2) return parse_lin_atom(s, e.kids[1]).scaled(-1);
        LinTerm t = parse_lin_atom(s, e.kids[1]);
        for (std::size_t i = 2; i < e.kids.size(); ++i) t.add(parse_lin_atom(s, e.kids[i]), -1);
        return t;
    }
    if (op == "*") {
        LinTerm a = parse_lin_atom(s, e.kids.at(1));
        LinTerm b = parse_lin_atom(s, e.kids.at(2));
        if (a.is_const()) return b.scaled(a.constant);
        if (b.is_const()) return a.scaled(b.constant);
        throw Error("nonlinear term in LIA script");
    }
    throw Error("bad arithmetic operator: " + op);
}

Arith parse_formula(Session& s, const Sexpr& e) {
    if (e.is_atom()) {
        if (e.atom == "true") return a_true();
        if (e.atom == "false") return a_false();
        throw Error("bad LIA formula atom: " + e.atom);
    }
    const std::string& op = e.kids.at(0).atom;
    if (op == "and" || op == "or") {
        std::vector<Arith> kids;
        for (std::size_t i = 1; i < e.kids.size(); ++i) kids.push_back(parse_formula(s, e.kids[i]));
        return op == "and" ? a_and(std::move(kids)) : a_or(std::move(kids));
    }
    if (op == "exists") {
        std::vector<AVar> vars;
        for (const auto& b : e.kids.at(1).kids) vars.push_back(s.avars.intern_int(b.kids.at(0).atom));
        return a_exists(std::move(vars), parse_formula(s, e.kids.at(2)));
    }
    if (op == "=" || op == ">=" || op == ">" || op == "<=" || op == "<") {
        LinTerm l = parse_lin(s, e.kids.at(1));
        LinTerm r = parse_lin(s, e.kids.at(2));
        if (op == "=") return a_eq(std::move(l), std::move(r));
        if (op == ">=") return a_ge(std::move(l), std::move(r));
        if (op == ">") return a_gt(std::move(l), std::move(r));
        if (op == "<=") return a_le(std::move(l), std::move(r));
        return a_lt(std::move(l), std::move(r));
    }
    throw Error("bad LIA operator: " + op);
}

}  // namespace

Arith parse_lia(Session& s, const std::string& text) {
    SexprReader reader{text, 0};
    Arith formula = a_true();
    while (!reader.done()) {
        Sexpr e = reader.next();
        if (e.kids.empty()) continue;
        const std::string& head = e.kids.at(0).atom;
        if (head == "assert") formula = parse_formula(s, e.kids.at(1));
    }
    return formula;
}

}  // namespace kepler
