#include "cpl/syntax.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace cpl {

Name fresh_name(const Name& base, const NameSet& avoid) {
  Name n = base + "'";
  while (avoid.count(n)) n += "'";
  return n;
}

// ---------------------------------------------------------------- formulas

namespace {

Formula make_formula(FormulaKind k, unsigned i, Name n, Rational q, Formula l, Formula r) {
  auto node = std::make_shared<FormulaNode>();
  node->kind = k;
  node->index = i;
  node->name = std::move(n);
  node->q = std::move(q);
  node->lhs = std::move(l);
  node->rhs = std::move(r);
  return node;
}

}  // namespace

Formula atom(unsigned index, const Name& name) {
  return make_formula(FormulaKind::Atom, index, name, 0, nullptr, nullptr);
}
Formula neg(Formula a) { return make_formula(FormulaKind::Neg, 0, "", 0, std::move(a), nullptr); }
Formula conj(Formula a, Formula b) {
  return make_formula(FormulaKind::And, 0, "", 0, std::move(a), std::move(b));
}
Formula disj(Formula a, Formula b) {
  return make_formula(FormulaKind::Or, 0, "", 0, std::move(a), std::move(b));
}
Formula quant(FormulaKind kind, const Rational& q, const Name& name, Formula body) {
  if (!in_unit_interval(q)) throw Error("rational out of [0,1]");
  return make_formula(kind, 0, name, q, std::move(body), nullptr);
}
Formula cq(const Rational& q, const Name& name, Formula body) {
  return quant(FormulaKind::CQ, q, name, std::move(body));
}
Formula dq(const Rational& q, const Name& name, Formula body) {
  return quant(FormulaKind::DQ, q, name, std::move(body));
}

bool is_quantifier(const Formula& a) {
  return a->kind == FormulaKind::CQ || a->kind == FormulaKind::DQ;
}

bool same(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Atom:
      return a->index == b->index && a->name == b->name;
    case FormulaKind::Neg:
      return same(a->lhs, b->lhs);
    case FormulaKind::And:
    case FormulaKind::Or:
      return same(a->lhs, b->lhs) && same(a->rhs, b->rhs);
    case FormulaKind::CQ:
    case FormulaKind::DQ:
      return a->q == b->q && a->name == b->name && same(a->lhs, b->lhs);
  }
  return false;
}

namespace {

void collect_free_atoms(const Formula& a, NameSet& bound, AtomSet& out) {
  switch (a->kind) {
    case FormulaKind::Atom:
      if (!bound.count(a->name)) out.insert({a->name, a->index});
      return;
    case FormulaKind::Neg:
      collect_free_atoms(a->lhs, bound, out);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      collect_free_atoms(a->lhs, bound, out);
      collect_free_atoms(a->rhs, bound, out);
      return;
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      bool fresh = bound.insert(a->name).second;
      collect_free_atoms(a->lhs, bound, out);
      if (fresh) bound.erase(a->name);
      return;
    }
  }
}

}  // namespace

AtomSet free_atoms(const Formula& a) {
  NameSet bound;
  AtomSet out;
  collect_free_atoms(a, bound, out);
  return out;
}

NameSet free_names(const Formula& a) {
  NameSet out;
  for (const auto& at : free_atoms(a)) out.insert(at.name);
  return out;
}

NameSet all_names(const Formula& a) {
  NameSet out;
  std::function<void(const Formula&)> go = [&](const Formula& f) {
    if (f->kind == FormulaKind::Atom || is_quantifier(f)) out.insert(f->name);
    if (f->lhs) go(f->lhs);
    if (f->rhs) go(f->rhs);
  };
  go(a);
  return out;
}

std::size_t size(const Formula& a) {
  std::size_t n = 1;
  if (a->lhs) n += size(a->lhs);
  if (a->rhs) n += size(a->rhs);
  return n;
}

std::optional<unsigned> max_free_index(const Formula& f, const Name& a) {
  std::optional<unsigned> best;
  for (const auto& at : free_atoms(f))
    if (at.name == a && (!best || at.index > *best)) best = at.index;
  return best;
}

Formula rename_free(const Formula& f, const Name& from, const Name& to) {
  switch (f->kind) {
    case FormulaKind::Atom:
      return f->name == from ? atom(f->index, to) : f;
    case FormulaKind::Neg:
      return neg(rename_free(f->lhs, from, to));
    case FormulaKind::And:
      return conj(rename_free(f->lhs, from, to), rename_free(f->rhs, from, to));
    case FormulaKind::Or:
      return disj(rename_free(f->lhs, from, to), rename_free(f->rhs, from, to));
    case FormulaKind::CQ:
    case FormulaKind::DQ:
      if (f->name == from) return f;
      return quant(f->kind, f->q, f->name, rename_free(f->lhs, from, to));
  }
  return f;
}

Formula alpha_rename_bound(const Formula& a) {
  NameSet taken = free_names(a);
  NameSet avoid = all_names(a);
  std::function<Formula(const Formula&, const std::map<Name, Name>&)> go =
      [&](const Formula& f, const std::map<Name, Name>& env) -> Formula {
    switch (f->kind) {
      case FormulaKind::Atom: {
        auto it = env.find(f->name);
        return it == env.end() ? f : atom(f->index, it->second);
      }
      case FormulaKind::Neg:
        return neg(go(f->lhs, env));
      case FormulaKind::And:
        return conj(go(f->lhs, env), go(f->rhs, env));
      case FormulaKind::Or:
        return disj(go(f->lhs, env), go(f->rhs, env));
      case FormulaKind::CQ:
      case FormulaKind::DQ: {
        Name n = f->name;
        if (taken.count(n)) {
          NameSet all = avoid;
          all.insert(taken.begin(), taken.end());
          n = fresh_name(f->name, all);
        }
        taken.insert(n);
        avoid.insert(n);
        auto inner = env;
        inner[f->name] = n;
        return quant(f->kind, f->q, n, go(f->lhs, inner));
      }
    }
    return f;
  };
  return go(a, {});
}

// ------------------------------------------------------- boolean formulas

namespace {

BoolFormula make_bool(BoolKind k, unsigned i, Name n, BoolFormula l, BoolFormula r) {
  auto node = std::make_shared<BoolNode>();
  node->kind = k;
  node->index = i;
  node->name = std::move(n);
  node->lhs = std::move(l);
  node->rhs = std::move(r);
  return node;
}

}  // namespace

BoolFormula bvar(unsigned index, const Name& name) {
  return make_bool(BoolKind::Var, index, name, nullptr, nullptr);
}
BoolFormula btop() {
  static const BoolFormula t = make_bool(BoolKind::Top, 0, "", nullptr, nullptr);
  return t;
}
BoolFormula bbot() {
  static const BoolFormula f = make_bool(BoolKind::Bot, 0, "", nullptr, nullptr);
  return f;
}
BoolFormula bnot(BoolFormula a) { return make_bool(BoolKind::Neg, 0, "", std::move(a), nullptr); }
BoolFormula band(BoolFormula a, BoolFormula b) {
  return make_bool(BoolKind::And, 0, "", std::move(a), std::move(b));
}
BoolFormula bor(BoolFormula a, BoolFormula b) {
  return make_bool(BoolKind::Or, 0, "", std::move(a), std::move(b));
}

BoolFormula big_or(const std::vector<BoolFormula>& parts) {
  if (parts.empty()) return bbot();
  BoolFormula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = bor(acc, parts[i]);
  return acc;
}

BoolFormula big_and(const std::vector<BoolFormula>& parts) {
  if (parts.empty()) return btop();
  BoolFormula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = band(acc, parts[i]);
  return acc;
}

BoolFormula simplify(const BoolFormula& b) {
  switch (b->kind) {
    case BoolKind::Var:
    case BoolKind::Top:
    case BoolKind::Bot:
      return b;
    case BoolKind::Neg: {
      auto a = simplify(b->lhs);
      if (a->kind == BoolKind::Top) return bbot();
      if (a->kind == BoolKind::Bot) return btop();
      return a == b->lhs ? b : bnot(a);
    }
    case BoolKind::And: {
      auto l = simplify(b->lhs), r = simplify(b->rhs);
      if (l->kind == BoolKind::Bot || r->kind == BoolKind::Bot) return bbot();
      if (l->kind == BoolKind::Top) return r;
      if (r->kind == BoolKind::Top) return l;
      return (l == b->lhs && r == b->rhs) ? b : band(l, r);
    }
    case BoolKind::Or: {
      auto l = simplify(b->lhs), r = simplify(b->rhs);
      if (l->kind == BoolKind::Top || r->kind == BoolKind::Top) return btop();
      if (l->kind == BoolKind::Bot) return r;
      if (r->kind == BoolKind::Bot) return l;
      return (l == b->lhs && r == b->rhs) ? b : bor(l, r);
    }
  }
  return b;
}

bool same(const BoolFormula& a, const BoolFormula& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case BoolKind::Var:
      return a->index == b->index && a->name == b->name;
    case BoolKind::Top:
    case BoolKind::Bot:
      return true;
    case BoolKind::Neg:
      return same(a->lhs, b->lhs);
    case BoolKind::And:
    case BoolKind::Or:
      return same(a->lhs, b->lhs) && same(a->rhs, b->rhs);
  }
  return false;
}

AtomSet atoms(const BoolFormula& b) {
  AtomSet out;
  std::function<void(const BoolFormula&)> go = [&](const BoolFormula& f) {
    if (f->kind == BoolKind::Var) out.insert({f->name, f->index});
    if (f->lhs) go(f->lhs);
    if (f->rhs) go(f->rhs);
  };
  go(b);
  return out;
}

NameSet free_names(const BoolFormula& b) {
  NameSet out;
  for (const auto& at : atoms(b)) out.insert(at.name);
  return out;
}

BoolFormula rename_name(const BoolFormula& b, const Name& from, const Name& to) {
  switch (b->kind) {
    case BoolKind::Var:
      return b->name == from ? bvar(b->index, to) : b;
    case BoolKind::Top:
    case BoolKind::Bot:
      return b;
    case BoolKind::Neg:
      return bnot(rename_name(b->lhs, from, to));
    case BoolKind::And:
      return band(rename_name(b->lhs, from, to), rename_name(b->rhs, from, to));
    case BoolKind::Or:
      return bor(rename_name(b->lhs, from, to), rename_name(b->rhs, from, to));
  }
  return b;
}

// ------------------------------------------------------------- sequents

bool same(const LabelledFormula& a, const LabelledFormula& b) {
  return a.dir == b.dir && same(a.label, b.label) && same(a.body, b.body);
}

bool same(const Sequent& a, const Sequent& b) {
  if (a.names != b.names || a.succedent.size() != b.succedent.size()) return false;
  for (std::size_t i = 0; i < a.succedent.size(); ++i)
    if (!same(a.succedent[i], b.succedent[i])) return false;
  return true;
}

unsigned cn(const Formula& a) {
  switch (a->kind) {
    case FormulaKind::Atom:
      return 1;
    case FormulaKind::Neg:
    case FormulaKind::CQ:
    case FormulaKind::DQ:
      return 1 + cn(a->lhs);
    case FormulaKind::And:
    case FormulaKind::Or:
      return 1 + cn(a->lhs) + cn(a->rhs);
  }
  return 0;
}

unsigned cn(const LabelledFormula& l) { return cn(l.body); }

unsigned cn(const Sequent& s) {
  unsigned n = 0;
  for (const auto& l : s.succedent) n += cn(l);
  return n;
}

// ----------------------------------------------------------------- terms

namespace {

Term make_term(TermKind k, Name id, unsigned i, Term l, Term r) {
  auto node = std::make_shared<TermNode>();
  node->kind = k;
  node->id = std::move(id);
  node->index = i;
  node->lhs = std::move(l);
  node->rhs = std::move(r);
  return node;
}

void key_rec(const Term& t, std::vector<Name>& vars, std::vector<Name>& names, std::string& out) {
  auto find = [](const std::vector<Name>& stack, const Name& n) -> long {
    for (std::size_t i = stack.size(); i-- > 0;)
      if (stack[i] == n) return static_cast<long>(stack.size() - 1 - i);
    return -1;
  };
  switch (t->kind) {
    case TermKind::Var: {
      long k = find(vars, t->id);
      out += k < 0 ? "$" + t->id : "#" + std::to_string(k);
      out += ' ';
      return;
    }
    case TermKind::Lam:
      out += "(L ";
      vars.push_back(t->id);
      key_rec(t->lhs, vars, names, out);
      vars.pop_back();
      out += ") ";
      return;
    case TermKind::App:
      out += "(A ";
      key_rec(t->lhs, vars, names, out);
      key_rec(t->rhs, vars, names, out);
      out += ") ";
      return;
    case TermKind::Choice: {
      long k = find(names, t->id);
      out += "(C ";
      out += k < 0 ? "$" + t->id : "@" + std::to_string(k);
      out += " " + std::to_string(t->index) + " ";
      key_rec(t->lhs, vars, names, out);
      key_rec(t->rhs, vars, names, out);
      out += ") ";
      return;
    }
    case TermKind::Nu:
      out += "(N ";
      names.push_back(t->id);
      key_rec(t->lhs, vars, names, out);
      names.pop_back();
      out += ") ";
      return;
  }
}

}  // namespace

Term var(const Name& x) { return make_term(TermKind::Var, x, 0, nullptr, nullptr); }
Term lam(const Name& x, Term body) { return make_term(TermKind::Lam, x, 0, std::move(body), nullptr); }
Term app(Term f, Term a) { return make_term(TermKind::App, "", 0, std::move(f), std::move(a)); }
Term choice(Term l, Term r, const Name& a, unsigned index) {
  return make_term(TermKind::Choice, a, index, std::move(l), std::move(r));
}
Term nu(const Name& a, Term body) { return make_term(TermKind::Nu, a, 0, std::move(body), nullptr); }

Term omega_term() {
  auto delta = lam("x", app(var("x"), var("x")));
  return app(delta, delta);
}

Term id_term() { return lam("x", var("x")); }

std::string alpha_key(const Term& t) {
  std::vector<Name> vars, names;
  std::string out;
  key_rec(t, vars, names, out);
  return out;
}

bool alpha_equal(const Term& a, const Term& b) { return a == b || alpha_key(a) == alpha_key(b); }

NameSet free_vars(const Term& t) {
  switch (t->kind) {
    case TermKind::Var:
      return {t->id};
    case TermKind::Lam: {
      auto s = free_vars(t->lhs);
      s.erase(t->id);
      return s;
    }
    case TermKind::Nu:
      return free_vars(t->lhs);
    case TermKind::App:
    case TermKind::Choice: {
      auto s = free_vars(t->lhs);
      auto r = free_vars(t->rhs);
      s.insert(r.begin(), r.end());
      return s;
    }
  }
  return {};
}

NameSet free_names(const Term& t) {
  switch (t->kind) {
    case TermKind::Var:
      return {};
    case TermKind::Lam:
      return free_names(t->lhs);
    case TermKind::Nu: {
      auto s = free_names(t->lhs);
      s.erase(t->id);
      return s;
    }
    case TermKind::App: {
      auto s = free_names(t->lhs);
      auto r = free_names(t->rhs);
      s.insert(r.begin(), r.end());
      return s;
    }
    case TermKind::Choice: {
      auto s = free_names(t->lhs);
      auto r = free_names(t->rhs);
      s.insert(r.begin(), r.end());
      s.insert(t->id);
      return s;
    }
  }
  return {};
}

NameSet all_identifiers(const Term& t) {
  NameSet out;
  std::function<void(const Term&)> go = [&](const Term& u) {
    if (!u->id.empty()) out.insert(u->id);
    if (u->lhs) go(u->lhs);
    if (u->rhs) go(u->rhs);
  };
  go(t);
  return out;
}

std::size_t size(const Term& t) {
  std::size_t n = 1;
  if (t->lhs) n += size(t->lhs);
  if (t->rhs) n += size(t->rhs);
  return n;
}

Term subst(const Term& t, const Name& x, const Term& u) {
  switch (t->kind) {
    case TermKind::Var:
      return t->id == x ? u : t;
    case TermKind::App:
      return app(subst(t->lhs, x, u), subst(t->rhs, x, u));
    case TermKind::Choice:
      return choice(subst(t->lhs, x, u), subst(t->rhs, x, u), t->id, t->index);
    case TermKind::Lam: {
      if (t->id == x) return t;
      auto fv_body = free_vars(t->lhs);
      if (!fv_body.count(x)) return t;
      auto fv_u = free_vars(u);
      if (fv_u.count(t->id)) {
        NameSet avoid = all_identifiers(t->lhs);
        auto more = all_identifiers(u);
        avoid.insert(more.begin(), more.end());
        avoid.insert(x);
        Name y = fresh_name(t->id, avoid);
        return lam(y, subst(subst(t->lhs, t->id, var(y)), x, u));
      }
      return lam(t->id, subst(t->lhs, x, u));
    }
    case TermKind::Nu: {
      if (!free_vars(t->lhs).count(x)) return t;
      auto fn_u = free_names(u);
      if (fn_u.count(t->id)) {
        NameSet avoid = all_identifiers(t->lhs);
        auto more = all_identifiers(u);
        avoid.insert(more.begin(), more.end());
        Name b = fresh_name(t->id, avoid);
        return nu(b, subst(rename_name(t->lhs, t->id, b), x, u));
      }
      return nu(t->id, subst(t->lhs, x, u));
    }
  }
  return t;
}

Term rename_var(const Term& t, const Name& from, const Name& to) {
  if (from == to) return t;
  return subst(t, from, var(to));
}

Term rename_name(const Term& t, const Name& from, const Name& to) {
  if (from == to) return t;
  switch (t->kind) {
    case TermKind::Var:
      return t;
    case TermKind::Lam:
      return lam(t->id, rename_name(t->lhs, from, to));
    case TermKind::App:
      return app(rename_name(t->lhs, from, to), rename_name(t->rhs, from, to));
    case TermKind::Choice:
      return choice(rename_name(t->lhs, from, to), rename_name(t->rhs, from, to),
                    t->id == from ? to : t->id, t->index);
    case TermKind::Nu: {
      if (t->id == from) return t;
      if (t->id == to && free_names(t->lhs).count(from)) {
        NameSet avoid = all_identifiers(t->lhs);
        avoid.insert(from);
        avoid.insert(to);
        Name b = fresh_name(t->id, avoid);
        return nu(b, rename_name(rename_name(t->lhs, t->id, b), from, to));
      }
      return nu(t->id, rename_name(t->lhs, from, to));
    }
  }
  return t;
}

// ----------------------------------------------------------------- types

Type base_type() {
  static const Type o = std::make_shared<TypeNode>();
  return o;
}

Type arrow(const Rational& q, Type arg, Type result) {
  if (!in_unit_interval(q)) throw Error("rational out of [0,1]");
  auto node = std::make_shared<TypeNode>();
  node->base = false;
  node->arg = {q, std::move(arg)};
  node->result = std::move(result);
  return node;
}

bool same(const Type& a, const Type& b) {
  if (a == b) return true;
  if (a->base || b->base) return a->base == b->base;
  return same(a->arg, b->arg) && same(a->result, b->result);
}

bool same(const QualType& a, const QualType& b) { return a.q == b.q && same(a.sigma, b.sigma); }

// ---------------------------------------------------- recorded hypotheses

Hypothesis hyp_entails(BoolFormula lhs, BoolFormula rhs) {
  Hypothesis h;
  h.kind = HypKind::Entails;
  h.lhs = std::move(lhs);
  h.rhs = std::move(rhs);
  return h;
}

Hypothesis hyp_measure(BoolFormula b, Cmp cmp, const Rational& q) {
  Hypothesis h;
  h.kind = HypKind::Measure;
  h.lhs = std::move(b);
  h.cmp = cmp;
  h.q = q;
  return h;
}

Hypothesis hyp_split(const Name& a, std::vector<SplitPart> parts) {
  Hypothesis h;
  h.kind = HypKind::Split;
  h.name = a;
  h.parts = std::move(parts);
  return h;
}

bool same(const Hypothesis& a, const Hypothesis& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case HypKind::Entails:
      return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
    case HypKind::Measure:
      return a.cmp == b.cmp && a.q == b.q && same(a.lhs, b.lhs);
    case HypKind::Split:
      if (a.name != b.name || a.parts.size() != b.parts.size()) return false;
      for (std::size_t i = 0; i < a.parts.size(); ++i)
        if (!same(a.parts[i].named, b.parts[i].named) || !same(a.parts[i].rest, b.parts[i].rest))
          return false;
      return true;
  }
  return false;
}

std::size_t size(const Derivation& d) {
  std::size_t n = 1;
  for (const auto& p : d.premises) n += size(p);
  return n;
}

const QualType* lookup(const Context& ctx, const Name& x) {
  for (std::size_t i = ctx.size(); i-- > 0;)
    if (ctx[i].x == x) return &ctx[i].type;
  return nullptr;
}

Context extend(const Context& ctx, const Name& x, const QualType& t) {
  Context out;
  for (const auto& e : ctx)
    if (e.x != x) out.push_back(e);
  out.push_back({x, t});
  return out;
}

bool same(const Judgment& a, const Judgment& b) {
  if (a.context.size() != b.context.size()) return false;
  for (std::size_t i = 0; i < a.context.size(); ++i)
    if (a.context[i].x != b.context[i].x || !same(a.context[i].type, b.context[i].type)) return false;
  return a.names == b.names && a.exponent == b.exponent && alpha_equal(a.term, b.term) &&
         same(a.label, b.label) && same(a.type, b.type);
}

}  // namespace cpl
