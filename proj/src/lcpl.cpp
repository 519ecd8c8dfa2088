#include "cpl/lcpl.hpp"

#include "cpl/textio.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace cpl {

namespace {

const Judgment& J(const TypeDerivation& d) { return d.judgment; }

bool same_context(const Context& a, const Context& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].x != b[i].x || !same(a[i].type, b[i].type)) return false;
  return true;
}

bool subset(const NameSet& a, const NameSet& b) {
  return std::all_of(a.begin(), a.end(), [&](const Name& n) { return b.count(n) > 0; });
}

NameSet domain(const Context& g) {
  NameSet out;
  for (const auto& e : g) out.insert(e.x);
  return out;
}

bool holds(const Hypothesis& h) {
  switch (h.kind) {
    case HypKind::Entails: return entails(h.lhs, h.rhs);
    case HypKind::Measure: {
      Rational m = measure(h.lhs);
      return h.cmp == Cmp::Eq ? m == h.q : h.cmp == Cmp::Ge ? m >= h.q : m < h.q;
    }
    case HypKind::Split: return true;  // checked against the premise by the rule
  }
  return false;
}

BoolFormula choice_atom(const Term& t) { return bvar(t->index, t->id); }

// Decomposition, rate and selected parts of a nu node; nullopt with a reason on failure.
struct NuData {
  ADecomposition dec;
  Rational rate;
  std::vector<SplitPart> selected;
};

std::optional<NuData> nu_data(const TypeDerivation& d, std::string& why) {
  const Judgment& j = J(d);
  const Judgment& p = J(d.premises[0]);
  const Name& a = j.term->id;
  NuData out;
  const Hypothesis* split = nullptr;
  std::optional<Rational> rate;
  for (const auto& h : d.hyps) {
    if (h.kind == HypKind::Split) split = &h;
    if (h.kind == HypKind::Measure && h.cmp == Cmp::Ge) {
      if (rate && *rate != h.q) {
        why = "measure hypotheses disagree on the rate";
        return std::nullopt;
      }
      rate = h.q;
    }
  }
  if (split) {
    if (split->name != a) {
      why = "split is over " + split->name + ", not over " + a;
      return std::nullopt;
    }
    out.dec = {a, j.names, split->parts};
    if (!is_weak_a_decomposition(out.dec, p.label)) {
      why = "recorded split is not a weak " + a + "-decomposition of the premise label";
      return std::nullopt;
    }
  } else {
    try {
      out.dec = weak_a_decompose(p.label, a, j.names);
    } catch (const Error& e) {
      why = e.what();
      return std::nullopt;
    }
  }
  if (!rate) {
    if (p.exponent > 0) rate = Rational(j.exponent / p.exponent);
    else rate = 0;
  }
  if (!in_unit_interval(*rate)) {
    why = "rate " + to_string(*rate) + " outside [0,1]";
    return std::nullopt;
  }
  if (p.exponent * *rate != j.exponent) {
    why = "exponent " + to_string(j.exponent) + " is not " + to_string(p.exponent) + " * " + to_string(*rate);
    return std::nullopt;
  }
  out.rate = *rate;
  for (const auto& part : out.dec.parts)
    if (measure(part.named) >= out.rate) out.selected.push_back(part);
  return out;
}

struct TypeChecker {
  std::string path, reason;

  bool fail(const std::string& p, const std::string& why) {
    path = p;
    reason = why;
    return false;
  }

  bool check(const TypeDerivation& d, const std::string& at) {
    const Judgment& j = J(d);
    auto need = [&](std::size_t n) {
      if (d.premises.size() != n)
        return fail(at, rule_name(d.rule) + " takes " + std::to_string(n) + " premises, got " +
                            std::to_string(d.premises.size()));
      return true;
    };
    if (!in_unit_interval(j.exponent)) return fail(at, "exponent outside [0,1]");
    for (const auto& h : d.hyps)
      if (!holds(h)) return fail(at, "hypothesis does not hold: " + print(h));
    for (std::size_t i = 0; i < d.premises.size(); ++i)
      if (!check(d.premises[i], at + "." + std::to_string(i))) return false;

    // premise shares context, names, exponent and type unless the rule says otherwise
    auto alike = [&](const TypeDerivation& p, bool type_too, bool exponent_too) {
      if (!same_context(J(p).context, j.context)) return fail(at, "premise context differs");
      if (J(p).names != j.names) return fail(at, "premise names differ");
      if (exponent_too && J(p).exponent != j.exponent) return fail(at, "premise exponent differs");
      if (type_too && !same(J(p).type, j.type)) return fail(at, "premise type differs");
      return true;
    };
    auto subject = [&](const TypeDerivation& p, const Term& t) {
      if (!alpha_equal(J(p).term, t)) return fail(at, "premise subject is not " + print(t));
      return true;
    };

    switch (d.rule) {
      case TypeRule::Bot:
        if (!need(0)) return false;
        if (satisfiable(j.label)) return fail(at, "label is satisfiable");
        if (!subset(free_vars(j.term), domain(j.context))) return fail(at, "free variable outside the context");
        if (!subset(free_names(j.term), j.names)) return fail(at, "free name outside " + print_names(j.names));
        return true;
      case TypeRule::Id: {
        if (!need(0)) return false;
        if (j.term->kind != TermKind::Var) return fail(at, "subject is not a variable");
        const QualType* s = lookup(j.context, j.term->id);
        if (!s) return fail(at, j.term->id + " is not in the context");
        if (!same(s->sigma, j.type)) return fail(at, "type differs from the context's");
        if (j.exponent > s->q) return fail(at, "exponent exceeds " + to_string(s->q));
        if (!subset(free_names(j.label), j.names)) return fail(at, "label has a name outside " + print_names(j.names));
        return true;
      }
      case TypeRule::Union:
        if (!need(2)) return false;
        for (const auto& p : d.premises)
          if (!alike(p, true, true) || !subject(p, j.term)) return false;
        if (!entails(j.label, bor(J(d.premises[0]).label, J(d.premises[1]).label)))
          return fail(at, "label does not entail the union of the premise labels");
        return true;
      case TypeRule::Lam: {
        if (!need(1)) return false;
        if (j.term->kind != TermKind::Lam) return fail(at, "subject is not an abstraction");
        if (j.type->base) return fail(at, "type is not an arrow");
        const TypeDerivation& p = d.premises[0];
        if (!same_context(J(p).context, extend(j.context, j.term->id, j.type->arg)))
          return fail(at, "premise context is not the extended context");
        if (J(p).names != j.names || J(p).exponent != j.exponent) return fail(at, "premise names or exponent differ");
        if (!same(J(p).type, j.type->result)) return fail(at, "premise type is not the arrow's result");
        if (!subject(p, j.term->lhs)) return false;
        if (!equivalent(J(p).label, j.label)) return fail(at, "premise label differs");
        return true;
      }
      case TypeRule::App: {
        if (!need(2)) return false;
        if (j.term->kind != TermKind::App) return fail(at, "subject is not an application");
        const TypeDerivation &f = d.premises[0], &u = d.premises[1];
        if (!alike(f, false, true) || !subject(f, j.term->lhs)) return false;
        if (J(f).type->base) return fail(at, "function type is not an arrow");
        if (!same(J(f).type->result, j.type)) return fail(at, "arrow result differs from the type");
        if (!alike(u, false, false) || !subject(u, j.term->rhs)) return false;
        if (J(u).exponent != J(f).type->arg.q) return fail(at, "argument exponent is not the arrow's qualifier");
        if (!same(J(u).type, J(f).type->arg.sigma)) return fail(at, "argument type differs");
        if (!entails(j.label, band(J(f).label, J(u).label)))
          return fail(at, "label does not entail the conjunction of the premise labels");
        return true;
      }
      case TypeRule::ChoiceL:
      case TypeRule::ChoiceR: {
        if (!need(1)) return false;
        if (j.term->kind != TermKind::Choice) return fail(at, "subject is not a choice");
        if (!j.names.count(j.term->id)) return fail(at, "choice name " + j.term->id + " outside the names");
        bool left = d.rule == TypeRule::ChoiceL;
        const TypeDerivation& p = d.premises[0];
        if (!alike(p, true, true) || !subject(p, left ? j.term->lhs : j.term->rhs)) return false;
        BoolFormula x = choice_atom(j.term);
        if (!entails(j.label, band(left ? x : bnot(x), J(p).label)))
          return fail(at, std::string("label does not entail ") + (left ? "" : "~") + print(x) + " & premise label");
        return true;
      }
      case TypeRule::Nu: {
        if (!need(1)) return false;
        if (j.term->kind != TermKind::Nu) return fail(at, "subject is not a generator");
        const Name& a = j.term->id;
        if (j.names.count(a)) return fail(at, "bound name " + a + " already among the names");
        const TypeDerivation& p = d.premises[0];
        NameSet inner = j.names;
        inner.insert(a);
        if (!same_context(J(p).context, j.context) || J(p).names != inner)
          return fail(at, "premise context or names differ");
        if (!same(J(p).type, j.type) || !subject(p, j.term->lhs)) return false;
        std::string why;
        auto nd = nu_data(d, why);
        if (!nd) return fail(at, why);
        std::vector<BoolFormula> rests;
        for (const auto& part : nd->selected) rests.push_back(part.rest);
        if (!entails(j.label, big_or(rests)))
          return fail(at, "label does not entail the parts of measure >= " + to_string(nd->rate));
        return true;
      }
    }
    return fail(at, "unknown rule");
  }
};

}  // namespace

CheckResult check_type_derivation(const TypeDerivation& d) {
  TypeChecker c;
  CheckResult r;
  r.ok = c.check(d, "root");
  r.path = c.path;
  r.reason = c.reason;
  return r;
}

// ----------------------------------------------------------------- surgeries

namespace {

TypeDerivation leaf(TypeRule rule, Judgment j) {
  TypeDerivation d;
  d.rule = rule;
  d.judgment = std::move(j);
  return d;
}

TypeDerivation node(TypeRule rule, Judgment j, std::vector<TypeDerivation> premises) {
  TypeDerivation d = leaf(rule, std::move(j));
  d.premises = std::move(premises);
  return d;
}

Judgment relabel(Judgment j, const BoolFormula& b) {
  j.label = simplify(b);
  return j;
}

Judgment returm(Judgment j, const Term& t) {
  j.term = t;
  return j;
}

// Nu node over p with the canonical split and the rate fixed by the exponents.
TypeDerivation make_nu(const TypeDerivation& p, const Name& a, const NameSet& names, const Rational& exponent,
                       std::optional<BoolFormula> label) {
  Rational rate = J(p).exponent > 0 ? Rational(exponent / J(p).exponent) : Rational(0);
  if (J(p).exponent == 0 && exponent != 0) throw Error("nu over a premise of exponent 0 must have exponent 0");
  ADecomposition dec = weak_a_decompose(J(p).label, a, names);
  std::vector<BoolFormula> rests;
  std::vector<Hypothesis> hyps{hyp_split(a, dec.parts)};
  for (const auto& part : dec.parts)
    if (measure(part.named) >= rate) {
      rests.push_back(part.rest);
      hyps.push_back(hyp_measure(part.named, Cmp::Ge, rate));
    }
  Judgment j = J(p);
  j.names = names;
  j.exponent = exponent;
  j.term = nu(a, J(p).term);
  j.label = simplify(label ? *label : big_or(rests));
  TypeDerivation d = node(TypeRule::Nu, j, {p});
  d.hyps = std::move(hyps);
  return d;
}

TypeDerivation map_terms(const TypeDerivation& d, const std::function<Term(const Term&)>& f) {
  TypeDerivation out = d;
  out.judgment.term = f(J(d).term);
  for (auto& p : out.premises) p = map_terms(p, f);
  return out;
}

Hypothesis rename_hyp(Hypothesis h, const Name& from, const Name& to) {
  if (h.lhs) h.lhs = rename_name(h.lhs, from, to);
  if (h.rhs) h.rhs = rename_name(h.rhs, from, to);
  if (h.name == from) h.name = to;
  for (auto& p : h.parts) {
    p.named = rename_name(p.named, from, to);
    p.rest = rename_name(p.rest, from, to);
  }
  return h;
}

// Renames a name free in d's subject everywhere in d (terms, labels, names, hypotheses).
TypeDerivation rename_derivation_name(const TypeDerivation& d, const Name& from, const Name& to) {
  TypeDerivation out = d;
  Judgment& j = out.judgment;
  j.term = rename_name(j.term, from, to);
  j.label = rename_name(j.label, from, to);
  if (j.names.erase(from)) j.names.insert(to);
  for (auto& h : out.hyps) h = rename_hyp(h, from, to);
  for (auto& p : out.premises) p = rename_derivation_name(p, from, to);
  return out;
}

NameSet derivation_names(const TypeDerivation& d) {
  NameSet out = J(d).names;
  for (const auto& n : all_identifiers(J(d).term)) out.insert(n);
  for (const auto& n : free_names(J(d).label)) out.insert(n);
  for (const auto& p : d.premises) {
    NameSet in = derivation_names(p);
    out.insert(in.begin(), in.end());
  }
  return out;
}

BoolFormula exists_name(const BoolFormula& b, const Name& a) {
  std::vector<Atom> vars;
  for (const auto& at : atoms(b))
    if (at.name == a) vars.push_back(at);
  if (vars.empty()) return b;
  std::vector<BoolFormula> cases;
  for_each_valuation(vars, [&](const Valuation& f) {
    cases.push_back(substitute(b, [&](const Atom& at) -> std::optional<bool> {
      if (at.name != a) return std::nullopt;
      return f.at(at);
    }));
  });
  return simplify(big_or(cases));
}

// Non-union, non-bottom derivations whose labels together cover d's label.
void views(const TypeDerivation& d, std::vector<TypeDerivation>& out) {
  if (d.rule == TypeRule::Union) {
    views(d.premises[0], out);
    views(d.premises[1], out);
  } else if (d.rule != TypeRule::Bot) {
    out.push_back(d);
  }
}

std::vector<TypeDerivation> views(const TypeDerivation& d) {
  std::vector<TypeDerivation> out;
  views(d, out);
  return out;
}

// A derivation of judgment j from parts whose labels cover j's label (union rules as needed).
TypeDerivation combine(std::vector<TypeDerivation> parts, const Judgment& j) {
  std::erase_if(parts, [](const TypeDerivation& p) { return !satisfiable(J(p).label); });
  if (parts.empty()) return leaf(TypeRule::Bot, j);
  if (parts.size() == 1) {
    TypeDerivation p = parts[0];
    return weaken_label(p, j.label);
  }
  TypeDerivation acc = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) {
    Judgment u = j;
    u.label = simplify(bor(J(parts[i]).label, J(acc).label));
    acc = node(TypeRule::Union, u, {parts[i], acc});
  }
  acc.judgment.label = simplify(j.label);
  return acc;
}

}  // namespace

TypeDerivation weaken_label(const TypeDerivation& d, const BoolFormula& c) {
  TypeDerivation out = d;
  switch (d.rule) {
    case TypeRule::Id:
      if (!subset(free_names(c), J(d).names)) {
        Judgment j = relabel(J(d), c);
        return node(TypeRule::Union, j, {d, d});
      }
      out.judgment = relabel(J(d), c);
      return out;
    case TypeRule::Lam:
      out.premises[0] = weaken_label(d.premises[0], c);
      out.judgment = relabel(J(d), c);
      return out;
    default: out.judgment = relabel(J(d), c); return out;
  }
}

TypeDerivation lower_exponent(const TypeDerivation& d, const Rational& r) {
  if (r > J(d).exponent) throw Error("cannot raise an exponent");
  if (r == J(d).exponent) return d;
  TypeDerivation out = d;
  out.judgment.exponent = r;
  switch (d.rule) {
    case TypeRule::Bot:
    case TypeRule::Id: return out;
    case TypeRule::Union:
      for (auto& p : out.premises) p = lower_exponent(p, r);
      return out;
    case TypeRule::Lam:
    case TypeRule::App:
    case TypeRule::ChoiceL:
    case TypeRule::ChoiceR: out.premises[0] = lower_exponent(d.premises[0], r); return out;
    case TypeRule::Nu: return make_nu(d.premises[0], J(d).term->id, J(d).names, r, J(d).label);
  }
  return out;
}

TypeDerivation add_names(const TypeDerivation& d, const NameSet& extra) {
  TypeDerivation out = d;
  out.judgment.names.insert(extra.begin(), extra.end());
  if (d.rule == TypeRule::Nu) {
    Name a = J(d).term->id;
    TypeDerivation p = d.premises[0];
    if (extra.count(a)) {
      NameSet avoid = derivation_names(d);
      avoid.insert(extra.begin(), extra.end());
      Name b = fresh_name(a, avoid);
      p = rename_derivation_name(p, a, b);
      a = b;
    }
    p = add_names(p, extra);
    return make_nu(p, a, out.judgment.names, J(d).exponent, J(d).label);
  }
  for (auto& p : out.premises) p = add_names(p, extra);
  return out;
}

TypeDerivation with_context(const TypeDerivation& d, const Context& gamma) {
  TypeDerivation out = d;
  out.judgment.context = gamma;
  for (auto& p : out.premises)
    p = with_context(p, d.rule == TypeRule::Lam ? extend(gamma, J(d).term->id, J(d).type->arg) : gamma);
  return out;
}

namespace {

Context drop(const Context& g, const Name& x) {
  Context out;
  for (const auto& e : g)
    if (e.x != x) out.push_back(e);
  return out;
}

// Contexts are left stale and fixed by the caller with with_context.
TypeDerivation subst_rec(const TypeDerivation& t, const Name& x, const TypeDerivation& u) {
  const Judgment& j = J(t);
  const Term& arg = J(u).term;
  BoolFormula both = band(j.label, J(u).label);
  TypeDerivation out = t;
  out.judgment.term = subst(j.term, x, arg);
  out.judgment.label = simplify(both);
  switch (t.rule) {
    case TypeRule::Bot: return out;
    case TypeRule::Id:
      if (j.term->id == x) return weaken_label(lower_exponent(u, j.exponent), both);
      out.judgment.label = j.label;
      return weaken_label(out, both);
    case TypeRule::Union:
      for (auto& p : out.premises) p = subst_rec(p, x, u);
      return out;
    case TypeRule::Lam: {
      Name y = j.term->id;
      if (y == x) {
        out.judgment.label = j.label;
        return weaken_label(out, both);
      }
      TypeDerivation p = t.premises[0];
      if (free_vars(arg).count(y)) {
        NameSet avoid = all_identifiers(j.term);
        for (const auto& n : all_identifiers(arg)) avoid.insert(n);
        avoid.insert(x);
        Name z = fresh_name(y, avoid);
        p = map_terms(p, [&](const Term& s) { return rename_var(s, y, z); });
        y = z;
      }
      p = subst_rec(p, x, u);
      out.premises = {p};
      out.judgment.term = lam(y, J(p).term);
      return out;
    }
    case TypeRule::App:
      out.premises = {subst_rec(t.premises[0], x, u), subst_rec(t.premises[1], x, u)};
      out.judgment.term = app(J(out.premises[0]).term, J(out.premises[1]).term);
      return out;
    case TypeRule::ChoiceL:
    case TypeRule::ChoiceR: {
      bool left = t.rule == TypeRule::ChoiceL;
      TypeDerivation p = subst_rec(t.premises[0], x, u);
      Term other = subst(left ? j.term->rhs : j.term->lhs, x, arg);
      out.premises = {p};
      out.judgment.term = left ? choice(J(p).term, other, j.term->id, j.term->index)
                               : choice(other, J(p).term, j.term->id, j.term->index);
      return out;
    }
    case TypeRule::Nu: {
      Name a = j.term->id;
      TypeDerivation p = t.premises[0];
      if (free_names(arg).count(a) || J(u).names.count(a)) {
        NameSet avoid = derivation_names(t);
        NameSet more = derivation_names(u);
        avoid.insert(more.begin(), more.end());
        Name b = fresh_name(a, avoid);
        p = rename_derivation_name(p, a, b);
        a = b;
      }
      p = subst_rec(p, x, add_names(u, {a}));
      return make_nu(p, a, j.names, j.exponent, simplify(both));
    }
  }
  return out;
}

}  // namespace

TypeDerivation substitute(const TypeDerivation& t, const Name& x, const TypeDerivation& u) {
  return with_context(subst_rec(t, x, u), drop(J(t).context, x));
}

TypeDerivation forget_name(const TypeDerivation& d, const Name& a) {
  TypeDerivation out = d;
  out.judgment.names.erase(a);
  out.judgment.label = exists_name(J(d).label, a);
  for (auto& p : out.premises) p = forget_name(p, a);
  if (d.rule == TypeRule::Nu) {
    out.judgment.names.erase(J(d).term->id);
    return make_nu(out.premises[0], J(d).term->id, out.judgment.names, J(d).exponent, out.judgment.label);
  }
  return out;
}

// ----------------------------------------------------------------- transport

namespace {

Term subterm_at(const Term& t, const std::vector<unsigned>& path, std::size_t upto) {
  Term s = t;
  for (std::size_t i = 0; i < upto; ++i) s = path[i] == 0 ? s->lhs : s->rhs;
  return s;
}

TypeDerivation choice_node(TypeRule rule, const TypeDerivation& p, const Judgment& shape, const Term& t,
                           const BoolFormula& label) {
  Judgment j = shape;
  j.term = t;
  j.label = simplify(label);
  return node(rule, j, {p});
}

// Derivations of the reduct of a view v of the redex, one per covering part. Subjects are
// rebuilt from v's own subterms so binder names stay those of the derivation.
std::vector<TypeDerivation> root_surgery(const TypeDerivation& v, const Step& s) {
  const Judgment& j = J(v);
  const Term& t = j.term;
  std::vector<TypeDerivation> out;
  auto with = [&](Judgment k, const Term& term, const BoolFormula& label) {
    k.term = term;
    k.label = simplify(label);
    return k;
  };
  auto same_choice = [](const Term& c, const Term& l, const Term& r) { return choice(l, r, c->id, c->index); };
  if (s.kind == StepKind::Beta) {
    const TypeDerivation &f = v.premises[0], &a = v.premises[1];
    for (const auto& w : views(f)) {
      TypeDerivation r = substitute(w.premises[0], J(w).term->id, a);
      out.push_back(weaken_label(r, band(J(w).label, J(a).label)));
    }
    return out;
  }
  switch (s.rule) {
    case 1: out.push_back(weaken_label(v.premises[0], j.label)); break;
    case 2:
    case 3: {
      // (t+u)+v -> t+v  and  t+(u+v) -> t+v
      bool left = s.rule == 2;
      TypeRule keep = left ? TypeRule::ChoiceL : TypeRule::ChoiceR;
      const TypeDerivation& p = v.premises[0];
      if (v.rule != keep) {
        Term nt = left ? same_choice(t, t->lhs->lhs, J(p).term) : same_choice(t, J(p).term, t->rhs->rhs);
        out.push_back(choice_node(v.rule, p, j, nt, j.label));
        break;
      }
      BoolFormula x = choice_atom(t);
      for (const auto& w : views(p))
        if (w.rule == keep) {
          const TypeDerivation& q = w.premises[0];
          Term nt = left ? same_choice(t, J(q).term, t->rhs) : same_choice(t, t->lhs, J(q).term);
          out.push_back(choice_node(keep, q, j, nt, band(left ? x : bnot(x), J(w).label)));
        }
      break;
    }
    case 4:
      for (const auto& w : views(v.premises[0])) {
        const TypeDerivation& q = w.premises[0];
        const Term& c = J(w).term;
        TypeDerivation l = node(TypeRule::Lam, with(j, lam(t->id, J(q).term), J(q).label), {q});
        Term other = lam(t->id, w.rule == TypeRule::ChoiceL ? c->rhs : c->lhs);
        Term nt = w.rule == TypeRule::ChoiceL ? same_choice(c, J(l).term, other) : same_choice(c, other, J(l).term);
        out.push_back(choice_node(w.rule, l, j, nt, J(w).label));
      }
      break;
    case 5:
    case 6: {
      bool fun = s.rule == 5;
      const TypeDerivation &f = v.premises[0], &a = v.premises[1];
      for (const auto& w : views(fun ? f : a)) {
        const TypeDerivation& q = w.premises[0];
        const Term& c = J(w).term;
        bool left = w.rule == TypeRule::ChoiceL;
        Term leg = fun ? app(J(q).term, J(a).term) : app(J(f).term, J(q).term);
        Term side = left ? c->rhs : c->lhs;
        Term other = fun ? app(side, J(a).term) : app(J(f).term, side);
        Judgment aj = with(j, leg, fun ? band(J(q).label, J(a).label) : band(J(f).label, J(q).label));
        TypeDerivation ap = node(TypeRule::App, aj, fun ? std::vector{q, a} : std::vector{f, q});
        Term nt = left ? same_choice(c, leg, other) : same_choice(c, other, leg);
        out.push_back(choice_node(w.rule, ap, j, nt,
                                  fun ? band(J(w).label, J(a).label) : band(J(f).label, J(w).label)));
      }
      break;
    }
    case 7:
    case 8: {
      // the outer choice y moves inside the inner choice x:
      //   (t +x u) +y v -> (t +y v) +x (u +y v),   t +y (u +x v) -> (t +y u) +x (t +y v)
      bool left_inner = s.rule == 7;
      const Term& inner = left_inner ? t->lhs : t->rhs;
      BoolFormula y = choice_atom(t), x = choice_atom(inner);
      TypeRule through = left_inner ? TypeRule::ChoiceL : TypeRule::ChoiceR;
      BoolFormula ylit = v.rule == TypeRule::ChoiceL ? y : bnot(y);
      auto outer_with = [&](const Term& leg) {
        return left_inner ? same_choice(t, leg, t->rhs) : same_choice(t, t->lhs, leg);
      };
      if (v.rule == through) {
        for (const auto& w : views(v.premises[0])) {
          const TypeDerivation& q = w.premises[0];
          const Term& c = J(w).term;
          bool left = w.rule == TypeRule::ChoiceL;
          TypeDerivation in = choice_node(v.rule, q, j, outer_with(J(q).term), band(ylit, J(q).label));
          Term other = outer_with(left ? c->rhs : c->lhs);
          Term nt = left ? same_choice(c, J(in).term, other) : same_choice(c, other, J(in).term);
          out.push_back(choice_node(w.rule, in, j, nt, band(ylit, J(w).label)));
        }
      } else {
        const TypeDerivation& q = v.premises[0];
        auto leg = [&](const Term& part) {
          return v.rule == TypeRule::ChoiceL ? same_choice(t, J(q).term, part) : same_choice(t, part, J(q).term);
        };
        Term l = leg(inner->lhs), r = leg(inner->rhs);
        Term nt = same_choice(inner, l, r);
        for (TypeRule side : {TypeRule::ChoiceL, TypeRule::ChoiceR}) {
          bool left = side == TypeRule::ChoiceL;
          TypeDerivation in = choice_node(v.rule, q, j, left ? l : r, band(ylit, J(q).label));
          out.push_back(choice_node(side, in, j, nt, band(left ? x : bnot(x), band(ylit, J(q).label))));
        }
      }
      break;
    }
    case 9: {
      const Name& b = t->id;
      const TypeDerivation& p = v.premises[0];
      const Term& c = J(p).term;
      BoolFormula x = choice_atom(c);
      std::vector<TypeDerivation> sides(2);
      std::vector<bool> have(2, false);
      for (int k = 0; k < 2; ++k) {
        TypeRule side = k == 0 ? TypeRule::ChoiceL : TypeRule::ChoiceR;
        std::vector<TypeDerivation> legs;
        for (const auto& w : views(p))
          if (w.rule == side) legs.push_back(w.premises[0]);
        if (legs.empty()) continue;
        std::vector<BoolFormula> labels;
        for (const auto& q : legs) labels.push_back(J(q).label);
        TypeDerivation leg = combine(legs, with(J(p), k == 0 ? c->lhs : c->rhs, big_or(labels)));
        sides[k] = make_nu(leg, b, j.names, j.exponent, std::nullopt);
        have[k] = true;
      }
      for (int k = 0; k < 2; ++k) {
        if (!have[k]) continue;
        Term mine = J(sides[k]).term;
        Term other = nu(b, k == 0 ? c->rhs : c->lhs);
        Term nt = k == 0 ? same_choice(c, mine, other) : same_choice(c, other, mine);
        out.push_back(choice_node(k == 0 ? TypeRule::ChoiceL : TypeRule::ChoiceR, sides[k], j, nt,
                                  band(k == 0 ? x : bnot(x), J(sides[k]).label)));
      }
      break;
    }
    case 10: {
      TypeDerivation r = forget_name(v.premises[0], t->id);
      out.push_back(weaken_label(lower_exponent(r, j.exponent), j.label));
      break;
    }
    case 11:
      for (const auto& w : views(v.premises[0])) {
        const TypeDerivation& q = w.premises[0];
        Judgment lj = with(J(q), lam(t->id, J(q).term), J(q).label);
        lj.type = j.type;
        TypeDerivation l = node(TypeRule::Lam, lj, {q});
        out.push_back(make_nu(l, J(w).term->id, j.names, j.exponent, J(w).label));
      }
      break;
    case 12: {
      const TypeDerivation &f = v.premises[0], &a = v.premises[1];
      for (const auto& w : views(f)) {
        TypeDerivation q = w.premises[0];
        Name n = J(w).term->id;
        if (free_names(J(a).term).count(n)) {
          NameSet avoid = derivation_names(v);
          Name fresh = fresh_name(n, avoid);
          q = rename_derivation_name(q, n, fresh);
          n = fresh;
        }
        TypeDerivation aa = add_names(a, {n});
        Judgment aj = J(q);
        aj.term = app(J(q).term, J(aa).term);
        aj.label = simplify(band(J(q).label, J(aa).label));
        aj.type = j.type;
        TypeDerivation ap = node(TypeRule::App, aj, {q, aa});
        out.push_back(make_nu(ap, n, j.names, j.exponent, band(J(w).label, J(a).label)));
      }
      break;
    }
    default: throw Error("unknown permutative rule");
  }
  return out;
}

// Binder names of the root subject mapped to the derivation's own, for subjects taken from the reduct.
struct Renaming {
  std::map<Name, Name> vars, names;

  Term apply(Term t) const {
    // through temporaries, so that swaps cannot collide
    std::size_t k = 0;
    std::vector<std::pair<Name, Name>> back;
    for (const auto& [from, to] : vars) {
      Name tmp = "#" + std::to_string(k++);
      t = rename_var(t, from, tmp);
      back.push_back({tmp, to});
    }
    for (const auto& [tmp, to] : back) t = rename_var(t, tmp, to);
    back.clear();
    for (const auto& [from, to] : names) {
      Name tmp = "#" + std::to_string(k++);
      t = rename_name(t, from, tmp);
      back.push_back({tmp, to});
    }
    for (const auto& [tmp, to] : back) t = rename_name(t, tmp, to);
    return t;
  }
};

// Rebuilds the derivation along the step's path; subjects of the ancestors come from their premises.
TypeDerivation transport_rec(const TypeDerivation& d, const Step& s, const Term& whole, std::size_t pos,
                             Renaming ren) {
  if (pos == s.path.size()) {
    std::vector<TypeDerivation> parts;
    for (const auto& v : views(d)) {
      auto more = root_surgery(v, s);
      parts.insert(parts.end(), more.begin(), more.end());
    }
    if (parts.empty()) return leaf(TypeRule::Bot, returm(J(d), ren.apply(subterm_at(whole, s.path, pos))));
    return combine(parts, returm(J(d), J(parts[0]).term));
  }
  TypeDerivation out = d;
  const Term& t = J(d).term;
  const Term& w = subterm_at(whole, s.path, pos);
  unsigned dir = s.path[pos];
  switch (d.rule) {
    case TypeRule::Bot: out.judgment.term = ren.apply(w); return out;
    case TypeRule::Id: throw Error("step path runs into a variable");
    case TypeRule::Union:
      for (auto& p : out.premises) p = transport_rec(p, s, whole, pos, ren);
      out.judgment.term = J(out.premises[0]).term;
      return out;
    case TypeRule::Lam:
      ren.vars[w->id] = t->id;
      out.premises[0] = transport_rec(d.premises[0], s, whole, pos + 1, ren);
      out.judgment.term = lam(t->id, J(out.premises[0]).term);
      return out;
    case TypeRule::Nu:
      ren.names[w->id] = t->id;
      out.premises[0] = transport_rec(d.premises[0], s, whole, pos + 1, ren);
      out.judgment.term = nu(t->id, J(out.premises[0]).term);
      return out;
    case TypeRule::App:
      out.premises[dir] = transport_rec(d.premises[dir], s, whole, pos + 1, ren);
      out.judgment.term = app(J(out.premises[0]).term, J(out.premises[1]).term);
      return out;
    case TypeRule::ChoiceL:
    case TypeRule::ChoiceR: {
      bool typed = (d.rule == TypeRule::ChoiceL) == (dir == 0);
      Term l = t->lhs, r = t->rhs;
      Term moved;
      if (typed) {
        out.premises[0] = transport_rec(d.premises[0], s, whole, pos + 1, ren);
        moved = J(out.premises[0]).term;
      } else {
        moved = ren.apply(subterm_at(whole, s.path, pos + 1));
      }
      (dir == 0 ? l : r) = moved;
      out.judgment.term = choice(l, r, t->id, t->index);
      return out;
    }
  }
  return out;
}

}  // namespace

TypeDerivation transport_derivation(const TypeDerivation& d, const Step& step) {
  auto c = check_type_derivation(d);
  if (!c.ok) throw Error("derivation does not check at " + c.path + ": " + c.reason);
  auto reduct = apply_step(J(d).term, step);
  if (!reduct) throw Error(print(step) + " does not apply to " + print(J(d).term));
  TypeDerivation out = with_context(transport_rec(d, step, *reduct, 0, {}), J(d).context);
  auto again = check_type_derivation(out);
  if (!again.ok) throw Error("internal: transported derivation fails at " + again.path + ": " + again.reason);
  if (!alpha_equal(J(out).term, *reduct)) throw Error("internal: transported subject is not the reduct");
  return out;
}

// ----------------------------------------------------------------- inference

namespace {

struct IT;
using ITp = std::shared_ptr<const IT>;
struct IT {
  int var = -1;
  bool base = false;
  Rational q;
  ITp arg, res;
};

ITp ibase() {
  auto t = std::make_shared<IT>();
  t->base = true;
  return t;
}

ITp iarrow(const Rational& q, ITp a, ITp r) {
  auto t = std::make_shared<IT>();
  t->q = q;
  t->arg = std::move(a);
  t->res = std::move(r);
  return t;
}

ITp from_type(const Type& t) { return t->base ? ibase() : iarrow(t->arg.q, from_type(t->arg.sigma), from_type(t->result)); }

struct IQual {
  Rational q;
  ITp sigma;
};

struct INode {
  TypeRule rule = TypeRule::Bot;
  NameSet names;
  Rational exponent;
  Term term;
  BoolFormula label;
  ITp type;
  std::vector<Hypothesis> hyps;
  std::vector<INode> premises;
  std::vector<IQual> lam_arg;  // the binder's qualified type, Lam only
};

using IContext = std::vector<std::pair<Name, IQual>>;

struct Inference {
  std::map<int, ITp> sub;
  int next_var = 0;
  std::map<const TermNode*, std::optional<QualType>> lam_ann;
  std::map<const TermNode*, std::optional<Rational>> nu_ann;

  ITp fresh() {
    auto t = std::make_shared<IT>();
    t->var = next_var++;
    return t;
  }

  ITp resolve(ITp t) const {
    while (t->var >= 0) {
      auto it = sub.find(t->var);
      if (it == sub.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs(int v, const ITp& t) const {
    ITp r = resolve(t);
    if (r->var >= 0) return r->var == v;
    if (r->base) return false;
    return occurs(v, r->arg) || occurs(v, r->res);
  }

  bool unify(const ITp& a, const ITp& b) {
    ITp x = resolve(a), y = resolve(b);
    if (x == y) return true;
    if (x->var >= 0) {
      if (y->var == x->var) return true;
      if (occurs(x->var, y)) return false;
      sub[x->var] = y;
      return true;
    }
    if (y->var >= 0) return unify(y, x);
    if (x->base || y->base) return x->base && y->base;
    return x->q == y->q && unify(x->arg, y->arg) && unify(x->res, y->res);
  }

  Type finish(const ITp& t) const {
    ITp r = resolve(t);
    if (r->var >= 0 || r->base) return base_type();
    return arrow(r->q, finish(r->arg), finish(r->res));
  }

  void number(const Term& t, std::size_t& li, std::size_t& ni, const Annotations& ann) {
    switch (t->kind) {
      case TermKind::Var: return;
      case TermKind::Lam:
        lam_ann[t.get()] = li < ann.lambdas.size() ? ann.lambdas[li] : std::nullopt;
        ++li;
        number(t->lhs, li, ni, ann);
        return;
      case TermKind::Nu:
        nu_ann[t.get()] = ni < ann.nus.size() ? ann.nus[ni] : std::nullopt;
        ++ni;
        number(t->lhs, li, ni, ann);
        return;
      case TermKind::App:
      case TermKind::Choice:
        number(t->lhs, li, ni, ann);
        number(t->rhs, li, ni, ann);
        return;
    }
  }

  std::optional<INode> bot(const IContext& g, const Term& t, const NameSet& x, std::optional<Rational> demand) {
    NameSet dom;
    for (const auto& e : g) dom.insert(e.first);
    if (!subset(free_vars(t), dom) || !subset(free_names(t), x)) return std::nullopt;
    INode n;
    n.rule = TypeRule::Bot;
    n.names = x;
    n.exponent = demand.value_or(1);
    n.term = t;
    n.label = bbot();
    n.type = fresh();
    return n;
  }

  std::optional<INode> run(const IContext& g, const Term& t, const NameSet& x, std::optional<Rational> demand) {
    INode n;
    n.names = x;
    n.term = t;
    switch (t->kind) {
      case TermKind::Var: {
        const IQual* s = nullptr;
        for (std::size_t i = g.size(); i-- > 0;)
          if (g[i].first == t->id) {
            s = &g[i].second;
            break;
          }
        if (!s) return std::nullopt;
        Rational e = demand.value_or(s->q);
        if (e > s->q) return bot(g, t, x, demand);
        n.rule = TypeRule::Id;
        n.exponent = e;
        n.label = btop();
        n.type = s->sigma;
        return n;
      }
      case TermKind::Lam: {
        auto ann = lam_ann[t.get()];
        IQual s = ann ? IQual{ann->q, from_type(ann->sigma)} : IQual{1, fresh()};
        IContext inner;
        for (const auto& e : g)
          if (e.first != t->id) inner.push_back(e);
        inner.push_back({t->id, s});
        auto body = run(inner, t->lhs, x, demand);
        if (!body) return std::nullopt;
        n.rule = TypeRule::Lam;
        n.exponent = body->exponent;
        n.label = body->label;
        n.type = iarrow(s.q, s.sigma, body->type);
        n.lam_arg = {s};
        n.premises = {*body};
        return n;
      }
      case TermKind::App: {
        auto saved = sub;
        auto f = run(g, t->lhs, x, demand);
        if (!f) return std::nullopt;
        ITp ft = resolve(f->type);
        std::optional<INode> a;
        bool ok = false;
        if (ft->var >= 0) {
          a = run(g, t->rhs, x, std::nullopt);
          if (!a) return std::nullopt;
          ok = unify(ft, iarrow(a->exponent, a->type, fresh()));
        } else if (!ft->base) {
          a = run(g, t->rhs, x, ft->q);
          if (!a) return std::nullopt;
          ok = unify(a->type, ft->arg);
        }
        BoolFormula label = ok ? simplify(band(f->label, a->label)) : bbot();
        if (!ok || !satisfiable(label)) {
          sub = saved;
          return bot(g, t, x, demand ? demand : std::optional<Rational>(f->exponent));
        }
        n.rule = TypeRule::App;
        n.exponent = f->exponent;
        n.label = label;
        n.type = resolve(f->type)->res;
        n.premises = {*f, *a};
        return n;
      }
      case TermKind::Choice: {
        if (!x.count(t->id)) return std::nullopt;
        auto saved = sub;
        auto l = run(g, t->lhs, x, demand);
        auto r = run(g, t->rhs, x, demand);
        if (!l || !r) return std::nullopt;
        if (!demand && l->exponent != r->exponent) {
          Rational m = std::min(l->exponent, r->exponent);
          sub = saved;
          l = run(g, t->lhs, x, m);
          r = run(g, t->rhs, x, m);
          if (!l || !r) return std::nullopt;
        }
        bool lsat = satisfiable(l->label), rsat = satisfiable(r->label);
        if (!lsat && !rsat) {
          sub = saved;
          return bot(g, t, x, l->exponent);
        }
        if (lsat && rsat && !unify(l->type, r->type)) rsat = false;
        BoolFormula xa = bvar(t->index, t->id);
        n.exponent = l->exponent;
        auto side = [&](TypeRule rule, const INode& p, const BoolFormula& lit) {
          INode c = n;
          c.rule = rule;
          c.label = simplify(band(lit, p.label));
          c.type = p.type;
          c.premises = {p};
          return c;
        };
        if (lsat && rsat) {
          INode cl = side(TypeRule::ChoiceL, *l, xa), cr = side(TypeRule::ChoiceR, *r, bnot(xa));
          n.rule = TypeRule::Union;
          n.label = simplify(bor(cl.label, cr.label));
          n.type = l->type;
          n.premises = {cl, cr};
          return n;
        }
        return lsat ? side(TypeRule::ChoiceL, *l, xa) : side(TypeRule::ChoiceR, *r, bnot(xa));
      }
      case TermKind::Nu: {
        const Name& a = t->id;
        if (x.count(a)) return std::nullopt;
        NameSet inner = x;
        inner.insert(a);
        auto ann = nu_ann[t.get()];
        std::optional<Rational> body_demand;
        if (demand && ann && *ann > 0) {
          Rational bd = *demand / *ann;
          if (bd > 1) return bot(g, t, x, demand);
          body_demand = bd;
        }
        auto body = run(g, t->lhs, inner, body_demand);
        if (!body) return std::nullopt;
        ADecomposition dec = weak_a_decompose(body->label, a, x);
        Rational rate;
        if (ann) {
          rate = *ann;
        } else if (demand) {
          if (*demand == 0) rate = 0;
          else if (body->exponent >= *demand) rate = *demand / body->exponent;
          else return bot(g, t, x, demand);
        } else {
          rate = 1;
          for (const auto& p : dec.parts) rate = std::min(rate, measure(p.named));
        }
        n.rule = TypeRule::Nu;
        n.exponent = body->exponent * rate;
        if (demand && n.exponent != *demand) return bot(g, t, x, demand);
        std::vector<BoolFormula> rests;
        n.hyps.push_back(hyp_split(a, dec.parts));
        for (const auto& p : dec.parts)
          if (measure(p.named) >= rate) {
            rests.push_back(p.rest);
            n.hyps.push_back(hyp_measure(p.named, Cmp::Ge, rate));
          }
        n.label = simplify(big_or(rests));
        n.type = body->type;
        n.premises = {*body};
        return n;
      }
    }
    return std::nullopt;
  }

  TypeDerivation build(const INode& n, const Context& g) const {
    TypeDerivation d;
    d.rule = n.rule;
    d.judgment = {g, n.names, n.exponent, n.term, n.label, finish(n.type)};
    d.hyps = n.hyps;
    for (const auto& p : n.premises) {
      Context pg = g;
      if (n.rule == TypeRule::Lam) pg = extend(g, n.term->id, {n.lam_arg[0].q, finish(n.lam_arg[0].sigma)});
      d.premises.push_back(build(p, pg));
    }
    return d;
  }
};

}  // namespace

std::optional<TypeDerivation> infer(const Context& gamma, const Term& t, const NameSet& names,
                                    const Annotations& ann, std::optional<Rational> exponent) {
  if (exponent && !in_unit_interval(*exponent)) return std::nullopt;
  Inference inf;
  std::size_t li = 0, ni = 0;
  inf.number(t, li, ni, ann);
  IContext g;
  for (const auto& e : gamma) g.push_back({e.x, {e.type.q, from_type(e.type.sigma)}});
  std::optional<INode> root;
  try {
    root = inf.run(g, t, names, exponent);
  } catch (const Error&) {
    return std::nullopt;  // a label over names outside the context
  }
  if (!root) return std::nullopt;
  TypeDerivation d = inf.build(*root, gamma);
  if (!check_type_derivation(d).ok) return std::nullopt;
  return d;
}

// ----------------------------------------------------------------- translation

Formula translate_type(const Type& sigma, const Name& a) {
  if (sigma->base) {
    Formula z = atom(0, a);
    return cq(1, a, disj(z, neg(z)));
  }
  return disj(neg(translate_qualtype(sigma->arg, a)), translate_type(sigma->result, a));
}

Formula translate_qualtype(const QualType& s, const Name& a) { return cq(s.q, a, translate_type(s.sigma, a)); }

Sequent translate_judgment(const Judgment& j) {
  NameSet avoid = j.names;
  for (const auto& n : free_names(j.label)) avoid.insert(n);
  Name a = fresh_name("a", avoid);
  Sequent s;
  s.names = j.names;
  s.names.insert(a);
  s.succedent.push_back({j.label, Direction::Into, cq(j.exponent, a, translate_type(j.type, a))});
  for (const auto& e : j.context) s.succedent.push_back({bbot(), Direction::From, translate_qualtype(e.type, a)});
  return s;
}

// -------------------------------------------------------------- normalization

NormalizationReport check_normalization(const Judgment& j, unsigned fuel) {
  if (!j.context.empty()) throw Error("normalization check needs an empty context");
  AtomSet used = atoms(j.label);
  std::function<void(const Term&, const NameSet&)> walk = [&](const Term& t, const NameSet& bound) {
    switch (t->kind) {
      case TermKind::Var: return;
      case TermKind::Lam: walk(t->lhs, bound); return;
      case TermKind::Nu: {
        NameSet in = bound;
        in.insert(t->id);
        walk(t->lhs, in);
        return;
      }
      case TermKind::App: walk(t->lhs, bound); walk(t->rhs, bound); return;
      case TermKind::Choice:
        if (!bound.count(t->id)) used.insert({t->id, t->index});
        walk(t->lhs, bound);
        walk(t->rhs, bound);
        return;
    }
  };
  walk(j.term, {});
  std::vector<Atom> vars(used.begin(), used.end());
  NormalizationReport rep;
  for_each_valuation(vars, [&](const Valuation& f) {
    if (!rep.ok || !eval_bool(j.label, f)) return;
    ++rep.events;
    Term t = apply_event({j.names, f}, j.term);
    if (!normalizes_with_prob(t, j.exponent, fuel)) {
      rep.ok = false;
      rep.failure = print(f);
    }
  });
  return rep;
}

}  // namespace cpl
