#include "cpl/lambda_nu.hpp"

#include "cpl/textio.hpp"

#include <algorithm>
#include <functional>

namespace cpl {

Term apply_event(const Event& e, const Term& t) {
  std::function<Term(const Term&, const NameSet&)> go = [&](const Term& s, const NameSet& bound) -> Term {
    switch (s->kind) {
      case TermKind::Var: return s;
      case TermKind::Lam: return lam(s->id, go(s->lhs, bound));
      case TermKind::App: return app(go(s->lhs, bound), go(s->rhs, bound));
      case TermKind::Choice:
        if (e.names.count(s->id) && !bound.count(s->id))
          return go(e.f.at({s->id, s->index}) ? s->lhs : s->rhs, bound);
        return choice(go(s->lhs, bound), go(s->rhs, bound), s->id, s->index);
      case TermKind::Nu: {
        NameSet inner = bound;
        inner.insert(s->id);
        return nu(s->id, go(s->lhs, inner));
      }
    }
    return s;
  };
  return go(t, {});
}

Term rename_bound_names(const Term& t) {
  NameSet taken = free_names(t);
  NameSet avoid = all_identifiers(t);
  std::function<Term(const Term&)> go = [&](const Term& s) -> Term {
    switch (s->kind) {
      case TermKind::Var: return s;
      case TermKind::Lam: return lam(s->id, go(s->lhs));
      case TermKind::App: return app(go(s->lhs), go(s->rhs));
      case TermKind::Choice: return choice(go(s->lhs), go(s->rhs), s->id, s->index);
      case TermKind::Nu: {
        Name n = s->id;
        Term body = s->lhs;
        if (taken.count(n)) {
          NameSet all = avoid;
          all.insert(taken.begin(), taken.end());
          n = fresh_name(s->id, all);
          body = rename_name(body, s->id, n);
        }
        taken.insert(n);
        avoid.insert(n);
        return nu(n, go(body));
      }
    }
    return s;
  };
  return go(t);
}

bool ChoiceKey::operator<(const ChoiceKey& o) const {
  if (bound != o.bound) return bound < o.bound;
  if (!bound && name != o.name) return name < o.name;
  if (bound && depth != o.depth) return depth < o.depth;
  return index > o.index;
}

bool ChoiceKey::operator==(const ChoiceKey& o) const {
  return bound == o.bound && index == o.index && (bound ? depth == o.depth : name == o.name);
}

// ----------------------------------------------------- permutative normal form

namespace {

// Ordered choice tree over the names in scope; leaves are pseudo-values or nu-trees.
struct TNode;
using Tree = std::shared_ptr<const TNode>;

struct TNode {
  Term leaf;  // set for leaves
  ChoiceKey key;
  Name name;
  unsigned index = 0;
  Tree l, r;
};

Tree leaf(Term t) {
  auto n = std::make_shared<TNode>();
  n->leaf = std::move(t);
  return n;
}

bool is_leaf(const Tree& t) { return t->leaf != nullptr; }

bool tree_equal(const Tree& a, const Tree& b) {
  if (a == b) return true;
  if (is_leaf(a) != is_leaf(b)) return false;
  if (is_leaf(a)) return alpha_equal(a->leaf, b->leaf);
  return a->key == b->key && tree_equal(a->l, b->l) && tree_equal(a->r, b->r);
}

struct Choice {
  ChoiceKey key;
  Name name;
  unsigned index;
};

Tree node(const Choice& c, Tree l, Tree r) {
  if (tree_equal(l, r)) return l;  // t (+) t -> t
  auto n = std::make_shared<TNode>();
  n->key = c.key;
  n->name = c.name;
  n->index = c.index;
  n->l = std::move(l);
  n->r = std::move(r);
  return n;
}

Choice root(const Tree& t) { return {t->key, t->name, t->index}; }

// Restriction of t to one side of the choice c (c can only sit at the root).
Tree cof(const Tree& t, const ChoiceKey& c, bool left) {
  if (!is_leaf(t) && t->key == c) return left ? t->l : t->r;
  return t;
}

Choice smallest(const Choice& c, const Tree& a, const Tree& b) {
  Choice m = c;
  if (!is_leaf(a) && a->key < m.key) m = root(a);
  if (!is_leaf(b) && b->key < m.key) m = root(b);
  return m;
}

Tree make_choice(const Choice& c, const Tree& a, const Tree& b) {
  if (is_leaf(a) && is_leaf(b)) return node(c, a, b);
  Choice m = smallest(c, a, b);
  if (m.key == c.key) return node(c, cof(a, c.key, true), cof(b, c.key, false));
  return node(m, make_choice(c, cof(a, m.key, true), cof(b, m.key, true)),
              make_choice(c, cof(a, m.key, false), cof(b, m.key, false)));
}

Tree merge(const Tree& a, const Tree& b, const std::function<Term(const Term&, const Term&)>& f) {
  if (is_leaf(a) && is_leaf(b)) return leaf(f(a->leaf, b->leaf));
  Choice m = is_leaf(a) ? root(b) : is_leaf(b) ? root(a) : (b->key < a->key ? root(b) : root(a));
  return node(m, merge(cof(a, m.key, true), cof(b, m.key, true), f),
              merge(cof(a, m.key, false), cof(b, m.key, false), f));
}

Tree map_leaves(const Tree& t, const std::function<Term(const Term&)>& f) {
  if (is_leaf(t)) return leaf(f(t->leaf));
  return node(root(t), map_leaves(t->l, f), map_leaves(t->r, f));
}

Term to_term(const Tree& t) {
  if (is_leaf(t)) return t->leaf;
  return choice(to_term(t->l), to_term(t->r), t->name, t->index);
}

Term map_choices(const Term& s, const std::function<Term(const Term&)>& f) {
  if (s->kind == TermKind::Choice) return choice(map_choices(s->lhs, f), map_choices(s->rhs, f), s->id, s->index);
  return f(s);
}

// lambda x over a leaf: passes through nu and the choices below it
Term lam_leaf(const Name& x, const Term& l) {
  if (l->kind == TermKind::Nu)
    return nu(l->id, map_choices(l->lhs, [&](const Term& s) { return lam_leaf(x, s); }));
  return lam(x, l);
}

Term app_leaf(const Term& f, const Term& u) {
  if (f->kind == TermKind::Nu) {
    Name a = f->id;
    Term body = f->lhs;
    if (free_names(u).count(a)) {
      NameSet avoid = all_identifiers(f);
      for (const auto& n : all_identifiers(u)) avoid.insert(n);
      a = fresh_name(f->id, avoid);
      body = rename_name(body, f->id, a);
    }
    return nu(a, map_choices(body, [&](const Term& s) { return app_leaf(s, u); }));
  }
  return app(f, u);
}

Tree push_nu(const Name& a, unsigned depth, const Tree& t) {
  if (is_leaf(t)) {
    if (free_names(t->leaf).count(a)) return leaf(nu(a, t->leaf));
    return t;  // nu a.t -> t when a is not free
  }
  if (t->key.bound && t->key.depth == depth) return leaf(nu(a, to_term(t)));
  return node(root(t), push_nu(a, depth, t->l), push_nu(a, depth, t->r));
}

Tree norm(const Term& t, const std::map<Name, unsigned>& env, unsigned depth) {
  switch (t->kind) {
    case TermKind::Var: return leaf(t);
    case TermKind::Lam: {
      Name x = t->id;
      return map_leaves(norm(t->lhs, env, depth), [&](const Term& l) { return lam_leaf(x, l); });
    }
    case TermKind::App: return merge(norm(t->lhs, env, depth), norm(t->rhs, env, depth), app_leaf);
    case TermKind::Choice: {
      ChoiceKey k;
      auto it = env.find(t->id);
      if (it != env.end()) {
        k.bound = 1;
        k.depth = it->second;
      } else {
        k.name = t->id;
      }
      k.index = t->index;
      return make_choice({k, t->id, t->index}, norm(t->lhs, env, depth), norm(t->rhs, env, depth));
    }
    case TermKind::Nu: {
      auto inner = env;
      inner[t->id] = depth + 1;
      return push_nu(t->id, depth + 1, norm(t->lhs, inner, depth + 1));
    }
  }
  return leaf(t);
}

}  // namespace

Term pnf_term(const Term& t) { return to_term(norm(rename_bound_names(t), {}, 0)); }

bool is_pseudo_value(const Term& t) {
  return t->kind == TermKind::Var || t->kind == TermKind::Lam || t->kind == TermKind::App;
}

namespace {

PnfTerm classify(const Term& t) {
  PnfTerm p;
  p.term = t;
  if (t->kind != TermKind::Nu) return p;
  p.pseudo_value = false;
  p.name = t->id;
  p.level = t->lhs->kind == TermKind::Choice ? t->lhs->index : 0;
  std::function<void(const Term&)> go = [&](const Term& s) {
    if (s->kind == TermKind::Choice) {
      go(s->lhs);
      go(s->rhs);
    } else {
      p.leaves.push_back(classify(s));
    }
  };
  go(t->lhs);
  return p;
}

void require_closed(const Term& t) {
  auto fn = free_names(t);
  if (!fn.empty()) throw Error("term is not name-closed (free name " + *fn.begin() + ")");
}

}  // namespace

std::optional<PnfTerm> is_pnf(const Term& t) {
  require_closed(t);
  if (!alpha_equal(pnf_term(t), t)) return std::nullopt;
  return classify(t);
}

// ------------------------------------------------------------ distributions

Rational Distribution::total() const {
  Rational s = 0;
  for (const auto& [k, v] : entries) s += v.second;
  return s;
}

Distribution distribution(const Term& t) {
  require_closed(t);
  Distribution d;
  std::function<void(const Term&, const Rational&)> go = [&](const Term& s, const Rational& w) {
    switch (s->kind) {
      case TermKind::Choice: {
        Rational half = w / 2;
        go(s->lhs, half);
        go(s->rhs, half);
        return;
      }
      case TermKind::Nu: go(s->lhs, w); return;
      default: {
        auto [it, fresh] = d.entries.try_emplace(alpha_key(s), s, w);
        if (!fresh) it->second.second += w;
      }
    }
  };
  go(pnf_term(t), Rational(1));
  return d;
}

bool is_head_normal(const Term& t) {
  Term s = t;
  while (s->kind == TermKind::Lam) s = s->lhs;
  while (s->kind == TermKind::App) s = s->lhs;
  return s->kind == TermKind::Var;
}

Rational normal_prob(const Term& t) {
  Rational p = 0;
  for (const auto& [k, v] : distribution(t).entries)
    if (is_head_normal(v.first)) p += v.second;
  return p;
}

std::string print(const Distribution& d) {
  std::vector<std::pair<Rational, std::string>> rows;
  for (const auto& [k, v] : d.entries) rows.emplace_back(v.second, print(v.first));
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::string out;
  for (const auto& [w, s] : rows) out += to_string(w) + "  " + s + "\n";
  return out;
}

// ---------------------------------------------------------------- reduction

std::optional<Term> beta_step(const Term& t) {
  switch (t->kind) {
    case TermKind::Var: return std::nullopt;
    case TermKind::Lam:
      if (auto b = beta_step(t->lhs)) return lam(t->id, *b);
      return std::nullopt;
    case TermKind::App:
      if (t->lhs->kind == TermKind::Lam) return subst(t->lhs->lhs, t->lhs->id, t->rhs);
      if (auto f = beta_step(t->lhs)) return app(*f, t->rhs);
      if (auto a = beta_step(t->rhs)) return app(t->lhs, *a);
      return std::nullopt;
    case TermKind::Choice: {
      auto l = beta_step(t->lhs);
      auto r = beta_step(t->rhs);
      if (!l && !r) return std::nullopt;
      return choice(l.value_or(t->lhs), r.value_or(t->rhs), t->id, t->index);
    }
    case TermKind::Nu:
      if (auto b = beta_step(t->lhs)) return nu(t->id, *b);
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

// Tree positions are walked separately so that every leaf takes its own step.
std::optional<Term> step_leaves(const Term& t) {
  switch (t->kind) {
    case TermKind::Choice: {
      auto l = step_leaves(t->lhs);
      auto r = step_leaves(t->rhs);
      if (!l && !r) return std::nullopt;
      return choice(l.value_or(t->lhs), r.value_or(t->rhs), t->id, t->index);
    }
    case TermKind::Nu:
      if (auto b = step_leaves(t->lhs)) return nu(t->id, *b);
      return std::nullopt;
    default: return beta_step(t);
  }
}

constexpr std::size_t kSizeLimit = 200000;

// Runs the reduction, calling `visit` on each permutative normal form reached; stops early when visit says so.
ReduceResult run(const Term& t, unsigned fuel, const std::function<bool(const Term&)>& visit) {
  ReduceResult out;
  out.term = pnf_term(t);
  if (visit(out.term)) return out;
  while (true) {
    auto next = step_leaves(out.term);
    if (!next) return out;
    if (out.rounds == fuel || size(*next) > kSizeLimit) {
      out.exhausted = true;
      return out;
    }
    out.term = pnf_term(*next);
    ++out.rounds;
    if (visit(out.term)) return out;
  }
}

}  // namespace

ReduceResult reduce(const Term& t, unsigned fuel) {
  return run(t, fuel, [](const Term&) { return false; });
}

bool normalizes_with_prob(const Term& t, const Rational& r, unsigned fuel) {
  if (r <= 0) return true;
  require_closed(t);
  bool found = false;
  run(t, fuel, [&](const Term& s) { return found = normal_prob(s) >= r; });
  return found;
}

}  // namespace cpl

// ------------------------------------------------------------- single steps

namespace cpl {

namespace {

using Env = std::map<Name, unsigned>;

ChoiceKey key_of(const Term& c, const Env& env) {
  ChoiceKey k;
  auto it = env.find(c->id);
  if (it != env.end()) {
    k.bound = 1;
    k.depth = it->second;
  } else {
    k.name = c->id;
  }
  k.index = c->index;
  return k;
}

std::optional<Term> perm_root(const Term& t, unsigned rule, const Env& env) {
  auto is = [](const Term& s, TermKind k) { return s->kind == k; };
  switch (rule) {
    case 1:
      if (is(t, TermKind::Choice) && alpha_equal(t->lhs, t->rhs)) return t->lhs;
      break;
    case 2:
      if (is(t, TermKind::Choice) && is(t->lhs, TermKind::Choice) && key_of(t->lhs, env) == key_of(t, env))
        return choice(t->lhs->lhs, t->rhs, t->id, t->index);
      break;
    case 3:
      if (is(t, TermKind::Choice) && is(t->rhs, TermKind::Choice) && key_of(t->rhs, env) == key_of(t, env))
        return choice(t->lhs, t->rhs->rhs, t->id, t->index);
      break;
    case 4:
      if (is(t, TermKind::Lam) && is(t->lhs, TermKind::Choice)) {
        const Term& c = t->lhs;
        return choice(lam(t->id, c->lhs), lam(t->id, c->rhs), c->id, c->index);
      }
      break;
    case 5:
      if (is(t, TermKind::App) && is(t->lhs, TermKind::Choice)) {
        const Term& c = t->lhs;
        return choice(app(c->lhs, t->rhs), app(c->rhs, t->rhs), c->id, c->index);
      }
      break;
    case 6:
      if (is(t, TermKind::App) && is(t->rhs, TermKind::Choice)) {
        const Term& c = t->rhs;
        return choice(app(t->lhs, c->lhs), app(t->lhs, c->rhs), c->id, c->index);
      }
      break;
    case 7:
      if (is(t, TermKind::Choice) && is(t->lhs, TermKind::Choice) && key_of(t->lhs, env) < key_of(t, env)) {
        const Term& c = t->lhs;
        return choice(choice(c->lhs, t->rhs, t->id, t->index), choice(c->rhs, t->rhs, t->id, t->index), c->id,
                      c->index);
      }
      break;
    case 8:
      if (is(t, TermKind::Choice) && is(t->rhs, TermKind::Choice) && key_of(t->rhs, env) < key_of(t, env)) {
        const Term& c = t->rhs;
        return choice(choice(t->lhs, c->lhs, t->id, t->index), choice(t->lhs, c->rhs, t->id, t->index), c->id,
                      c->index);
      }
      break;
    case 9:
      if (is(t, TermKind::Nu) && is(t->lhs, TermKind::Choice) && t->lhs->id != t->id) {
        const Term& c = t->lhs;
        return choice(nu(t->id, c->lhs), nu(t->id, c->rhs), c->id, c->index);
      }
      break;
    case 10:
      if (is(t, TermKind::Nu) && !free_names(t->lhs).count(t->id)) return t->lhs;
      break;
    case 11:
      if (is(t, TermKind::Lam) && is(t->lhs, TermKind::Nu)) return nu(t->lhs->id, lam(t->id, t->lhs->lhs));
      break;
    case 12:
      if (is(t, TermKind::App) && is(t->lhs, TermKind::Nu)) {
        Name a = t->lhs->id;
        Term body = t->lhs->lhs;
        NameSet fu = free_names(t->rhs);
        if (fu.count(a)) {
          NameSet avoid = all_identifiers(t);
          Name b = fresh_name(a, avoid);
          body = rename_name(body, a, b);
          a = b;
        }
        return nu(a, app(body, t->rhs));
      }
      break;
  }
  return std::nullopt;
}

std::optional<Term> step_at(const Term& t, const Step& s, std::size_t pos, Env env, unsigned depth) {
  if (pos == s.path.size()) {
    if (s.kind == StepKind::Beta) {
      if (t->kind == TermKind::App && t->lhs->kind == TermKind::Lam) return subst(t->lhs->lhs, t->lhs->id, t->rhs);
      return std::nullopt;
    }
    return perm_root(t, s.rule, env);
  }
  unsigned dir = s.path[pos];
  switch (t->kind) {
    case TermKind::Var: return std::nullopt;
    case TermKind::Lam:
      if (dir != 0) return std::nullopt;
      if (auto b = step_at(t->lhs, s, pos + 1, env, depth)) return lam(t->id, *b);
      return std::nullopt;
    case TermKind::Nu:
      if (dir != 0) return std::nullopt;
      env[t->id] = depth + 1;
      if (auto b = step_at(t->lhs, s, pos + 1, env, depth + 1)) return nu(t->id, *b);
      return std::nullopt;
    case TermKind::App:
    case TermKind::Choice: {
      auto sub = step_at(dir == 0 ? t->lhs : t->rhs, s, pos + 1, env, depth);
      if (!sub) return std::nullopt;
      Term l = dir == 0 ? *sub : t->lhs, r = dir == 0 ? t->rhs : *sub;
      return t->kind == TermKind::App ? app(l, r) : choice(l, r, t->id, t->index);
    }
  }
  return std::nullopt;
}

void collect(const Term& t, std::vector<unsigned>& path, Env env, unsigned depth, bool beta, bool perm,
             std::vector<Step>& out) {
  if (beta && t->kind == TermKind::App && t->lhs->kind == TermKind::Lam) out.push_back({StepKind::Beta, path, 0});
  if (perm)
    for (unsigned r = 1; r <= 12; ++r)
      if (perm_root(t, r, env)) out.push_back({StepKind::Perm, path, r});
  auto down = [&](const Term& s, unsigned dir, const Env& e, unsigned d) {
    path.push_back(dir);
    collect(s, path, e, d, beta, perm, out);
    path.pop_back();
  };
  switch (t->kind) {
    case TermKind::Var: break;
    case TermKind::Lam: down(t->lhs, 0, env, depth); break;
    case TermKind::Nu: {
      Env inner = env;
      inner[t->id] = depth + 1;
      down(t->lhs, 0, inner, depth + 1);
      break;
    }
    case TermKind::App:
    case TermKind::Choice:
      down(t->lhs, 0, env, depth);
      down(t->rhs, 1, env, depth);
      break;
  }
}

}  // namespace

std::optional<Term> apply_step(const Term& t, const Step& s) {
  if (s.kind == StepKind::Perm && (s.rule < 1 || s.rule > 12)) return std::nullopt;
  return step_at(t, s, 0, {}, 0);
}

std::vector<Step> redexes(const Term& t, bool beta, bool perm) {
  std::vector<Step> out;
  std::vector<unsigned> path;
  collect(t, path, {}, 0, beta, perm, out);
  return out;
}

std::string print(const Step& s) {
  std::string out = s.kind == StepKind::Beta ? "beta" : "perm " + std::to_string(s.rule);
  out += " at ";
  if (s.path.empty()) return out + "root";
  for (unsigned d : s.path) out += std::to_string(d);
  return out;
}

}  // namespace cpl
