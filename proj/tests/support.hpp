#pragma once

// Random generators and brute-force oracles shared by the unit and acceptance tests.
// The oracles walk the syntax trees directly and use none of the library's semantics.

#include "cpl/syntax.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace support {

using namespace cpl;

struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}
  unsigned below(unsigned n) { return n == 0 ? 0 : static_cast<unsigned>(g() % n); }
  bool coin() { return g() & 1; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(static_cast<unsigned>(v.size()))]; }
};

inline BoolFormula random_bool(Rng& r, const std::vector<Name>& names, unsigned indices, unsigned depth) {
  if (depth == 0 || r.below(4) == 0) {
    unsigned k = r.below(12);
    if (k == 0) return btop();
    if (k == 1) return bbot();
    return bvar(r.below(indices), r.pick(names));
  }
  switch (r.below(3)) {
    case 0: return bnot(random_bool(r, names, indices, depth - 1));
    case 1: return band(random_bool(r, names, indices, depth - 1), random_bool(r, names, indices, depth - 1));
    default: return bor(random_bool(r, names, indices, depth - 1), random_bool(r, names, indices, depth - 1));
  }
}

inline Rational random_threshold(Rng& r) {
  static const std::vector<Rational> qs = {Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1),
                                           Rational(1, 8), Rational(5, 8), Rational(1, 3), Rational(2, 3),
                                           Rational(7, 8), Rational(3, 8)};
  return r.pick(qs);
}

// At most `quantifiers` counting quantifiers over the given names.
inline Formula random_formula(Rng& r, const std::vector<Name>& names, unsigned indices, unsigned& quantifiers,
                              unsigned depth) {
  if (depth == 0 || r.below(5) == 0) return atom(r.below(indices), r.pick(names));
  unsigned k = r.below(quantifiers > 0 ? 5 : 3);
  switch (k) {
    case 0: return neg(random_formula(r, names, indices, quantifiers, depth - 1));
    case 1: {
      Formula a = random_formula(r, names, indices, quantifiers, depth - 1);
      return conj(a, random_formula(r, names, indices, quantifiers, depth - 1));
    }
    case 2: {
      Formula a = random_formula(r, names, indices, quantifiers, depth - 1);
      return disj(a, random_formula(r, names, indices, quantifiers, depth - 1));
    }
    default: {
      --quantifiers;
      Name a = r.pick(names);
      Rational q = random_threshold(r);
      Formula body = random_formula(r, names, indices, quantifiers, depth - 1);
      return k == 3 ? cq(q, a, body) : dq(q, a, body);
    }
  }
}

// ------------------------------------------------------------------ oracles

using Bit = std::pair<Name, unsigned>;
using Assignment = std::map<Bit, bool>;

inline bool oracle_bool(const BoolFormula& b, const Assignment& g) {
  switch (b->kind) {
    case BoolKind::Var: return g.at({b->name, b->index});
    case BoolKind::Top: return true;
    case BoolKind::Bot: return false;
    case BoolKind::Neg: return !oracle_bool(b->lhs, g);
    case BoolKind::And: return oracle_bool(b->lhs, g) && oracle_bool(b->rhs, g);
    case BoolKind::Or: return oracle_bool(b->lhs, g) || oracle_bool(b->rhs, g);
  }
  return false;
}

inline void bits_of(const BoolFormula& b, std::set<Bit>& out) {
  if (b->kind == BoolKind::Var) out.insert({b->name, b->index});
  if (b->lhs) bits_of(b->lhs, out);
  if (b->rhs) bits_of(b->rhs, out);
}

inline std::set<Bit> bits_of(const BoolFormula& b) {
  std::set<Bit> out;
  bits_of(b, out);
  return out;
}

// Calls f on every assignment of the given bits.
inline void each_assignment(const std::vector<Bit>& bits, const Assignment& base,
                            const std::function<void(const Assignment&)>& f) {
  Assignment g = base;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == bits.size()) return f(g);
    for (bool v : {false, true}) {
      g[bits[i]] = v;
      go(i + 1);
    }
  };
  go(0);
}

inline Rational oracle_measure(const BoolFormula& b) {
  auto s = bits_of(b);
  std::vector<Bit> bits(s.begin(), s.end());
  unsigned long long hits = 0, total = 0;
  each_assignment(bits, {}, [&](const Assignment& g) {
    ++total;
    hits += oracle_bool(b, g);
  });
  Rational m(static_cast<unsigned long>(hits), static_cast<unsigned long>(total));
  m.canonicalize();
  return m;
}

// Bits of `a` occurring free in a formula (not under a quantifier on a).
inline void free_bits(const Formula& f, std::set<Bit>& out, std::set<Name> bound = {}) {
  switch (f->kind) {
    case FormulaKind::Atom:
      if (!bound.count(f->name)) out.insert({f->name, f->index});
      return;
    case FormulaKind::CQ:
    case FormulaKind::DQ:
      bound.insert(f->name);
      free_bits(f->lhs, out, bound);
      return;
    default:
      if (f->lhs) free_bits(f->lhs, out, bound);
      if (f->rhs) free_bits(f->rhs, out, bound);
  }
}

inline std::set<Bit> free_bits(const Formula& f) {
  std::set<Bit> out;
  free_bits(f, out);
  return out;
}

// Truth of a counting formula under an assignment of its free bits, by enumeration.
inline bool oracle_eval(const Formula& f, const Assignment& g) {
  switch (f->kind) {
    case FormulaKind::Atom: return g.at({f->name, f->index});
    case FormulaKind::Neg: return !oracle_eval(f->lhs, g);
    case FormulaKind::And: return oracle_eval(f->lhs, g) && oracle_eval(f->rhs, g);
    case FormulaKind::Or: return oracle_eval(f->lhs, g) || oracle_eval(f->rhs, g);
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      std::vector<Bit> bits;
      for (const auto& b : free_bits(f->lhs))
        if (b.first == f->name) bits.push_back(b);
      unsigned long long hits = 0, total = 0;
      each_assignment(bits, g, [&](const Assignment& h) {
        ++total;
        hits += oracle_eval(f->lhs, h);
      });
      Rational m(static_cast<unsigned long>(hits), static_cast<unsigned long>(total));
      m.canonicalize();
      return f->kind == FormulaKind::CQ ? m >= f->q : m < f->q;
    }
  }
  return false;
}

inline Rational oracle_formula_measure(const Formula& f) {
  auto s = free_bits(f);
  std::vector<Bit> bits(s.begin(), s.end());
  unsigned long long hits = 0, total = 0;
  each_assignment(bits, {}, [&](const Assignment& g) {
    ++total;
    hits += oracle_eval(f, g);
  });
  Rational m(static_cast<unsigned long>(hits), static_cast<unsigned long>(total));
  m.canonicalize();
  return m;
}

// ------------------------------------------------------------------- terms

// Random term over bound variables and nu-bound names; the term is name-closed when `names` starts empty.
inline Term random_term(Rng& r, unsigned size, std::vector<Name>& vars, std::vector<Name>& names,
                        const std::vector<Name>& pool = {"a", "b", "c"}) {
  if (size <= 1 || r.below(6) == 0) {
    if (!vars.empty() && r.below(4) != 0) return var(r.pick(vars));
    return r.coin() ? lam("z", var("z")) : omega_term();
  }
  switch (r.below(6)) {
    case 0: {
      Name x = "x" + std::to_string(vars.size());
      vars.push_back(x);
      Term body = random_term(r, size - 1, vars, names, pool);
      vars.pop_back();
      return lam(x, body);
    }
    case 1:
    case 2:
      if (!names.empty()) {
        Name a = r.pick(names);
        unsigned i = r.below(2);
        Term left = random_term(r, size / 2, vars, names, pool);
        Term right = random_term(r, size / 2, vars, names, pool);
        return choice(left, right, a, i);
      }
      [[fallthrough]];
    case 3: {
      names.push_back(r.pick(pool));
      Term body = random_term(r, size - 1, vars, names, pool);
      Name a = names.back();
      names.pop_back();
      return nu(a, body);
    }
    default: {
      Term f = random_term(r, size / 2, vars, names, pool);
      return app(f, random_term(r, size / 2, vars, names, pool));
    }
  }
}

inline Term random_term(Rng& r, unsigned size) {
  std::vector<Name> vars, names;
  return random_term(r, size, vars, names);
}

// Head normal form, read off the spine: \x1..xn. y u1..um.
inline bool oracle_head_normal(Term t) {
  while (t->kind == TermKind::Lam) t = t->lhs;
  while (t->kind == TermKind::App) t = t->lhs;
  return t->kind == TermKind::Var;
}

// Name-closed terms only. A nu binder in surface position (not inside an application
// argument) is sampled once: it gets its own name, and each assignment of its choice bits
// resolves those choices everywhere (bit 1 keeps the left operand) and drops the binder.
// Binders inside arguments stay. Leaves are compared after `normalize`, which the caller
// supplies so that terms left inside arguments can be brought to one shape.
inline std::map<std::string, Rational> oracle_distribution(const Term& t, const std::function<Term(const Term&)>& normalize) {
  unsigned counter = 0;
  std::set<Name> sampled;
  std::function<Term(const Term&, std::map<Name, Name>, bool)> apart = [&](const Term& s, std::map<Name, Name> env,
                                                                           bool surface) -> Term {
    switch (s->kind) {
      case TermKind::Var: return s;
      case TermKind::Lam: return lam(s->id, apart(s->lhs, env, surface));
      case TermKind::App: return app(apart(s->lhs, env, surface), apart(s->rhs, env, false));
      case TermKind::Choice:
        return choice(apart(s->lhs, env, surface), apart(s->rhs, env, surface), env.at(s->id), s->index);
      case TermKind::Nu: {
        Name n = "n" + std::to_string(counter++);
        env[s->id] = n;
        if (surface) sampled.insert(n);
        return nu(n, apart(s->lhs, env, surface));
      }
    }
    return s;
  };
  Term u = apart(t, {}, true);
  std::set<Bit> used;
  std::function<void(const Term&)> collect = [&](const Term& s) {
    if (s->kind == TermKind::Choice && sampled.count(s->id)) used.insert({s->id, s->index});
    if (s->lhs) collect(s->lhs);
    if (s->rhs) collect(s->rhs);
  };
  collect(u);
  std::vector<Bit> bits(used.begin(), used.end());
  std::map<std::string, Rational> out;
  Rational w(1);
  for (std::size_t i = 0; i < bits.size(); ++i) w /= 2;
  each_assignment(bits, {}, [&](const Assignment& g) {
    std::function<Term(const Term&)> resolve = [&](const Term& s) -> Term {
      switch (s->kind) {
        case TermKind::Var: return s;
        case TermKind::Lam: return lam(s->id, resolve(s->lhs));
        case TermKind::App: return app(resolve(s->lhs), resolve(s->rhs));
        case TermKind::Choice:
          if (sampled.count(s->id)) return resolve(g.at({s->id, s->index}) ? s->lhs : s->rhs);
          return choice(resolve(s->lhs), resolve(s->rhs), s->id, s->index);
        case TermKind::Nu:
          if (sampled.count(s->id)) return resolve(s->lhs);
          return nu(s->id, resolve(s->lhs));
      }
      return s;
    };
    out[alpha_key(normalize(resolve(u)))] += w;
  });
  return out;
}

}  // namespace support
