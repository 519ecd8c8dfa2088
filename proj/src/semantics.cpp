#include "cpl/semantics.hpp"

#include "cpl/textio.hpp"

#include <algorithm>

namespace cpl {

bool Valuation::defined(const Atom& x) const {
  auto it = assignment.find(x.name);
  return it != assignment.end() && it->second.count(x.index);
}

bool Valuation::at(const Atom& x) const {
  auto it = assignment.find(x.name);
  if (it != assignment.end()) {
    auto jt = it->second.find(x.index);
    if (jt != it->second.end()) return jt->second;
  }
  throw Error("unbound atom x(" + std::to_string(x.index) + "," + x.name + ")");
}

Valuation Valuation::override_name(const Name& name, const Valuation& other) const {
  Valuation out = *this;
  out.assignment.erase(name);
  auto it = other.assignment.find(name);
  if (it != other.assignment.end()) out.assignment[name] = it->second;
  return out;
}

Valuation valuation_from_bits(const std::vector<Atom>& vars, unsigned long long bits) {
  Valuation f;
  for (std::size_t i = 0; i < vars.size(); ++i) f.set(vars[i], (bits >> (vars.size() - 1 - i)) & 1ULL);
  return f;
}

void for_each_valuation(const std::vector<Atom>& vars, const std::function<void(const Valuation&)>& f) {
  if (vars.size() >= 63) throw Error("too many atoms to enumerate");
  unsigned long long total = 1ULL << vars.size();
  for (unsigned long long bits = 0; bits < total; ++bits) f(valuation_from_bits(vars, bits));
}

bool eval_bool(const BoolFormula& b, const Valuation& f) {
  switch (b->kind) {
    case BoolKind::Var: return f.at({b->name, b->index});
    case BoolKind::Top: return true;
    case BoolKind::Bot: return false;
    case BoolKind::Neg: return !eval_bool(b->lhs, f);
    case BoolKind::And: return eval_bool(b->lhs, f) && eval_bool(b->rhs, f);
    case BoolKind::Or: return eval_bool(b->lhs, f) || eval_bool(b->rhs, f);
  }
  return false;
}

BoolFormula substitute(const BoolFormula& b, const std::function<std::optional<bool>(const Atom&)>& value) {
  std::function<BoolFormula(const BoolFormula&)> go = [&](const BoolFormula& x) -> BoolFormula {
    switch (x->kind) {
      case BoolKind::Var: {
        auto v = value({x->name, x->index});
        if (!v) return x;
        return *v ? btop() : bbot();
      }
      case BoolKind::Top:
      case BoolKind::Bot: return x;
      case BoolKind::Neg: return bnot(go(x->lhs));
      case BoolKind::And: return band(go(x->lhs), go(x->rhs));
      case BoolKind::Or: return bor(go(x->lhs), go(x->rhs));
    }
    return x;
  };
  return simplify(go(b));
}

// ------------------------------------------------------------- counting

namespace {

// Flattened formula over numbered variables, evaluated three-valued so that
// enumeration can stop as soon as the value is forced.
struct Compiled {
  struct Node {
    BoolKind kind;
    int var = -1;
    int l = -1, r = -1;
  };
  std::vector<Node> nodes;
  int root = -1;

  Compiled(const BoolFormula& b, const std::map<Atom, int>& pos) { root = add(b, pos); }

  int add(const BoolFormula& b, const std::map<Atom, int>& pos) {
    Node n{b->kind};
    if (b->kind == BoolKind::Var) {
      auto it = pos.find({b->name, b->index});
      if (it == pos.end()) throw Error("atom outside the variable list");
      n.var = it->second;
    }
    if (b->lhs) n.l = add(b->lhs, pos);
    if (b->rhs) n.r = add(b->rhs, pos);
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }

  // -1 unknown, 0 false, 1 true
  int eval3(int i, const std::vector<signed char>& vals) const {
    const Node& n = nodes[i];
    switch (n.kind) {
      case BoolKind::Var: return vals[n.var];
      case BoolKind::Top: return 1;
      case BoolKind::Bot: return 0;
      case BoolKind::Neg: {
        int v = eval3(n.l, vals);
        return v < 0 ? -1 : 1 - v;
      }
      case BoolKind::And: {
        int l = eval3(n.l, vals);
        if (l == 0) return 0;
        int r = eval3(n.r, vals);
        if (r == 0) return 0;
        return (l == 1 && r == 1) ? 1 : -1;
      }
      case BoolKind::Or: {
        int l = eval3(n.l, vals);
        if (l == 1) return 1;
        int r = eval3(n.r, vals);
        if (r == 1) return 1;
        return (l == 0 && r == 0) ? 0 : -1;
      }
    }
    return -1;
  }
};

Integer count_from(const Compiled& c, std::vector<signed char>& vals, std::size_t pos) {
  int v = c.eval3(c.root, vals);
  std::size_t n = vals.size();
  if (v == 1) return Integer(1) << static_cast<unsigned long>(n - pos);
  if (v == 0) return 0;
  vals[pos] = 1;
  Integer total = count_from(c, vals, pos + 1);
  vals[pos] = 0;
  total += count_from(c, vals, pos + 1);
  vals[pos] = -1;
  return total;
}

bool find_from(const Compiled& c, std::vector<signed char>& vals, std::size_t pos) {
  int v = c.eval3(c.root, vals);
  if (v == 1) {
    for (std::size_t i = pos; i < vals.size(); ++i) vals[i] = 0;
    return true;
  }
  if (v == 0) return false;
  for (signed char bit : {1, 0}) {
    vals[pos] = bit;
    if (find_from(c, vals, pos + 1)) return true;
  }
  vals[pos] = -1;
  return false;
}

std::vector<Atom> atom_list(const BoolFormula& b) {
  auto s = atoms(b);
  return {s.begin(), s.end()};
}

}  // namespace

Integer sat_count(const BoolFormula& b, const std::vector<Atom>& vars) {
  std::map<Atom, int> pos;
  for (std::size_t i = 0; i < vars.size(); ++i) pos.emplace(vars[i], static_cast<int>(i));
  if (pos.size() != vars.size()) throw Error("duplicate atom in the variable list");
  Compiled c(b, pos);
  std::vector<signed char> vals(vars.size(), -1);
  return count_from(c, vals, 0);
}

Rational measure(const BoolFormula& b) {
  auto vars = atom_list(b);
  Integer den = Integer(1) << static_cast<unsigned long>(vars.size());
  Rational q(sat_count(b, vars), den);
  q.canonicalize();
  return q;
}

std::optional<Valuation> find_model(const BoolFormula& b) {
  auto vars = atom_list(b);
  std::map<Atom, int> pos;
  for (std::size_t i = 0; i < vars.size(); ++i) pos.emplace(vars[i], static_cast<int>(i));
  Compiled c(b, pos);
  std::vector<signed char> vals(vars.size(), -1);
  if (!find_from(c, vals, 0)) return std::nullopt;
  Valuation f;
  for (std::size_t i = 0; i < vars.size(); ++i) f.set(vars[i], vals[i] == 1);
  return f;
}

bool satisfiable(const BoolFormula& b) { return find_model(b).has_value(); }
bool entails(const BoolFormula& b, const BoolFormula& c) { return !satisfiable(band(b, bnot(c))); }
bool equivalent(const BoolFormula& b, const BoolFormula& c) { return entails(b, c) && entails(c, b); }

// ---------------------------------------------------------- evaluation

bool eval(const Formula& a, const Valuation& f, const NameSet& x) {
  switch (a->kind) {
    case FormulaKind::Atom: return f.at({a->name, a->index});
    case FormulaKind::Neg: return !eval(a->lhs, f, x);
    case FormulaKind::And: return eval(a->lhs, f, x) && eval(a->rhs, f, x);
    case FormulaKind::Or: return eval(a->lhs, f, x) || eval(a->rhs, f, x);
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      std::vector<Atom> bound;
      for (const auto& at : free_atoms(a->lhs))
        if (at.name == a->name) bound.push_back(at);
      NameSet inner = x;
      inner.insert(a->name);
      Integer hits = 0;
      for_each_valuation(bound, [&](const Valuation& g) {
        if (eval(a->lhs, f.override_name(a->name, g), inner)) ++hits;
      });
      Rational frac(hits, Integer(1) << static_cast<unsigned long>(bound.size()));
      frac.canonicalize();
      return a->kind == FormulaKind::CQ ? frac >= a->q : frac < a->q;
    }
  }
  return false;
}

Rational mu_projection(const BoolFormula& b, const Name& a, const Valuation& f, const NameSet& x) {
  if (x.count(a)) throw Error("projected name must not be in the context");
  for (const auto& n : free_names(b))
    if (n != a && !x.count(n)) throw Error("name " + n + " outside the context");
  auto residual = substitute(b, [&](const Atom& at) -> std::optional<bool> {
    if (at.name == a) return std::nullopt;
    return f.at(at);
  });
  return measure(residual);
}

// ------------------------------------------------------- decompositions

ADecomposition a_decompose(const BoolFormula& b, const Name& a, const NameSet& x) {
  for (const auto& n : free_names(b))
    if (n != a && !x.count(n)) throw Error("name " + n + " outside the context");
  std::vector<Atom> others;
  for (const auto& at : atoms(b))
    if (at.name != a) others.push_back(at);
  ADecomposition out{a, x, {}};
  if (others.empty()) {
    out.parts.push_back({simplify(b), btop()});
    return out;
  }
  if (others.size() >= 63) throw Error("too many atoms to decompose");
  unsigned long long total = 1ULL << others.size();
  for (unsigned long long m = 0; m < total; ++m) {
    // bit j of the minterm (most significant first) clear means the atom is positive
    std::map<Atom, bool> lit;
    std::vector<BoolFormula> conj;
    for (std::size_t j = 0; j < others.size(); ++j) {
      bool positive = !((m >> (others.size() - 1 - j)) & 1ULL);
      lit[others[j]] = positive;
      auto v = bvar(others[j].index, others[j].name);
      conj.push_back(positive ? v : bnot(v));
    }
    auto d = substitute(b, [&](const Atom& at) -> std::optional<bool> {
      auto it = lit.find(at);
      if (it == lit.end()) return std::nullopt;
      return it->second;
    });
    out.parts.push_back({d, big_and(conj)});
  }
  return out;
}

ADecomposition weak_a_decompose(const BoolFormula& b, const Name& a, const NameSet& x) {
  ADecomposition d = a_decompose(b, a, x);
  std::erase_if(d.parts, [](const SplitPart& p) { return !satisfiable(p.named); });
  return d;
}

namespace {

bool names_ok(const ADecomposition& d) {
  for (const auto& p : d.parts) {
    for (const auto& n : free_names(p.named))
      if (n != d.name) return false;
    for (const auto& n : free_names(p.rest))
      if (n == d.name) return false;
  }
  return true;
}

BoolFormula recombine(const ADecomposition& d) {
  std::vector<BoolFormula> terms;
  for (const auto& p : d.parts) terms.push_back(band(p.named, p.rest));
  return big_or(terms);
}

}  // namespace

bool is_a_decomposition(const ADecomposition& d, const BoolFormula& b) {
  if (!names_ok(d) || !equivalent(recombine(d), b)) return false;
  for (std::size_t i = 0; i < d.parts.size(); ++i)
    for (std::size_t j = i + 1; j < d.parts.size(); ++j)
      if (satisfiable(band(d.parts[i].rest, d.parts[j].rest))) return false;
  return true;
}

bool is_weak_a_decomposition(const ADecomposition& d, const BoolFormula& b) {
  if (!names_ok(d) || !equivalent(recombine(d), b)) return false;
  return std::all_of(d.parts.begin(), d.parts.end(), [](const SplitPart& p) { return satisfiable(p.named); });
}

// ------------------------------------------------------------ Bool / Val

BoolFormula bool_of(const Formula& a, const NameSet& x) {
  switch (a->kind) {
    case FormulaKind::Atom: return bvar(a->index, a->name);
    case FormulaKind::Neg: return simplify(bnot(bool_of(a->lhs, x)));
    case FormulaKind::And: return simplify(band(bool_of(a->lhs, x), bool_of(a->rhs, x)));
    case FormulaKind::Or: return simplify(bor(bool_of(a->lhs, x), bool_of(a->rhs, x)));
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      NameSet inner = x;
      inner.insert(a->name);
      NameSet outer = x;
      outer.erase(a->name);
      auto dec = a_decompose(bool_of(a->lhs, inner), a->name, outer);
      std::vector<BoolFormula> chosen;
      for (const auto& p : dec.parts) {
        bool ge = measure(p.named) >= a->q;
        if (ge == (a->kind == FormulaKind::CQ)) chosen.push_back(p.rest);
      }
      return simplify(big_or(chosen));
    }
  }
  return bbot();
}

Verdict decide(const Formula& a, const NameSet& x) {
  auto b = bool_of(a, x);
  Rational m = measure(b);
  if (m == 1) return {VerdictKind::Valid, m};
  if (m == 0) return {VerdictKind::Invalid, m};
  return {VerdictKind::Contingent, m};
}

std::string to_string(const Verdict& v) {
  switch (v.kind) {
    case VerdictKind::Valid: return "valid";
    case VerdictKind::Invalid: return "invalid";
    case VerdictKind::Contingent: return "contingent " + to_string(v.measure);
  }
  return "";
}

bool labelled_valid(const LabelledFormula& l, const NameSet& x) {
  auto body = bool_of(l.body, x);
  return l.dir == Direction::Into ? entails(l.label, body) : entails(body, l.label);
}

bool sequent_valid(const Sequent& s) {
  return std::any_of(s.succedent.begin(), s.succedent.end(),
                     [&](const LabelledFormula& l) { return labelled_valid(l, s.names); });
}

std::optional<Valuation> falsifying_valuation(const Sequent& s) {
  std::vector<BoolFormula> fails;
  for (const auto& l : s.succedent) {
    auto body = bool_of(l.body, s.names);
    fails.push_back(l.dir == Direction::Into ? band(l.label, bnot(body)) : band(body, bnot(l.label)));
  }
  return find_model(simplify(big_and(fails)));
}

std::string print(const Valuation& f) {
  std::string out;
  for (const auto& [name, bits] : f.assignment)
    for (const auto& [i, v] : bits) {
      if (!out.empty()) out += " ";
      out += print(bvar(i, name)) + "=" + (v ? "1" : "0");
    }
  return out.empty() ? "(empty)" : out;
}

}  // namespace cpl
