#include "cpl/normalform.hpp"

#include "cpl/semantics.hpp"
#include "cpl/textio.hpp"

#include <sstream>

namespace cpl {

Formula to_formula(const PrenexFormula& p) {
  Formula f = p.matrix;
  for (std::size_t i = p.prefix.size(); i-- > 0;) f = quant(p.prefix[i].kind, p.prefix[i].q, p.prefix[i].name, f);
  return f;
}

bool is_quantifier_free(const Formula& a) {
  if (is_quantifier(a)) return false;
  return (!a->lhs || is_quantifier_free(a->lhs)) && (!a->rhs || is_quantifier_free(a->rhs));
}

bool is_nsnf(const Formula& a) {
  if (a->kind == FormulaKind::Neg) return a->lhs->kind == FormulaKind::Atom;
  return (!a->lhs || is_nsnf(a->lhs)) && (!a->rhs || is_nsnf(a->rhs));
}

namespace {

FormulaKind dual(FormulaKind k) { return k == FormulaKind::CQ ? FormulaKind::DQ : FormulaKind::CQ; }

Formula push(const Formula& a, bool negated) {
  switch (a->kind) {
    case FormulaKind::Atom: return negated ? neg(a) : a;
    case FormulaKind::Neg: return push(a->lhs, !negated);
    case FormulaKind::And:
      return negated ? disj(push(a->lhs, true), push(a->rhs, true)) : conj(push(a->lhs, false), push(a->rhs, false));
    case FormulaKind::Or:
      return negated ? conj(push(a->lhs, true), push(a->rhs, true)) : disj(push(a->lhs, false), push(a->rhs, false));
    case FormulaKind::CQ:
    case FormulaKind::DQ:
      return quant(negated ? dual(a->kind) : a->kind, a->q, a->name, push(a->lhs, false));
  }
  return a;
}

// Formula with constants folded away; `value` is set when the whole thing is constant.
struct Folded {
  std::optional<bool> value;
  Formula f;
};

Folded fold(const Formula& a) {
  switch (a->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Neg: return {std::nullopt, a};
    case FormulaKind::And:
    case FormulaKind::Or: {
      bool is_and = a->kind == FormulaKind::And;
      Folded l = fold(a->lhs), r = fold(a->rhs);
      // absorbing element: false for and, true for or
      if ((l.value && *l.value != is_and) || (r.value && *r.value != is_and)) return {!is_and, nullptr};
      if (l.value) return r;
      if (r.value) return l;
      return {std::nullopt, is_and ? conj(l.f, r.f) : disj(l.f, r.f)};
    }
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      bool c = a->kind == FormulaKind::CQ;
      if (a->q == 0) return {c, nullptr};  // mu >= 0 always, mu < 0 never
      Folded body = fold(a->lhs);
      // with q > 0: a constant body has measure 0 or 1
      if (body.value) return {c ? *body.value : !*body.value, nullptr};
      return {std::nullopt, quant(a->kind, a->q, a->name, body.f)};
    }
  }
  return {std::nullopt, a};
}

// ~C^q_a B == D^q_a B: only the head of the prefix changes.
PrenexFormula negate(const PrenexFormula& p) {
  PrenexFormula out = p;
  if (out.prefix.empty()) out.matrix = nsnf(neg(p.matrix));
  else out.prefix.front().kind = dual(out.prefix.front().kind);
  return out;
}

PrenexFormula tail(const PrenexFormula& p) { return {{p.prefix.begin() + 1, p.prefix.end()}, p.matrix}; }

// Extrudes the quantifiers of L op R, taking L's head first.
PrenexFormula combine(FormulaKind op, const PrenexFormula& l, const PrenexFormula& r) {
  FormulaKind flip = op == FormulaKind::And ? FormulaKind::Or : FormulaKind::And;
  auto prepend = [](const PrefixEntry& e, PrenexFormula p) {
    p.prefix.insert(p.prefix.begin(), e);
    return p;
  };
  if (!l.prefix.empty()) {
    const PrefixEntry& h = l.prefix.front();
    if (h.kind == FormulaKind::CQ) return prepend(h, combine(op, tail(l), r));
    // D(B) & A == D(B | ~A),  D(B) | A == D(B & ~A)
    return prepend(h, combine(flip, tail(l), negate(r)));
  }
  if (!r.prefix.empty()) {
    const PrefixEntry& h = r.prefix.front();
    if (h.kind == FormulaKind::CQ) return prepend(h, combine(op, l, tail(r)));
    return prepend(h, combine(flip, negate(l), tail(r)));
  }
  return {{}, op == FormulaKind::And ? conj(l.matrix, r.matrix) : disj(l.matrix, r.matrix)};
}

PrenexFormula extrude(const Formula& a) {
  switch (a->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Neg: return {{}, a};
    case FormulaKind::And:
    case FormulaKind::Or: return combine(a->kind, extrude(a->lhs), extrude(a->rhs));
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      PrenexFormula body = extrude(a->lhs);
      body.prefix.insert(body.prefix.begin(), {a->kind, a->q, a->name});
      return body;
    }
  }
  return {{}, a};
}

}  // namespace

Formula nsnf(const Formula& a) { return push(a, false); }

PrenexFormula pnf(const Formula& a) {
  Formula renamed = alpha_rename_bound(a);
  Folded folded = fold(nsnf(renamed));
  if (folded.value) {
    // constants have no syntax: use a tautology or a contradiction over a fresh name
    Name t = fresh_name("t", all_names(a));
    Formula x = atom(0, t);
    Formula m = *folded.value ? disj(x, neg(x)) : conj(x, neg(x));
    return {{{FormulaKind::CQ, 1, t}}, m};
  }
  return extrude(folded.f);
}

PrenexFormula ppnf(const Formula& a) {
  PrenexFormula p = pnf(a);
  NameSet context = free_names(a);
  // Outermost first: rewriting a D flips the entry below it, so inner entries are settled afterwards.
  for (std::size_t i = 0; i < p.prefix.size(); ++i) {
    context.insert(p.prefix[i].name);
    if (p.prefix[i].kind == FormulaKind::CQ) continue;
    PrenexFormula body{{p.prefix.begin() + static_cast<long>(i) + 1, p.prefix.end()}, p.matrix};
    Epsilon e = epsilon(p.prefix[i].q, bool_of(to_formula(body), context), p.prefix[i].name);
    PrenexFormula negated = negate(body);
    p.prefix.resize(i + 1);
    p.prefix[i].kind = FormulaKind::CQ;
    p.prefix[i].q = e.p;
    p.prefix.insert(p.prefix.end(), negated.prefix.begin(), negated.prefix.end());
    p.matrix = negated.matrix;
  }
  return p;
}

// ------------------------------------------------------------------ epsilon

Epsilon epsilon(const Rational& q, unsigned k) {
  if (!in_unit_interval(q) || q == 0) throw Error("epsilon needs 0 < q <= 1");
  Epsilon e;
  e.k = k;
  e.eps = in_dyadic_grid(q, k) ? Rational(-inv_pow2(k + 1)) : Rational(0);
  e.p = 1 - (q + e.eps);
  return e;
}

unsigned semantic_k(const BoolFormula& body_bool, const Name& a) {
  unsigned k = 0;
  for (const auto& at : atoms(body_bool))
    if (at.name == a) k = std::max(k, at.index + 1);
  return k;
}

unsigned syntactic_k(const Formula& body, const Name& a) {
  auto m = max_free_index(body, a);
  return m ? *m + 1 : 0;
}

Epsilon epsilon(const Rational& q, const BoolFormula& body_bool, const Name& a) {
  return epsilon(q, semantic_k(body_bool, a));
}

// ------------------------------------------------------------------- Wagner

WagnerInstance export_wagner(const PrenexFormula& p, std::optional<unsigned> precision) {
  WagnerInstance w;
  w.matrix = p.matrix;
  AtomSet matrix_atoms = free_atoms(p.matrix);
  for (const auto& e : p.prefix) {
    if (e.kind != FormulaKind::CQ) throw Error("export needs a positive prenex form");
    WagnerBlock block;
    block.name = e.name;
    for (const auto& at : matrix_atoms)
      if (at.name == e.name) ++block.width;
    if (auto b = dyadic_exponent(e.q)) {
      block.b = *b;
      block.m = Rational(e.q * pow2(*b)).get_num();
    } else {
      if (!precision) throw Error("threshold " + to_string(e.q) + " is not dyadic; a precision is needed");
      block.b = *precision;
      block.m = Rational(ceil_to_grid(e.q, *precision) * pow2(*precision)).get_num();
      w.exact = false;
    }
    w.blocks.push_back(block);
  }
  return w;
}

PrenexFormula import_wagner(const WagnerInstance& w) {
  PrenexFormula p;
  p.matrix = w.matrix;
  for (const auto& b : w.blocks) {
    Rational q = Rational(b.m) / pow2(b.b);
    if (q > 1) q = 1;
    p.prefix.push_back({FormulaKind::CQ, q, b.name});
  }
  return p;
}

std::string print(const PrenexFormula& p) { return print(to_formula(p)); }

std::string print(const WagnerInstance& w) {
  std::string out = "matrix " + print(w.matrix) + "\n";
  for (const auto& b : w.blocks)
    out += "block " + b.name + " " + b.m.get_str() + " " + std::to_string(b.b) + "  # width " +
           std::to_string(b.width) + "\n";
  if (!w.exact) out += "inexact\n";
  return out;
}

WagnerInstance parse_wagner(const std::string& text) {
  WagnerInstance w;
  std::istringstream in(text);
  std::string line;
  bool have_matrix = false;
  while (std::getline(in, line)) {
    Parser p(line);
    if (p.peek().kind == Tok::End) continue;
    if (p.accept("matrix")) {
      w.matrix = p.formula();
      have_matrix = true;
    } else if (p.accept("block")) {
      WagnerBlock b;
      b.name = p.name();
      b.m = Integer(p.digits());
      b.b = p.number();
      w.blocks.push_back(b);
    } else if (p.accept("inexact")) {
      w.exact = false;
    } else {
      p.fail({"'matrix'", "'block'", "'inexact'"});
    }
    p.finish();
  }
  if (!have_matrix) throw Error("Wagner record without a matrix line");
  AtomSet matrix_atoms = free_atoms(w.matrix);
  for (auto& b : w.blocks)
    for (const auto& at : matrix_atoms)
      if (at.name == b.name) ++b.width;
  return w;
}

}  // namespace cpl
