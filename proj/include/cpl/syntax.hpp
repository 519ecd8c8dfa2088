#pragma once

#include "cpl/rational.hpp"

#include <compare>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Name = std::string;
using NameSet = std::set<Name>;

struct Atom {
  Name name;
  unsigned index = 0;
  auto operator<=>(const Atom&) const = default;
};
using AtomSet = std::set<Atom>;

Name fresh_name(const Name& base, const NameSet& avoid);

// ---------------------------------------------------------------- formulas

enum class FormulaKind { Atom, Neg, And, Or, CQ, DQ };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FormulaKind kind;
  unsigned index = 0;
  Name name;
  Rational q;
  Formula lhs, rhs;
};

Formula atom(unsigned index, const Name& name);
Formula neg(Formula a);
Formula conj(Formula a, Formula b);
Formula disj(Formula a, Formula b);
Formula cq(const Rational& q, const Name& name, Formula body);
Formula dq(const Rational& q, const Name& name, Formula body);
Formula quant(FormulaKind kind, const Rational& q, const Name& name, Formula body);

bool is_quantifier(const Formula& a);
bool same(const Formula& a, const Formula& b);
NameSet free_names(const Formula& a);
NameSet all_names(const Formula& a);
std::size_t size(const Formula& a);

// Free atoms: atoms whose name is not captured by an enclosing quantifier.
AtomSet free_atoms(const Formula& a);

// Largest index of a free atom named `a`, if any.
std::optional<unsigned> max_free_index(const Formula& f, const Name& a);

Formula rename_free(const Formula& f, const Name& from, const Name& to);

// No two quantifiers bind the same name and no binder clashes with a free name.
Formula alpha_rename_bound(const Formula& a);

// ------------------------------------------------------- boolean formulas

enum class BoolKind { Var, Top, Bot, Neg, And, Or };

struct BoolNode;
using BoolFormula = std::shared_ptr<const BoolNode>;

struct BoolNode {
  BoolKind kind;
  unsigned index = 0;
  Name name;
  BoolFormula lhs, rhs;
};

BoolFormula bvar(unsigned index, const Name& name);
BoolFormula btop();
BoolFormula bbot();
BoolFormula bnot(BoolFormula a);
BoolFormula band(BoolFormula a, BoolFormula b);
BoolFormula bor(BoolFormula a, BoolFormula b);
BoolFormula big_or(const std::vector<BoolFormula>& parts);
BoolFormula big_and(const std::vector<BoolFormula>& parts);

// Constant folding only; the result is logically equal to the input.
BoolFormula simplify(const BoolFormula& b);

bool same(const BoolFormula& a, const BoolFormula& b);
NameSet free_names(const BoolFormula& b);
AtomSet atoms(const BoolFormula& b);
BoolFormula rename_name(const BoolFormula& b, const Name& from, const Name& to);

// ------------------------------------------------------------- sequents

enum class Direction { Into, From };

struct LabelledFormula {
  BoolFormula label;
  Direction dir = Direction::Into;
  Formula body;
};

struct Sequent {
  NameSet names;
  std::vector<LabelledFormula> succedent;
};

bool same(const LabelledFormula& a, const LabelledFormula& b);
bool same(const Sequent& a, const Sequent& b);

unsigned cn(const Formula& a);
unsigned cn(const LabelledFormula& l);
// The empty sequent has no formula and counts 0.
unsigned cn(const Sequent& s);

// ----------------------------------------------------------------- terms

enum class TermKind { Var, Lam, App, Choice, Nu };

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  TermKind kind;
  Name id;  // variable, lambda binder, choice name or generated name
  unsigned index = 0;
  Term lhs, rhs;  // Lam/Nu body in lhs
};

Term var(const Name& x);
Term lam(const Name& x, Term body);
Term app(Term f, Term a);
Term choice(Term l, Term r, const Name& a, unsigned index);
Term nu(const Name& a, Term body);

Term omega_term();
Term id_term();

bool alpha_equal(const Term& a, const Term& b);
// Canonical text with de Bruijn indices for both kinds of binders.
std::string alpha_key(const Term& t);
NameSet free_vars(const Term& t);
NameSet free_names(const Term& t);
NameSet all_identifiers(const Term& t);
std::size_t size(const Term& t);

Term subst(const Term& t, const Name& x, const Term& u);
Term rename_var(const Term& t, const Name& from, const Name& to);
Term rename_name(const Term& t, const Name& from, const Name& to);

// ----------------------------------------------------------------- types

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

struct QualType {
  Rational q;
  Type sigma;
};

struct TypeNode {
  bool base = true;
  QualType arg;
  Type result;
};

Type base_type();
Type arrow(const Rational& q, Type arg, Type result);
bool same(const Type& a, const Type& b);
bool same(const QualType& a, const QualType& b);

// ---------------------------------------------------- recorded hypotheses

enum class HypKind { Entails, Measure, Split };
enum class Cmp { Eq, Ge, Lt };

struct SplitPart {
  BoolFormula named;  // over the split name
  BoolFormula rest;   // over the remaining names
};

struct Hypothesis {
  HypKind kind = HypKind::Entails;
  BoolFormula lhs, rhs;  // Entails: lhs |= rhs; Measure: mu(lhs) cmp q
  Cmp cmp = Cmp::Eq;
  Rational q;
  Name name;  // Split
  std::vector<SplitPart> parts;
};

Hypothesis hyp_entails(BoolFormula lhs, BoolFormula rhs);
Hypothesis hyp_measure(BoolFormula b, Cmp cmp, const Rational& q);
Hypothesis hyp_split(const Name& a, std::vector<SplitPart> parts);
bool same(const Hypothesis& a, const Hypothesis& b);

// ---------------------------------------------------------- derivations

enum class Rule {
  Ax1, Ax2, UnionInto, InterFrom, NegInto, NegFrom, Or1Into, Or2Into, OrFrom,
  AndInto, And1From, And2From, MuInto, MuFrom, CInto, CFrom, DInto, DFrom, Cut
};

struct Derivation {
  Rule rule = Rule::Ax1;
  Sequent conclusion;
  std::vector<Hypothesis> hyps;
  std::vector<Derivation> premises;
};

std::size_t size(const Derivation& d);

struct TypedVar {
  Name x;
  QualType type;
};
using Context = std::vector<TypedVar>;

struct Judgment {
  Context context;
  NameSet names;
  Rational exponent;
  Term term;
  BoolFormula label;
  Type type;
};

enum class TypeRule { Bot, Id, Union, Lam, App, ChoiceL, ChoiceR, Nu };

struct TypeDerivation {
  TypeRule rule = TypeRule::Bot;
  Judgment judgment;
  std::vector<Hypothesis> hyps;
  std::vector<TypeDerivation> premises;
};

const QualType* lookup(const Context& ctx, const Name& x);
Context extend(const Context& ctx, const Name& x, const QualType& t);
bool same(const Judgment& a, const Judgment& b);

}  // namespace cpl
