#pragma once

#include "cpl/syntax.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace cpl {

// Finite assignment of bits to atoms; reading an unassigned atom is an error.
struct Valuation {
  std::map<Name, std::map<unsigned, bool>> assignment;

  bool at(const Atom& x) const;
  bool defined(const Atom& x) const;
  void set(const Atom& x, bool v) { assignment[x.name][x.index] = v; }
  // Drop every bit of `name` and use those of `other` instead.
  Valuation override_name(const Name& name, const Valuation& other) const;
};

// Calls `f` once for each of the 2^n assignments to `vars`, in binary counting order
// (the first atom is the most significant bit).
void for_each_valuation(const std::vector<Atom>& vars, const std::function<void(const Valuation&)>& f);
Valuation valuation_from_bits(const std::vector<Atom>& vars, unsigned long long bits);

bool eval_bool(const BoolFormula& b, const Valuation& f);

// Replaces every atom the callback decides, then constant-folds.
BoolFormula substitute(const BoolFormula& b, const std::function<std::optional<bool>(const Atom&)>& value);

Integer sat_count(const BoolFormula& b, const std::vector<Atom>& vars);
Rational measure(const BoolFormula& b);
bool entails(const BoolFormula& b, const BoolFormula& c);
bool equivalent(const BoolFormula& b, const BoolFormula& c);
bool satisfiable(const BoolFormula& b);

// A satisfying assignment of the atoms of b, if any.
std::optional<Valuation> find_model(const BoolFormula& b);

bool eval(const Formula& a, const Valuation& f, const NameSet& x);

Rational mu_projection(const BoolFormula& b, const Name& a, const Valuation& f, const NameSet& x);

struct ADecomposition {
  Name name;
  NameSet context;
  std::vector<SplitPart> parts;  // named: over `name`, rest: over the other names
};

ADecomposition a_decompose(const BoolFormula& b, const Name& a, const NameSet& x);
ADecomposition weak_a_decompose(const BoolFormula& b, const Name& a, const NameSet& x);

// Checks the three invariants: equivalence with b, pairwise disjoint rests, name discipline.
bool is_a_decomposition(const ADecomposition& d, const BoolFormula& b);
// Same without disjointness, but every named part must be satisfiable.
bool is_weak_a_decomposition(const ADecomposition& d, const BoolFormula& b);

// Boolean reading of a counting formula; a quantifier binding a name of x shadows it.
BoolFormula bool_of(const Formula& a, const NameSet& x);

enum class VerdictKind { Valid, Invalid, Contingent };

struct Verdict {
  VerdictKind kind = VerdictKind::Valid;
  Rational measure;
};

Verdict decide(const Formula& a, const NameSet& x);
std::string to_string(const Verdict& v);

bool labelled_valid(const LabelledFormula& l, const NameSet& x);
// Member-wise: some labelled formula of the succedent is valid on its own.
bool sequent_valid(const Sequent& s);

// Models of `b` that make the labelled formula fail, reading the label against bool_of.
std::optional<Valuation> falsifying_valuation(const Sequent& s);

std::string print(const Valuation& f);

}  // namespace cpl
