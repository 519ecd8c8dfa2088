#pragma once

#include "cpl/prover.hpp"
#include "cpl/syntax.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cpl {

// Minimal fragment. Formulas A = C[q] A0 and A0 = Flip(i) | A -> A0, with unnamed quantifiers.
struct McplBaseNode;
using McplBase = std::shared_ptr<const McplBaseNode>;

struct McplFormula {
  Rational q;
  McplBase body;
};

struct McplBaseNode {
  bool flip = true;
  unsigned index = 0;  // Flip
  McplFormula arg;     // arrow
  McplBase result;
};

McplBase mflip(unsigned i);
McplBase marrow(McplFormula arg, McplBase result);
bool same(const McplFormula& a, const McplFormula& b);
bool same(const McplBase& a, const McplBase& b);

// The associated types: Flip(i) goes to o.
Type bullet(const McplBase& a);
QualType bullet(const McplFormula& a);

struct McplSequent {
  std::vector<McplFormula> context;  // a multiset, kept in order for the decoration
  NameSet names;
  BoolFormula label;
  McplFormula formula;
};

enum class McplRule { Bot, Ax, ImpE, ImpI, Or, Count };

// ImpE is the introduction of an arrow (decorates to an abstraction), ImpI its
// elimination (an application). Or flips the coin (name, index); Count binds name.
struct McplDerivation {
  McplRule rule = McplRule::Bot;
  Name name;
  unsigned index = 0;
  McplSequent conclusion;
  std::vector<Hypothesis> hyps;
  std::vector<McplDerivation> premises;
};

// Text forms:  C[1/2] (C[1] Flip(0) -> Flip(1))
//              C[1] Flip(0), C[1] Flip(1) |-{a} x(0,a) |> C[1] Flip(0)
//              (RImpE sequent [hyps] premise)   (ROr a 0 sequent [] left right)   (RC a sequent [...] p)
McplFormula parse_mcpl_formula(const std::string& text);
McplSequent parse_mcpl_sequent(const std::string& text);
McplDerivation parse_mcpl_derivation(const std::string& text);
std::string print(const McplFormula& a);
std::string print(const McplSequent& s);
std::string print(const McplDerivation& d);

CheckResult check_mcpl_derivation(const McplDerivation& d);

// The context variables are x1..xn by position; an axiom uses the last matching one.
struct Decoration {
  Term term;
  TypeDerivation derivation;
};
Decoration decorate(const McplDerivation& d);

// |-{X} b |> A*, F <| Delta*  through the associated typing judgment.
Sequent translate_mcpl(const McplSequent& s);

}  // namespace cpl
