#pragma once

#include "cpl/semantics.hpp"
#include "cpl/syntax.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cpl {

struct Event {
  NameSet names;
  Valuation f;
};

// Resolves every choice on a name of the event: bit 1 picks the left operand, bit 0 the right.
Term apply_event(const Event& e, const Term& t);

// Renames nu-binders apart from each other and from the free names (only where they clash).
Term rename_bound_names(const Term& t);

// Order used to arrange choices: free names outside bound ones (free ones by name), a name
// bound further out outside one bound further in, and for one name the higher index outside.
// Smaller sorts outward.
struct ChoiceKey {
  int bound = 0;  // 0 free, 1 bound
  Name name;      // free names only
  unsigned depth = 0;
  unsigned index = 0;
  bool operator<(const ChoiceKey& o) const;
  bool operator==(const ChoiceKey& o) const;
};

Term pnf_term(const Term& t);

bool is_pseudo_value(const Term& t);

struct PnfTerm {
  bool pseudo_value = true;
  Term term;
  Name name;                    // nu-tree only
  unsigned level = 0;           // index at the root of the tree
  std::vector<PnfTerm> leaves;  // nu-tree only, left to right
};

// Classification of a name-closed term already in permutative normal form; nullopt otherwise.
std::optional<PnfTerm> is_pnf(const Term& t);

struct Distribution {
  // alpha-canonical key -> (representative, weight)
  std::map<std::string, std::pair<Term, Rational>> entries;
  Rational total() const;
};

Distribution distribution(const Term& t);
bool is_head_normal(const Term& t);
Rational normal_prob(const Term& t);

// Lines "weight  term", heaviest first, ties by text.
std::string print(const Distribution& d);

struct ReduceResult {
  Term term;
  unsigned rounds = 0;
  bool exhausted = false;  // fuel ran out before a beta-normal form
};

// Each round puts the term in permutative normal form and contracts the leftmost-outermost
// beta-redex inside every leaf of its choice tree; fuel bounds the rounds.
ReduceResult reduce(const Term& t, unsigned fuel);

// One leftmost-outermost beta step anywhere in t (under lambdas too).
std::optional<Term> beta_step(const Term& t);

bool normalizes_with_prob(const Term& t, const Rational& r, unsigned fuel);

// ------------------------------------------------------------- single steps

enum class StepKind { Beta, Perm };

// A redex position: 0 goes to the left operand (or a binder body), 1 to the right one.
// Permutative rules are numbered 1..12 in this order:
//   t+t -> t;  (t+u)+v -> t+v;  t+(u+v) -> t+v;  \x.(t+u) -> (\x.t)+(\x.u);
//   (t+u)v -> tv+uv;  t(u+v) -> tu+tv;  the two choice swaps (left, right);
//   nu b.(t+u) -> (nu b.t)+(nu b.u);  nu a.t -> t;  \x.nu a.t -> nu a.\x.t;  (nu a.t)u -> nu a.tu.
// The swaps follow the ChoiceKey order; the same-choice rules need equal keys.
struct Step {
  StepKind kind = StepKind::Beta;
  std::vector<unsigned> path;
  unsigned rule = 0;
};

std::optional<Term> apply_step(const Term& t, const Step& s);
std::vector<Step> redexes(const Term& t, bool beta = true, bool perm = true);
std::string print(const Step& s);

}  // namespace cpl
