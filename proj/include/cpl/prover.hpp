#pragma once

#include "cpl/semantics.hpp"
#include "cpl/syntax.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cpl {

using SequentSet = std::vector<Sequent>;

// Sum of 3^cn over the members.
Integer ms(const SequentSet& s);

// One canonical decomposition step on the first labelled formula; nullopt when the
// sequent is already normal (atom-bodied, or empty).
std::optional<SequentSet> decompose_step(const Sequent& s);

struct ProofOutcome {
  bool proved = false;
  Derivation derivation;  // when proved
  Sequent invalid_normal;  // when refuted: the normal sequent that could not be closed
  Valuation witness;       // when refuted: falsifies the original conclusion
  std::size_t steps = 0;   // decomposition steps taken, each checked to lower ms
};

// Multi-succedent input: a valid member is moved to the front and proved with the rest passive.
ProofOutcome prove(const Sequent& s);

struct CheckResult {
  bool ok = true;
  std::string path;  // premise indices from the root, e.g. "root.0.1"
  std::string reason;
};

CheckResult check_derivation(const Derivation& d);

// Derived cut: from c |> ~A | B and d |> A with b |= c & d, a derivation of b |> B.
Derivation cut(const Derivation& d1, const Derivation& d2, const BoolFormula& b);

}  // namespace cpl
