#pragma once

#include "cpl/lambda_nu.hpp"
#include "cpl/prover.hpp"
#include "cpl/semantics.hpp"
#include "cpl/syntax.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cpl {

// Re-verifies every node; semantic side conditions are recomputed, recorded hypotheses
// are only trusted for the data they carry (the split of a nu rule and its rate).
CheckResult check_type_derivation(const TypeDerivation& d);

// Non-syntax-directed data for inference, consumed in preorder of the binders.
// A missing lambda annotation means C[1] of a fresh type variable; a missing nu
// rate defaults to the smallest measure among the parts of the body's label.
struct Annotations {
  std::vector<std::optional<QualType>> lambdas;
  std::vector<std::optional<Rational>> nus;
};

// Best effort over the syntax-directed fragment; nullopt is not a proof of untypability.
// Without `exponent` the largest exponent the fragment reaches is used.
std::optional<TypeDerivation> infer(const Context& gamma, const Term& t, const NameSet& names,
                                    const Annotations& ann = {}, std::optional<Rational> exponent = std::nullopt);

// Derivation surgeries used by the transport; each result re-checks.
TypeDerivation weaken_label(const TypeDerivation& d, const BoolFormula& c);  // c entails the label
TypeDerivation lower_exponent(const TypeDerivation& d, const Rational& r);   // r <= exponent
TypeDerivation add_names(const TypeDerivation& d, const NameSet& extra);
TypeDerivation with_context(const TypeDerivation& d, const Context& gamma);
// From Gamma, x : C[s] sigma |- t : b and Gamma |- u : c at exponent s, a derivation of t[u/x] : b & c.
TypeDerivation substitute(const TypeDerivation& t, const Name& x, const TypeDerivation& u);
// From a derivation over X u {a} of a term without a, one over X labelled by the projection
// of the label that forgets a.
TypeDerivation forget_name(const TypeDerivation& d, const Name& a);

// Same judgment for the reduct of d's subject by one step.
TypeDerivation transport_derivation(const TypeDerivation& d, const Step& step);

// o* = C^1_a(p(0,a) | ~p(0,a)),  (C^q s -> t)* = ~C^q_a s* | t*.
Formula translate_type(const Type& sigma, const Name& a);
Formula translate_qualtype(const QualType& s, const Name& a);
// |-{X u {a}} b |> C^r_a sigma*, F <| s1*, ..., F <| sn*  with a fresh.
Sequent translate_judgment(const Judgment& j);

// For a closed-context derivation: every event of the label, over the atoms the term and
// the label use, reaches normal form with the exponent's probability within fuel.
struct NormalizationReport {
  bool ok = true;
  std::size_t events = 0;
  std::string failure;  // first failing event
};
NormalizationReport check_normalization(const Judgment& j, unsigned fuel);

}  // namespace cpl
