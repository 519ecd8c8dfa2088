#pragma once

#include "cpl/syntax.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cpl {

struct PrefixEntry {
  FormulaKind kind = FormulaKind::CQ;  // CQ or DQ
  Rational q;
  Name name;
};

struct PrenexFormula {
  std::vector<PrefixEntry> prefix;
  Formula matrix;  // quantifier-free
};

Formula to_formula(const PrenexFormula& p);
bool is_quantifier_free(const Formula& a);
bool is_nsnf(const Formula& a);

// Negations pushed onto atoms; a negated quantifier becomes its dual with the same body.
Formula nsnf(const Formula& a);

PrenexFormula pnf(const Formula& a);
PrenexFormula ppnf(const Formula& a);

struct Epsilon {
  Rational eps;
  Rational p;
  unsigned k = 0;
};

// ~C^q_a A is equivalent to C^p_a ~A when the projections of A are multiples of 2^-k.
Epsilon epsilon(const Rational& q, unsigned k);
// k read off the Boolean reading of the body: number of index positions of `a`.
Epsilon epsilon(const Rational& q, const BoolFormula& body_bool, const Name& a);
unsigned semantic_k(const BoolFormula& body_bool, const Name& a);
unsigned syntactic_k(const Formula& body, const Name& a);

struct WagnerBlock {
  Name name;
  unsigned width = 0;  // distinct atoms of the name in the matrix
  Integer m;
  unsigned b = 0;
};

struct WagnerInstance {
  Formula matrix;
  std::vector<WagnerBlock> blocks;
  bool exact = true;
};

// Non-dyadic thresholds need `precision`; they are rounded up and the instance is marked inexact.
WagnerInstance export_wagner(const PrenexFormula& p, std::optional<unsigned> precision = std::nullopt);
// Rebuilds the all-C prefix with thresholds min{1, m/2^b}.
PrenexFormula import_wagner(const WagnerInstance& w);

std::string print(const PrenexFormula& p);
std::string print(const WagnerInstance& w);
WagnerInstance parse_wagner(const std::string& text);

}  // namespace cpl
