#pragma once

#include "cpl/syntax.hpp"

#include <string>
#include <vector>

namespace cpl {

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

struct ParseError : Error {
  SourceSpan span;
  std::vector<std::string> expected;
  std::string found;
  ParseError(SourceSpan s, std::vector<std::string> exp, std::string f);
  ParseError(SourceSpan s, const std::string& message);
};

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

std::vector<Token> tokenize(const std::string& text);

// Recursive-descent parser over one input; every category of the grammar has an entry point.
class Parser {
 public:
  explicit Parser(const std::string& text);

  Formula formula();
  BoolFormula boolean();
  LabelledFormula labelled();
  Sequent sequent();
  Term term();
  Type type();
  QualType qualtype();
  Rational rational();
  Hypothesis hypothesis();
  Derivation derivation();
  Judgment judgment();
  TypeDerivation type_derivation();

  void finish();

  const Token& peek(std::size_t ahead = 0) const;
  bool at(const std::string& text, std::size_t ahead = 0) const;
  bool accept(const std::string& text);
  const Token& expect(const std::string& text);
  Name name();
  unsigned number();
  std::string digits();  // a natural number of any size, as text
  [[noreturn]] void fail(std::vector<std::string> expected) const;
  NameSet name_set();
  std::vector<Hypothesis> hypotheses();

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  Formula disjunction();
  Formula conjunction();
  Formula unary();
  BoolFormula bool_disjunction();
  BoolFormula bool_conjunction();
  BoolFormula bool_unary();
  Term choice_level();
  Term application();
  Term atomic();
  Term binder();
  bool starts_atomic() const;
  Type atomic_type();
  bool starts_boolean() const;
};

Formula parse_formula(const std::string& text);
BoolFormula parse_bool(const std::string& text);
LabelledFormula parse_labelled(const std::string& text);
Sequent parse_sequent(const std::string& text);
Term parse_term(const std::string& text);
Type parse_type(const std::string& text);
Derivation parse_derivation(const std::string& text);
Judgment parse_judgment(const std::string& text);
TypeDerivation parse_type_derivation(const std::string& text);

std::string print(const Formula& a);
std::string print(const BoolFormula& b);
std::string print(const LabelledFormula& l);
std::string print(const Sequent& s);
std::string print(const Term& t);
std::string print(const Type& t);
std::string print(const QualType& t);
std::string print(const Hypothesis& h);
std::string print(const Derivation& d);
std::string print(const Judgment& j);
std::string print(const TypeDerivation& d);
std::string print_names(const NameSet& names);

std::string rule_name(Rule r);
std::string rule_name(TypeRule r);

}  // namespace cpl
