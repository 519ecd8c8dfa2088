#include "cpl/textio.hpp"

#include <array>
#include <cctype>
#include <cstring>
#include <map>

namespace cpl {

namespace {

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

std::string render(SourceSpan s, const std::vector<std::string>& expected, const std::string& found) {
  std::string msg = "parse error at " + std::to_string(s.start) + ".." + std::to_string(s.end) + ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) msg += i + 1 == expected.size() ? " or " : ", ";
    msg += expected[i];
  }
  return msg + ", found " + found;
}

// Longest match first.
constexpr std::array<const char*, 6> kDigraphs = {"|-", "|=", "|>", "<|", "->", ">="};
constexpr const char* kSingles = "()[]{},;:.\\~&|+/<=>";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

const std::map<std::string, Rule>& rule_tags() {
  static const std::map<std::string, Rule> tags = {
      {"Ax1", Rule::Ax1},           {"Ax2", Rule::Ax2},           {"RUnionInto", Rule::UnionInto},
      {"RInterFrom", Rule::InterFrom}, {"RNegInto", Rule::NegInto}, {"RNegFrom", Rule::NegFrom},
      {"R1OrInto", Rule::Or1Into},  {"R2OrInto", Rule::Or2Into},  {"ROrFrom", Rule::OrFrom},
      {"RAndInto", Rule::AndInto},  {"R1AndFrom", Rule::And1From}, {"R2AndFrom", Rule::And2From},
      {"RMuInto", Rule::MuInto},    {"RMuFrom", Rule::MuFrom},    {"RCInto", Rule::CInto},
      {"RCFrom", Rule::CFrom},      {"RDInto", Rule::DInto},      {"RDFrom", Rule::DFrom},
      {"Cut", Rule::Cut}};
  return tags;
}

const std::map<std::string, TypeRule>& type_rule_tags() {
  static const std::map<std::string, TypeRule> tags = {
      {"RBot", TypeRule::Bot},         {"RId", TypeRule::Id},          {"RUnion", TypeRule::Union},
      {"RLam", TypeRule::Lam},         {"RApp", TypeRule::App},        {"RChoiceL", TypeRule::ChoiceL},
      {"RChoiceR", TypeRule::ChoiceR}, {"RNu", TypeRule::Nu}};
  return tags;
}

bool reserved_term_word(const std::string& s) { return s == "nu" || s == "omega" || s == "id"; }

}  // namespace

ParseError::ParseError(SourceSpan s, std::vector<std::string> exp, std::string f)
    : Error(render(s, exp, f)), span(s), expected(std::move(exp)), found(std::move(f)) {}

ParseError::ParseError(SourceSpan s, const std::string& message)
    : Error("parse error at " + std::to_string(s.start) + ".." + std::to_string(s.end) + ": " + message),
      span(s) {}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {  // line comment
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    Token t;
    t.span.start = i;
    if (ident_start(c)) {
      while (i < text.size() && ident_char(text[i])) ++i;
      t.kind = Tok::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      t.kind = Tok::Number;
    } else {
      t.kind = Tok::Punct;
      bool matched = false;
      for (const char* d : kDigraphs)
        if (text.compare(i, 2, d) == 0) {
          i += 2;
          matched = true;
          break;
        }
      if (!matched) {
        if (!std::strchr(kSingles, c))
          throw ParseError({i, i + 1}, {"a token"}, "'" + std::string(1, c) + "'");
        ++i;
      }
    }
    t.span.end = i;
    t.text = text.substr(t.span.start, i - t.span.start);
    out.push_back(std::move(t));
  }
  Token end;
  end.span = {text.size(), text.size()};
  out.push_back(end);
  return out;
}

// ------------------------------------------------------------------ parser

Parser::Parser(const std::string& text) : toks_(tokenize(text)) {}

const Token& Parser::peek(std::size_t ahead) const {
  std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
  return toks_[k];
}

bool Parser::at(const std::string& text, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind != Tok::End && t.kind != Tok::Number && t.text == text;
}

bool Parser::accept(const std::string& text) {
  if (!at(text)) return false;
  ++pos_;
  return true;
}

const Token& Parser::expect(const std::string& text) {
  if (!at(text)) fail({"'" + text + "'"});
  return toks_[pos_++];
}

void Parser::fail(std::vector<std::string> expected) const {
  throw ParseError(peek().span, std::move(expected), describe(peek()));
}

void Parser::finish() {
  if (peek().kind != Tok::End) fail({"end of input"});
}

Name Parser::name() {
  if (peek().kind != Tok::Ident) fail({"a name"});
  return toks_[pos_++].text;
}

unsigned Parser::number() {
  if (peek().kind != Tok::Number) fail({"a natural number"});
  const Token& t = toks_[pos_++];
  try {
    unsigned long v = std::stoul(t.text);
    if (v > 0xffffffffUL) throw std::out_of_range("index");
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw ParseError(t.span, "number too large");
  }
}

std::string Parser::digits() {
  if (peek().kind != Tok::Number) fail({"a natural number"});
  return toks_[pos_++].text;
}

Rational Parser::rational() {
  if (peek().kind != Tok::Number) fail({"a rational"});
  SourceSpan span = peek().span;
  std::string text = toks_[pos_++].text;
  if (accept("/")) {
    if (peek().kind != Tok::Number) fail({"a denominator"});
    text += "/" + toks_[pos_].text;
    span.end = toks_[pos_++].span.end;
  }
  auto q = parse_rational(text);
  if (!q) throw ParseError(span, "malformed rational '" + text + "'");
  return *q;
}

NameSet Parser::name_set() {
  expect("{");
  NameSet out;
  if (!at("}")) {
    do out.insert(name());
    while (accept(","));
  }
  expect("}");
  return out;
}

// formulas

Formula Parser::formula() {
  if ((at("C") || at("D")) && at("[", 1)) {
    FormulaKind kind = peek().text == "C" ? FormulaKind::CQ : FormulaKind::DQ;
    SourceSpan span = peek().span;
    pos_ += 2;
    Rational q = rational();
    span.end = peek().span.end;
    expect("]");
    expect("{");
    Name a = name();
    expect("}");
    Formula body = formula();
    if (!in_unit_interval(q)) throw ParseError(span, "rational out of [0,1]");
    return quant(kind, q, a, body);
  }
  return disjunction();
}

Formula Parser::disjunction() {
  Formula a = conjunction();
  while (accept("|")) a = disj(a, conjunction());
  return a;
}

Formula Parser::conjunction() {
  Formula a = unary();
  while (accept("&")) a = conj(a, unary());
  return a;
}

Formula Parser::unary() {
  if (accept("~")) return neg(unary());
  if (at("p") && at("(", 1)) {
    pos_ += 2;
    unsigned i = number();
    expect(",");
    Name a = name();
    expect(")");
    return atom(i, a);
  }
  if (accept("(")) {
    Formula a = formula();
    expect(")");
    return a;
  }
  if ((at("C") || at("D")) && at("[", 1)) return formula();
  fail({"'p('", "'~'", "'('", "a quantifier"});
}

// boolean formulas

bool Parser::starts_boolean() const {
  return at("~") || at("(") || at("T") || at("F") || (at("x") && at("(", 1));
}

BoolFormula Parser::boolean() { return bool_disjunction(); }

BoolFormula Parser::bool_disjunction() {
  BoolFormula a = bool_conjunction();
  while (accept("|")) a = bor(a, bool_conjunction());
  return a;
}

BoolFormula Parser::bool_conjunction() {
  BoolFormula a = bool_unary();
  while (accept("&")) a = band(a, bool_unary());
  return a;
}

BoolFormula Parser::bool_unary() {
  if (accept("~")) return bnot(bool_unary());
  if (accept("T")) return btop();
  if (accept("F")) return bbot();
  if (at("x") && at("(", 1)) {
    pos_ += 2;
    unsigned i = number();
    expect(",");
    Name a = name();
    expect(")");
    return bvar(i, a);
  }
  if (accept("(")) {
    BoolFormula b = boolean();
    expect(")");
    return b;
  }
  fail({"'x('", "'T'", "'F'", "'~'", "'('"});
}

LabelledFormula Parser::labelled() {
  LabelledFormula l;
  l.label = boolean();
  if (accept("|>")) l.dir = Direction::Into;
  else if (accept("<|")) l.dir = Direction::From;
  else fail({"'|>'", "'<|'"});
  l.body = formula();
  return l;
}

Sequent Parser::sequent() {
  Sequent s;
  expect("|-");
  s.names = name_set();
  if (starts_boolean()) {
    do s.succedent.push_back(labelled());
    while (accept(","));
  }
  return s;
}

// terms

Term Parser::term() {
  Term t = (at("\\") || at("nu")) ? binder() : application();
  while (at("(") && at("+", 1)) {
    pos_ += 2;
    Name a = name();
    unsigned i = number();
    expect(")");
    Term r = (at("\\") || at("nu")) ? binder() : application();
    t = choice(t, r, a, i);
  }
  return t;
}

Term Parser::binder() {
  if (accept("\\")) {
    Name x = name();
    if (reserved_term_word(x)) throw ParseError(toks_[pos_ - 1].span, "reserved word '" + x + "'");
    expect(".");
    return lam(x, term());
  }
  expect("nu");
  Name a = name();
  expect(".");
  return nu(a, term());
}

bool Parser::starts_atomic() const {
  const Token& t = peek();
  if (t.kind == Tok::Ident) return t.text != "nu";
  return at("(") && !at("+", 1);
}

Term Parser::atomic() {
  if (accept("omega")) return omega_term();
  if (accept("id")) return id_term();
  if (peek().kind == Tok::Ident && peek().text != "nu") return var(name());
  if (at("(") && !at("+", 1)) {
    ++pos_;
    Term t = term();
    expect(")");
    return t;
  }
  fail({"a variable", "'('", "'\\'", "'nu'", "'omega'", "'id'"});
}

Term Parser::application() {
  Term t = atomic();
  while (starts_atomic()) t = app(t, atomic());
  if (at("\\") || at("nu")) t = app(t, binder());
  return t;
}

// types

Type Parser::atomic_type() {
  if (accept("o")) return base_type();
  if (accept("(")) {
    Type t = type();
    expect(")");
    return t;
  }
  fail({"'o'", "'('"});
}

QualType Parser::qualtype() {
  SourceSpan span = peek().span;
  expect("C");
  expect("[");
  Rational q = rational();
  span.end = peek().span.end;
  expect("]");
  if (!in_unit_interval(q)) throw ParseError(span, "rational out of [0,1]");
  return {q, atomic_type()};
}

Type Parser::type() {
  if (at("C")) {
    QualType arg = qualtype();
    expect("->");
    return arrow(arg.q, arg.sigma, type());
  }
  return atomic_type();
}

// hypotheses and derivations

Hypothesis Parser::hypothesis() {
  if (at("mu") && at("(", 1)) {
    pos_ += 2;
    BoolFormula b = boolean();
    expect(")");
    Cmp c;
    if (accept(">=")) c = Cmp::Ge;
    else if (accept("<")) c = Cmp::Lt;
    else if (accept("=")) c = Cmp::Eq;
    else fail({"'>='", "'<'", "'='"});
    return hyp_measure(b, c, rational());
  }
  if (at("split") && at("{", 1)) {
    ++pos_;
    expect("{");
    Name a = name();
    expect("}");
    std::vector<SplitPart> parts;
    while (accept("(")) {
      SplitPart p;
      p.named = boolean();
      expect(",");
      p.rest = boolean();
      expect(")");
      parts.push_back(p);
    }
    return hyp_split(a, std::move(parts));
  }
  BoolFormula l = boolean();
  expect("|=");
  return hyp_entails(l, boolean());
}

std::vector<Hypothesis> Parser::hypotheses() {
  std::vector<Hypothesis> out;
  expect("[");
  if (!at("]")) {
    do out.push_back(hypothesis());
    while (accept(";"));
  }
  expect("]");
  return out;
}

Derivation Parser::derivation() {
  expect("(");
  Derivation d;
  const Token& tag = peek();
  auto it = rule_tags().find(tag.text);
  if (tag.kind != Tok::Ident || it == rule_tags().end()) fail({"a rule tag"});
  ++pos_;
  d.rule = it->second;
  d.conclusion = sequent();
  d.hyps = hypotheses();
  while (at("(")) d.premises.push_back(derivation());
  expect(")");
  return d;
}

Judgment Parser::judgment() {
  Judgment j;
  if (!at("|-")) {
    do {
      Name x = name();
      expect(":");
      j.context.push_back({x, qualtype()});
    } while (accept(","));
  }
  expect("|-");
  j.names = name_set();
  expect("[");
  SourceSpan span = peek().span;
  j.exponent = rational();
  expect("]");
  if (!in_unit_interval(j.exponent)) throw ParseError(span, "rational out of [0,1]");
  j.term = term();
  expect(":");
  j.label = boolean();
  expect("|>");
  j.type = type();
  return j;
}

TypeDerivation Parser::type_derivation() {
  expect("(");
  TypeDerivation d;
  const Token& tag = peek();
  auto it = type_rule_tags().find(tag.text);
  if (tag.kind != Tok::Ident || it == type_rule_tags().end()) fail({"a typing rule tag"});
  ++pos_;
  d.rule = it->second;
  d.judgment = judgment();
  d.hyps = hypotheses();
  while (at("(")) d.premises.push_back(type_derivation());
  expect(")");
  return d;
}

// --------------------------------------------------------- entry points

namespace {
template <class T, class F>
T parse_whole(const std::string& text, F f) {
  Parser p(text);
  T out = (p.*f)();
  p.finish();
  return out;
}
}  // namespace

Formula parse_formula(const std::string& t) { return parse_whole<Formula>(t, &Parser::formula); }
BoolFormula parse_bool(const std::string& t) { return parse_whole<BoolFormula>(t, &Parser::boolean); }
LabelledFormula parse_labelled(const std::string& t) {
  return parse_whole<LabelledFormula>(t, &Parser::labelled);
}
Sequent parse_sequent(const std::string& t) { return parse_whole<Sequent>(t, &Parser::sequent); }
Term parse_term(const std::string& t) { return parse_whole<Term>(t, &Parser::term); }
Type parse_type(const std::string& t) { return parse_whole<Type>(t, &Parser::type); }
Derivation parse_derivation(const std::string& t) { return parse_whole<Derivation>(t, &Parser::derivation); }
Judgment parse_judgment(const std::string& t) { return parse_whole<Judgment>(t, &Parser::judgment); }
TypeDerivation parse_type_derivation(const std::string& t) {
  return parse_whole<TypeDerivation>(t, &Parser::type_derivation);
}

// ------------------------------------------------------------------ printers

namespace {

int prec(const Formula& a) {
  switch (a->kind) {
    case FormulaKind::Or: return 1;
    case FormulaKind::And: return 2;
    case FormulaKind::Neg: return 3;
    case FormulaKind::Atom: return 4;
    default: return 0;
  }
}

std::string formula_at(const Formula& a, int min);

std::string formula_raw(const Formula& a) {
  switch (a->kind) {
    case FormulaKind::Atom: return "p(" + std::to_string(a->index) + "," + a->name + ")";
    case FormulaKind::Neg: return "~" + formula_at(a->lhs, 3);
    case FormulaKind::And: return formula_at(a->lhs, 2) + " & " + formula_at(a->rhs, 3);
    case FormulaKind::Or: return formula_at(a->lhs, 1) + " | " + formula_at(a->rhs, 2);
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      std::string head = std::string(a->kind == FormulaKind::CQ ? "C[" : "D[") + to_string(a->q) + "]{" + a->name + "}";
      if (a->lhs->kind == FormulaKind::And || a->lhs->kind == FormulaKind::Or)
        return head + "(" + formula_raw(a->lhs) + ")";
      return head + " " + formula_raw(a->lhs);
    }
  }
  return "";
}

std::string formula_at(const Formula& a, int min) {
  std::string s = formula_raw(a);
  return prec(a) < min ? "(" + s + ")" : s;
}

int bool_prec(const BoolFormula& b) {
  switch (b->kind) {
    case BoolKind::Or: return 1;
    case BoolKind::And: return 2;
    case BoolKind::Neg: return 3;
    default: return 4;
  }
}

std::string bool_at(const BoolFormula& b, int min) {
  std::string s;
  switch (b->kind) {
    case BoolKind::Var: s = "x(" + std::to_string(b->index) + "," + b->name + ")"; break;
    case BoolKind::Top: s = "T"; break;
    case BoolKind::Bot: s = "F"; break;
    case BoolKind::Neg: s = "~" + bool_at(b->lhs, 3); break;
    case BoolKind::And: s = bool_at(b->lhs, 2) + " & " + bool_at(b->rhs, 3); break;
    case BoolKind::Or: s = bool_at(b->lhs, 1) + " | " + bool_at(b->rhs, 2); break;
  }
  return bool_prec(b) < min ? "(" + s + ")" : s;
}

// Where a subterm sits decides which constructs need parentheses.
enum class Ctx { Top, ChoiceLeft, ChoiceRight, AppFun, AppArg };

bool is_id(const Term& t) {
  return t->kind == TermKind::Lam && t->lhs->kind == TermKind::Var && t->lhs->id == t->id;
}

bool is_omega(const Term& t) {
  if (t->kind != TermKind::App || t->lhs->kind != TermKind::Lam || t->rhs->kind != TermKind::Lam) return false;
  static const std::string key = alpha_key(omega_term());
  return alpha_key(t) == key;
}

std::string term_at(const Term& t, Ctx c) {
  if (is_id(t)) return "id";
  if (is_omega(t)) return "omega";
  std::string s;
  bool needs = false;
  switch (t->kind) {
    case TermKind::Var: return t->id;
    case TermKind::Lam:
      s = "\\" + t->id + ". " + term_at(t->lhs, Ctx::Top);
      needs = c != Ctx::Top;
      break;
    case TermKind::Nu:
      s = "nu " + t->id + ". " + term_at(t->lhs, Ctx::Top);
      needs = c != Ctx::Top;
      break;
    case TermKind::App:
      s = term_at(t->lhs, Ctx::AppFun) + " " + term_at(t->rhs, Ctx::AppArg);
      needs = c == Ctx::AppArg;
      break;
    case TermKind::Choice:
      s = term_at(t->lhs, Ctx::ChoiceLeft) + " (+ " + t->id + " " + std::to_string(t->index) + ") " +
          term_at(t->rhs, Ctx::ChoiceRight);
      needs = c != Ctx::Top && c != Ctx::ChoiceLeft;
      break;
  }
  return needs ? "(" + s + ")" : s;
}

std::string atomic_type(const Type& t) { return t->base ? "o" : "(" + print(t) + ")"; }

std::string hyps_text(const std::vector<Hypothesis>& hs) {
  std::string s = "[";
  for (std::size_t i = 0; i < hs.size(); ++i) s += (i ? "; " : "") + print(hs[i]);
  return s + "]";
}

void derivation_text(const Derivation& d, int depth, std::string& out) {
  out += "(" + rule_name(d.rule) + " " + print(d.conclusion) + " " + hyps_text(d.hyps);
  for (const auto& p : d.premises) {
    out += "\n" + std::string(2 * (depth + 1), ' ');
    derivation_text(p, depth + 1, out);
  }
  out += ")";
}

void type_derivation_text(const TypeDerivation& d, int depth, std::string& out) {
  out += "(" + rule_name(d.rule) + " " + print(d.judgment) + " " + hyps_text(d.hyps);
  for (const auto& p : d.premises) {
    out += "\n" + std::string(2 * (depth + 1), ' ');
    type_derivation_text(p, depth + 1, out);
  }
  out += ")";
}

}  // namespace

std::string print(const Formula& a) { return formula_raw(a); }
std::string print(const BoolFormula& b) { return bool_at(b, 0); }

std::string print(const LabelledFormula& l) {
  return print(l.label) + (l.dir == Direction::Into ? " |> " : " <| ") + print(l.body);
}

std::string print_names(const NameSet& names) {
  std::string s = "{";
  bool first = true;
  for (const auto& n : names) {
    s += (first ? "" : ",") + n;
    first = false;
  }
  return s + "}";
}

std::string print(const Sequent& s) {
  std::string out = "|-" + print_names(s.names);
  for (std::size_t i = 0; i < s.succedent.size(); ++i) out += (i ? ", " : " ") + print(s.succedent[i]);
  return out;
}

std::string print(const Term& t) { return term_at(t, Ctx::Top); }

std::string print(const QualType& t) { return "C[" + to_string(t.q) + "] " + atomic_type(t.sigma); }

std::string print(const Type& t) {
  if (t->base) return "o";
  return print(t->arg) + " -> " + print(t->result);
}

std::string print(const Hypothesis& h) {
  switch (h.kind) {
    case HypKind::Entails: return print(h.lhs) + " |= " + print(h.rhs);
    case HypKind::Measure: {
      const char* op = h.cmp == Cmp::Ge ? " >= " : h.cmp == Cmp::Lt ? " < " : " = ";
      return "mu(" + print(h.lhs) + ")" + op + to_string(h.q);
    }
    case HypKind::Split: {
      std::string s = "split{" + h.name + "}";
      for (const auto& p : h.parts) s += " (" + print(p.named) + ", " + print(p.rest) + ")";
      return s;
    }
  }
  return "";
}

std::string print(const Derivation& d) {
  std::string out;
  derivation_text(d, 0, out);
  return out;
}

std::string print(const Judgment& j) {
  std::string s;
  for (std::size_t i = 0; i < j.context.size(); ++i)
    s += (i ? ", " : "") + j.context[i].x + " : " + print(j.context[i].type);
  if (!s.empty()) s += " ";
  s += "|-" + print_names(j.names) + "[" + to_string(j.exponent) + "] " + print(j.term) + " : " + print(j.label) +
       " |> " + print(j.type);
  return s;
}

std::string print(const TypeDerivation& d) {
  std::string out;
  type_derivation_text(d, 0, out);
  return out;
}

std::string rule_name(Rule r) {
  for (const auto& [k, v] : rule_tags())
    if (v == r) return k;
  return "?";
}

std::string rule_name(TypeRule r) {
  for (const auto& [k, v] : type_rule_tags())
    if (v == r) return k;
  return "?";
}

}  // namespace cpl
