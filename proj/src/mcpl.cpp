#include "cpl/mcpl.hpp"

#include "cpl/lcpl.hpp"
#include "cpl/semantics.hpp"
#include "cpl/textio.hpp"

#include <algorithm>
#include <map>

namespace cpl {

McplBase mflip(unsigned i) {
  auto n = std::make_shared<McplBaseNode>();
  n->index = i;
  return n;
}

McplBase marrow(McplFormula arg, McplBase result) {
  auto n = std::make_shared<McplBaseNode>();
  n->flip = false;
  n->arg = std::move(arg);
  n->result = std::move(result);
  return n;
}

bool same(const McplBase& a, const McplBase& b) {
  if (a->flip != b->flip) return false;
  if (a->flip) return a->index == b->index;
  return same(a->arg, b->arg) && same(a->result, b->result);
}

bool same(const McplFormula& a, const McplFormula& b) { return a.q == b.q && same(a.body, b.body); }

Type bullet(const McplBase& a) {
  if (a->flip) return base_type();
  return arrow(a->arg.q, bullet(a->arg.body), bullet(a->result));
}

QualType bullet(const McplFormula& a) { return {a.q, bullet(a.body)}; }

// ------------------------------------------------------------------- text

namespace {

const std::map<std::string, McplRule>& tags() {
  static const std::map<std::string, McplRule> t = {{"RBot", McplRule::Bot},   {"Ax", McplRule::Ax},
                                                    {"RImpE", McplRule::ImpE}, {"RImpI", McplRule::ImpI},
                                                    {"ROr", McplRule::Or},     {"RC", McplRule::Count}};
  return t;
}

std::string tag(McplRule r) {
  for (const auto& [k, v] : tags())
    if (v == r) return k;
  return "?";
}

McplFormula formula(Parser& p);

McplBase base(Parser& p) {
  if (p.at("C")) {
    McplFormula arg;
    p.expect("C");
    p.expect("[");
    arg.q = p.rational();
    p.expect("]");
    if (p.accept("(")) {
      arg.body = base(p);
      p.expect(")");
    } else {
      p.expect("Flip");
      p.expect("(");
      arg.body = mflip(p.number());
      p.expect(")");
    }
    p.expect("->");
    return marrow(arg, base(p));
  }
  if (p.accept("(")) {
    McplBase b = base(p);
    p.expect(")");
    return b;
  }
  p.expect("Flip");
  p.expect("(");
  McplBase b = mflip(p.number());
  p.expect(")");
  return b;
}

McplFormula formula(Parser& p) {
  McplFormula a;
  p.expect("C");
  p.expect("[");
  SourceSpan span = p.peek().span;
  a.q = p.rational();
  if (!in_unit_interval(a.q)) throw ParseError(span, "rational out of [0,1]");
  p.expect("]");
  a.body = base(p);
  return a;
}

McplSequent sequent(Parser& p) {
  McplSequent s;
  if (!p.at("|-")) {
    do s.context.push_back(formula(p));
    while (p.accept(","));
  }
  p.expect("|-");
  s.names = p.name_set();
  s.label = p.boolean();
  p.expect("|>");
  s.formula = formula(p);
  return s;
}

McplDerivation derivation(Parser& p) {
  p.expect("(");
  McplDerivation d;
  const Token& t = p.peek();
  auto it = tags().find(t.text);
  if (t.kind != Tok::Ident || it == tags().end()) p.fail({"an mCPL rule tag"});
  p.name();
  d.rule = it->second;
  if (d.rule == McplRule::Or || d.rule == McplRule::Count) d.name = p.name();
  if (d.rule == McplRule::Or) d.index = p.number();
  d.conclusion = sequent(p);
  d.hyps = p.hypotheses();
  while (p.at("(")) d.premises.push_back(derivation(p));
  p.expect(")");
  return d;
}

std::string base_text(const McplBase& a, bool atomic) {
  if (a->flip) return "Flip(" + std::to_string(a->index) + ")";
  std::string s = "C[" + to_string(a->arg.q) + "] " + base_text(a->arg.body, true) + " -> " + base_text(a->result, false);
  return atomic ? "(" + s + ")" : s;
}

void derivation_text(const McplDerivation& d, int depth, std::string& out) {
  out += "(" + tag(d.rule);
  if (d.rule == McplRule::Or || d.rule == McplRule::Count) out += " " + d.name;
  if (d.rule == McplRule::Or) out += " " + std::to_string(d.index);
  out += " " + print(d.conclusion) + " [";
  for (std::size_t i = 0; i < d.hyps.size(); ++i) out += (i ? "; " : "") + print(d.hyps[i]);
  out += "]";
  for (const auto& p : d.premises) {
    out += "\n" + std::string(2 * (depth + 1), ' ');
    derivation_text(p, depth + 1, out);
  }
  out += ")";
}

template <class T>
T whole(const std::string& text, T (*f)(Parser&)) {
  Parser p(text);
  T out = f(p);
  p.finish();
  return out;
}

}  // namespace

McplFormula parse_mcpl_formula(const std::string& text) { return whole(text, &formula); }
McplSequent parse_mcpl_sequent(const std::string& text) { return whole(text, &sequent); }
McplDerivation parse_mcpl_derivation(const std::string& text) { return whole(text, &derivation); }

std::string print(const McplFormula& a) { return "C[" + to_string(a.q) + "] " + base_text(a.body, true); }

std::string print(const McplSequent& s) {
  std::string out;
  for (std::size_t i = 0; i < s.context.size(); ++i) out += (i ? ", " : "") + print(s.context[i]);
  if (!out.empty()) out += " ";
  return out + "|-" + print_names(s.names) + " " + print(s.label) + " |> " + print(s.formula);
}

std::string print(const McplDerivation& d) {
  std::string out;
  derivation_text(d, 0, out);
  return out;
}

// ---------------------------------------------------------------- checker

namespace {

bool same_context(const std::vector<McplFormula>& a, const std::vector<McplFormula>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
           return same(x, y);
         });
}

struct McplChecker {
  std::string path, reason;

  bool fail(const std::string& p, const std::string& why) {
    path = p;
    reason = why;
    return false;
  }

  bool check(const McplDerivation& d, const std::string& at) {
    const McplSequent& s = d.conclusion;
    auto need = [&](std::size_t n) {
      if (d.premises.size() == n) return true;
      return fail(at, tag(d.rule) + " takes " + std::to_string(n) + " premises");
    };
    const NameSet fn = free_names(s.label);
    if (!std::includes(s.names.begin(), s.names.end(), fn.begin(), fn.end()))
      return fail(at, "label has a name outside " + print_names(s.names));
    for (const auto& h : d.hyps) {
      bool ok = h.kind == HypKind::Split ||
                (h.kind == HypKind::Entails && entails(h.lhs, h.rhs)) ||
                (h.kind == HypKind::Measure &&
                 (h.cmp == Cmp::Ge ? measure(h.lhs) >= h.q : h.cmp == Cmp::Lt ? measure(h.lhs) < h.q : measure(h.lhs) == h.q));
      if (!ok) return fail(at, "hypothesis does not hold: " + print(h));
    }
    for (std::size_t i = 0; i < d.premises.size(); ++i)
      if (!check(d.premises[i], at + "." + std::to_string(i))) return false;
    auto prem = [&](std::size_t i) -> const McplSequent& { return d.premises[i].conclusion; };

    switch (d.rule) {
      case McplRule::Bot:
        if (!need(0)) return false;
        if (satisfiable(s.label)) return fail(at, "label is satisfiable");
        return true;
      case McplRule::Ax:
        if (!need(0)) return false;
        if (std::none_of(s.context.begin(), s.context.end(), [&](const auto& a) { return same(a, s.formula); }))
          return fail(at, "formula is not among the hypotheses");
        return true;
      case McplRule::ImpE: {
        if (!need(1)) return false;
        if (s.formula.body->flip) return fail(at, "formula is not an implication");
        auto ctx = s.context;
        ctx.push_back(s.formula.body->arg);
        const McplSequent& p = prem(0);
        if (!same_context(p.context, ctx)) return fail(at, "premise hypotheses are not the extended ones");
        if (p.names != s.names || !equivalent(p.label, s.label)) return fail(at, "premise names or label differ");
        if (!same(p.formula, McplFormula{s.formula.q, s.formula.body->result}))
          return fail(at, "premise formula is not the implication's conclusion");
        return true;
      }
      case McplRule::ImpI: {
        if (!need(2)) return false;
        const McplSequent &f = prem(0), &a = prem(1);
        if (!same_context(f.context, s.context) || !same_context(a.context, s.context))
          return fail(at, "premise hypotheses differ");
        if (f.names != s.names || a.names != s.names) return fail(at, "premise names differ");
        if (f.formula.body->flip) return fail(at, "major premise is not an implication");
        if (!same(f.formula, McplFormula{s.formula.q, marrow(a.formula, s.formula.body)}))
          return fail(at, "major premise is not C[" + to_string(s.formula.q) + "] (A -> B)");
        if (!entails(s.label, band(f.label, a.label))) return fail(at, "label does not entail both premise labels");
        return true;
      }
      case McplRule::Or: {
        if (!need(2)) return false;
        if (!s.names.count(d.name)) return fail(at, "coin name " + d.name + " outside the names");
        for (std::size_t i = 0; i < 2; ++i) {
          const McplSequent& p = prem(i);
          if (!same_context(p.context, s.context) || p.names != s.names || !same(p.formula, s.formula))
            return fail(at, "premise " + std::to_string(i) + " is not over the same sequent");
        }
        BoolFormula x = bvar(d.index, d.name);
        if (!entails(s.label, bor(band(prem(0).label, x), band(prem(1).label, bnot(x)))))
          return fail(at, "label is not covered by the coin");
        return true;
      }
      case McplRule::Count: {
        if (!need(1)) return false;
        const Name& a = d.name;
        if (s.names.count(a)) return fail(at, "bound name " + a + " among the names");
        const McplSequent& p = prem(0);
        NameSet inner = s.names;
        inner.insert(a);
        if (!same_context(p.context, s.context) || p.names != inner) return fail(at, "premise hypotheses or names differ");
        if (!same(p.formula.body, s.formula.body)) return fail(at, "premise formula differs");
        ADecomposition dec;
        std::optional<Rational> rate;
        bool have_split = false;
        for (const auto& h : d.hyps) {
          if (h.kind == HypKind::Split) {
            if (h.name != a) return fail(at, "split over the wrong name");
            dec = {a, s.names, h.parts};
            if (!is_weak_a_decomposition(dec, p.label)) return fail(at, "split is not a weak decomposition");
            have_split = true;
          }
          if (h.kind == HypKind::Measure && h.cmp == Cmp::Ge) {
            if (rate && *rate != h.q) return fail(at, "measure hypotheses disagree on the rate");
            rate = h.q;
          }
        }
        if (!have_split) dec = weak_a_decompose(p.label, a, s.names);
        if (!rate) rate = p.formula.q > 0 ? Rational(s.formula.q / p.formula.q) : Rational(0);
        if (!in_unit_interval(*rate) || p.formula.q * *rate != s.formula.q)
          return fail(at, "quantifier is not the premise's times the rate");
        std::vector<BoolFormula> rests;
        for (const auto& part : dec.parts)
          if (measure(part.named) >= *rate) rests.push_back(part.rest);
        if (!entails(s.label, big_or(rests))) return fail(at, "label does not entail the selected parts");
        return true;
      }
    }
    return fail(at, "unknown rule");
  }
};

Context context_of(const std::vector<McplFormula>& delta) {
  Context g;
  for (std::size_t i = 0; i < delta.size(); ++i) g.push_back({"x" + std::to_string(i + 1), bullet(delta[i])});
  return g;
}

TypeDerivation decorate_rec(const McplDerivation& d) {
  const McplSequent& s = d.conclusion;
  TypeDerivation out;
  Judgment& j = out.judgment;
  j.context = context_of(s.context);
  j.names = s.names;
  j.exponent = s.formula.q;
  j.label = s.label;
  j.type = bullet(s.formula.body);
  out.hyps = d.hyps;
  for (const auto& p : d.premises) out.premises.push_back(decorate_rec(p));
  auto term = [&](std::size_t i) { return out.premises[i].judgment.term; };
  switch (d.rule) {
    case McplRule::Bot:
      out.rule = TypeRule::Bot;
      j.term = omega_term();
      break;
    case McplRule::Ax: {
      std::size_t k = s.context.size();
      while (k > 0 && !same(s.context[k - 1], s.formula)) --k;
      if (k == 0) throw Error("axiom formula is not among the hypotheses");
      out.rule = TypeRule::Id;
      j.term = var("x" + std::to_string(k));
      break;
    }
    case McplRule::ImpE:
      out.rule = TypeRule::Lam;
      j.term = lam("x" + std::to_string(s.context.size() + 1), term(0));
      break;
    case McplRule::ImpI:
      out.rule = TypeRule::App;
      j.term = app(term(0), term(1));
      break;
    case McplRule::Or: {
      out.rule = TypeRule::Union;
      out.hyps.clear();
      j.term = choice(term(0), term(1), d.name, d.index);
      BoolFormula x = bvar(d.index, d.name);
      TypeDerivation l, r;
      l.rule = TypeRule::ChoiceL;
      l.judgment = j;
      l.judgment.label = band(out.premises[0].judgment.label, x);
      l.premises = {out.premises[0]};
      r.rule = TypeRule::ChoiceR;
      r.judgment = j;
      r.judgment.label = band(out.premises[1].judgment.label, bnot(x));
      r.premises = {out.premises[1]};
      out.premises = {l, r};
      break;
    }
    case McplRule::Count:
      out.rule = TypeRule::Nu;
      j.term = nu(d.name, term(0));
      break;
  }
  return out;
}

}  // namespace

CheckResult check_mcpl_derivation(const McplDerivation& d) {
  McplChecker c;
  CheckResult r;
  r.ok = c.check(d, "root");
  r.path = c.path;
  r.reason = c.reason;
  return r;
}

Decoration decorate(const McplDerivation& d) {
  TypeDerivation td = decorate_rec(d);
  return {td.judgment.term, td};
}

Sequent translate_mcpl(const McplSequent& s) {
  Judgment j;
  j.context = context_of(s.context);
  j.names = s.names;
  j.exponent = s.formula.q;
  j.term = omega_term();
  j.label = s.label;
  j.type = bullet(s.formula.body);
  return translate_judgment(j);
}

}  // namespace cpl
