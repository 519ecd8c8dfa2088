#include "cpl/prover.hpp"

#include "cpl/textio.hpp"

namespace cpl {

namespace {

Integer pow3(unsigned n) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 3, n);
  return r;
}

bool is_into(const LabelledFormula& l) { return l.dir == Direction::Into; }

LabelledFormula into(BoolFormula b, Formula a) { return {std::move(b), Direction::Into, std::move(a)}; }
LabelledFormula from(BoolFormula b, Formula a) { return {std::move(b), Direction::From, std::move(a)}; }

Sequent with_rest(const NameSet& x, const LabelledFormula& active, const std::vector<LabelledFormula>& rest) {
  Sequent s{x, {active}};
  s.succedent.insert(s.succedent.end(), rest.begin(), rest.end());
  return s;
}

NameSet extended(const NameSet& x, const Name& a) {
  NameSet out = x;
  out.insert(a);
  return out;
}

// The counting-rule data for label c and a quantifier node: the split, the per-part
// measure facts, and the selected disjunction E.
struct Counting {
  std::vector<Hypothesis> hyps;  // split, then one measure fact per part
  BoolFormula selected;
};

Counting counting(const BoolFormula& c, const Formula& q_node) {
  const Name& a = q_node->name;
  NameSet rest_names = free_names(c);
  rest_names.erase(a);
  bool want_ge = q_node->kind == FormulaKind::CQ;
  Counting out;
  if (rest_names.empty()) {
    // univariate: a single measure fact, as in the figures
    bool ge = measure(c) >= q_node->q;
    out.hyps.push_back(hyp_measure(c, ge ? Cmp::Ge : Cmp::Lt, q_node->q));
    out.selected = ge == want_ge ? btop() : bbot();
    return out;
  }
  ADecomposition dec = a_decompose(c, a, rest_names);
  out.hyps.push_back(hyp_split(a, dec.parts));
  std::vector<BoolFormula> chosen;
  for (const auto& p : dec.parts) {
    bool ge = measure(p.named) >= q_node->q;
    out.hyps.push_back(hyp_measure(p.named, ge ? Cmp::Ge : Cmp::Lt, q_node->q));
    if (ge == want_ge) chosen.push_back(p.rest);
  }
  if (chosen.size() == dec.parts.size()) out.selected = btop();  // the rests cover everything
  else out.selected = simplify(big_or(chosen));
  return out;
}

// A reduction of the active formula, with what is needed to rebuild the rule application.
struct Step {
  enum Shape { Direct, UnionSplit, InterSplit } shape = Direct;
  Rule rule = Rule::Ax1;
  std::vector<Hypothesis> hyps;
  std::vector<std::pair<NameSet, LabelledFormula>> reducts;
  BoolFormula c, d;  // witnesses for the split shapes
  bool to_empty = false;  // no label works: only the empty sequent remains
};

std::optional<Step> reduce(const NameSet& x, const LabelledFormula& l) {
  const BoolFormula& b = l.label;
  const Formula& a = l.body;
  Step st;
  Rational mb = measure(b);
  if (is_into(l) && mb == 0) {
    st.rule = Rule::MuInto;
    st.hyps = {hyp_measure(b, Cmp::Eq, 0)};
    return st;
  }
  if (!is_into(l) && mb == 1) {
    st.rule = Rule::MuFrom;
    st.hyps = {hyp_measure(b, Cmp::Eq, 1)};
    return st;
  }
  switch (a->kind) {
    case FormulaKind::Atom: return std::nullopt;
    case FormulaKind::Neg: {
      BoolFormula c = simplify(bnot(b));
      if (is_into(l)) {
        st.rule = Rule::NegInto;
        st.hyps = {hyp_entails(b, bnot(c))};
        st.reducts = {{x, from(c, a->lhs)}};
      } else {
        st.rule = Rule::NegFrom;
        st.hyps = {hyp_entails(bnot(c), b)};
        st.reducts = {{x, into(c, a->lhs)}};
      }
      return st;
    }
    case FormulaKind::Or:
      if (is_into(l)) {
        st.shape = Step::UnionSplit;
        st.c = bool_of(a->lhs, x);
        st.d = bool_of(a->rhs, x);
        if (!entails(b, bor(st.c, st.d))) st.c = st.d = btop();
        st.rule = Rule::UnionInto;
        if (!same(b, bor(st.c, st.d))) st.hyps = {hyp_entails(b, bor(st.c, st.d))};
        st.reducts = {{x, into(st.c, a->lhs)}, {x, into(st.d, a->rhs)}};
      } else {
        st.rule = Rule::OrFrom;
        st.reducts = {{x, from(b, a->lhs)}, {x, from(b, a->rhs)}};
      }
      return st;
    case FormulaKind::And:
      if (is_into(l)) {
        st.rule = Rule::AndInto;
        st.reducts = {{x, into(b, a->lhs)}, {x, into(b, a->rhs)}};
      } else {
        st.shape = Step::InterSplit;
        st.c = bool_of(a->lhs, x);
        st.d = bool_of(a->rhs, x);
        if (!entails(band(st.c, st.d), b)) st.c = st.d = bbot();
        st.rule = Rule::InterFrom;
        if (!same(b, band(st.c, st.d))) st.hyps = {hyp_entails(band(st.c, st.d), b)};
        st.reducts = {{x, from(st.c, a->lhs)}, {x, from(st.d, a->rhs)}};
      }
      return st;
    case FormulaKind::CQ:
    case FormulaKind::DQ: {
      NameSet inner = extended(x, a->name);
      bool c_rule = a->kind == FormulaKind::CQ;
      // premise direction: C keeps it, D flips it
      bool premise_into = c_rule == is_into(l);
      // fallback label making the side condition true whenever q > 0
      BoolFormula fallback = premise_into ? btop() : bbot();
      auto attempt = [&](const BoolFormula& c) -> std::optional<Step> {
        Counting cnt = counting(c, a);
        bool ok = is_into(l) ? entails(b, cnt.selected) : entails(cnt.selected, b);
        if (!ok) return std::nullopt;
        Step s;
        s.rule = c_rule ? (is_into(l) ? Rule::CInto : Rule::CFrom) : (is_into(l) ? Rule::DInto : Rule::DFrom);
        s.hyps = cnt.hyps;
        // a side condition that holds whatever the label is stays implicit
        bool trivial = is_into(l) ? cnt.selected->kind == BoolKind::Top : cnt.selected->kind == BoolKind::Bot;
        if (!trivial) s.hyps.push_back(is_into(l) ? hyp_entails(b, cnt.selected) : hyp_entails(cnt.selected, b));
        LabelledFormula p = premise_into ? into(c, a->lhs) : from(c, a->lhs);
        s.reducts = {{inner, p}};
        return s;
      };
      if (auto s = attempt(bool_of(a->lhs, inner))) return s;
      if (auto s = attempt(fallback)) return s;
      // q = 0 corner cases
      st.to_empty = true;
      return st;
    }
  }
  return std::nullopt;
}

struct Search {
  Integer current_ms;
  std::size_t steps = 0;
  std::optional<Sequent> failure;

  std::optional<Derivation> derive(const NameSet& x, const LabelledFormula& l, const std::vector<LabelledFormula>& rest) {
    Sequent concl = with_rest(x, l, rest);
    auto st = reduce(x, l);
    if (!st) {
      // regular: close with an axiom
      BoolFormula xa = bvar(l.body->index, l.body->name);
      bool named = x.count(l.body->name) > 0;
      if (is_into(l) && named && entails(l.label, xa))
        return Derivation{Rule::Ax1, concl, {hyp_entails(l.label, xa)}, {}};
      if (!is_into(l) && named && entails(xa, l.label))
        return Derivation{Rule::Ax2, concl, {hyp_entails(xa, l.label)}, {}};
      failure = concl;
      return std::nullopt;
    }
    Integer before = current_ms;
    current_ms -= pow3(cn(l));
    if (st->to_empty) {
      current_ms += 1;  // the empty sequent counts 3^0
    } else {
      for (const auto& [nx, r] : st->reducts) current_ms += pow3(cn(r));
    }
    ++steps;
    if (current_ms >= before) throw Error("internal: decomposition step did not lower ms");
    if (st->to_empty) {
      failure = Sequent{x, {}};
      return std::nullopt;
    }
    std::vector<Derivation> subs;
    for (const auto& [nx, r] : st->reducts) {
      auto d = derive(nx, r, rest);
      if (!d) return std::nullopt;
      subs.push_back(std::move(*d));
    }
    switch (st->shape) {
      case Step::Direct: return Derivation{st->rule, concl, st->hyps, std::move(subs)};
      case Step::UnionSplit: {
        Derivation r1{Rule::Or1Into, with_rest(x, into(st->c, l.body), rest), {}, {std::move(subs[0])}};
        Derivation r2{Rule::Or2Into, with_rest(x, into(st->d, l.body), rest), {}, {std::move(subs[1])}};
        return Derivation{Rule::UnionInto, concl, st->hyps, {std::move(r1), std::move(r2)}};
      }
      case Step::InterSplit: {
        Derivation r1{Rule::And1From, with_rest(x, from(st->c, l.body), rest), {}, {std::move(subs[0])}};
        Derivation r2{Rule::And2From, with_rest(x, from(st->d, l.body), rest), {}, {std::move(subs[1])}};
        return Derivation{Rule::InterFrom, concl, st->hyps, {std::move(r1), std::move(r2)}};
      }
    }
    return std::nullopt;
  }
};

}  // namespace

Integer ms(const SequentSet& s) {
  Integer total = 0;
  for (const auto& q : s) total += pow3(cn(q));
  return total;
}

std::optional<SequentSet> decompose_step(const Sequent& s) {
  if (s.succedent.empty()) return std::nullopt;
  std::vector<LabelledFormula> rest(s.succedent.begin() + 1, s.succedent.end());
  auto st = reduce(s.names, s.succedent.front());
  if (!st) return std::nullopt;
  if (st->to_empty) return SequentSet{Sequent{s.names, {}}};
  SequentSet out;
  for (const auto& [nx, r] : st->reducts) out.push_back(with_rest(nx, r, rest));
  return out;
}

ProofOutcome prove(const Sequent& s) {
  ProofOutcome out;
  auto refute = [&](Sequent normal) {
    out.proved = false;
    out.invalid_normal = std::move(normal);
    auto f = falsifying_valuation(s);
    // several members can fail at different points without a common falsifier
    if (!f && !s.succedent.empty()) f = falsifying_valuation(Sequent{s.names, {s.succedent.front()}});
    if (!f) throw Error("internal: no falsifying valuation for an unprovable sequent");
    out.witness = *f;
    return out;
  };
  if (s.succedent.empty()) return refute(s);
  // pick the member to work on: the first valid one, else the first
  std::size_t pick = 0;
  for (std::size_t i = 0; i < s.succedent.size(); ++i)
    if (labelled_valid(s.succedent[i], s.names)) {
      pick = i;
      break;
    }
  std::vector<LabelledFormula> rest;
  for (std::size_t i = 0; i < s.succedent.size(); ++i)
    if (i != pick) rest.push_back(s.succedent[i]);
  Search search;
  search.current_ms = pow3(cn(s.succedent[pick]));
  auto d = search.derive(s.names, s.succedent[pick], rest);
  out.steps = search.steps;
  if (!d) return refute(search.failure.value_or(s));
  out.proved = true;
  out.derivation = std::move(*d);
  return out;
}

// ------------------------------------------------------------------ checker

namespace {

struct Checker {
  std::string path;
  std::string reason;

  bool fail(const std::string& p, const std::string& why) {
    path = p;
    reason = why;
    return false;
  }

  static bool names_within(const Sequent& s) {
    for (const auto& l : s.succedent) {
      for (const auto& n : free_names(l.label))
        if (!s.names.count(n)) return false;
      for (const auto& n : free_names(l.body))
        if (!s.names.count(n)) return false;
    }
    return true;
  }

  // hypothesis h must read "lhs |= rhs" up to equivalence and be true
  static std::optional<std::string> entailment(const Hypothesis& h, const BoolFormula& lhs, const BoolFormula& rhs) {
    if (h.kind != HypKind::Entails) return "expected an entailment hypothesis";
    if (!equivalent(h.lhs, lhs) || !equivalent(h.rhs, rhs))
      return "hypothesis " + print(h) + " does not match the rule (expected " + print(lhs) + " |= " + print(rhs) + ")";
    if (!entails(h.lhs, h.rhs)) return "hypothesis " + print(h) + " is false";
    return std::nullopt;
  }

  bool check(const Derivation& d, const std::string& p) {
    const Sequent& s = d.conclusion;
    if (!names_within(s)) return fail(p, "a name of the conclusion is outside its name set");
    if (s.succedent.empty()) return fail(p, "the empty sequent has no rule");
    const LabelledFormula& l = s.succedent.front();
    std::vector<LabelledFormula> rest(s.succedent.begin() + 1, s.succedent.end());
    const BoolFormula& b = l.label;
    const Formula& a = l.body;

    auto arity = [&](std::size_t n, std::size_t h) -> bool {
      if (d.premises.size() != n)
        return fail(p, rule_name(d.rule) + " needs " + std::to_string(n) + " premise(s)");
      if (d.hyps.size() != h) return fail(p, rule_name(d.rule) + " needs " + std::to_string(h) + " hypothesis(es)");
      return true;
    };
    // premise i must be |-{x} lab dir body, rest
    auto premise = [&](std::size_t i, const NameSet& x, Direction dir, const Formula& body,
                       const BoolFormula* label) -> bool {
      const Sequent& ps = d.premises[i].conclusion;
      std::string where = "premise " + std::to_string(i) + ": ";
      if (ps.names != x) return fail(p, where + "name set should be " + print_names(x));
      if (ps.succedent.size() != rest.size() + 1) return fail(p, where + "wrong number of formulas");
      for (std::size_t k = 0; k < rest.size(); ++k)
        if (!same(ps.succedent[k + 1], rest[k])) return fail(p, where + "passive formulas differ");
      const LabelledFormula& pl = ps.succedent.front();
      if (pl.dir != dir) return fail(p, where + "wrong direction");
      if (!same(pl.body, body)) return fail(p, where + "wrong formula " + print(pl.body));
      if (label && !same(pl.label, *label)) return fail(p, where + "label should be " + print(*label));
      return true;
    };
    // an omitted entailment (index past the recorded ones) is recomputed
    auto hyp = [&](std::size_t i, const BoolFormula& lhs, const BoolFormula& rhs) -> bool {
      if (i >= d.hyps.size()) {
        if (!entails(lhs, rhs)) return fail(p, "side condition " + print(lhs) + " |= " + print(rhs) + " is false");
        return true;
      }
      if (auto err = entailment(d.hyps[i], lhs, rhs)) return fail(p, *err);
      return true;
    };
    auto optional_hyp = [&](std::size_t n) -> bool {
      if (d.premises.size() != n) return fail(p, rule_name(d.rule) + " needs " + std::to_string(n) + " premise(s)");
      if (d.hyps.size() > 1) return fail(p, rule_name(d.rule) + " takes at most one hypothesis");
      return true;
    };
    auto kind = [&](FormulaKind k) -> bool {
      if (a->kind != k) return fail(p, rule_name(d.rule) + " does not apply to " + print(a));
      return true;
    };
    auto dir = [&](Direction want) -> bool {
      if (l.dir != want) return fail(p, rule_name(d.rule) + " has the wrong direction");
      return true;
    };
    const NameSet& x = s.names;
    bool ok = true;
    switch (d.rule) {
      case Rule::Ax1:
      case Rule::Ax2: {
        bool one = d.rule == Rule::Ax1;
        ok = dir(one ? Direction::Into : Direction::From) && kind(FormulaKind::Atom) && arity(0, 1);
        if (!ok) return false;
        if (!x.count(a->name)) return fail(p, "atom name not in the name set");
        BoolFormula xa = bvar(a->index, a->name);
        return one ? hyp(0, b, xa) : hyp(0, xa, b);
      }
      case Rule::UnionInto:
      case Rule::InterFrom: {
        bool u = d.rule == Rule::UnionInto;
        Direction dd = u ? Direction::Into : Direction::From;
        if (!(dir(dd) && optional_hyp(2) && premise(0, x, dd, a, nullptr) && premise(1, x, dd, a, nullptr))) return false;
        const BoolFormula& c = d.premises[0].conclusion.succedent[0].label;
        const BoolFormula& e = d.premises[1].conclusion.succedent[0].label;
        ok = u ? hyp(0, b, bor(c, e)) : hyp(0, band(c, e), b);
        break;
      }
      case Rule::NegInto:
      case Rule::NegFrom: {
        bool in = d.rule == Rule::NegInto;
        if (!(dir(in ? Direction::Into : Direction::From) && kind(FormulaKind::Neg) && optional_hyp(1) &&
              premise(0, x, in ? Direction::From : Direction::Into, a->lhs, nullptr)))
          return false;
        const BoolFormula& c = d.premises[0].conclusion.succedent[0].label;
        ok = in ? hyp(0, b, bnot(c)) : hyp(0, bnot(c), b);
        break;
      }
      case Rule::Or1Into:
      case Rule::Or2Into:
        ok = dir(Direction::Into) && kind(FormulaKind::Or) && arity(1, 0) &&
             premise(0, x, Direction::Into, d.rule == Rule::Or1Into ? a->lhs : a->rhs, &b);
        break;
      case Rule::And1From:
      case Rule::And2From:
        ok = dir(Direction::From) && kind(FormulaKind::And) && arity(1, 0) &&
             premise(0, x, Direction::From, d.rule == Rule::And1From ? a->lhs : a->rhs, &b);
        break;
      case Rule::OrFrom:
        ok = dir(Direction::From) && kind(FormulaKind::Or) && arity(2, 0) &&
             premise(0, x, Direction::From, a->lhs, &b) && premise(1, x, Direction::From, a->rhs, &b);
        break;
      case Rule::AndInto:
        ok = dir(Direction::Into) && kind(FormulaKind::And) && arity(2, 0) &&
             premise(0, x, Direction::Into, a->lhs, &b) && premise(1, x, Direction::Into, a->rhs, &b);
        break;
      case Rule::MuInto:
      case Rule::MuFrom: {
        bool in = d.rule == Rule::MuInto;
        if (!(dir(in ? Direction::Into : Direction::From) && arity(0, 1))) return false;
        const Hypothesis& h = d.hyps[0];
        Rational want = in ? 0 : 1;
        if (h.kind != HypKind::Measure || h.cmp != Cmp::Eq || h.q != want || !equivalent(h.lhs, b))
          return fail(p, "expected hypothesis mu(" + print(b) + ") = " + to_string(want));
        if (measure(b) != want) return fail(p, "hypothesis " + print(h) + " is false");
        return true;
      }
      case Rule::CInto:
      case Rule::CFrom:
      case Rule::DInto:
      case Rule::DFrom: {
        bool c_rule = d.rule == Rule::CInto || d.rule == Rule::CFrom;
        bool in = d.rule == Rule::CInto || d.rule == Rule::DInto;
        if (!(dir(in ? Direction::Into : Direction::From) && kind(c_rule ? FormulaKind::CQ : FormulaKind::DQ)))
          return false;
        if (d.premises.size() != 1) return fail(p, rule_name(d.rule) + " needs 1 premise");
        Direction pdir = (c_rule == in) ? Direction::Into : Direction::From;
        if (!premise(0, extended(x, a->name), pdir, a->lhs, nullptr)) return false;
        const BoolFormula& c = d.premises[0].conclusion.succedent[0].label;
        NameSet others = extended(x, a->name);
        others.erase(a->name);
        if (!d.hyps.empty() && d.hyps[0].kind == HypKind::Measure) {
          // univariate form: the premise label only speaks of the bound name
          for (const auto& n : free_names(c))
            if (n != a->name) return fail(p, "a counting rule without a split needs a label over " + a->name);
          if (d.hyps.size() > 2) return fail(p, "too many hypotheses for a univariate counting rule");
          const Hypothesis& h = d.hyps[0];
          if (h.cmp == Cmp::Eq || h.q != a->q || !equivalent(h.lhs, c))
            return fail(p, "expected hypothesis mu(" + print(c) + ") >= " + to_string(a->q) + " or < it");
          bool ge = measure(c) >= a->q;
          if (ge != (h.cmp == Cmp::Ge)) return fail(p, "hypothesis " + print(h) + " is false");
          BoolFormula e = ge == c_rule ? btop() : bbot();
          ok = in ? hyp(1, b, e) : hyp(1, e, b);
          break;
        }
        if (d.hyps.empty() || d.hyps[0].kind != HypKind::Split)
          return fail(p, "counting rule needs a split or a measure hypothesis first");
        const Hypothesis& split = d.hyps[0];
        if (split.name != a->name) return fail(p, "split must be on the bound name " + a->name);
        if (d.hyps.size() != split.parts.size() + 1 && d.hyps.size() != split.parts.size() + 2)
          return fail(p, "counting rule needs one measure hypothesis per part and an optional final entailment");
        ADecomposition dec{a->name, others, split.parts};
        if (!is_a_decomposition(dec, c)) return fail(p, "recorded split is not an a-decomposition of " + print(c));
        for (const auto& part : split.parts)
          for (const auto& n : free_names(part.rest))
            if (!others.count(n)) return fail(p, "split part mentions a name outside the context");
        std::vector<BoolFormula> chosen;
        for (std::size_t i = 0; i < split.parts.size(); ++i) {
          const Hypothesis& h = d.hyps[i + 1];
          if (h.kind != HypKind::Measure || h.cmp == Cmp::Eq || h.q != a->q ||
              !equivalent(h.lhs, split.parts[i].named))
            return fail(p, "measure hypothesis " + std::to_string(i) + " does not match part " + std::to_string(i));
          bool ge = measure(h.lhs) >= a->q;
          if (ge != (h.cmp == Cmp::Ge)) return fail(p, "hypothesis " + print(h) + " is false");
          if (ge == c_rule) chosen.push_back(split.parts[i].rest);
        }
        BoolFormula e = big_or(chosen);
        std::size_t last = split.parts.size() + 1;
        ok = in ? hyp(last, b, e) : hyp(last, e, b);
        break;
      }
      case Rule::Cut: {
        // derived rule: from c |> ~A | B and d |> A with b |= c & d conclude b |> B
        if (!(dir(Direction::Into) && arity(2, 1))) return false;
        const Sequent& p0 = d.premises[0].conclusion;
        const Sequent& p1 = d.premises[1].conclusion;
        if (p0.succedent.empty() || p1.succedent.empty()) return fail(p, "cut premises are empty");
        const Formula& imp = p0.succedent[0].body;
        if (imp->kind != FormulaKind::Or || imp->lhs->kind != FormulaKind::Neg || !same(imp->rhs, a))
          return fail(p, "first cut premise must prove ~A | B");
        if (!(premise(0, x, Direction::Into, imp, nullptr) && premise(1, x, Direction::Into, imp->lhs->lhs, nullptr)))
          return false;
        ok = hyp(0, b, band(p0.succedent[0].label, p1.succedent[0].label));
        break;
      }
    }
    if (!ok) return false;
    for (std::size_t i = 0; i < d.premises.size(); ++i)
      if (!check(d.premises[i], p + "." + std::to_string(i))) return false;
    return true;
  }
};

}  // namespace

CheckResult check_derivation(const Derivation& d) {
  Checker c;
  if (c.check(d, "root")) return {};
  return {false, c.path, c.reason};
}

Derivation cut(const Derivation& d1, const Derivation& d2, const BoolFormula& b) {
  for (const Derivation* d : {&d1, &d2}) {
    auto r = check_derivation(*d);
    if (!r.ok) throw Error("cut premise does not check at " + r.path + ": " + r.reason);
    if (d->conclusion.succedent.size() != 1 || d->conclusion.succedent[0].dir != Direction::Into)
      throw Error("cut premises must be single |> formulas");
  }
  const LabelledFormula& l1 = d1.conclusion.succedent[0];
  const LabelledFormula& l2 = d2.conclusion.succedent[0];
  const Formula& imp = l1.body;
  if (imp->kind != FormulaKind::Or || imp->lhs->kind != FormulaKind::Neg || !same(imp->lhs->lhs, l2.body))
    throw Error("cut premises must prove ~A | B and A");
  if (d1.conclusion.names != d2.conclusion.names) throw Error("cut premises have different name sets");
  if (!entails(b, band(l1.label, l2.label))) throw Error("cut label does not entail both premise labels");
  Sequent goal{d1.conclusion.names, {into(b, imp->rhs)}};
  ProofOutcome r = prove(goal);
  if (!r.proved) throw Error("internal: cut conclusion is valid but was not proved");
  return r.derivation;
}

}  // namespace cpl
