#include "doctest.h"
#include "support.hpp"

#include "cpl/lcpl.hpp"
#include "cpl/mcpl.hpp"
#include "cpl/textio.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cpl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TypeDerivation stored(const std::string& name) {
  return parse_type_derivation(slurp(std::string(CPL_TEST_DATA) + "/lcpl/" + name + ".txt"));
}

std::vector<std::filesystem::path> mcpl_corpus() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(std::string(CPL_TEST_DATA) + "/mcpl")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void check_ok(const TypeDerivation& d) {
  auto r = check_type_derivation(d);
  CHECK_MESSAGE(r.ok, r.path << ": " << r.reason << "\n" << print(d));
}

}  // namespace

TEST_CASE("stored derivations check, translate to valid sequents and normalize") {
  for (auto name : {"example1", "example2", "example3", "omega_bot"}) {
    TypeDerivation d = stored(name);
    check_ok(d);
    CHECK(sequent_valid(translate_judgment(d.judgment)));
    if (d.judgment.context.empty()) {
      auto n = check_normalization(d.judgment, 200);
      CHECK_MESSAGE(n.ok, name << ": " << n.failure);
    }
  }
}

TEST_CASE("exponents and labels are checked") {
  TypeDerivation d = stored("example2");
  TypeDerivation up = d;
  up.judgment.exponent = Rational(3, 4);
  CHECK(!check_type_derivation(up).ok);
  TypeDerivation e1 = stored("example1");
  TypeDerivation bad = e1;
  bad.judgment.label = btop();  // the left operand is only taken when x(0,a) holds
  CHECK(!check_type_derivation(bad).ok);
  TypeDerivation id = e1.premises.at(0).premises.at(0);
  id.judgment.exponent = 1;  // above the argument's 1/2
  CHECK(!check_type_derivation(id).ok);
}

TEST_CASE("omega only gets the empty label") {
  check_ok(stored("omega_bot"));
  TypeDerivation t = stored("omega_bot");
  t.judgment.label = btop();
  CHECK(!check_type_derivation(t).ok);
  auto inferred = infer({}, parse_term("\\x. x omega"), {});
  if (inferred) CHECK(!satisfiable(inferred->judgment.label));
}

TEST_CASE("inference produces checked derivations") {
  auto id = infer({}, id_term(), {});
  REQUIRE(id);
  check_ok(*id);
  CHECK(equivalent(id->judgment.label, btop()));
  CHECK(id->judgment.exponent == 1);
  Annotations ann;
  ann.lambdas = {QualType{Rational(1, 2), base_type()}};
  auto half = infer({}, parse_term("nu a. id (+ a 0) omega"), {}, ann);
  REQUIRE(half);
  check_ok(*half);
  CHECK(half->judgment.exponent == Rational(1, 4));
  support::Rng r(83);
  int typed = 0;
  for (int i = 0; i < 400; ++i) {
    Term t = support::random_term(r, 2 + r.below(14));
    auto d = infer({}, t, {});
    if (!d) continue;
    ++typed;
    check_ok(*d);
    CHECK(alpha_equal(d->judgment.term, t));
  }
  CHECK(typed > 100);
}

TEST_CASE("transport keeps the judgment along random steps") {
  support::Rng r(89);
  int steps = 0;
  for (int i = 0; i < 600; ++i) {
    std::vector<Name> vars, names;
    bool open = r.coin();
    Context gamma;
    NameSet x;
    if (open) {
      vars = {"y"};
      names = {"a", "b"};
      gamma = {{"y", {Rational(1, 2), arrow(1, base_type(), base_type())}}};
      x = {"a", "b"};
    }
    Term t = support::random_term(r, 2 + r.below(14), vars, names, {"c", "d", "e"});
    auto d = infer(gamma, t, x);
    if (!d) continue;
    TypeDerivation cur = *d;
    for (int k = 0; k < 10; ++k) {
      auto rs = redexes(cur.judgment.term);
      if (rs.empty()) break;
      Step s = rs[r.below(static_cast<unsigned>(rs.size()))];
      TypeDerivation next;
      try {
        next = transport_derivation(cur, s);
      } catch (const std::exception& e) {
        FAIL_CHECK(print(s) << " on " << print(cur.judgment.term) << ": " << e.what());
        break;
      }
      ++steps;
      check_ok(next);
      CHECK(alpha_equal(next.judgment.term, *apply_step(cur.judgment.term, s)));
      CHECK(equivalent(next.judgment.label, cur.judgment.label));
      CHECK(next.judgment.exponent == cur.judgment.exponent);
      CHECK(same(next.judgment.type, cur.judgment.type));
      cur = next;
    }
  }
  CHECK(steps > 500);
}

TEST_CASE("transport of the worked example across a beta and a permutative step") {
  TypeDerivation d = stored("example2");
  bool beta = false, perm = false;
  for (const auto& s : redexes(d.judgment.term)) {
    TypeDerivation t = transport_derivation(d, s);
    check_ok(t);
    (s.kind == StepKind::Beta ? beta : perm) = true;
  }
  CHECK(beta);
  CHECK(perm);
}

TEST_CASE("derivation surgeries") {
  TypeDerivation d = stored("example1");
  TypeDerivation w = weaken_label(d, parse_bool("x(0,a) & x(1,a)"));
  check_ok(w);
  TypeDerivation l = lower_exponent(d, Rational(1, 4));
  check_ok(l);
  CHECK(l.judgment.exponent == Rational(1, 4));
  TypeDerivation n = add_names(d, {"b"});
  check_ok(n);
  CHECK(n.judgment.names == NameSet{"a", "b"});
  TypeDerivation f = forget_name(add_names(stored("example3"), {"c"}), "c");
  check_ok(f);
  CHECK(f.judgment.names.empty());
  auto body = infer({{"f", {1, arrow(1, base_type(), base_type())}}}, parse_term("\\z. f z"), {});
  auto arg = infer({}, id_term(), {}, Annotations{{QualType{1, base_type()}}, {}});
  REQUIRE(body);
  REQUIRE(arg);
  TypeDerivation s = substitute(*body, "f", *arg);
  check_ok(s);
  CHECK(alpha_equal(s.judgment.term, parse_term("\\z. (\\x. x) z")));
}

TEST_CASE("type translation") {
  CHECK(print(translate_type(base_type(), "a")) == "C[1]{a}(p(0,a) | ~p(0,a))");
  Formula f = translate_type(parse_type("C[1/2] o -> o"), "a");
  CHECK(f->kind == FormulaKind::Or);
  CHECK(f->lhs->kind == FormulaKind::Neg);
  CHECK(f->lhs->lhs->kind == FormulaKind::CQ);
  CHECK(f->lhs->lhs->q == Rational(1, 2));
  Sequent s = translate_judgment(stored("example1").judgment);
  CHECK(s.names.size() == 2);
  CHECK(s.succedent.size() == 1);
}

TEST_CASE("mCPL corpus: checks, decorates and embeds") {
  auto files = mcpl_corpus();
  CHECK(files.size() == 20);
  for (const auto& p : files) {
    std::string text = slurp(p.string());
    McplDerivation d = parse_mcpl_derivation(text);
    CHECK(print(d) + "\n" == text);
    auto c = check_mcpl_derivation(d);
    CHECK_MESSAGE(c.ok, p.filename().string() << " " << c.path << ": " << c.reason);
    Decoration dec = decorate(d);
    check_ok(dec.derivation);
    CHECK(alpha_equal(dec.derivation.judgment.term, dec.term));
    CHECK(sequent_valid(translate_mcpl(d.conclusion)));
  }
}

TEST_CASE("mCPL checker rejects a wrong axiom") {
  McplDerivation d = parse_mcpl_derivation("(Ax C[1] Flip(0) |-{} T |> C[1] Flip(1) [])");
  CHECK(!check_mcpl_derivation(d).ok);
  McplFormula f = parse_mcpl_formula("C[1/2] (C[1] Flip(0) -> Flip(1))");
  CHECK(f.q == Rational(1, 2));
  CHECK(!f.body->flip);
  CHECK(same(bullet(f).sigma, parse_type("C[1] o -> o")));
}
