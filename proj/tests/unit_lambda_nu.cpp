#include "doctest.h"
#include "support.hpp"

#include "cpl/lambda_nu.hpp"
#include "cpl/textio.hpp"

using namespace cpl;

namespace {

const char* kThreeQuarters = "nu a. (omega (+ a 0) (\\x. x omega)) (+ a 1) (\\x. x)";
const char* kOneQuarter = "nu a. omega (+ a 0) (nu b. omega (+ b 0) (\\x. x))";

// Exhaustive permutative rewriting in a random order.
Term random_perm_normal(support::Rng& r, Term t) {
  for (int guard = 0; guard < 100000; ++guard) {
    auto rs = redexes(t, false, true);
    if (rs.empty()) return t;
    auto next = apply_step(t, rs[r.below(static_cast<unsigned>(rs.size()))]);
    REQUIRE(next);
    t = *next;
  }
  FAIL("permutative rewriting did not stop");
  return t;
}

}  // namespace

TEST_CASE("events resolve choices, bit 1 keeps the left operand") {
  Term t = parse_term("x (+ a 0) y");
  Event e;
  e.names = {"a"};
  e.f.set({"a", 0}, true);
  CHECK(alpha_equal(apply_event(e, t), var("x")));
  e.f.set({"a", 0}, false);
  CHECK(alpha_equal(apply_event(e, t), var("y")));
  Term u = parse_term("x (+ b 0) y");
  CHECK(alpha_equal(apply_event(e, u), u));
}

TEST_CASE("choice order") {
  ChoiceKey free_a{0, "a", 0, 0}, free_b{0, "b", 0, 0}, bound_outer{1, "", 0, 0}, bound_inner{1, "", 1, 0};
  CHECK(free_a < free_b);
  CHECK(free_b < bound_outer);
  CHECK(bound_outer < bound_inner);
  ChoiceKey hi{1, "", 0, 3}, lo{1, "", 0, 1};
  CHECK(hi < lo);
  CHECK(!(lo < hi));
}

TEST_CASE("single permutative rules") {
  CHECK(alpha_equal(pnf_term(parse_term("\\x. (x (+ a 0) y)")), parse_term("(\\x. x) (+ a 0) (\\x. y)")));
  CHECK(alpha_equal(pnf_term(parse_term("nu a. y")), var("y")));
  CHECK(alpha_equal(pnf_term(parse_term("y (+ a 0) y")), var("y")));
  CHECK(alpha_equal(pnf_term(parse_term("(x (+ a 0) y) z")), parse_term("(x z) (+ a 0) (y z)")));
}

TEST_CASE("permutative normal form classification") {
  auto v = is_pnf(id_term());
  REQUIRE(v);
  CHECK(v->pseudo_value);
  auto tree = is_pnf(parse_term("nu a. x (+ a 0) y"));
  REQUIRE(tree);
  CHECK(!tree->pseudo_value);
  CHECK(tree->level == 0);
  CHECK(tree->leaves.size() == 2);
  CHECK(!is_pnf(parse_term("nu a. (u (+ a 1) v) (+ a 0) w")));
  CHECK(is_pnf(parse_term("nu a. (u (+ a 0) v) (+ a 1) w")));
}

TEST_CASE("pnf_term is a permutative normal form") {
  support::Rng r(67);
  for (int i = 0; i < 300; ++i) {
    Term t = support::random_term(r, 2 + r.below(25));
    Term p = pnf_term(t);
    CHECK(is_pnf(p).has_value());
    CHECK(redexes(p, false, true).empty());
  }
}

TEST_CASE("permutative rewriting is confluent") {
  support::Rng r(71);
  for (int i = 0; i < 150; ++i) {
    Term t = support::random_term(r, 2 + r.below(20));
    Term p = pnf_term(t);
    Term q = random_perm_normal(r, t);
    CHECK_MESSAGE(alpha_equal(p, q), print(t));
  }
}

TEST_CASE("distribution goldens") {
  Distribution d = distribution(parse_term(kThreeQuarters));
  REQUIRE(d.entries.size() == 3);
  CHECK(d.entries.at(alpha_key(id_term())).second == Rational(1, 2));
  CHECK(d.entries.at(alpha_key(parse_term("\\x. x omega"))).second == Rational(1, 4));
  CHECK(d.entries.at(alpha_key(omega_term())).second == Rational(1, 4));
  Distribution dirac = distribution(id_term());
  REQUIRE(dirac.entries.size() == 1);
  CHECK(dirac.total() == 1);
  CHECK(print(d) == "1/2  id\n1/4  \\x. x omega\n1/4  omega\n");
}

TEST_CASE("distributions agree with the resolving oracle") {
  support::Rng r(73);
  for (int i = 0; i < 300; ++i) {
    Term t = support::random_term(r, 2 + r.below(20));
    Distribution d = distribution(t);
    CHECK(d.total() == 1);
    auto oracle = support::oracle_distribution(t, pnf_term);
    std::map<std::string, Rational> got;
    for (const auto& [k, v] : d.entries) got[k] = v.second;
    CHECK_MESSAGE(got == oracle, print(t));
  }
}

TEST_CASE("normal form probability goldens") {
  CHECK(normal_prob(parse_term(kThreeQuarters)) == Rational(3, 4));
  CHECK(normal_prob(parse_term(kOneQuarter)) == Rational(1, 4));
  CHECK(normal_prob(id_term()) == 1);
  CHECK(normal_prob(omega_term()) == 0);
}

TEST_CASE("head normal forms") {
  support::Rng r(79);
  for (int i = 0; i < 300; ++i) {
    std::vector<Name> vars{"y"}, names{"a"};
    Term t = support::random_term(r, 2 + r.below(12), vars, names);
    CHECK(is_head_normal(t) == support::oracle_head_normal(t));
  }
  CHECK(is_head_normal(parse_term("\\x. y omega")));
  CHECK(!is_head_normal(parse_term("\\x. (\\z. z) y")));
}

TEST_CASE("reduction") {
  ReduceResult r = reduce(parse_term("(\\x. x) y"), 1);
  CHECK(alpha_equal(r.term, var("y")));
  CHECK(!r.exhausted);
  ReduceResult o = reduce(omega_term(), 20);
  CHECK(o.exhausted);
  CHECK(alpha_equal(o.term, omega_term()));
  ReduceResult h = reduce(parse_term("nu a. (id (+ a 0) omega) (id (+ a 0) omega)"), 10);
  CHECK(normal_prob(h.term) >= Rational(1, 2));
  auto b = beta_step(parse_term("\\z. (\\x. x) z"));
  REQUIRE(b);
  CHECK(alpha_equal(*b, id_term()));
  CHECK(!beta_step(id_term()));
}

TEST_CASE("normalization with probability") {
  CHECK(normalizes_with_prob(parse_term("(nu a. id (+ a 0) omega) (nu a. id (+ a 0) omega)"), Rational(1, 4), 200));
  CHECK(!normalizes_with_prob(omega_term(), Rational(1, 2), 50));
  CHECK(normalizes_with_prob(omega_term(), 0, 1));
}

TEST_CASE("steps are addressed by path") {
  Term t = parse_term("\\z. (\\x. x) (z (+ a 0) z)");
  auto rs = redexes(t);
  REQUIRE(!rs.empty());
  bool beta_inside = false;
  for (const auto& s : rs) {
    auto u = apply_step(t, s);
    REQUIRE(u);
    if (s.kind == StepKind::Beta && s.path == std::vector<unsigned>{0}) {
      beta_inside = true;
      CHECK(print(s) == "beta at 0");
      CHECK(alpha_equal(*u, parse_term("\\z. z (+ a 0) z")));
    }
  }
  CHECK(beta_inside);
  CHECK(!apply_step(t, Step{StepKind::Beta, {}, 0}));
  CHECK(print(Step{StepKind::Perm, {}, 5}) == "perm 5 at root");
}
