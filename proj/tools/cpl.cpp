// Command-line front end. The first stdout line is a single verdict token; exit codes are
// 0 for a positive answer, 1 for a negative one and 2 for usage or parse errors.

#include "cpl/lcpl.hpp"
#include "cpl/mcpl.hpp"
#include "cpl/normalform.hpp"
#include "cpl/prover.hpp"
#include "cpl/semantics.hpp"
#include "cpl/textio.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

using namespace cpl;

namespace {

struct Options {
  std::string input = "-";
  std::string expr;
  unsigned fuel = 200;
  bool oracle = false;
  unsigned jobs = 1;
};

std::string read_input(const Options& o) {
  if (!o.expr.empty()) return o.expr;
  if (o.input == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream f(o.input);
  if (!f) throw Error("cannot read " + o.input);
  return {std::istreambuf_iterator<char>(f), {}};
}

NameSet split_names(const std::string& s) {
  NameSet out;
  std::stringstream in(s);
  std::string n;
  while (std::getline(in, n, ','))
    if (!n.empty()) out.insert(n);
  return out;
}

int verdict(const std::string& token, bool positive, const std::string& artifact = {}) {
  std::cout << token << "\n";
  if (!artifact.empty()) std::cout << artifact << (artifact.back() == '\n' ? "" : "\n");
  return positive ? 0 : 1;
}

// Measure of a formula by evaluating it on every valuation of its free atoms.
Rational oracle_measure(const Formula& a, const NameSet& x, unsigned jobs) {
  AtomSet fa = free_atoms(a);
  std::vector<Atom> vars(fa.begin(), fa.end());
  if (vars.size() > 40) throw Error("too many atoms for the brute-force evaluator");
  unsigned long long total = 1ULL << vars.size();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<unsigned long long>(total, 64))));
  std::vector<unsigned long long> hits(jobs, 0);
  auto work = [&](unsigned k) {
    for (unsigned long long bits = k; bits < total; bits += jobs)
      if (eval(a, valuation_from_bits(vars, bits), x)) ++hits[k];
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(work, k);
  work(0);
  for (auto& t : pool) t.join();
  unsigned long long sum = 0;
  for (auto h : hits) sum += h;
  Rational m(Integer(std::to_string(sum)), Integer(std::to_string(total)));
  m.canonicalize();
  return m;
}

Step parse_step(const std::string& s) {
  std::stringstream in(s);
  std::string kind, at, where;
  Step st;
  in >> kind;
  if (kind == "perm") {
    st.kind = StepKind::Perm;
    if (!(in >> st.rule)) throw Error("step: expected a rule number after 'perm'");
  } else if (kind != "beta") {
    throw Error("step: expected 'beta' or 'perm N'");
  }
  if (!(in >> at >> where) || at != "at") throw Error("step: expected 'at PATH'");
  if (where != "root")
    for (char c : where) {
      if (c != '0' && c != '1') throw Error("step: a path is a string of 0 and 1, or 'root'");
      st.path.push_back(static_cast<unsigned>(c - '0'));
    }
  return st;
}

int cmd_parse(const Options& o, const std::string& kind) {
  std::string text = read_input(o);
  std::string out;
  if (kind == "formula") out = print(parse_formula(text));
  else if (kind == "bool") out = print(parse_bool(text));
  else if (kind == "sequent") out = print(parse_sequent(text));
  else if (kind == "term") out = print(parse_term(text));
  else if (kind == "type") out = print(parse_type(text));
  else if (kind == "judgment") out = print(parse_judgment(text));
  else if (kind == "derivation") out = print(parse_derivation(text));
  else if (kind == "typing") out = print(parse_type_derivation(text));
  else if (kind == "mcpl") out = print(parse_mcpl_derivation(text));
  else throw Error("unknown kind " + kind);
  return verdict("ok", true, out);
}

int cmd_decide(const Options& o, const std::string& names) {
  Formula a = parse_formula(read_input(o));
  NameSet x = names.empty() ? free_names(a) : split_names(names);
  Verdict v;
  if (o.oracle) {
    v.measure = oracle_measure(a, x, o.jobs);
    v.kind = v.measure == 1 ? VerdictKind::Valid : v.measure == 0 ? VerdictKind::Invalid : VerdictKind::Contingent;
  } else {
    v = decide(a, x);
  }
  const char* token = v.kind == VerdictKind::Valid ? "valid" : v.kind == VerdictKind::Invalid ? "invalid" : "contingent";
  return verdict(token, v.kind == VerdictKind::Valid, to_string(v.measure));
}

int cmd_prove(const Options& o) {
  Sequent s = parse_sequent(read_input(o));
  ProofOutcome r = prove(s);
  if (r.proved) return verdict("proved", true, print(r.derivation));
  std::string w = print(r.witness);
  return verdict("refuted", false, "witness " + (w.empty() ? "(empty)" : w) + "\nopen " + print(r.invalid_normal));
}

int cmd_check_result(const CheckResult& r, const std::string& artifact = {}) {
  if (r.ok) return verdict("ok", true, artifact);
  return verdict("invalid", false, r.path + ": " + r.reason);
}

int cmd_normal_prob(const Options& o, const std::string& at_least) {
  Term t = parse_term(read_input(o));
  if (at_least.empty()) return verdict(to_string(normal_prob(t)), true);
  auto r = parse_rational(at_least);
  if (!r || !in_unit_interval(*r)) throw Error("--at-least needs a rational in [0,1]");
  bool ok = normalizes_with_prob(t, *r, o.fuel);
  return verdict(ok ? "yes" : "no", ok);
}

int cmd_reduce(const Options& o) {
  Term t = parse_term(read_input(o));
  ReduceResult r = reduce(t, o.fuel);
  std::string art = print(r.term) + "\nrounds " + std::to_string(r.rounds);
  return verdict(r.exhausted ? "exhausted" : "normal", !r.exhausted, art);
}

struct TypecheckArgs {
  std::string term, names, exponent, step, context;
  std::vector<std::string> lambdas, nus;
  bool normalization = false;
};

std::optional<QualType> parse_annotation(const std::string& s) {
  if (s == "_") return std::nullopt;
  Parser p(s);
  QualType q = p.qualtype();
  p.finish();
  return q;
}

int cmd_typecheck(const Options& o, const TypecheckArgs& a) {
  TypeDerivation d;
  bool inferred = !a.term.empty();
  if (inferred) {
    Context g;
    if (!a.context.empty()) g = parse_judgment(a.context + " |-{}[1] omega : F |> o").context;
    Annotations ann;
    for (const auto& l : a.lambdas) ann.lambdas.push_back(parse_annotation(l));
    for (const auto& n : a.nus) {
      if (n == "_") {
        ann.nus.push_back(std::nullopt);
        continue;
      }
      auto r = parse_rational(n);
      if (!r || !in_unit_interval(*r)) throw Error("--nu needs a rational in [0,1] or _");
      ann.nus.push_back(*r);
    }
    std::optional<Rational> e;
    if (!a.exponent.empty()) {
      e = parse_rational(a.exponent);
      if (!e) throw Error("--exponent needs a rational");
    }
    auto r = infer(g, parse_term(a.term), split_names(a.names), ann, e);
    if (!r) return verdict("untyped", false);
    d = *r;
  } else {
    d = parse_type_derivation(read_input(o));
    CheckResult c = check_type_derivation(d);
    if (!c.ok) return verdict("ill-typed", false, c.path + ": " + c.reason);
  }
  if (!a.step.empty()) d = transport_derivation(d, parse_step(a.step));
  if (a.normalization) {
    NormalizationReport n = check_normalization(d.judgment, o.fuel);
    std::string art = print(d) + "\nevents " + std::to_string(n.events);
    if (!n.ok) return verdict("not-normalizing", false, art + "\nfailing " + n.failure);
    return verdict(inferred ? "typed" : "ok", true, art);
  }
  return verdict(inferred ? "typed" : "ok", true, print(d));
}

int cmd_mcpl(const Options& o) {
  McplDerivation d = parse_mcpl_derivation(read_input(o));
  CheckResult c = check_mcpl_derivation(d);
  if (!c.ok) return verdict("invalid", false, c.path + ": " + c.reason);
  Decoration dec = decorate(d);
  return verdict("ok", true, print(dec.term) + "\n" + print(dec.derivation));
}

int cmd_translate(const Options& o, bool mcpl, bool check) {
  std::string text = read_input(o);
  std::size_t first = text.find_first_not_of(" \t\r\n");
  bool tree = first != std::string::npos && text[first] == '(';
  Sequent s;
  if (mcpl) s = translate_mcpl(tree ? parse_mcpl_derivation(text).conclusion : parse_mcpl_sequent(text));
  else s = translate_judgment(tree ? parse_type_derivation(text).judgment : parse_judgment(text));
  if (!check) return verdict("ok", true, print(s));
  bool valid = sequent_valid(s);
  return verdict(valid ? "valid" : "invalid", valid, print(s));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counting propositional logic, the probabilistic lambda calculus and its counting types"};
  app.require_subcommand(1);
  app.fallthrough();  // subcommands inherit this, so --fuel, --oracle and --jobs work on either side of the subcommand
  Options o;
  app.add_option("--fuel", o.fuel, "reduction rounds for term-reduce and normalization bounds")->capture_default_str();
  app.add_flag("--oracle", o.oracle, "decide by brute-force evaluation instead of the Boolean reading");
  app.add_option("--jobs", o.jobs, "threads for the brute-force evaluator")->capture_default_str();

  auto input = [&](CLI::App* c) {
    c->add_option("file", o.input, "input file, - for stdin")->capture_default_str();
    c->add_option("-e,--expr", o.expr, "input text given inline");
    return c;
  };

  std::string kind = "formula", names, at_least;
  bool translate_mcpl_flag = false, translate_check = false;
  TypecheckArgs tc;

  auto* parse = input(app.add_subcommand("parse", "parse and print back"));
  parse->add_option("--kind", kind, "formula|bool|sequent|term|type|judgment|derivation|typing|mcpl")
      ->capture_default_str();
  auto* measure_c = input(app.add_subcommand("measure", "measure of a Boolean formula"));
  auto* decide_c = input(app.add_subcommand("decide", "validity of a counting formula"));
  decide_c->add_option("--names", names, "comma-separated names X (default: the free names)");
  auto* pnf_c = input(app.add_subcommand("pnf", "prenex normal form"));
  auto* ppnf_c = input(app.add_subcommand("ppnf", "positive prenex normal form"));
  auto* wagner_c = input(app.add_subcommand("wagner", "export the positive prenex form as a Wagner instance"));
  unsigned precision = 0;
  wagner_c->add_option("--precision", precision, "grid exponent for non-dyadic thresholds");
  auto* prove_c = input(app.add_subcommand("prove", "proof search for a labelled sequent"));
  auto* check_c = input(app.add_subcommand("check-proof", "check a sequent derivation"));
  auto* tpnf_c = input(app.add_subcommand("term-pnf", "permutative normal form of a term"));
  auto* tdist_c = input(app.add_subcommand("term-dist", "distribution of pseudo-values"));
  auto* tprob_c = input(app.add_subcommand("term-normal-prob", "probability of a head normal form"));
  tprob_c->add_option("--at-least", at_least, "ask whether reduction within --fuel reaches this probability");
  auto* treduce_c = input(app.add_subcommand("term-reduce", "reduce a term within --fuel rounds"));
  auto* type_c = input(app.add_subcommand("typecheck", "check a typing derivation, or infer one with --term"));
  type_c->add_option("--term", tc.term, "infer a derivation for this term instead of reading one");
  type_c->add_option("--names", tc.names, "comma-separated names X for --term");
  type_c->add_option("--context", tc.context, "typing context for --term, e.g. 'x : C[1] o, y : C[1/2] o'");
  type_c->add_option("--exponent", tc.exponent, "demanded exponent for --term");
  type_c->add_option("--lambda", tc.lambdas, "binder annotation in preorder, e.g. 'C[1/2] o', or _");
  type_c->add_option("--nu", tc.nus, "rate of a generator in preorder, or _");
  type_c->add_option("--step", tc.step, "transport along a step, e.g. 'beta at 01' or 'perm 5 at root'");
  type_c->add_flag("--normalization", tc.normalization, "check every event of the label within --fuel");
  auto* mcpl_c = input(app.add_subcommand("mcpl-check", "check and decorate a minimal-fragment derivation"));
  auto* tr_c = input(app.add_subcommand("translate", "translate a typing judgment into a labelled sequent"));
  tr_c->add_flag("--mcpl", translate_mcpl_flag, "the input is a minimal-fragment sequent or derivation");
  tr_c->add_flag("--check", translate_check, "also decide the validity of the translation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*parse) return cmd_parse(o, kind);
    if (*measure_c) return verdict(to_string(measure(parse_bool(read_input(o)))), true);
    if (*decide_c) return cmd_decide(o, names);
    if (*pnf_c) return verdict("ok", true, print(pnf(parse_formula(read_input(o)))));
    if (*ppnf_c) return verdict("ok", true, print(ppnf(parse_formula(read_input(o)))));
    if (*wagner_c) {
      auto w = export_wagner(ppnf(parse_formula(read_input(o))),
                             precision ? std::optional<unsigned>(precision) : std::nullopt);
      return verdict(w.exact ? "exact" : "inexact", true, print(w));
    }
    if (*prove_c) return cmd_prove(o);
    if (*check_c) return cmd_check_result(check_derivation(parse_derivation(read_input(o))));
    if (*tpnf_c) return verdict("ok", true, print(pnf_term(parse_term(read_input(o)))));
    if (*tdist_c) return verdict("ok", true, print(distribution(parse_term(read_input(o)))));
    if (*tprob_c) return cmd_normal_prob(o, at_least);
    if (*treduce_c) return cmd_reduce(o);
    if (*type_c) return cmd_typecheck(o, tc);
    if (*mcpl_c) return cmd_mcpl(o);
    if (*tr_c) return cmd_translate(o, translate_mcpl_flag, translate_check);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
