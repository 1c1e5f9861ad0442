#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdgen/attributes.h"
#include "sdgen/schemas.h"
#include "support.h"

using namespace sdgen;

namespace {

struct FixedSource : LazyBitSource {
  double p = 0.5;
  std::array<bool, 2> ok{true, true};
  double probability_one(int, BitSet) override { return p; }
  std::array<bool, 2> allowed(int, BitSet) override { return ok; }
};

const AttributeSchema& toy_schema() { return *lang("toy").schema; }

DerivationTree evaluated(const std::string& text, EvaluationReport* report = nullptr) {
  DerivationTree t = lang("toy").parse(text);
  EvaluationReport r = evaluate_offline(toy_schema(), t);
  if (report) *report = r;
  return t;
}

}  // namespace

TEST_CASE("toy ring check on matched and mismatched rings") {
  EvaluationReport r;
  DerivationTree t = evaluated("C-1CC-1", &r);
  CHECK(r.ok());
  CHECK(t.find_attribute(0, "matched")->as_symbols() == SymbolSet{"-1"});
  CHECK(t.find_attribute(0, "ok")->as_counter() == 1);
  CHECK(t.find_attribute(0, "sa")->as_bits().bits == 1u);

  evaluated("C-1CC=1", &r);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "ring-mismatch");
  CHECK(r.violations[0].node == 0);

  t = evaluated("CCC", &r);
  CHECK(r.ok());
  NodeId first = t.node(0).children[0];
  CHECK(t.find_attribute(first, "set")->as_symbols().empty());
  CHECK(t.find_attribute(0, "sa")->as_bits().bits == 0u);

  evaluated("C-1CC", &r);
  CHECK_FALSE(r.ok());
}

TEST_CASE("evaluation order does not change the result") {
  DerivationTree a = lang("program").parse("v1=v0*2;v2=v1-v0;return:v2");
  DerivationTree b = a;
  EvaluationReport ra = evaluate_offline(*lang("program").schema, a, TopoOrder::kLowestFirst);
  EvaluationReport rb = evaluate_offline(*lang("program").schema, b, TopoOrder::kHighestFirst);
  CHECK(ra.ok());
  CHECK(rb.ok());
  CHECK(ra.instances_set == rb.instances_set);
  for (NodeId n = 0; n < static_cast<NodeId>(a.size()); ++n) {
    CHECK(a.node(n).attributes.size() == b.node(n).attributes.size());
    for (const auto& [name, value] : a.node(n).attributes) {
      CHECK(*b.find_attribute(n, name) == value);
    }
  }
}

TEST_CASE("dependency graph of the toy chain tree") {
  DerivationTree t = lang("toy").parse("CCC");
  DependencyGraph g = build_dependency_graph(toy_schema(), t);
  CHECK(g.vertices.size() == 5);
  CHECK(check_noncircular(g));
  int matched = g.find(0, "matched");
  int ok = g.find(0, "ok");
  REQUIRE(matched >= 0);
  REQUIRE(ok >= 0);
  CHECK(std::find(g.edges[matched].begin(), g.edges[matched].end(), ok) != g.edges[matched].end());

  DerivationTree ring = lang("toy").parse("C-1CC-1");
  CHECK(check_noncircular(build_dependency_graph(toy_schema(), ring)));
}

TEST_CASE("grammar without attributes has an empty graph") {
  auto g = std::make_shared<const Grammar>(load_grammar("<S> -> 'a'\n"));
  AttributeSchema s(g, "empty");
  DerivationTree t = rule_sequence_to_tree(g, std::vector<ProductionId>{0});
  DependencyGraph graph = build_dependency_graph(s, t);
  CHECK(graph.vertices.empty());
  CHECK(check_noncircular(graph));
}

TEST_CASE("program schema: defined sets flow left to right") {
  DerivationTree t = lang("program").parse("v1=sin(v0);return:v1");
  DependencyGraph g = build_dependency_graph(*lang("program").schema, t);
  CHECK(check_noncircular(g));
  EvaluationReport r = evaluate_offline(*lang("program").schema, t);
  CHECK(r.ok());
  SymbolId stat_list = t.grammar().nonterminal("stat_list");
  std::vector<SymbolSet> envs;
  for (NodeId n : t.preorder()) {
    if (t.node(n).symbol == stat_list) envs.push_back(t.find_attribute(n, "env")->as_symbols());
  }
  REQUIRE(envs.size() == 2);
  CHECK(envs[0] == SymbolSet{"v0"});
  CHECK(envs[1] == SymbolSet{"v0", "v1"});
}

TEST_CASE("self-loop fixture is circular") {
  AttributeSchema fixture = make_self_loop_fixture(lang("toy").grammar);
  DerivationTree t = lang("toy").parse("CCC");
  CHECK_FALSE(check_noncircular(build_dependency_graph(fixture, t)));
  CHECK_THROWS_AS(evaluate_offline(fixture, t), Error);
  CHECK(has_cycle({{0}}));
  CHECK_FALSE(has_cycle({{1}, {}}));
  CHECK(has_cycle({{1}, {0}}));
}

TEST_CASE("lazy draw with a fair coin") {
  DerivationTree t(lang("toy").grammar);
  const AttributeDecl* sa = toy_schema().find(0, "sa");
  REQUIRE(sa);
  FixedSource src;
  Rng rng(42);
  LazyDraw d = sample_lazy(*sa, t, 0, src, &rng);
  CHECK(d.log_prob == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(t.find_attribute(0, "sa")->is_pending());

  DerivationTree t2(lang("toy").grammar);
  Rng rng2(42);
  LazyDraw d2 = sample_lazy(*sa, t2, 0, src, &rng2);
  CHECK(d2.value == d.value);
  CHECK(d2.log_prob == d.log_prob);

  CHECK_THROWS_AS(sample_lazy(*sa, t, 0, src, &rng), Error);  // already drawn
}

TEST_CASE("masked lazy bits are forced") {
  const AttributeDecl* sa = toy_schema().find(0, "sa");
  FixedSource src;
  src.ok = {false, true};
  DerivationTree t(lang("toy").grammar);
  Rng rng(1);
  LazyDraw d = sample_lazy(*sa, t, 0, src, &rng);
  CHECK(d.value.bits == 1u);
  CHECK(d.log_prob == 0.0);

  src.ok = {true, false};
  DerivationTree t2(lang("toy").grammar);
  CHECK_THROWS_AS(sample_lazy(*sa, t2, 0, src, nullptr, BitSet{1, 1}), LazyMaskError);

  src.ok = {false, false};
  DerivationTree t3(lang("toy").grammar);
  CHECK_THROWS_AS(sample_lazy(*sa, t3, 0, src, &rng), LazyMaskError);
}

TEST_CASE("lazy linking") {
  const AttributeDecl* sa = toy_schema().find(0, "sa");
  FixedSource src;
  auto fresh = [&](uint32_t bits) {
    DerivationTree t = lang("toy").parse(bits ? "C-1CC-1" : "CCC");
    sample_lazy(*sa, t, 0, src, nullptr, BitSet{bits, 1});
    return t;
  };
  DerivationTree ring = fresh(1);
  lazy_link(toy_schema(), ring, 0, "sa", "matched", AttributeValue::symbols({"-1"}));
  CHECK(ring.find_attribute(0, "sa")->is_set());
  CHECK(ring.find_attribute(0, "matched")->as_symbols() == SymbolSet{"-1"});

  DerivationTree chain = fresh(0);
  lazy_link(toy_schema(), chain, 0, "sa", "matched", AttributeValue::symbols({}));
  CHECK(chain.find_attribute(0, "sa")->is_set());

  DerivationTree wrong = fresh(1);
  CHECK_THROWS_AS(lazy_link(toy_schema(), wrong, 0, "sa", "matched", AttributeValue::symbols({})),
                  LazyLinkError);

  DerivationTree unset = lang("toy").parse("CCC");
  CHECK_THROWS_AS(lazy_link(toy_schema(), unset, 0, "sa", "matched", AttributeValue::symbols({})),
                  LazyLinkError);
}

TEST_CASE("schema construction rejects bad rules") {
  auto g = lang("toy").grammar;
  AttributeSchema s(g, "bad");
  s.declare("atom", "x", AttributeKind::kSynthesized, ValueDomain::kIntCounter);
  CHECK_THROWS_AS(s.rule("atom", 0, {0, "y"}, RuleFn::kConstant, {}), Error);
  CHECK_THROWS_AS(s.rule("atom", 0, {1, "x"}, RuleFn::kConstant, {}), Error);
  CHECK_THROWS_AS(s.rule("atom", 0, {0, "x"}, RuleFn::kCopy, {{1, "x"}}), Error);
  CHECK_THROWS_AS(s.rule("atom", 5, {0, "x"}, RuleFn::kConstant, {}), Error);
}

TEST_CASE("smiles schema toggles ring digits") {
  const Language& smiles = lang("smiles");
  DerivationTree ok = smiles.parse("C1CC1C1CC1");
  CHECK(evaluate_offline(*smiles.schema, ok).ok());
  DerivationTree open = smiles.parse("C1CC");
  EvaluationReport r = evaluate_offline(*smiles.schema, open);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "ring-unmatched");
  DerivationTree branch = smiles.parse("C1CC(C1)C");
  CHECK(evaluate_offline(*smiles.schema, branch).ok());
}
