#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sdgen/decoder.h"
#include "support.h"

using namespace sdgen;

namespace {

ScorerQuery query(const Grammar& g, std::string_view nt, int depth, ProductionId parent) {
  return {g.nonterminal(nt), depth, parent};
}

}  // namespace

TEST_CASE("uniform scorer") {
  auto g = lang("toy").grammar;
  UniformScorer u(g);
  std::vector<double> w;
  u.rule_weights(query(*g, "bond", 1, 1), u.initial_context(0), w);
  CHECK(w == std::vector<double>{1, 1, 1});
  u.rule_weights(query(*g, "digit", 2, 2), u.initial_context(0), w);
  CHECK(w == std::vector<double>(9, 1.0));
  CHECK(u.bit_probability(query(*g, "s", 0, -1), u.initial_context(0), "sa", 0) == 0.5);
  ScorerContext c = u.initial_context(7);
  ScorerContext before = c;
  u.transition(c, Emission{false, 0, 0, -1, false});
  CHECK(c == before);
}

TEST_CASE("count model smoothing") {
  auto g = lang("toy").grammar;
  CountModel m(g, 0.1);
  ScorerQuery q = query(*g, "bond", 1, g->production_of("atom", 1));
  std::vector<double> w;
  m.rule_weights(q, {}, w);
  CHECK(w == std::vector<double>(3, 0.1));
  m.add_rule(q, 1);
  m.add_rule(q, 1);
  m.rule_weights(q, {}, w);
  CHECK(w[0] == doctest::Approx(0.1));
  CHECK(w[1] == doctest::Approx(2.1));
  // same context at depth 9 shares the 8+ bucket, depth 2 does not
  m.rule_weights(query(*g, "bond", 9, g->production_of("atom", 1)), {}, w);
  CHECK(w[1] == doctest::Approx(0.1));
  m.add_rule(query(*g, "bond", 8, g->production_of("atom", 1)), 2);
  m.rule_weights(query(*g, "bond", 12, g->production_of("atom", 1)), {}, w);
  CHECK(w[2] == doctest::Approx(1.1));

  ScorerQuery root = query(*g, "s", 0, -1);
  CHECK(m.bit_probability(root, {}, "sa", 0) == doctest::Approx(0.5));
  m.add_bit(root, "sa", 0, true);
  CHECK(m.bit_probability(root, {}, "sa", 0) == doctest::Approx(1.1 / 1.2));

  CHECK_THROWS_AS(CountModel(g, 0.0), Error);
  CHECK_THROWS_AS(CountModel(g, -1.0), Error);
}

TEST_CASE("count model JSON round-trip") {
  auto g = lang("toy").grammar;
  CountModel m(g, 0.25);
  m.add_rule(query(*g, "digit", 2, g->production_of("bond", 0)), 4, 3.0);
  m.add_bit(query(*g, "s", 0, -1), "sa", 0, false, 2.0);
  CountModel back = CountModel::from_json(m.to_json(), g);
  CHECK(back.alpha() == 0.25);
  CHECK(back.rule_counts() == m.rule_counts());
  CHECK(back.bit_counts() == m.bit_counts());
  CHECK(back.to_json() == m.to_json());

  std::string path = std::string(SDGEN_BINARY_DIR) + "/scorer_roundtrip.json";
  m.save(path);
  CHECK(CountModel::load(path, g).to_json() == m.to_json());
  std::remove(path.c_str());
}

TEST_CASE("count model refuses another grammar") {
  CountModel m(lang("toy").grammar, 0.1);
  CHECK_THROWS_AS(CountModel::from_json(m.to_json(), lang("program").grammar), Error);
  CHECK_THROWS_AS(CountModel::from_json("not json", lang("toy").grammar), Error);
  CHECK_THROWS_AS(CountModel::from_json("{\"format\": \"other\"}", lang("toy").grammar), Error);
  CHECK_THROWS_AS(CountModel::load("/nonexistent/model.json", lang("toy").grammar), Error);
}

TEST_CASE("empty training corpus scores like uniform") {
  const Language& toy = lang("toy");
  auto model = std::make_shared<CountModel>(toy.grammar);
  DecodeOptions opt{20, BudgetMode::kStrict};
  train_counts(toy.setup(model), {}, opt, *model);
  CHECK(model->rule_counts().empty());
  auto uniform = std::make_shared<UniformScorer>(toy.grammar);
  for (const char* text : {"CCC", "C-1CC-1", "C#9CC#9"}) {
    DerivationTree t = toy.parse(text);
    double a = log_likelihood(toy.setup(model), t, opt).log_prob;
    double b = log_likelihood(toy.setup(uniform), t, opt).log_prob;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("training on one chain tree") {
  const Language& toy = lang("toy");
  auto model = std::make_shared<CountModel>(toy.grammar, 0.1);
  DecodeOptions opt{20, BudgetMode::kStrict};
  train_counts(toy.setup(model), {toy.parse("CCC")}, opt, *model);
  CHECK(model->bit_probability(query(*toy.grammar, "s", 0, -1), {}, "sa", 0) ==
        doctest::Approx(0.1 / 1.2));
  // only the lazy bit is a real choice: no ring leaves both atoms forced
  double ll = log_likelihood(toy.setup(model), toy.parse("CCC"), opt).log_prob;
  CHECK(ll == doctest::Approx(std::log(1.1 / 1.2)).epsilon(1e-12));

  CHECK_THROWS_AS(train_counts(toy.setup(model), {toy.parse("C-1CC=1")}, opt, *model), Error);
}
