#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sdgen/grammar.h"
#include "sdgen/tree.h"
#include "support.h"

using namespace sdgen;

namespace {

std::shared_ptr<const Grammar> toy() { return lang("toy").grammar; }

}  // namespace

TEST_CASE("shipped grammars load with their production counts") {
  CHECK(lang("toy").grammar->num_productions() == 15);
  CHECK(lang("program").grammar->num_productions() == 48);
  CHECK(lang("smiles").grammar->num_productions() == 70);
  CHECK(lang("toy").grammar->symbol(lang("toy").grammar->start()).name == "s");
  CHECK(lang("smiles").grammar->symbol(lang("smiles").grammar->start()).name == "smiles");
}

TEST_CASE("productions are numbered in file order") {
  Grammar g = load_grammar("<a> -> <b> 'x' | 'y'\n# note\n<b> -> 'z'\n    | 'w'\n");
  REQUIRE(g.num_productions() == 4);
  CHECK(g.to_string(0) == "<a> -> <b> 'x'");
  CHECK(g.to_string(1) == "<a> -> 'y'");
  CHECK(g.to_string(3) == "<b> -> 'w'");
  CHECK(g.alternative_index(3) == 1);
  CHECK(g.production_of("b", 0) == 2);
  CHECK(g.min_expansion_steps(g.nonterminal("a")) == 1);
}

TEST_CASE("terminal escapes") {
  Grammar g = load_grammar("<a> -> '\\\\' | '\\''\n");
  CHECK(g.symbol(g.production(0).rhs[0]).name == "\\");
  CHECK(g.symbol(g.production(1).rhs[0]).name == "'");
}

TEST_CASE("malformed grammars report line and column") {
  try {
    load_grammar("<a> -> 'x'\n<b> 'y'\n");
    FAIL("no error");
  } catch (const GrammarError& e) {
    CHECK(e.line() == 2);
  }
  try {
    load_grammar("<a> -> <c>\n");
    FAIL("no error");
  } catch (const GrammarError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 8);
  }
  CHECK_THROWS_AS(load_grammar(""), GrammarError);
  CHECK_THROWS_AS(load_grammar("<a> -> <a>\n"), GrammarError);
  CHECK_THROWS_AS(load_grammar("<a> -> 'x'\n<a> -> 'y'\n"), GrammarError);
}

TEST_CASE("fingerprint is the FNV-1a of the source") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  std::string text = "<a> -> 'x'\n";
  CHECK(load_grammar(text).fingerprint() == fnv1a64(text));
}

TEST_CASE("yield of hand-built toy trees") {
  auto g = toy();
  DerivationTree t(g);
  auto top = t.expand(0, g->production_of("s", 0));
  std::vector<NodeId> kids(top.begin(), top.end());
  CHECK_FALSE(t.complete());
  t.expand(kids[0], g->production_of("atom", 0));
  t.expand(kids[2], g->production_of("atom", 0));
  CHECK(t.complete());
  CHECK(yield_string(t) == "CCC");
  CHECK(tree_to_rule_sequence(t) ==
        std::vector<ProductionId>{g->production_of("s", 0), g->production_of("atom", 0),
                                  g->production_of("atom", 0)});
  CHECK_THROWS_AS(t.expand(kids[0], g->production_of("atom", 1)), Error);
  CHECK_THROWS_AS(t.expand(kids[1], g->production_of("atom", 1)), Error);
}

TEST_CASE("ring toy tree has a seven-rule pre-order sequence") {
  auto g = toy();
  DerivationTree t = lang("toy").parse("C-1CC-1");
  std::vector<ProductionId> seq = tree_to_rule_sequence(t);
  std::vector<ProductionId> want{g->production_of("s", 0),     g->production_of("atom", 1),
                                 g->production_of("bond", 0),  g->production_of("digit", 0),
                                 g->production_of("atom", 1),  g->production_of("bond", 0),
                                 g->production_of("digit", 0)};
  CHECK(seq == want);
  CHECK(yield_string(rule_sequence_to_tree(g, seq)) == "C-1CC-1");
}

TEST_CASE("rule sequences must start at the start symbol and be exact") {
  auto g = toy();
  std::vector<ProductionId> bad{g->production_of("atom", 0)};
  CHECK_THROWS_AS(rule_sequence_to_tree(g, bad), Error);
  std::vector<ProductionId> short_seq{g->production_of("s", 0), g->production_of("atom", 0)};
  CHECK_THROWS_AS(rule_sequence_to_tree(g, short_seq), Error);
  std::vector<ProductionId> long_seq{g->production_of("s", 0), g->production_of("atom", 0),
                                     g->production_of("atom", 0), g->production_of("atom", 0)};
  CHECK_THROWS_AS(rule_sequence_to_tree(g, long_seq), Error);

  Grammar single = load_grammar("<S> -> 'a'\n");
  auto sp = std::make_shared<const Grammar>(single);
  std::vector<ProductionId> zero{0};
  DerivationTree t = rule_sequence_to_tree(sp, zero);
  CHECK(yield_string(t) == "a");
  CHECK(tree_to_rule_sequence(t) == zero);
}

TEST_CASE("one-hot encoding") {
  const Grammar& g = *lang("program").grammar;
  std::vector<ProductionId> seq{0, 2, 5};
  std::vector<uint8_t> m = one_hot_encode(g, seq, 80);
  CHECK(m.size() == 80 * g.num_productions());
  CHECK(std::count(m.begin(), m.end(), 1) == 3);
  CHECK(m[1 * g.num_productions() + 2] == 1);
  std::vector<uint8_t> empty = one_hot_encode(g, {}, 80);
  CHECK(std::count(empty.begin(), empty.end(), 0) == static_cast<long>(empty.size()));
  CHECK_THROWS_AS(one_hot_encode(g, seq, 2), Error);

  const Language& smiles = lang("smiles");
  std::vector<ProductionId> s = tree_to_rule_sequence(smiles.parse("CC(=O)Oc1ccccc1C(=O)O"));
  std::vector<uint8_t> hot = one_hot_encode(*smiles.grammar, s, 278);
  CHECK(std::count(hot.begin(), hot.end(), 1) == static_cast<long>(s.size()));
}

TEST_CASE("program yield round-trips") {
  std::string text = "v5=6+v0;v6=sin(v5);return:v6";
  DerivationTree t = lang("program").parse(text);
  CHECK(yield_string(t) == text);
  DerivationTree back = rule_sequence_to_tree(lang("program").grammar, tree_to_rule_sequence(t));
  CHECK(yield_string(back) == text);
}

TEST_CASE("frontier is left to right") {
  auto g = toy();
  DerivationTree t(g);
  t.expand(0, g->production_of("s", 0));
  std::vector<NodeId> f = t.frontier();
  REQUIRE(f.size() == 2);
  CHECK(f[0] < f[1]);
  CHECK(t.node(f[0]).depth == 1);
  CHECK(debug_string(t).find("atom") != std::string::npos);
}
