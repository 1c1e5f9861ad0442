#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdgen/program.h"
#include "support.h"

using namespace sdgen;

namespace {

const std::string kTruth = "v1=sin(v0);v2=exp(v1);v3=v2-1;return:v3";

ProgramAst ast(const std::string& text) { return ast_from_tree(lang("program").parse(text)); }

CheckReport check(const std::string& text, bool ssa = false) {
  return check_program(lang("program").parse(text), ssa);
}

std::vector<std::string> rules(const CheckReport& r) {
  std::vector<std::string> out;
  for (const auto& v : r.violations) out.push_back(v.rule);
  return out;
}

}  // namespace

TEST_CASE("parse examples") {
  const Language& p = lang("program");
  std::string text = "v3=sin(v0);v8=exp(2);v9=v3-v8;v5=v0*v9;return:v5";
  DerivationTree t = p.parse(text);
  CHECK(t.complete());
  CHECK(yield_string(t) == text);
  CHECK(yield_string(p.parse("return:v0")) == "return:v0");
  CHECK(yield_string(p.parse(" v1 = -v0 ;\n return : v1 ")) == "v1=-v0;return:v1");
  CHECK(yield_string(p.parse("v2=1/5;v9=-1;v7=v2+v2;return:v7")) ==
        "v2=1/5;v9=-1;v7=v2+v2;return:v7");
}

TEST_CASE("syntax errors") {
  const Language& p = lang("program");
  try {
    p.parse("v1=sin(v0);;return:v1");
    FAIL("accepted an empty statement");
  } catch (const SyntaxError& e) {
    CHECK(e.position() == 11);
  }
  CHECK_THROWS_AS(p.parse(""), SyntaxError);
  CHECK_THROWS_AS(p.parse("v1=tan(v0);return:v1"), SyntaxError);
  CHECK_THROWS_AS(p.parse("x=1;return:x"), SyntaxError);
  CHECK_THROWS_AS(p.parse("return:v0;"), SyntaxError);
  CHECK_THROWS_AS(p.parse("v1=v0+v0+v0;return:v1"), SyntaxError);
}

TEST_CASE("checker examples") {
  CHECK(check("v2=exp(v0);v7=v2*v0;v9=cos(v7);v8=cos(v9);return:v8").valid);
  CHECK(check("return:v0").valid);

  CheckReport bad = check("v3=cos(8);v6=exp(9);v6=v8*v0;v9=v2/v6;return:v9");
  CHECK_FALSE(bad.valid);
  REQUIRE(bad.violations.size() == 2);
  CHECK(bad.violations[0].rule == "undefined-use");
  CHECK(bad.violations[0].location == "statement 3");
  CHECK(bad.violations[1].location == "statement 4");

  CHECK(rules(check("return:v4")) == std::vector<std::string>{"undefined-use"});

  std::string nine;
  for (int i = 1; i <= 9; ++i) nine += "v1=v0+" + std::to_string(i) + ";";
  CHECK(check(nine + "return:v1").valid);
  CheckReport ten = check(nine + "v2=v1*2;return:v2");
  CHECK(rules(ten) == std::vector<std::string>{"statement-budget"});
}

TEST_CASE("return placement") {
  CHECK(rules(check("v1=v0*2;v2=-v0;return:v2")).empty());
  CheckReport missing = check("v1=v0*2");
  CHECK(std::find(rules(missing).begin(), rules(missing).end(), "missing-return") !=
        rules(missing).end());
  CheckReport early = check("return:v0;v1=-v0");
  CHECK_FALSE(early.valid);
}

TEST_CASE("single assignment flag") {
  std::string text = "v1=+v0;v1=v1*2;return:v1";
  CHECK(check(text).valid);
  CHECK(rules(check(text, true)) == std::vector<std::string>{"single-assignment"});
  CHECK(check("v1=+v0;v2=v1*2;return:v2", true).valid);
}

TEST_CASE("interpreter") {
  CHECK(interpret(ast("v5=4+v0;v3=cos(v5);return:v3"), 0.0) ==
        doctest::Approx(-0.653644).epsilon(1e-6));
  CHECK(interpret(ast("return:v0"), 2.5) == 2.5);
  CHECK(interpret(ast(kTruth), 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(interpret(ast("v1=v0/0;return:v1"), 1.0) == INFINITY);
  CHECK(std::isnan(interpret(ast("v1=v0/0;return:v1"), 0.0)));
  CHECK(interpret(ast("v1=-v0;v2=+v1;return:v2"), 3.0) == -3.0);
  CHECK(interpret(ast("v1=1.5*v0;return:v1"), 2.0) == 3.0);
  CHECK(interpret(ast("return:v7"), 9.0) == 0.0);
}

TEST_CASE("ast mirrors the tree") {
  for (const std::string& text : {kTruth, std::string("v2=1/5;v9=-1;v7=v2+v2;return:v7"),
                                  std::string("return:v0")}) {
    ProgramAst a = ast(text);
    CHECK(to_text(a) == text);
  }
  ProgramAst a = ast("v4=sin(3);return:v4");
  REQUIRE(a.statements.size() == 2);
  CHECK(a.statements[0].target == 4);
  CHECK(a.statements[0].rhs.kind == Expression::Kind::kUnaryFunc);
  CHECK(a.statements[0].rhs.op == "sin");
  CHECK_FALSE(a.statements[0].rhs.a.is_var);
  CHECK(a.statements[1].is_return);
}

TEST_CASE("distances") {
  ProgramAst truth = ast(kTruth);
  CHECK(program_distance(truth, truth) == 0.0);
  CHECK(program_distance(ast("v5=6+v0;v6=sin(v5);return:v6"), truth) ==
        doctest::Approx(0.1436).epsilon(0.05));
  CHECK(program_distance(ast("v2=1/5;v9=-1;v7=v2+v2;return:v7"), truth) ==
        doctest::Approx(0.5497).epsilon(0.05));
  double inf = program_distance(ast("v1=v0/0;return:v1"), truth);
  CHECK(std::isfinite(inf));
  CHECK(inf > 30.0);
  const auto& grid = distance_grid();
  REQUIRE(grid.size() == 1000);
  CHECK(grid.front() == -5.0);
  CHECK(grid.back() == 5.0);
  CHECK(grid[1] - grid[0] == doctest::Approx(10.0 / 999));
}

TEST_CASE("generated programs are valid") {
  const Language& p = lang("program");
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    std::string text = generate_program(p.grammar, rng);
    DerivationTree t = p.parse(text);
    CHECK_MESSAGE(p.check(t).valid, text);
    CHECK(tree_to_rule_sequence(t).size() <= 80);
    int stmts = static_cast<int>(ast_from_tree(t).statements.size());
    CHECK(stmts >= 2);
    CHECK(stmts <= 6);
  }
}

TEST_CASE("shipped corpus round-trips and checks") {
  const Language& p = lang("program");
  std::vector<std::string> train = data_lines("programs_train.txt");
  std::vector<std::string> held = data_lines("programs_heldout.txt");
  CHECK(train.size() == 10000);
  CHECK(held.size() == 2000);
  for (const auto& line : held) {
    DerivationTree t = p.parse(line);
    REQUIRE(yield_string(rule_sequence_to_tree(p.grammar, tree_to_rule_sequence(t))) == line);
    REQUIRE(p.check(t).valid);
  }
}
