#include "sdgen/language.h"

#include <cstdlib>

#include "sdgen/program.h"
#include "sdgen/schemas.h"
#include "sdgen/smiles.h"

namespace sdgen {

DecodeSetup Language::setup(std::shared_ptr<const Scorer> scorer) const {
  return {grammar, schema, guides, std::move(scorer)};
}

std::string grammar_dir() {
  if (const char* env = std::getenv("SDGEN_GRAMMAR_DIR"); env && *env) return env;
  return std::string(SDGEN_SOURCE_DIR) + "/grammars";
}

DerivationTree parse_toy(std::shared_ptr<const Grammar> grammar, std::string_view text) {
  const Grammar& g = *grammar;
  std::vector<ProductionId> seq{g.production_of("s", 0)};
  std::size_t pos = 0;
  auto expect_c = [&] {
    if (pos >= text.size() || text[pos] != 'C') throw SyntaxError("expected 'C'", pos);
    ++pos;
  };
  auto pick = [&](std::string_view lhs) {
    if (pos >= text.size()) throw SyntaxError("unexpected end of input", pos);
    for (ProductionId p : g.alternatives(g.nonterminal(lhs))) {
      if (g.symbol(g.production(p).rhs[0]).name == text.substr(pos, 1)) {
        seq.push_back(p);
        ++pos;
        return;
      }
    }
    throw SyntaxError("expected a <" + std::string(lhs) + ">", pos);
  };
  auto atom = [&] {
    expect_c();
    bool ring = pos < text.size() && text[pos] != 'C';
    seq.push_back(g.production_of("atom", ring ? 1 : 0));
    if (ring) {
      pick("bond");
      pick("digit");
    }
  };
  atom();
  expect_c();
  atom();
  if (pos != text.size()) throw SyntaxError("trailing input", pos);
  return rule_sequence_to_tree(std::move(grammar), seq);
}

Language load_language(std::string_view id, bool single_assignment) {
  Language lang;
  lang.id = std::string(id);
  std::string dir = grammar_dir();
  if (id == "program") {
    auto g = std::make_shared<const Grammar>(load_grammar_file(dir + "/program.grm"));
    auto schema = std::make_shared<const AttributeSchema>(make_program_schema(g, single_assignment));
    lang.grammar = g;
    lang.schema = schema;
    lang.guides = make_program_guide(schema, single_assignment);
    lang.parse = [g](std::string_view text) { return parse_program(g, text); };
    lang.check = [single_assignment](const DerivationTree& t) {
      return check_program(t, single_assignment);
    };
    lang.default_max_steps = 80;
  } else if (id == "smiles") {
    auto g = std::make_shared<const Grammar>(load_grammar_file(dir + "/smiles.grm"));
    auto schema = std::make_shared<const AttributeSchema>(make_smiles_schema(g));
    lang.grammar = g;
    lang.schema = schema;
    lang.guides = make_smiles_guide(schema);
    lang.parse = [g](std::string_view text) { return parse_smiles(g, text); };
    lang.check = [](const DerivationTree& t) { return check_smiles(t); };
    lang.default_max_steps = 278;
  } else if (id == "toy") {
    auto g = std::make_shared<const Grammar>(load_grammar_file(dir + "/toy_smiles.grm"));
    auto schema = std::make_shared<const AttributeSchema>(make_toy_schema(g));
    lang.grammar = g;
    lang.schema = schema;
    lang.guides = make_toy_guide(schema);
    lang.parse = [g](std::string_view text) { return parse_toy(g, text); };
    lang.check = [schema](const DerivationTree& t) {
      DerivationTree copy = t;
      EvaluationReport eval = evaluate_offline(*schema, copy);
      CheckReport report;
      for (const Violation& v : eval.violations) {
        report.add(v.rule, "node " + std::to_string(v.node), v.node);
      }
      return report;
    };
    lang.default_max_steps = 20;
  } else {
    throw Error("unknown grammar '" + std::string(id) + "' (program, smiles, toy)");
  }
  return lang;
}

}  // namespace sdgen
