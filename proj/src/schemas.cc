#include "sdgen/schemas.h"

namespace sdgen {

namespace {

constexpr auto kInh = AttributeKind::kInherited;
constexpr auto kSyn = AttributeKind::kSynthesized;
constexpr auto kLazy = AttributeKind::kStochasticLazy;

AttrRef at(int position, const char* name) { return {position, name}; }
AttrRef text(int position) { return {position, std::string(kTextAttribute)}; }

}  // namespace

AttributeSchema make_toy_schema(std::shared_ptr<const Grammar> grammar) {
  AttributeSchema s(grammar, "toy");
  s.declare("s", "matched", kSyn, ValueDomain::kSymbolSet);
  s.declare("s", "ok", kSyn, ValueDomain::kIntCounter);
  s.declare("s", "sa", kLazy, ValueDomain::kBitSet, 1);
  s.declare("atom", "set", kSyn, ValueDomain::kSymbolSet);
  s.declare("bond", "val", kSyn, ValueDomain::kToken);
  s.declare("digit", "val", kSyn, ValueDomain::kToken);

  // <s> -> <atom>1 'C' <atom>2
  s.rule("s", 0, at(0, "matched"), RuleFn::kIntersect, {at(1, "set"), at(3, "set")});
  s.rule("s", 0, at(0, "ok"), RuleFn::kEqualityCheck,
         {at(1, "set"), at(0, "matched"), at(3, "set")}, {}, "ring-mismatch");
  s.rule("s", 0, at(0, "sa"), RuleFn::kCardinalityBits, {at(0, "matched")});

  s.rule("atom", 0, at(0, "set"), RuleFn::kConstant, {}, AttributeValue::symbols({}));
  s.rule("atom", 1, at(0, "set"), RuleFn::kSingleton, {at(2, "val"), at(3, "val")});
  const Grammar& g = *grammar;
  for (int alt = 0; alt < static_cast<int>(g.alternatives(g.nonterminal("bond")).size()); ++alt) {
    s.rule("bond", alt, at(0, "val"), RuleFn::kCopy, {text(1)});
  }
  for (int alt = 0; alt < static_cast<int>(g.alternatives(g.nonterminal("digit")).size()); ++alt) {
    s.rule("digit", alt, at(0, "val"), RuleFn::kCopy, {text(1)});
  }
  return s;
}

AttributeSchema make_program_schema(std::shared_ptr<const Grammar> grammar,
                                    bool single_assignment) {
  AttributeSchema s(grammar, single_assignment ? "program-ssa" : "program");
  const auto kSet = ValueDomain::kSymbolSet;
  const auto kInt = ValueDomain::kIntCounter;
  s.declare("stat_list", "env", kInh, kSet);
  s.declare("stat_list", "before", kInh, kInt);
  s.declare("stat_list", "return_ok", kSyn, kInt);
  s.declare("stat_list", "budget_ok", kSyn, kInt);
  s.declare("stat", "env", kInh, kSet);
  s.declare("stat", "env_out", kSyn, kSet);
  s.declare("stat", "is_return", kSyn, kInt);
  s.declare("stat", "is_assign", kSyn, kInt);
  s.declare("assign", "env", kInh, kSet);
  s.declare("assign", "env_out", kSyn, kSet);
  s.declare("assign", "use_ok", kSyn, kInt);
  if (single_assignment) {
    s.declare("assign", "clash", kSyn, kSet);
    s.declare("assign", "fresh_ok", kSyn, kInt);
  }
  s.declare("return", "env", kInh, kSet);
  s.declare("return", "use_ok", kSyn, kInt);
  s.declare("lhs", "name", kSyn, ValueDomain::kToken);
  s.declare("var", "name", kSyn, ValueDomain::kToken);
  s.declare("var_id", "val", kSyn, ValueDomain::kToken);
  for (const char* nt : {"rhs", "expr", "unary_expr", "binary_expr", "operand"}) {
    s.declare(nt, "uses", kSyn, kSet);
  }

  // <program> -> <stat_list>
  s.rule("program", 0, at(1, "env"), RuleFn::kConstant, {}, AttributeValue::symbols({"v0"}));
  s.rule("program", 0, at(1, "before"), RuleFn::kConstant, {}, AttributeValue::counter(0));

  // <stat_list> -> <stat> ';' <stat_list>
  s.rule("stat_list", 0, at(1, "env"), RuleFn::kCopy, {at(0, "env")});
  s.rule("stat_list", 0, at(3, "env"), RuleFn::kCopy, {at(1, "env_out")});
  s.rule("stat_list", 0, at(3, "before"), RuleFn::kCounterAdd, {at(0, "before"), at(1, "is_assign")});
  s.rule("stat_list", 0, at(0, "return_ok"), RuleFn::kEqualityCheck, {at(1, "is_return")},
         AttributeValue::counter(0), "misplaced-return");
  s.rule("stat_list", 0, at(0, "budget_ok"), RuleFn::kConstant, {}, AttributeValue::counter(1));

  // <stat_list> -> <stat>
  s.rule("stat_list", 1, at(1, "env"), RuleFn::kCopy, {at(0, "env")});
  s.rule("stat_list", 1, at(0, "return_ok"), RuleFn::kEqualityCheck, {at(1, "is_return")},
         AttributeValue::counter(1), "missing-return");
  s.rule("stat_list", 1, at(0, "budget_ok"), RuleFn::kLessEqualCheck,
         {at(0, "before"), at(1, "is_assign")}, AttributeValue::counter(kMaxAssignments),
         "statement-budget");

  // <stat> -> <assign> | <return>
  s.rule("stat", 0, at(1, "env"), RuleFn::kCopy, {at(0, "env")});
  s.rule("stat", 0, at(0, "env_out"), RuleFn::kCopy, {at(1, "env_out")});
  s.rule("stat", 0, at(0, "is_return"), RuleFn::kConstant, {}, AttributeValue::counter(0));
  s.rule("stat", 0, at(0, "is_assign"), RuleFn::kConstant, {}, AttributeValue::counter(1));
  s.rule("stat", 1, at(1, "env"), RuleFn::kCopy, {at(0, "env")});
  s.rule("stat", 1, at(0, "env_out"), RuleFn::kCopy, {at(0, "env")});
  s.rule("stat", 1, at(0, "is_return"), RuleFn::kConstant, {}, AttributeValue::counter(1));
  s.rule("stat", 1, at(0, "is_assign"), RuleFn::kConstant, {}, AttributeValue::counter(0));

  // <assign> -> <lhs> '=' <rhs>
  s.rule("assign", 0, at(0, "env_out"), RuleFn::kUnion, {at(0, "env"), at(1, "name")});
  s.rule("assign", 0, at(0, "use_ok"), RuleFn::kSubsetCheck, {at(3, "uses"), at(0, "env")}, {},
         "undefined-use");
  if (single_assignment) {
    s.rule("assign", 0, at(0, "clash"), RuleFn::kIntersect, {at(1, "name"), at(0, "env")});
    s.rule("assign", 0, at(0, "fresh_ok"), RuleFn::kEqualityCheck, {at(0, "clash")},
           AttributeValue::symbols({}), "single-assignment");
  }

  // <return> -> 'return:' <lhs>
  s.rule("return", 0, at(0, "use_ok"), RuleFn::kSubsetCheck, {at(2, "name"), at(0, "env")}, {},
         "undefined-use");

  s.rule("lhs", 0, at(0, "name"), RuleFn::kCopy, {at(1, "name")});
  s.rule("var", 0, at(0, "name"), RuleFn::kConcat, {text(1), at(2, "val")});
  const Grammar& g = *grammar;
  for (int alt = 0; alt < static_cast<int>(g.alternatives(g.nonterminal("var_id")).size()); ++alt) {
    s.rule("var_id", alt, at(0, "val"), RuleFn::kCopy, {text(1)});
  }

  s.rule("rhs", 0, at(0, "uses"), RuleFn::kCopy, {at(1, "uses")});
  s.rule("expr", 0, at(0, "uses"), RuleFn::kCopy, {at(1, "uses")});
  s.rule("expr", 1, at(0, "uses"), RuleFn::kCopy, {at(1, "uses")});
  s.rule("unary_expr", 0, at(0, "uses"), RuleFn::kCopy, {at(2, "uses")});
  s.rule("unary_expr", 1, at(0, "uses"), RuleFn::kCopy, {at(3, "uses")});
  s.rule("binary_expr", 0, at(0, "uses"), RuleFn::kUnion, {at(1, "uses"), at(3, "uses")});
  s.rule("operand", 0, at(0, "uses"), RuleFn::kSingleton, {at(1, "name")});
  s.rule("operand", 1, at(0, "uses"), RuleFn::kConstant, {}, AttributeValue::symbols({}));
  return s;
}

AttributeSchema make_smiles_schema(std::shared_ptr<const Grammar> grammar) {
  AttributeSchema s(grammar, "smiles");
  const auto kBits = ValueDomain::kBitSet;
  const int w = kRingDigits;
  s.declare("smiles", "ring_ok", kSyn, ValueDomain::kIntCounter);
  for (const char* nt : {"chain", "branched_atom", "branches", "branch"}) {
    s.declare(nt, "open_in", kInh, kBits, w);
    s.declare(nt, "open_out", kSyn, kBits, w);
  }
  s.declare("branched_atom", "ring_set", kSyn, kBits, w);
  s.declare("branched_atom", "sa", kLazy, kBits, w);
  s.declare("ringbonds", "ring_set", kSyn, kBits, w);
  s.declare("ringbond", "ring_set", kSyn, kBits, w);
  s.declare("digit", "val", kSyn, ValueDomain::kToken);

  const AttributeValue empty = AttributeValue::bits(BitSet{0, w});

  s.rule("smiles", 0, at(1, "open_in"), RuleFn::kConstant, {}, empty);
  s.rule("smiles", 0, at(0, "ring_ok"), RuleFn::kEqualityCheck, {at(1, "open_out")}, empty,
         "ring-unmatched");

  // <chain> -> <branched_atom> | <chain> <branched_atom> | <chain> <bond> <branched_atom>
  s.rule("chain", 0, at(1, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("chain", 0, at(0, "open_out"), RuleFn::kCopy, {at(1, "open_out")});
  for (int alt : {1, 2}) {
    int last = alt == 1 ? 2 : 3;
    s.rule("chain", alt, at(1, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
    s.rule("chain", alt, at(last, "open_in"), RuleFn::kCopy, {at(1, "open_out")});
    s.rule("chain", alt, at(0, "open_out"), RuleFn::kCopy, {at(last, "open_out")});
  }

  // <branched_atom> -> <atom> | <atom> <branches> | <atom> <ringbonds>
  //                  | <atom> <ringbonds> <branches>
  s.rule("branched_atom", 0, at(0, "ring_set"), RuleFn::kConstant, {}, empty);
  s.rule("branched_atom", 0, at(0, "open_out"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("branched_atom", 1, at(0, "ring_set"), RuleFn::kConstant, {}, empty);
  s.rule("branched_atom", 1, at(2, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("branched_atom", 1, at(0, "open_out"), RuleFn::kCopy, {at(2, "open_out")});
  s.rule("branched_atom", 2, at(0, "ring_set"), RuleFn::kCopy, {at(2, "ring_set")});
  s.rule("branched_atom", 2, at(0, "open_out"), RuleFn::kXor, {at(0, "open_in"), at(2, "ring_set")});
  s.rule("branched_atom", 3, at(0, "ring_set"), RuleFn::kCopy, {at(2, "ring_set")});
  s.rule("branched_atom", 3, at(3, "open_in"), RuleFn::kXor, {at(0, "open_in"), at(2, "ring_set")});
  s.rule("branched_atom", 3, at(0, "open_out"), RuleFn::kCopy, {at(3, "open_out")});
  for (int alt = 0; alt < 4; ++alt) {
    s.rule("branched_atom", alt, at(0, "sa"), RuleFn::kCopy, {at(0, "ring_set")});
  }

  s.rule("ringbonds", 0, at(0, "ring_set"), RuleFn::kUnion, {at(1, "ring_set"), at(2, "ring_set")});
  s.rule("ringbonds", 1, at(0, "ring_set"), RuleFn::kCopy, {at(1, "ring_set")});
  s.rule("ringbond", 0, at(0, "ring_set"), RuleFn::kSingleton, {at(1, "val")});

  // <branches> -> <branches> <branch> | <branch>
  s.rule("branches", 0, at(1, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("branches", 0, at(2, "open_in"), RuleFn::kCopy, {at(1, "open_out")});
  s.rule("branches", 0, at(0, "open_out"), RuleFn::kCopy, {at(2, "open_out")});
  s.rule("branches", 1, at(1, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("branches", 1, at(0, "open_out"), RuleFn::kCopy, {at(1, "open_out")});

  // <branch> -> '(' <chain> ')' | '(' <bond> <chain> ')'
  s.rule("branch", 0, at(2, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("branch", 0, at(0, "open_out"), RuleFn::kCopy, {at(2, "open_out")});
  s.rule("branch", 1, at(3, "open_in"), RuleFn::kCopy, {at(0, "open_in")});
  s.rule("branch", 1, at(0, "open_out"), RuleFn::kCopy, {at(3, "open_out")});

  const Grammar& g = *grammar;
  for (int alt = 0; alt < static_cast<int>(g.alternatives(g.nonterminal("digit")).size()); ++alt) {
    s.rule("digit", alt, at(0, "val"), RuleFn::kCopy, {text(1)});
  }
  return s;
}

AttributeSchema make_self_loop_fixture(std::shared_ptr<const Grammar> grammar) {
  AttributeSchema s(make_toy_schema(grammar));
  s.declare("atom", "loop", kSyn, ValueDomain::kIntCounter);
  s.rule("atom", 0, at(0, "loop"), RuleFn::kCopy, {at(0, "loop")});
  s.rule("atom", 1, at(0, "loop"), RuleFn::kCopy, {at(0, "loop")});
  return s;
}

}  // namespace sdgen
