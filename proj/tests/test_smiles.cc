#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "sdgen/smiles.h"
#include "support.h"

using namespace sdgen;

namespace {

CheckReport check(const std::string& text) { return check_smiles(lang("smiles").parse(text)); }

bool has_rule(const CheckReport& r, const std::string& rule) {
  for (const auto& v : r.violations) {
    if (v.rule == rule) return true;
  }
  return false;
}

// Brute force over {C, O, =, 1, (, )}: build the bond graph directly, then
// try every pairing of the '1' occurrences.
bool naive_valid(const std::string& s) {
  std::vector<int> valence;
  std::vector<std::vector<int>> bonds;  // {a, b, order}
  std::vector<int> ring_atoms;
  std::vector<int> stack;
  int prev = -1, pending = 1;
  for (char c : s) {
    if (c == 'C' || c == 'O') {
      int cur = static_cast<int>(valence.size());
      valence.push_back(c == 'C' ? 4 : 2);
      if (prev >= 0) bonds.push_back({prev, cur, pending});
      pending = 1;
      prev = cur;
    } else if (c == '=') {
      pending = 2;
    } else if (c == '1') {
      ring_atoms.push_back(prev);
    } else if (c == '(') {
      stack.push_back(prev);
    } else if (c == ')') {
      prev = stack.back();
      stack.pop_back();
    }
  }
  if (ring_atoms.size() % 2) return false;
  std::function<bool(std::vector<bool>&, std::vector<int>&)> pairings =
      [&](std::vector<bool>& used, std::vector<int>& load) -> bool {
    std::size_t i = 0;
    while (i < used.size() && used[i]) ++i;
    if (i == used.size()) {
      for (std::size_t a = 0; a < valence.size(); ++a) {
        if (load[a] > valence[a]) return false;
      }
      return true;
    }
    for (std::size_t j = i + 1; j < used.size(); ++j) {
      if (used[j]) continue;
      // the same digit cannot be open twice: nothing of it may sit in between
      bool clear = true;
      for (std::size_t k = i + 1; k < j; ++k) clear = clear && used[k];
      if (!clear || ring_atoms[i] == ring_atoms[j]) continue;
      used[i] = used[j] = true;
      ++load[ring_atoms[i]];
      ++load[ring_atoms[j]];
      bool ok = pairings(used, load);
      --load[ring_atoms[i]];
      --load[ring_atoms[j]];
      used[i] = used[j] = false;
      if (ok) return true;
    }
    return false;
  };
  std::vector<int> load(valence.size(), 0);
  for (const auto& b : bonds) {
    load[b[0]] += b[2];
    load[b[1]] += b[2];
  }
  // an atom carrying one digit twice never pairs
  for (std::size_t i = 0; i + 1 < ring_atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < ring_atoms.size(); ++j) {
      if (ring_atoms[i] == ring_atoms[j]) return false;
    }
  }
  std::vector<bool> used(ring_atoms.size(), false);
  return pairings(used, load);
}

}  // namespace

TEST_CASE("parse examples") {
  const Language& s = lang("smiles");
  for (const char* text : {"C1CC1", "c1ccccc1", "O=C=O", "ClCBr", "[13CH4]", "[NH4+]",
                           "C[C@@H](O)C(=O)O", "F/C=C/F", "[O-2]", "CC(C)(C)C"}) {
    DerivationTree t = s.parse(text);
    CHECK(t.complete());
    CHECK(yield_string(t) == text);
    CHECK(yield_string(rule_sequence_to_tree(s.grammar, tree_to_rule_sequence(t))) == text);
  }
}

TEST_CASE("two-character element tokens") {
  DerivationTree t = lang("smiles").parse("ClBr");
  int atoms = 0;
  SymbolId ao = t.grammar().nonterminal("aliphatic_organic");
  for (NodeId n : t.preorder()) atoms += t.node(n).symbol == ao;
  CHECK(atoms == 2);
  CHECK(check("ClBr").valid);
  CHECK_FALSE(check("Cl=Br").valid);
}

TEST_CASE("syntax errors carry the offset") {
  const Language& s = lang("smiles");
  auto offset = [&](const char* text) -> long {
    try {
      s.parse(text);
    } catch (const SyntaxError& e) {
      return static_cast<long>(e.position());
    }
    return -1;
  };
  CHECK(offset("C((C)") >= 0);
  CHECK(offset("CX") == 1);
  CHECK(offset("") == 0);
  CHECK(offset("C9") == 1);
  CHECK(offset("C)") == 1);
  CHECK(offset("[C") == 2);
}

TEST_CASE("checker examples") {
  CHECK(check("C1CC1").valid);
  CheckReport open = check("C1CC");
  CHECK_FALSE(open.valid);
  CHECK(has_rule(open, "ring-unmatched"));

  CheckReport over = check("C(=O)(=O)(=O)C");
  REQUIRE(over.violations.size() == 1);
  CHECK(over.violations[0].rule == "valence");
  CHECK(over.violations[0].location.find("7 > 4") != std::string::npos);

  CHECK(check("O=C=O").valid);
  CHECK(check("C1CC1C1CC1").valid);
  CHECK(has_rule(check("C11"), "ring-self"));
  CHECK(has_rule(check("C1C11C1"), "ring-self"));
  CHECK(check("C#N").valid);
  CHECK_FALSE(check("C#N=C").valid);
  CHECK(check("[NH4+]").valid);
  CHECK_FALSE(check("[NH5]").valid);
  CHECK(check("c1ccccc1").valid);
}

TEST_CASE("valence table") {
  CHECK(max_valence("C") == 4);
  CHECK(max_valence("Cl") == 1);
  CHECK(max_valence("S") == 6);
  CHECK(max_valence("n") == 3);
  CHECK(max_valence("Xe") == 0);
  CHECK(bond_order("#") == 3);
  CHECK(bond_order("\\") == 1);
  CHECK_THROWS(bond_order("%"));
}

TEST_CASE("ring ledger") {
  RingLedger l;
  CHECK_FALSE(l.visit(1, 0, "="));
  auto p = l.visit(1, 3, "=");
  REQUIRE(p);
  CHECK(p->order == 2);
  CHECK(p->first_atom == 0);
  CHECK(l.open().empty());
  CHECK_FALSE(l.visit(2, 4, "="));
  CHECK_THROWS_AS(l.visit(2, 5, "#"), std::invalid_argument);
}

TEST_CASE("checker agrees with a brute-force pairing oracle") {
  const Language& s = lang("smiles");
  const std::string alphabet = "CO=1()";
  int parsed = 0, valid = 0;
  std::string text;
  std::function<void(int)> walk = [&](int left) {
    if (!text.empty()) {
      bool parses = true;
      DerivationTree t(s.grammar);
      try {
        t = s.parse(text);
      } catch (const SyntaxError&) {
        parses = false;
      }
      if (parses) {
        ++parsed;
        bool ours = check_smiles(t).valid;
        valid += ours;
        CHECK_MESSAGE(ours == naive_valid(text), text);
      }
    }
    if (left == 0) return;
    for (char c : alphabet) {
      text.push_back(c);
      walk(left - 1);
      text.pop_back();
    }
  };
  walk(7);
  CHECK(parsed == 6526);
  CHECK(valid == 1441);
}
