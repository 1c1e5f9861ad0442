// Toy ring grammar: <s>.sa decides ring (1) or chain (0); the second atom
// must repeat the first atom's bond and digit.

#include "sdgen/guide.h"

namespace sdgen {

namespace {

struct ToySymbols {
  SymbolId s, atom, bond, digit;
};

class ToyGuide : public Guide {
 public:
  ToyGuide(const AttributeSchema& schema, const ToySymbols& sym) : schema_(schema), sym_(sym) {}

  Mask mask(const DerivationTree& tree, NodeId node, const Budget&) override {
    const Grammar& g = tree.grammar();
    SymbolId s = tree.node(node).symbol;
    Mask m(g.alternatives(s).size(), 1);
    if (s == sym_.atom) {
      int want = is_first_atom(tree, node) ? sa_ : first_alt_;
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<int>(i) == want;
    } else if (s == sym_.bond || s == sym_.digit) {
      NodeId atom = tree.node(node).parent;
      if (!is_first_atom(tree, atom)) {
        const std::string& want = s == sym_.bond ? bond_ : digit_;
        const auto& alts = g.alternatives(s);
        for (std::size_t i = 0; i < alts.size(); ++i) {
          m[i] = g.symbol(g.production(alts[i]).rhs[0]).name == want;
        }
      }
    }
    return m;
  }

  void apply(const DerivationTree& tree, NodeId node, int alt) override {
    SymbolId s = tree.node(node).symbol;
    if (s == sym_.atom && is_first_atom(tree, node)) {
      first_alt_ = alt;
    } else if ((s == sym_.bond || s == sym_.digit) &&
               is_first_atom(tree, tree.node(node).parent)) {
      const std::string& text = tree.symbol_of(tree.node(node).children[0]).name;
      (s == sym_.bond ? bond_ : digit_) = text;
    }
  }

  std::array<bool, 2> allowed_lazy_bit(const DerivationTree&, NodeId, const AttributeDecl&, int,
                                       BitSet, const Budget& budget) override {
    // A chain takes 3 production steps, a ring 7.
    if (!budget.strict) return {true, true};
    return {budget.used + 3 <= budget.limit, budget.used + 7 <= budget.limit};
  }

  void commit_lazy(const DerivationTree&, NodeId, const AttributeDecl&, BitSet value) override {
    sa_ = value.test(0) ? 1 : 0;
  }

  void complete(DerivationTree& tree, NodeId node) override {
    if (tree.node(node).symbol != sym_.s) return;
    const auto& kids = tree.node(node).children;
    SymbolSet a = atom_set(tree, kids[0]);
    SymbolSet b = atom_set(tree, kids[2]);
    SymbolSet matched;
    for (const auto& x : a) {
      if (b.count(x)) matched.insert(x);
    }
    lazy_link(schema_, tree, node, "sa", "matched", AttributeValue::symbols(std::move(matched)));
  }

 private:
  bool is_first_atom(const DerivationTree& tree, NodeId atom) const {
    NodeId parent = tree.node(atom).parent;
    return tree.node(parent).children[0] == atom;
  }

  static SymbolSet atom_set(const DerivationTree& tree, NodeId atom) {
    const auto& kids = tree.node(atom).children;
    if (kids.size() == 1) return {};
    std::string ring = tree.symbol_of(tree.node(kids[1]).children[0]).name +
                       tree.symbol_of(tree.node(kids[2]).children[0]).name;
    return {ring};
  }

  const AttributeSchema& schema_;
  ToySymbols sym_;
  int sa_ = -1;
  int first_alt_ = -1;
  std::string bond_, digit_;
};

class ToyGuideFactory : public GuideFactory {
 public:
  explicit ToyGuideFactory(std::shared_ptr<const AttributeSchema> schema)
      : schema_(std::move(schema)) {
    const Grammar& g = schema_->grammar();
    sym_ = {g.nonterminal("s"), g.nonterminal("atom"), g.nonterminal("bond"),
            g.nonterminal("digit")};
  }
  std::unique_ptr<Guide> make() const override {
    return std::make_unique<ToyGuide>(*schema_, sym_);
  }

 private:
  std::shared_ptr<const AttributeSchema> schema_;
  ToySymbols sym_;
};

}  // namespace

std::unique_ptr<GuideFactory> make_toy_guide(std::shared_ptr<const AttributeSchema> schema) {
  return std::make_unique<ToyGuideFactory>(std::move(schema));
}

}  // namespace sdgen
