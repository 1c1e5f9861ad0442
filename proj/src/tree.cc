#include "sdgen/tree.h"

#include <bit>

namespace sdgen {

int BitSet::count() const { return std::popcount(bits); }

std::string AttributeValue::to_string() const {
  if (state == ValueState::kUnset) return "<unset>";
  std::string out;
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          out = "<none>";
        } else if constexpr (std::is_same_v<T, BitSet>) {
          out = "0b";
          for (int i = v.width - 1; i >= 0; --i) out += v.test(i) ? '1' : '0';
        } else if constexpr (std::is_same_v<T, int64_t>) {
          out = std::to_string(v);
        } else if constexpr (std::is_same_v<T, SymbolSet>) {
          out = "{";
          bool first = true;
          for (const auto& s : v) {
            if (!first) out += ",";
            out += s;
            first = false;
          }
          out += "}";
        } else {
          out = "'" + v + "'";
        }
      },
      value);
  if (state == ValueState::kPendingLazy) out += "?";
  return out;
}

DerivationTree::DerivationTree(std::shared_ptr<const Grammar> grammar)
    : grammar_(std::move(grammar)) {
  TreeNode root;
  root.symbol = grammar_->start();
  nodes_.push_back(std::move(root));
}

std::span<const NodeId> DerivationTree::expand(NodeId id, ProductionId production) {
  const Production& p = grammar_->production(production);
  TreeNode& n = nodes_.at(id);
  if (grammar_->symbol(n.symbol).is_terminal()) throw Error("cannot expand a terminal node");
  if (n.production >= 0) throw Error("node " + std::to_string(id) + " is already expanded");
  if (p.lhs != n.symbol) {
    throw Error("production " + grammar_->to_string(production) + " does not expand <" +
                grammar_->symbol(n.symbol).name + ">");
  }
  n.production = production;
  int depth = n.depth + 1;
  std::vector<NodeId> children;
  children.reserve(p.rhs.size());
  for (SymbolId s : p.rhs) {
    TreeNode child;
    child.symbol = s;
    child.parent = id;
    child.depth = depth;
    children.push_back(static_cast<NodeId>(nodes_.size()));
    nodes_.push_back(std::move(child));
  }
  // nodes_ may have reallocated; re-fetch.
  nodes_[id].children = std::move(children);
  return nodes_[id].children;
}

std::vector<NodeId> DerivationTree::preorder() const {
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& ch = nodes_[id].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<NodeId> DerivationTree::frontier() const {
  std::vector<NodeId> out;
  for (NodeId id : preorder()) {
    const TreeNode& n = nodes_[id];
    if (n.production < 0 && !grammar_->symbol(n.symbol).is_terminal()) out.push_back(id);
  }
  return out;
}

AttributeValue* DerivationTree::find_attribute(NodeId id, std::string_view name) {
  for (auto& [key, value] : nodes_.at(id).attributes) {
    if (key == name) return &value;
  }
  return nullptr;
}

const AttributeValue* DerivationTree::find_attribute(NodeId id, std::string_view name) const {
  for (const auto& [key, value] : nodes_.at(id).attributes) {
    if (key == name) return &value;
  }
  return nullptr;
}

AttributeValue& DerivationTree::attribute(NodeId id, std::string_view name) {
  if (AttributeValue* v = find_attribute(id, name)) return *v;
  auto& attrs = nodes_.at(id).attributes;
  attrs.emplace_back(std::string(name), AttributeValue{});
  return attrs.back().second;
}

void DerivationTree::clear_attributes() {
  for (TreeNode& n : nodes_) n.attributes.clear();
}

std::string yield_string(const DerivationTree& tree) {
  std::string out;
  for (NodeId id : tree.preorder()) {
    const TreeNode& n = tree.node(id);
    const Symbol& s = tree.grammar().symbol(n.symbol);
    if (s.is_terminal()) {
      out += s.name;
    } else if (n.production < 0) {
      throw Error("yield of an incomplete tree: <" + s.name + "> is unexpanded");
    }
  }
  return out;
}

std::vector<ProductionId> tree_to_rule_sequence(const DerivationTree& tree) {
  std::vector<ProductionId> seq;
  for (NodeId id : tree.preorder()) {
    const TreeNode& n = tree.node(id);
    if (tree.grammar().symbol(n.symbol).is_terminal()) continue;
    if (n.production < 0) {
      throw Error("rule sequence of an incomplete tree: <" + tree.symbol_of(id).name +
                  "> is unexpanded");
    }
    seq.push_back(n.production);
  }
  return seq;
}

DerivationTree rule_sequence_to_tree(std::shared_ptr<const Grammar> grammar,
                                     std::span<const ProductionId> sequence) {
  DerivationTree tree(grammar);
  std::vector<NodeId> stack{tree.root()};
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    ProductionId r = sequence[t];
    if (r < 0 || static_cast<std::size_t>(r) >= grammar->num_productions()) {
      throw Error("rule index " + std::to_string(r) + " out of range at step " +
                  std::to_string(t));
    }
    if (stack.empty()) {
      throw Error("trailing rules after the tree completed at step " + std::to_string(t));
    }
    NodeId id = stack.back();
    stack.pop_back();
    if (grammar->production(r).lhs != tree.node(id).symbol) {
      throw Error("step " + std::to_string(t) + ": rule " + grammar->to_string(r) +
                  " cannot expand <" + tree.symbol_of(id).name + ">");
    }
    auto children = tree.expand(id, r);
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      if (!tree.is_terminal(*it)) stack.push_back(*it);
    }
  }
  if (!stack.empty()) {
    throw Error("rule sequence exhausted with " + std::to_string(stack.size()) +
                " unexpanded nonterminals");
  }
  return tree;
}

std::vector<uint8_t> one_hot_encode(const Grammar& grammar,
                                    std::span<const ProductionId> sequence, int max_steps) {
  if (max_steps < 0 || sequence.size() > static_cast<std::size_t>(max_steps)) {
    throw Error("rule sequence of length " + std::to_string(sequence.size()) +
                " exceeds max_steps " + std::to_string(max_steps));
  }
  const std::size_t width = grammar.num_productions();
  std::vector<uint8_t> matrix(static_cast<std::size_t>(max_steps) * width, 0);
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    if (sequence[t] < 0 || static_cast<std::size_t>(sequence[t]) >= width) {
      throw Error("rule index out of range in one-hot encoding");
    }
    matrix[t * width + sequence[t]] = 1;
  }
  return matrix;
}

std::string debug_string(const DerivationTree& tree) {
  std::string out;
  auto rec = [&](auto&& self, NodeId id) -> void {
    const TreeNode& n = tree.node(id);
    const Symbol& s = tree.grammar().symbol(n.symbol);
    if (s.is_terminal()) {
      out += s.name;
      return;
    }
    out += "(" + s.name;
    if (n.production < 0) out += " ...";
    for (NodeId c : n.children) {
      out += ' ';
      self(self, c);
    }
    out += ")";
  };
  rec(rec, tree.root());
  return out;
}

}  // namespace sdgen
