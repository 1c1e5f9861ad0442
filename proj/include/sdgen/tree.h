#ifndef SDGEN_TREE_H_
#define SDGEN_TREE_H_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdgen/attribute_value.h"
#include "sdgen/grammar.h"

namespace sdgen {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

struct TreeNode {
  SymbolId symbol;
  ProductionId production = -1;  // -1 while unexpanded (and always for terminals)
  NodeId parent = kNoNode;
  int depth = 0;
  std::vector<NodeId> children;
  std::vector<std::pair<std::string, AttributeValue>> attributes;
};

/// Partially or fully expanded derivation tree stored in an index-addressed
/// arena. Node 0 is the root.
class DerivationTree {
 public:
  explicit DerivationTree(std::shared_ptr<const Grammar> grammar);

  const Grammar& grammar() const { return *grammar_; }
  const std::shared_ptr<const Grammar>& grammar_ptr() const { return grammar_; }

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  const Symbol& symbol_of(NodeId id) const { return grammar_->symbol(node(id).symbol); }
  bool is_terminal(NodeId id) const { return symbol_of(id).is_terminal(); }

  /// Applies `production` to the unexpanded nonterminal `id` and returns the
  /// new child ids in rhs order.
  std::span<const NodeId> expand(NodeId id, ProductionId production);

  /// Nonterminal leaves without an applied production, left to right.
  std::vector<NodeId> frontier() const;
  bool complete() const { return frontier().empty(); }

  AttributeValue* find_attribute(NodeId id, std::string_view name);
  const AttributeValue* find_attribute(NodeId id, std::string_view name) const;
  /// Slot for `name` on node `id`, created unset on first access.
  AttributeValue& attribute(NodeId id, std::string_view name);
  void clear_attributes();

  /// Node ids in pre-order (children left to right).
  std::vector<NodeId> preorder() const;

 private:
  std::shared_ptr<const Grammar> grammar_;
  std::vector<TreeNode> nodes_;
};

/// Concatenated terminal text of a complete tree.
std::string yield_string(const DerivationTree& tree);

/// Pre-order list of applied production indices of a complete tree.
std::vector<ProductionId> tree_to_rule_sequence(const DerivationTree& tree);

/// Rebuilds the unique tree whose pre-order rule sequence is `sequence`.
DerivationTree rule_sequence_to_tree(std::shared_ptr<const Grammar> grammar,
                                     std::span<const ProductionId> sequence);

/// Row-major T x |R| 0/1 matrix; row t has a one at column sequence[t].
std::vector<uint8_t> one_hot_encode(const Grammar& grammar,
                                    std::span<const ProductionId> sequence, int max_steps);

/// Bracketed rendering for diagnostics: `(s (atom C) C (atom C))`.
std::string debug_string(const DerivationTree& tree);

}  // namespace sdgen

#endif  // SDGEN_TREE_H_
