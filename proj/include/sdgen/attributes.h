#ifndef SDGEN_ATTRIBUTES_H_
#define SDGEN_ATTRIBUTES_H_

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdgen/attribute_value.h"
#include "sdgen/grammar.h"
#include "sdgen/random.h"
#include "sdgen/tree.h"

namespace sdgen {

enum class AttributeKind { kInherited, kSynthesized, kStochasticLazy };

struct AttributeDecl {
  SymbolId owner;
  std::string name;
  AttributeKind kind;
  ValueDomain domain;
  int cap = 0;  // width of bit_set values; C_a for stochastic lazy attributes
};

/// `position` 0 is the production's lhs, i >= 1 its i-th rhs symbol. The
/// pseudo-attribute "$text" of a terminal position reads its literal text.
struct AttrRef {
  int position;
  std::string name;
};

inline constexpr std::string_view kTextAttribute = "$text";

/// The closed vocabulary of semantic-rule functions.
enum class RuleFn {
  kCopy,
  kConstant,
  kUnion,
  kIntersect,
  kDifference,
  kXor,
  kSingleton,
  kConcat,
  kCounterAdd,
  kEqualityCheck,
  kSubsetCheck,
  kLessEqualCheck,
  kCardinalityBits,
};

std::string_view rule_fn_name(RuleFn fn);

struct SemanticRule {
  ProductionId production;
  AttrRef target;
  std::vector<AttrRef> deps;
  RuleFn fn;
  AttributeValue constant;  // operand for kConstant / kCounterAdd / checks
  std::string violation;    // non-empty for checking rules: recorded when the result is 0
};

/// Attribute declarations and semantic rules attached to one grammar.
class AttributeSchema {
 public:
  AttributeSchema(std::shared_ptr<const Grammar> grammar, std::string name);

  const Grammar& grammar() const { return *grammar_; }
  const std::string& name() const { return name_; }

  void declare(std::string_view owner, std::string_view attribute, AttributeKind kind,
               ValueDomain domain, int cap = 0);
  /// Adds a rule to `lhs`'s alternative number `alt`.
  void rule(std::string_view lhs, int alt, AttrRef target, RuleFn fn, std::vector<AttrRef> deps,
            AttributeValue constant = {}, std::string violation = {});

  const std::vector<AttributeDecl>& declarations() const { return decls_; }
  const std::vector<SemanticRule>& rules() const { return rules_; }
  std::vector<const AttributeDecl*> declarations_of(SymbolId owner) const;
  std::vector<const AttributeDecl*> lazy_declarations_of(SymbolId owner) const;
  const AttributeDecl* find(SymbolId owner, std::string_view attribute) const;
  const std::vector<int>& rules_of(ProductionId production) const;

  /// Rule of `production` whose target is (`position`, `attribute`).
  const SemanticRule* defining_rule(ProductionId production, int position,
                                    std::string_view attribute) const;

 private:
  std::shared_ptr<const Grammar> grammar_;
  std::string name_;
  std::vector<AttributeDecl> decls_;
  std::vector<SemanticRule> rules_;
  std::vector<std::vector<int>> rules_by_production_;
};

/// Attribute-instance dependency graph of a (partial or complete) tree.
struct DependencyGraph {
  struct Vertex {
    NodeId node;
    std::string attribute;
  };
  std::vector<Vertex> vertices;
  /// edges[u] lists v such that computing v reads u.
  std::vector<std::vector<int>> edges;
  /// Defining rule index into schema.rules(), -1 when the producing production
  /// has not been applied yet.
  std::vector<int> defining_rule;

  /// Node-merged projection D_T: one vertex per tree node carrying
  /// attributes; edges between distinct nodes only.
  std::vector<NodeId> merged_vertices;
  std::vector<std::vector<int>> merged_edges;

  int find(NodeId node, std::string_view attribute) const;
};

DependencyGraph build_dependency_graph(const AttributeSchema& schema, const DerivationTree& tree);

/// True iff the attribute-instance graph has no directed cycle.
bool check_noncircular(const DependencyGraph& graph);

/// True iff the directed graph given by adjacency lists contains a cycle.
bool has_cycle(const std::vector<std::vector<int>>& edges);

struct Violation {
  std::string rule;
  NodeId node;
};

enum class TopoOrder { kLowestFirst, kHighestFirst };

struct EvaluationReport {
  std::vector<Violation> violations;
  int instances_set = 0;
  bool ok() const { return violations.empty(); }
};

/// Sets every attribute instance of a complete tree in dependency order.
/// Stochastic lazy attributes are computed through their own defining rule.
EvaluationReport evaluate_offline(const AttributeSchema& schema, DerivationTree& tree,
                                  TopoOrder order = TopoOrder::kLowestFirst);

/// Bitwise source for stochastic lazy draws: Bernoulli head plus feasibility.
class LazyBitSource {
 public:
  virtual ~LazyBitSource() = default;
  /// P(bit `index` = 1) given the already drawn lower bits.
  virtual double probability_one(int index, BitSet prefix) = 0;
  /// Which values of bit `index` keep the constraints satisfiable.
  virtual std::array<bool, 2> allowed(int index, BitSet prefix) = 0;
};

struct LazyDraw {
  BitSet value;
  double log_prob = 0.0;
  std::vector<double> bit_log_probs;
  std::vector<std::array<bool, 2>> bit_masks;
};

/// Thrown when a forced lazy value is impossible under the masks.
class LazyMaskError : public Error {
 public:
  LazyMaskError(const std::string& message, int bit) : Error(message), bit_(bit) {}
  int bit() const { return bit_; }

 private:
  int bit_;
};

/// Draws `decl` on `node` componentwise (masked, renormalized per bit) and
/// records it as pending_lazy. With `forced`, replays the given value instead
/// of sampling and reports its probability.
LazyDraw sample_lazy(const AttributeDecl& decl, DerivationTree& tree, NodeId node,
                     LazyBitSource& source, Rng* rng, std::optional<BitSet> forced = {});

class LazyLinkError : public Error {
 public:
  using Error::Error;
};

/// Stores the synthesized value `linked` in `linked_attribute` of `node`, then
/// recomputes the lazy attribute from its defining rule and promotes the
/// pending value to set. Throws LazyLinkError if the two disagree.
void lazy_link(const AttributeSchema& schema, DerivationTree& tree, NodeId node,
               std::string_view lazy_attribute, std::string_view linked_attribute,
               AttributeValue linked);

}  // namespace sdgen

#endif  // SDGEN_ATTRIBUTES_H_
