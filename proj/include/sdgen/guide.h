#ifndef SDGEN_GUIDE_H_
#define SDGEN_GUIDE_H_

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "sdgen/attributes.h"
#include "sdgen/tree.h"

namespace sdgen {

/// Step accounting for one decode. `used` counts production applications so
/// far; in strict mode every choice must leave a completion within `limit`.
struct Budget {
  int used = 0;
  int limit = 0;
  bool strict = false;

  /// Steps still available after the choice being made now.
  int after_choice() const { return limit - used - 1; }
};

using Mask = std::vector<uint8_t>;

/// Per-decode constraint tracker of one schema. The decoder drives it in
/// pre-order: for each node, lazy draws (allowed_lazy_bit/commit_lazy), then
/// mask/apply; complete() once the node's subtree is finished.
///
/// A choice is allowed iff some valid completion remains reachable after it.
class Guide {
 public:
  virtual ~Guide() = default;

  virtual Mask mask(const DerivationTree& tree, NodeId node, const Budget& budget) = 0;
  /// Records that alternative `alt` was applied to `node` (already expanded).
  virtual void apply(const DerivationTree& tree, NodeId node, int alt) = 0;

  virtual std::array<bool, 2> allowed_lazy_bit(const DerivationTree& tree, NodeId node,
                                               const AttributeDecl& decl, int bit,
                                               BitSet prefix, const Budget& budget);
  virtual void commit_lazy(const DerivationTree& tree, NodeId node, const AttributeDecl& decl,
                           BitSet value);
  /// Lazy linking happens here for nodes that own stochastic lazy attributes.
  virtual void complete(DerivationTree& tree, NodeId node);
};

class GuideFactory {
 public:
  virtual ~GuideFactory() = default;
  virtual std::unique_ptr<Guide> make() const = 0;
};

/// Guides for the three shipped schemas. Each factory checks that the schema
/// was built for a grammar with the expected nonterminals.
std::unique_ptr<GuideFactory> make_toy_guide(std::shared_ptr<const AttributeSchema> schema);
std::unique_ptr<GuideFactory> make_program_guide(std::shared_ptr<const AttributeSchema> schema,
                                                 bool single_assignment);
std::unique_ptr<GuideFactory> make_smiles_guide(std::shared_ptr<const AttributeSchema> schema);

}  // namespace sdgen

#endif  // SDGEN_GUIDE_H_
