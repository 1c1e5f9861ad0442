#include "sdgen/guide.h"

namespace sdgen {

std::array<bool, 2> Guide::allowed_lazy_bit(const DerivationTree&, NodeId, const AttributeDecl&,
                                            int, BitSet, const Budget&) {
  return {true, true};
}

void Guide::commit_lazy(const DerivationTree&, NodeId, const AttributeDecl&, BitSet) {}

void Guide::complete(DerivationTree&, NodeId) {}

}  // namespace sdgen
