#ifndef SDGEN_SMILES_H_
#define SDGEN_SMILES_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdgen/check.h"
#include "sdgen/grammar.h"
#include "sdgen/tree.h"

namespace sdgen {

/// Maximum valence of an element symbol: B 3, C 4, N 3, O 2, P 5, S 6,
/// halogens 1; aromatic c 4, n 3, o 2, s 2. Returns 0 for unknown symbols.
int max_valence(std::string_view element);

/// Bond order of a bond token: '-' '/' '\' 1, '=' 2, '#' 3. Throws otherwise.
int bond_order(std::string_view bond);

/// Parses one SMILES string against the shipped grammar (digits 1-8 as ring
/// bonds, bracket atoms [isotope symbol chiral hcount charge]).
DerivationTree parse_smiles(std::shared_ptr<const Grammar> grammar, std::string_view text);

/// Open ring digits while scanning left to right.
class RingLedger {
 public:
  struct Open {
    int atom;
    std::optional<std::string> bond;
  };
  struct Pair {
    int digit;
    int first_atom;
    int second_atom;
    int order;
  };

  /// Opens `digit` on `atom`, or closes it if already open. Returns the
  /// closed pair, if any. Throws std::invalid_argument when the bond
  /// annotations of the two ends disagree.
  std::optional<Pair> visit(int digit, int atom, std::optional<std::string> bond = {});

  const std::map<int, Open>& open() const { return open_; }
  const std::vector<Pair>& closed() const { return closed_; }

 private:
  std::map<int, Open> open_;
  std::vector<Pair> closed_;
};

/// Independent left-to-right checker. Ring digits must pair up, a digit may
/// appear only once on an atom ("C11" and "C1C11C1" are ring-self), and each
/// atom's bond-order sum plus explicit hydrogens must not exceed its maximum
/// valence (+|charge| for bracket atoms).
/// Violation ids: ring-unmatched, ring-self, ring-bond-mismatch, valence.
CheckReport check_smiles(const DerivationTree& tree);

}  // namespace sdgen

#endif  // SDGEN_SMILES_H_
